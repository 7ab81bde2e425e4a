"""Unit-time transmission scheduling for mmWave backhaul networks.

Computes optimal and approximate joint routing-and-scheduling solutions
that maximize network throughput subject to max-min fairness across relay
base stations, under configurable duplexity, interference and
spatial-multiplexing models, with brute-force oracles for desk-scale
verification.
"""

from .netmodel import (
    MACRO,
    RELAY,
    DirectedNetwork,
    Link,
    ModelFlags,
    Schedule,
    Slot,
    ThroughputReport,
    Vertex,
    evaluate_schedule,
    normalize_downlink,
    validate_schedule,
)
from .optfd import MtfsSolution

__all__ = [
    "MACRO",
    "RELAY",
    "DirectedNetwork",
    "Link",
    "ModelFlags",
    "MtfsSolution",
    "Schedule",
    "Slot",
    "ThroughputReport",
    "Vertex",
    "evaluate_schedule",
    "normalize_downlink",
    "validate_schedule",
]

__version__ = "0.1.0"
