"""Grid backhaul scenario generation: placement, channel model, stream
counts, and geometric interference pairs.

Relays sit on an n-by-n grid, macros at the centers of a j-by-k partition
of the grid plane.  Per vertex pair, a channel state (LOS / NLOS / outage)
and a shadowing value are drawn once (channel reciprocity), link capacity
follows the Shannon formula from the log-distance path loss, and links
survive only in LOS/NLOS state above the SNR floor.  Generation is a pure
function of (config, seed): identical inputs yield byte-identical
networks.

Capacities are produced in Gbps.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .netmodel import (
    MACRO,
    RELAY,
    DirectedNetwork,
    Link,
    ModelFlags,
    Vertex,
)

LOS = "LOS"
NLOS = "NLOS"
OUTAGE = "outage"

MIN_DISTANCE_M = 1.0  # floor to keep log-distance path loss finite


class MissingGeometry(ValueError):
    pass


@dataclass(frozen=True)
class StateModel:
    """Distance-parameterized LOS/NLOS/outage probabilities.

    p_outage(d) = max(0, 1 - exp(-a_outage d + b_outage)),
    p_los(d) = (1 - p_outage(d)) exp(-a_los d).  The defaults follow the
    28 GHz urban measurement fit commonly used for this geometry; they are
    configuration, not contract, and nothing downstream depends on them.
    """

    a_outage: float = 1 / 30.0
    b_outage: float = 5.2
    a_los: float = 1 / 67.1

    def probabilities(self, d: float) -> tuple:
        p_out = max(0.0, 1.0 - math.exp(-self.a_outage * d + self.b_outage))
        p_los = (1.0 - p_out) * math.exp(-self.a_los * d)
        return p_out, p_los


@dataclass(frozen=True)
class ScenarioConfig:
    relay_grid: int = 4
    macro_grid: tuple = (1, 1)
    spacing_m: float = 80.0
    carrier_hz: float = 28e9
    los_alpha: float = 61.4
    los_beta: float = 2.0
    los_sigma: float = 5.8
    nlos_alpha: float = 72.0
    nlos_beta: float = 2.92
    nlos_sigma: float = 8.7
    tx_power_dbm: float = 30.0
    directivity_gain_db: float = 30.0
    bandwidth_hz: float = 1e9
    noise_figure_db: float = 4.0
    thermal_dbm_hz: float = -174.0
    sinr_threshold_db: float = 5.0
    min_snr_db: float = 5.0
    stream_poisson_mean: float = 1.8
    beamwidth_deg: float = 20.0
    correlation: float = 0.9
    rf_macro: int = 2
    rf_relay: int = 2
    seed: int = 0
    flags: ModelFlags = field(default_factory=ModelFlags)
    state_model: StateModel = field(default_factory=StateModel)

    def noise_dbm(self) -> float:
        return (
            self.thermal_dbm_hz
            + self.noise_figure_db
            + 10.0 * math.log10(self.bandwidth_hz)
        )


def path_loss_db(d: float, state: str, xi: float, config: ScenarioConfig) -> float:
    if state == LOS:
        alpha, beta = config.los_alpha, config.los_beta
    elif state == NLOS:
        alpha, beta = config.nlos_alpha, config.nlos_beta
    else:
        raise ValueError(f"no path loss in state {state!r}")
    return alpha + 10.0 * beta * math.log10(d) + xi


def received_power_dbm(d: float, state: str, xi: float, config: ScenarioConfig) -> float:
    return config.tx_power_dbm + config.directivity_gain_db - path_loss_db(d, state, xi, config)


def snr_db(d: float, state: str, xi: float, config: ScenarioConfig) -> float:
    return received_power_dbm(d, state, xi, config) - config.noise_dbm()


def channel_capacity(d: float, state: str, xi: float, config: ScenarioConfig) -> float:
    """Shannon capacity of a single data stream, in Gbps."""
    if d <= 0:
        raise ValueError("distance must be positive")
    snr = 10.0 ** (snr_db(d, state, xi, config) / 10.0)
    return config.bandwidth_hz * math.log2(1.0 + snr) / 1e9


def stream_capacities(c1: float, k: int, r_corr: float) -> tuple:
    """Non-increasing per-stream capacities for k spatially multiplexed
    streams whose total grows sublinearly with k.

    The decay factors are the eigenvalues of the exponential correlation
    matrix R[i, j] = r^|i-j|, sorted descending and normalized so stream
    one keeps the full capacity c1."""
    if k < 1:
        raise ValueError("need at least one stream")
    if k == 1 or r_corr == 0:
        return (c1,) * k
    idx = np.arange(k)
    R = r_corr ** np.abs(idx[:, None] - idx[None, :])
    eig = np.sort(np.linalg.eigvalsh(R))[::-1]
    return tuple(float(c1 * (ev / eig[0])) for ev in eig)


def _poisson(rng: random.Random, lam: float) -> int:
    limit = math.exp(-lam)
    k, p = 0, 1.0
    while True:
        p *= rng.random()
        if p <= limit:
            return k
        k += 1


def draw_channel_state(rng: random.Random, d: float, config: ScenarioConfig) -> str:
    p_out, p_los = config.state_model.probabilities(d)
    u = rng.random()
    if u < p_out:
        return OUTAGE
    if u < p_out + p_los:
        return LOS
    return NLOS


def _positions(config: ScenarioConfig):
    n = config.relay_grid
    d = config.spacing_m
    jj, kk = config.macro_grid
    width = (n - 1) * d
    height = (n - 1) * d
    macros = [
        ((a + 0.5) * width / jj, (b + 0.5) * height / kk)
        for a in range(jj)
        for b in range(kk)
    ]
    relays = [(i * d, j * d) for i in range(n) for j in range(n)]
    return macros, relays


def generate(config: ScenarioConfig) -> DirectedNetwork:
    """Draw one backhaul network; relay-to-macro arcs are generated too and
    are meant to be dropped by downlink normalization."""
    rng = random.Random(config.seed)
    macro_pos, relay_pos = _positions(config)
    vertices = []
    for i, pos in enumerate(macro_pos):
        vertices.append(Vertex(i, MACRO, config.rf_macro, pos))
    base = len(macro_pos)
    for i, pos in enumerate(relay_pos):
        vertices.append(Vertex(base + i, RELAY, config.rf_relay, pos))
    byid = {v.id: v for v in vertices}

    links = []
    pair_draw: dict = {}
    ids = sorted(byid)
    for a in ids:
        for b in ids:
            if b <= a:
                continue
            if byid[a].role == MACRO and byid[b].role == MACRO:
                continue  # macros interconnect over fiber, not mmWave
            d = max(MIN_DISTANCE_M, math.dist(byid[a].position, byid[b].position))
            state = draw_channel_state(rng, d, config)
            if state == OUTAGE:
                pair_draw[frozenset((a, b))] = (state, 0.0)
                continue
            sigma = config.los_sigma if state == LOS else config.nlos_sigma
            xi = rng.gauss(0.0, sigma)
            pair_draw[frozenset((a, b))] = (state, xi)
            streams = _poisson(rng, config.stream_poisson_mean)
            if snr_db(d, state, xi, config) <= config.min_snr_db:
                continue
            c1 = channel_capacity(d, state, xi, config)
            dmax = min(byid[a].rf_chains, byid[b].rf_chains)
            if config.flags.susm == "MAX":
                caps = (c1,) * dmax
            else:
                k = min(max(streams, 1), dmax)
                caps = stream_capacities(c1, k, config.correlation)
            links.append(Link(a, b, caps))
            links.append(Link(b, a, caps))
    links.sort(key=lambda l: (l.tail, l.head))
    net = DirectedNetwork(tuple(vertices), tuple(links), flags=config.flags)
    if config.flags.interference == "PI":
        # interfering paths reuse the pair's channel draw when one exists
        # (reciprocity); pairs never drawn get an independent stream
        cross_rng = random.Random((config.seed << 1) ^ 0x5EED)
        cross: dict = {}
        for a in ids:
            for b in ids:
                if b <= a:
                    continue
                key = frozenset((a, b))
                d = max(MIN_DISTANCE_M, math.dist(byid[a].position, byid[b].position))
                state = draw_channel_state(cross_rng, d, config)
                sigma = config.los_sigma if state == LOS else config.nlos_sigma
                xi = cross_rng.gauss(0.0, sigma)
                cross[key] = pair_draw.get(key, (state, xi))

        def cross_channel(u, v):
            return cross[frozenset((u, v))]

        pairs = interference_pairs(net, config, cross_channel)
        net = DirectedNetwork(tuple(vertices), tuple(links), pairs, config.flags)
    return net


def _angle_between(origin, aim, target) -> float:
    ax, ay = aim[0] - origin[0], aim[1] - origin[1]
    tx, ty = target[0] - origin[0], target[1] - origin[1]
    na = math.hypot(ax, ay)
    nt = math.hypot(tx, ty)
    if na == 0 or nt == 0:
        return 0.0
    cosv = max(-1.0, min(1.0, (ax * tx + ay * ty) / (na * nt)))
    return math.degrees(math.acos(cosv))


def interference_pairs(
    net: DirectedNetwork,
    config: ScenarioConfig,
    cross_channel: Optional[Callable] = None,
) -> frozenset:
    """Geometric pairwise interference between vertex-disjoint links.

    Link one interferes link two when link two's receiver and link one's
    transmitter sit inside each other's beam cones (boresight toward the
    own link partner, half-angle beamwidth/2) and the resulting SINR at the
    receiver falls below the threshold.  The relation is symmetrized.

    The victim's signal power is recovered exactly from its stored stream
    capacity by inverting the Shannon formula, so it reflects the channel
    the link was actually drawn with.  ``cross_channel(u, v) -> (state,
    shadowing)`` supplies the interfering path's channel; the default
    assumes LOS with zero shadowing, the most pessimistic choice.
    """
    for v in net.vertices:
        if v.position is None:
            raise MissingGeometry(f"vertex {v.id} has no position")
    if cross_channel is None:
        cross_channel = lambda u, v: (LOS, 0.0)
    pos = {v.id: v.position for v in net.vertices}
    half = config.beamwidth_deg / 2.0
    noise_mw = 10.0 ** (config.noise_dbm() / 10.0)
    tau = 10.0 ** (config.sinr_threshold_db / 10.0)

    def cross_power_mw(tx, rx) -> float:
        state, xi = cross_channel(tx, rx)
        if state == OUTAGE:
            return 0.0
        d = max(MIN_DISTANCE_M, math.dist(pos[tx], pos[rx]))
        return 10.0 ** (received_power_dbm(d, state, xi, config) / 10.0)

    def signal_power_mw(link: Link) -> float:
        snr = 2.0 ** (float(link.stream_capacities[0]) * 1e9 / config.bandwidth_hz) - 1.0
        return snr * noise_mw

    def interferes(l1: Link, l2: Link) -> bool:
        t1, r1 = l1.tail, l1.head
        t2, r2 = l2.tail, l2.head
        if _angle_between(pos[t1], pos[r1], pos[r2]) > half:
            return False
        if _angle_between(pos[r2], pos[t2], pos[t1]) > half:
            return False
        return signal_power_mw(l2) / (cross_power_mw(t1, r2) + noise_mw) < tau

    out = set()
    for i, li in enumerate(net.links):
        for j in range(i + 1, len(net.links)):
            lj = net.links[j]
            if {li.tail, li.head} & {lj.tail, lj.head}:
                continue
            if interferes(li, lj) or interferes(lj, li):
                out.add(frozenset((i, j)))
    return frozenset(out)
