"""Core network data model, schedule evaluation and validation.

A backhaul network is a directed multigraph of base stations: *macro* BSs
(gateways with wired backhaul) and *relay* BSs (wirelessly backhauled).
Parallel data streams between a pair of BSs live inside a single link
record as a non-increasing capacity list; an individual stream is addressed
as ``(link_id, stream_index)``.  All types are immutable after construction
and all operations are pure functions, so values can be shared freely
across threads.

Capacities and durations may be ``int``, ``float`` or ``fractions.Fraction``;
exact rational arithmetic falls out automatically when the inputs are exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Iterator, Mapping, NamedTuple, Optional, Sequence

MACRO = "macro"
RELAY = "relay"

DURATION_TOL = 1e-9


class NetworkError(ValueError):
    """Malformed network or schedule input."""


class UnreachableRelay(NetworkError):
    def __init__(self, relay_id: int):
        super().__init__(f"relay {relay_id} is not reachable from any macro BS")
        self.relay_id = relay_id


class UnknownStream(NetworkError):
    def __init__(self, link_id: int, stream: int):
        super().__init__(f"unknown stream ({link_id}, {stream})")
        self.link_id = link_id
        self.stream = stream


@dataclass(frozen=True)
class Vertex:
    id: int
    role: str  # MACRO or RELAY
    rf_chains: int
    position: Optional[tuple[float, float]] = None


@dataclass(frozen=True)
class Link:
    """One directed link; parallel data streams are its capacity entries."""

    tail: int
    head: int
    stream_capacities: tuple

    @property
    def d(self) -> int:
        return len(self.stream_capacities)


@dataclass(frozen=True)
class ModelFlags:
    duplex: str = "FD"  # FD | HD
    interference: str = "NI"  # NI | PI
    susm: str = "MAX"  # MAX | REAL

    def __post_init__(self):
        if self.duplex not in ("FD", "HD"):
            raise NetworkError(f"bad duplex flag {self.duplex!r}")
        if self.interference not in ("NI", "PI"):
            raise NetworkError(f"bad interference flag {self.interference!r}")
        if self.susm not in ("MAX", "REAL"):
            raise NetworkError(f"bad susm flag {self.susm!r}")


class Arc(NamedTuple):
    """A single data stream of the directed network."""

    link: int
    stream: int
    tail: int
    head: int
    capacity: object


@dataclass(frozen=True)
class DirectedNetwork:
    """Directed multigraph of BSs; the object every solver consumes.

    Link ids are positions in ``links``.  Interference pairs are unordered
    pairs of link ids referencing vertex-disjoint links (interference at a
    common vertex is assumed removable by MIMO processing and must not be
    declared).
    """

    vertices: tuple[Vertex, ...]
    links: tuple[Link, ...]
    interference_pairs: frozenset = frozenset()
    flags: ModelFlags = field(default_factory=ModelFlags)

    def __post_init__(self):
        ids = [v.id for v in self.vertices]
        if len(set(ids)) != len(ids):
            raise NetworkError("duplicate vertex ids")
        byid = {v.id: v for v in self.vertices}
        for v in self.vertices:
            if v.role not in (MACRO, RELAY):
                raise NetworkError(f"vertex {v.id}: bad role {v.role!r}")
            if v.rf_chains < 1:
                raise NetworkError(f"vertex {v.id}: rf_chains must be >= 1")
        seen_pairs = set()
        for i, l in enumerate(self.links):
            if l.tail == l.head:
                raise NetworkError(f"link {i}: self loop at {l.tail}")
            if l.tail not in byid or l.head not in byid:
                raise NetworkError(f"link {i}: unknown endpoint")
            if (l.tail, l.head) in seen_pairs:
                raise NetworkError(f"link {i}: duplicate (tail, head) record")
            seen_pairs.add((l.tail, l.head))
            if not l.stream_capacities:
                raise NetworkError(f"link {i}: empty capacity list")
            if l.d > min(byid[l.tail].rf_chains, byid[l.head].rf_chains):
                raise NetworkError(f"link {i}: {l.d} streams exceed RF chains")
            prev = None
            for c in l.stream_capacities:
                if not c > 0:
                    raise NetworkError(f"link {i}: non-positive capacity")
                if prev is not None and c > prev:
                    raise NetworkError(f"link {i}: capacities must be non-increasing")
                prev = c
            if self.flags.susm == "MAX":
                # the MAX model means full spatial diversity: one capacity,
                # as many streams as the RF chains allow
                if l.d != min(byid[l.tail].rf_chains, byid[l.head].rf_chains):
                    raise NetworkError(
                        f"link {i}: MAX model needs min(r(u), r(v)) streams"
                    )
                if len(set(l.stream_capacities)) != 1:
                    raise NetworkError(
                        f"link {i}: MAX model needs equal stream capacities"
                    )
        for pair in self.interference_pairs:
            a, b = sorted(pair)
            if not (0 <= a < len(self.links) and 0 <= b < len(self.links)) or a == b:
                raise NetworkError(f"bad interference pair {(a, b)}")
            la, lb = self.links[a], self.links[b]
            if {la.tail, la.head} & {lb.tail, lb.head}:
                raise NetworkError(
                    f"interference pair {(a, b)} shares a vertex; not allowed"
                )

    def vertex(self, vid: int) -> Vertex:
        return self._byid[vid]

    @property
    def _byid(self) -> dict:
        # cached via object.__setattr__ on first use (frozen dataclass)
        cache = self.__dict__.get("_byid_cache")
        if cache is None:
            cache = {v.id: v for v in self.vertices}
            object.__setattr__(self, "_byid_cache", cache)
        return cache

    def r(self, vid: int) -> int:
        return self.vertex(vid).rf_chains

    def macros(self) -> list[int]:
        return [v.id for v in self.vertices if v.role == MACRO]

    def relays(self) -> list[int]:
        """Relay ids in id order; this order fixes all matrix row orders."""
        return sorted(v.id for v in self.vertices if v.role == RELAY)

    def total_rf(self) -> int:
        return sum(v.rf_chains for v in self.vertices)

    def arcs(self) -> Iterator[Arc]:
        """All data streams, in (link, stream) order."""
        for i, l in enumerate(self.links):
            for s, c in enumerate(l.stream_capacities):
                yield Arc(i, s, l.tail, l.head, c)

    def arc_capacity(self, link_id: int, stream: int):
        try:
            return self.links[link_id].stream_capacities[stream]
        except IndexError:
            raise UnknownStream(link_id, stream) from None

    def link_interferes(self, a: int, b: int) -> bool:
        return frozenset((a, b)) in self.interference_pairs


@dataclass(frozen=True)
class Slot:
    """One timeslot: a set of concurrently active (link, stream) pairs."""

    arcs: frozenset
    duration: object

    @staticmethod
    def of(pairs: Iterable[tuple[int, int]], duration) -> "Slot":
        return Slot(frozenset(pairs), duration)


@dataclass(frozen=True)
class Schedule:
    slots: tuple[Slot, ...]

    def total_duration(self):
        return sum((s.duration for s in self.slots), start=0)


@dataclass(frozen=True)
class ThroughputReport:
    per_relay: Mapping[int, object]
    maxmin: object
    network: object


@dataclass(frozen=True)
class Violation:
    kind: str
    slot: Optional[int] = None
    detail: str = ""

    def __str__(self):
        where = f" slot {self.slot}" if self.slot is not None else ""
        return f"{self.kind}{where}: {self.detail}"


class LinkArc(NamedTuple):
    link: int
    tail: int
    head: int
    d: int
    capacities: tuple


@dataclass(frozen=True)
class LinkNetwork:
    """The directed network with parallel streams collapsed to one arc each."""

    net: DirectedNetwork
    arcs: tuple[LinkArc, ...]

    def d(self, link_id: int) -> int:
        return self.net.links[link_id].d


def prune_macro_inbound(net: DirectedNetwork):
    """Drop arcs entering macro BSs, without any reachability check.

    Returns (pruned network, link map) where ``link_map[new_id]`` is the id
    the link had in the input network.
    """
    byid = {v.id: v for v in net.vertices}
    keep = [i for i, l in enumerate(net.links) if byid[l.head].role != MACRO]
    remap = {old: new for new, old in enumerate(keep)}
    links = tuple(net.links[i] for i in keep)
    pairs = frozenset(
        frozenset((remap[a], remap[b]))
        for a, b in (sorted(p) for p in net.interference_pairs)
        if a in remap and b in remap
    )
    return DirectedNetwork(net.vertices, links, pairs, net.flags), tuple(keep)


def normalize_with_link_map(net: DirectedNetwork):
    """Downlink normalization that also reports link identity.

    Returns (normalized network, link map); solvers emit schedules in terms
    of the network they were handed, so they translate through this map
    after solving on the normalized network.
    """
    pruned, keep = prune_macro_inbound(net)
    reachable = set(pruned.macros())
    frontier = list(reachable)
    out = {}
    for l in pruned.links:
        out.setdefault(l.tail, []).append(l.head)
    while frontier:
        v = frontier.pop()
        for w in out.get(v, ()):
            if w not in reachable:
                reachable.add(w)
                frontier.append(w)
    for rid in pruned.relays():
        if rid not in reachable:
            raise UnreachableRelay(rid)
    if not pruned.relays():
        raise UnreachableRelay(-1)
    return pruned, keep


def normalize_downlink(net: DirectedNetwork) -> DirectedNetwork:
    """Remove arcs entering macro BSs and check relay reachability.

    Downlink traffic only sources at macros, so incoming macro arcs are
    dead weight.  Raises :class:`UnreachableRelay` if the pruned network
    leaves some relay without a directed path from any macro.
    """
    pruned, _ = normalize_with_link_map(net)
    return pruned


def build_link_network(net: DirectedNetwork) -> LinkNetwork:
    arcs = tuple(
        LinkArc(i, l.tail, l.head, l.d, tuple(l.stream_capacities))
        for i, l in enumerate(net.links)
    )
    return LinkNetwork(net, arcs)


class SplitVertex(NamedTuple):
    orig: int
    copy: int


class ExpandedArc(NamedTuple):
    tail: SplitVertex
    head: SplitVertex
    link: int
    stream: Optional[int]  # None under MAX (streams are interchangeable)
    capacity: object


@dataclass(frozen=True)
class ExpandedNetwork:
    """RF-chain-explicit split graph.

    Each BS ``v`` becomes ``r(v)`` split vertices; how streams map to split
    arcs depends on the duplex and spatial-multiplexing flags.  Under the
    half-duplex variants the RF counts are first clamped to
    ``min(max(in_deg, out_deg), r(v))`` since extra chains cannot be used.
    """

    net: DirectedNetwork
    flags: ModelFlags
    rf: Mapping[int, int]  # effective (possibly clamped) RF counts
    arcs: tuple[ExpandedArc, ...]

    def split_vertices(self) -> Iterator[SplitVertex]:
        for v in self.net.vertices:
            for i in range(self.rf[v.id]):
                yield SplitVertex(v.id, i)


def expand(net: DirectedNetwork, flags: Optional[ModelFlags] = None) -> ExpandedNetwork:
    flags = flags or net.flags
    indeg: dict = {v.id: 0 for v in net.vertices}
    outdeg: dict = {v.id: 0 for v in net.vertices}
    for a in net.arcs():
        outdeg[a.tail] += 1
        indeg[a.head] += 1
    if flags.duplex == "HD":
        rf = {
            v.id: max(1, min(max(indeg[v.id], outdeg[v.id]), v.rf_chains))
            for v in net.vertices
        }
    else:
        rf = {v.id: v.rf_chains for v in net.vertices}

    arcs: list[ExpandedArc] = []

    def add_pairs(link_id, stream, tail, head, cap):
        ru, rv = rf[tail], rf[head]
        if flags.duplex == "HD" and ru == rv:
            pairs = [(i, i) for i in range(ru)]
        else:
            pairs = [(i, j) for i in range(ru) for j in range(rv)]
        for i, j in pairs:
            arcs.append(
                ExpandedArc(SplitVertex(tail, i), SplitVertex(head, j), link_id, stream, cap)
            )

    if flags.susm == "REAL":
        for a in net.arcs():
            add_pairs(a.link, a.stream, a.tail, a.head, a.capacity)
    else:  # MAX: one expansion per link, capacity of the first stream
        for i, l in enumerate(net.links):
            add_pairs(i, None, l.tail, l.head, l.stream_capacities[0])
    return ExpandedNetwork(net, flags, rf, tuple(arcs))


def evaluate_schedule(net: DirectedNetwork, sched: Schedule) -> ThroughputReport:
    """Per-relay throughput: data entering minus data leaving, time-weighted."""
    relays = net.relays()
    h = {v: 0 for v in relays}
    for slot in sched.slots:
        for link_id, stream in slot.arcs:
            if not (0 <= link_id < len(net.links)):
                raise UnknownStream(link_id, stream)
            l = net.links[link_id]
            c = net.arc_capacity(link_id, stream)
            if l.head in h:
                h[l.head] += slot.duration * c
            if l.tail in h:
                h[l.tail] -= slot.duration * c
    if not h:
        raise NetworkError("network has no relay BS")
    return ThroughputReport(h, min(h.values()), sum(h.values()))


def validate_schedule(
    net: DirectedNetwork, sched: Schedule, flags: Optional[ModelFlags] = None
) -> list[Violation]:
    """Check a schedule against the RF-chain / duplex / interference model.

    Returns violations as data; an empty list means the schedule is feasible
    under ``flags`` and sums to unit time.
    """
    flags = flags or net.flags
    out: list[Violation] = []
    total = 0
    for si, slot in enumerate(sched.slots):
        if not slot.duration >= 0:
            out.append(Violation("NegativeDuration", si, f"duration {slot.duration}"))
        total += slot.duration
        incident: dict = {}
        senders: set = set()
        receivers: set = set()
        per_link: dict = {}
        links_active: set = set()
        for link_id, stream in slot.arcs:
            if not (0 <= link_id < len(net.links)) or not (
                0 <= stream < net.links[link_id].d
            ):
                out.append(Violation("UnknownStream", si, f"({link_id}, {stream})"))
                continue
            l = net.links[link_id]
            per_link[link_id] = per_link.get(link_id, 0) + 1
            links_active.add(link_id)
            incident[l.tail] = incident.get(l.tail, 0) + 1
            incident[l.head] = incident.get(l.head, 0) + 1
            senders.add(l.tail)
            receivers.add(l.head)
        for v, n in incident.items():
            if n > net.r(v):
                out.append(
                    Violation("RFChainExceeded", si, f"vertex {v}: {n} > r={net.r(v)}")
                )
        for link_id, n in per_link.items():
            if n > net.links[link_id].d:
                out.append(
                    Violation("StreamOveruse", si, f"link {link_id}: {n} streams")
                )
        if flags.duplex == "HD":
            for v in senders & receivers:
                out.append(Violation("HalfDuplex", si, f"vertex {v} sends and receives"))
        if flags.interference == "PI":
            active = sorted(links_active)
            for i, a in enumerate(active):
                for b in active[i + 1 :]:
                    if net.link_interferes(a, b):
                        out.append(
                            Violation("Interference", si, f"links {a} and {b} co-scheduled")
                        )
    if abs(float(total) - 1.0) > DURATION_TOL:
        out.append(Violation("DurationSum", None, f"total {total} != 1"))
    return out


# ---------------------------------------------------------------------------
# File formats.  One JSON document per network / schedule; canonical key
# ordering and canonical number encoding make round trips byte-stable.
# Rationals serialize as "p/q" strings, floats as repr, ints as ints.


def _num_to_json(x):
    if isinstance(x, bool):
        raise NetworkError("boolean is not a capacity")
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, float):
        return x
    if isinstance(x, Rational):
        return f"{x.numerator}/{x.denominator}"
    raise NetworkError(f"unsupported number type {type(x)!r}")


def _num_from_json(x):
    if isinstance(x, (int, float)):
        return x
    if isinstance(x, str) and "/" in x:
        num, den = x.split("/", 1)
        return Fraction(int(num), int(den))
    if isinstance(x, str):
        return Fraction(x)
    raise NetworkError(f"cannot parse number {x!r}")


def network_to_json(net: DirectedNetwork) -> str:
    doc = {
        "vertices": [
            {
                "id": v.id,
                "role": v.role,
                "rf_chains": v.rf_chains,
                **({"position": list(v.position)} if v.position is not None else {}),
            }
            for v in sorted(net.vertices, key=lambda v: v.id)
        ],
        "links": [
            {
                "tail": l.tail,
                "head": l.head,
                "stream_capacities": [_num_to_json(c) for c in l.stream_capacities],
            }
            for l in net.links
        ],
        "interference_pairs": sorted(sorted(p) for p in net.interference_pairs),
        "model_flags": {
            "duplex": net.flags.duplex,
            "interference": net.flags.interference,
            "susm": net.flags.susm,
        },
    }
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def network_from_json(text: str) -> DirectedNetwork:
    doc = json.loads(text)
    vertices = tuple(
        Vertex(
            v["id"],
            v["role"],
            v["rf_chains"],
            tuple(v["position"]) if "position" in v else None,
        )
        for v in doc["vertices"]
    )
    links = tuple(
        Link(l["tail"], l["head"], tuple(_num_from_json(c) for c in l["stream_capacities"]))
        for l in doc["links"]
    )
    pairs = frozenset(frozenset(p) for p in doc.get("interference_pairs", []))
    f = doc.get("model_flags", {})
    flags = ModelFlags(
        f.get("duplex", "FD"), f.get("interference", "NI"), f.get("susm", "MAX")
    )
    return DirectedNetwork(vertices, links, pairs, flags)


def schedule_to_json(sched: Schedule) -> str:
    doc = {
        "slots": [
            {
                "arcs": sorted([list(a) for a in slot.arcs]),
                "duration": _num_to_json(slot.duration),
            }
            for slot in sched.slots
        ]
    }
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def schedule_from_json(text: str) -> Schedule:
    doc = json.loads(text)
    return Schedule(
        tuple(
            Slot(frozenset(tuple(a) for a in s["arcs"]), _num_from_json(s["duration"]))
            for s in doc["slots"]
        )
    )
