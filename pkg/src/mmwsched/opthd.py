"""Half-duplex scheduling: the polynomial optimum for uniform orthogonal
networks and the parallel-data-stream (PDS) approximation for general
half-duplex networks under no interference.

Both algorithms reduce to the single-RF full-duplex solver: a network whose
vertices all hold one RF chain satisfies the half-duplex constraint for
free, and running R copies of such a schedule in parallel fills R RF
chains per vertex.  PDS first splits macro vertices and merges each link's
parallel streams so that the reduced network is single-RF.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Sequence

from . import matching, optfd
from .netmodel import (
    MACRO,
    RELAY,
    DirectedNetwork,
    Link,
    ModelFlags,
    Schedule,
    Slot,
    Vertex,
    build_link_network,
    normalize_downlink,
    normalize_with_link_map,
)
from .optfd import ModelMismatch, MtfsSolution


class NotUniformOrthogonal(ModelMismatch):
    pass


class NonUniformMultiplicity(ValueError):
    pass


def mwhs_uniform(arcs: Sequence, R: int):
    """Maximum-weight half-duplex subgraph when every vertex pair carries
    exactly R equal-weight parallel arcs (or none).

    ``arcs`` holds (tail, head, weight, tag) tuples.  Positive-weight arcs
    are grouped, collapsed to one edge each, matched, and the matching is
    repeated R times.  Returns (arcs, weight).
    """
    pos = [a for a in arcs if a[2] > 0]
    if not pos:
        return [], 0
    groups: dict = {}
    for a in pos:
        groups.setdefault(frozenset((a[0], a[1])), []).append(a)
    for pair, grp in groups.items():
        if len(grp) != R or len({a[2] for a in grp}) != 1:
            raise NonUniformMultiplicity(
                f"pair {sorted(pair, key=str)} has {len(grp)} arcs / mixed weights"
            )
    verts = tuple(sorted({v for a in pos for v in (a[0], a[1])}, key=str))
    edges = tuple(
        matching.Edge(grp[0][0], grp[0][1], grp[0][2], pair)
        for pair, grp in groups.items()
    )
    chosen, w = matching.max_weight_simple_b_matching(
        matching.WeightedGraph(verts, edges), {v: 1 for v in verts}
    )
    out = []
    for e in chosen:
        out.extend(groups[e.tag])
    return out, w * R


def _is_uniform_orthogonal(net: DirectedNetwork):
    if net.flags.interference != "NI" or net.flags.susm != "MAX":
        raise NotUniformOrthogonal(
            f"uniform orthogonal networks need (NI, MAX); got "
            f"({net.flags.interference}, {net.flags.susm})"
        )
    relay_r = {net.r(v) for v in net.relays()}
    if len(relay_r) != 1:
        raise NotUniformOrthogonal(f"relay RF counts differ: {sorted(relay_r)}")
    rM = relay_r.pop()
    for v in net.macros():
        if net.r(v) % rM != 0:
            raise NotUniformOrthogonal(
                f"macro {v} has {net.r(v)} RF chains, not a multiple of {rM}"
            )
    return rM


def _split_macros(net: DirectedNetwork, copies: Mapping, rf_of_copy) -> tuple:
    """Replace each macro by its copies, re-connected like the original.

    Returns (vertices, link table) where the link table lists
    (tail, head, orig_link_id, copy_index) stubs for link construction.
    """
    next_id = 0
    vmap: dict = {}
    vertices = []
    for v in sorted(net.vertices, key=lambda v: v.id):
        if v.role == RELAY:
            vmap[v.id] = [next_id]
            vertices.append(Vertex(next_id, RELAY, v.rf_chains, v.position))
            next_id += 1
        else:
            ids = []
            for i in range(copies[v.id]):
                ids.append(next_id)
                vertices.append(Vertex(next_id, MACRO, rf_of_copy(v.id, i), v.position))
                next_id += 1
            vmap[v.id] = ids
    stubs = []
    for lid, l in enumerate(net.links):
        for ci, tail in enumerate(vmap[l.tail]):
            stubs.append((tail, vmap[l.head][0], lid, ci))
    return tuple(vertices), stubs, vmap


def opt_hd_mtfs_uniform(net: DirectedNetwork, exact: bool = False) -> MtfsSolution:
    """Optimal half-duplex schedule for a uniform orthogonal network.

    Macros split into relay-sized copies, the link network is solved as a
    single-RF full-duplex problem, and the resulting schedule runs R copies
    in parallel (R = the common relay RF count); the max-min throughput is
    R times the single-RF optimum.
    """
    net, link_map = normalize_with_link_map(net)
    rM = _is_uniform_orthogonal(net)
    vertices, stubs, _ = _split_macros(
        net, {v: net.r(v) // rM for v in net.macros()}, lambda v, i: rM
    )
    single = [Vertex(v.id, v.role, 1, v.position) for v in vertices]
    links = []
    back = []
    for tail, head, lid, _ in stubs:
        links.append(Link(tail, head, (net.links[lid].stream_capacities[0],)))
        back.append(link_map[lid])
    derived = DirectedNetwork(
        tuple(single), tuple(links), flags=ModelFlags("FD", "NI", "MAX")
    )
    sol = optfd.solve(derived, exact)
    slots = tuple(
        Slot(
            frozenset(
                (back[dl], s) for dl, _ in slot.arcs for s in range(rM)
            ),
            slot.duration,
        )
        for slot in sol.schedule.slots
    )
    return MtfsSolution(
        rM * sol.theta_star,
        Schedule(slots),
        rM * sol.network_throughput,
        sol.iterations,
        {"parallel_copies": rM},
    )


@dataclass(frozen=True)
class PdsTransform:
    """Bookkeeping of the PDS graph surgery."""

    d_min: int
    splits: Mapping  # macro id -> tuple of (copy vertex id, rf allocation)
    merged_capacity: Mapping  # derived link id -> summed stream capacity
    reverse: Mapping  # derived link id -> tuple of original (link, stream)


def pds(net: DirectedNetwork, flags: Optional[ModelFlags] = None, exact: bool = False):
    """Parallel-data-stream approximation for half-duplex/no-interference.

    Splits each macro into floor(r/d_min) vertices, bundles each link's
    parallel streams into one merged arc, solves the single-RF full-duplex
    problem on the merged network, and re-expands each activated merged arc
    into the simultaneous activation of its streams.  Returns
    (solution, transform).
    """
    flags = flags or net.flags
    if flags.duplex != "HD" or flags.interference != "NI":
        raise ModelMismatch("PDS needs (HD, NI)")
    net, link_map = normalize_with_link_map(net)
    lnet = build_link_network(net)
    if not lnet.arcs:
        raise ModelMismatch("network has no links")
    d_min = min(a.d for a in lnet.arcs)

    def s_of(v):
        return max(1, net.r(v) // d_min)

    def rf_of_copy(v, i):
        return d_min if i < s_of(v) - 1 else net.r(v) - (s_of(v) - 1) * d_min

    vertices, stubs, vmap = _split_macros(net, {v: s_of(v) for v in net.macros()}, rf_of_copy)
    rf = {v.id: v.rf_chains for v in vertices}
    single = [Vertex(v.id, v.role, 1, v.position) for v in vertices]
    relay_ids = {vmap[r][0] for r in net.relays()}

    links = []
    merged_cap: dict = {}
    reverse: dict = {}
    for tail, head, lid, _ in stubs:
        orig = net.links[lid]
        if tail in relay_ids:  # relay-relay links copy all streams verbatim
            d = orig.d
        else:
            d = min(rf[tail], net.r(orig.head), orig.d)
        caps = orig.stream_capacities[:d]
        derived_id = len(links)
        links.append(Link(tail, head, (sum(caps),)))
        merged_cap[derived_id] = sum(caps)
        reverse[derived_id] = tuple((link_map[lid], s) for s in range(d))
    derived = DirectedNetwork(
        tuple(single), tuple(links), flags=ModelFlags("FD", "NI", "MAX")
    )
    sol = optfd.solve(derived, exact)
    slots = tuple(
        Slot(
            frozenset(pair for dl, _ in slot.arcs for pair in reverse[dl]),
            slot.duration,
        )
        for slot in sol.schedule.slots
    )
    transform = PdsTransform(
        d_min,
        {
            v: tuple((cid, rf[cid]) for cid in vmap[v])
            for v in net.macros()
        },
        merged_cap,
        reverse,
    )
    solution = MtfsSolution(
        sol.theta_star,
        Schedule(slots),
        sol.network_throughput,
        sol.iterations,
        {"transform": transform},
    )
    return solution, transform


@dataclass(frozen=True)
class GammaBound:
    gamma_star: object
    loose: object


def pds_bound_gamma(net: DirectedNetwork, flags: Optional[ModelFlags] = None) -> GammaBound:
    """Worst-case ratio theta >= theta*/gamma* guaranteed by PDS."""
    flags = flags or net.flags
    net = normalize_downlink(net)
    lnet = build_link_network(net)
    d_min = min(a.d for a in lnet.arcs)
    r_relay_max = max(net.r(v) for v in net.relays())
    m_vals = []
    for v in net.macros():
        s = max(1, net.r(v) // d_min)
        m_vals.append(net.r(v) - (s - 1) * d_min)
    tight = max([r_relay_max] + m_vals)
    loose = max(r_relay_max, 2 * d_min - 1)
    if flags.susm == "MAX":
        r_min = min(net.r(v.id) for v in net.vertices)
        return GammaBound(Fraction(tight, r_min), Fraction(loose, r_min))
    return GammaBound(Fraction(tight), Fraction(loose))
