"""Fractional-weighted-coloring approximations for the NP-hard scheduling
cases (half-duplex and/or pairwise interference).

The conflict graph has one vertex per expanded-network arc and one edge per
mutual-exclusion constraint (shared RF chain, shared data stream, duplex
coupling, or link interference).  Stream times are chosen by a linear
program over an inner approximation of the independence polytope (Q for a
fixed vertex ordering, Q' for the oriented graph), then first-fit
fractional weighted coloring turns the times into timeslots, and the
schedule is scaled to exactly unit length.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from . import lp
from .netmodel import (
    DirectedNetwork,
    ExpandedArc,
    ExpandedNetwork,
    ModelFlags,
    Schedule,
    Slot,
    expand,
    evaluate_schedule,
    normalize_with_link_map,
)
from .optfd import MtfsSolution

T_DUST = 1e-12


class EmptyColoring(ValueError):
    pass


@dataclass(frozen=True)
class ConflictGraph:
    """Vertices are expanded-network arcs; edges forbid co-scheduling."""

    net: DirectedNetwork
    flags: ModelFlags
    expanded: ExpandedNetwork
    adj: tuple  # tuple of frozensets of vertex indices
    edge_rule: dict  # frozenset{i, j} -> first rule that created the edge
    orientation: Optional[tuple] = None  # out-neighbor frozensets, if oriented

    @property
    def arcs(self) -> tuple:
        return self.expanded.arcs

    def n(self) -> int:
        return len(self.expanded.arcs)


def build_conflict_graph(
    net: DirectedNetwork, flags: Optional[ModelFlags] = None
) -> ConflictGraph:
    flags = flags or net.flags
    h = expand(net, flags)
    n = len(h.arcs)
    adj = [set() for _ in range(n)]
    edge_rule: dict = {}

    def connect(i, j, rule):
        if i == j:
            return
        adj[i].add(j)
        adj[j].add(i)
        edge_rule.setdefault(frozenset((i, j)), rule)

    def clique(idxs, rule):
        idxs = list(idxs)
        for a in range(len(idxs)):
            for b in range(a + 1, len(idxs)):
                connect(idxs[a], idxs[b], rule)

    by_split: dict = {}
    for i, a in enumerate(h.arcs):
        by_split.setdefault(a.tail, []).append(i)
        by_split.setdefault(a.head, []).append(i)
    for idxs in by_split.values():
        clique(idxs, "rf-chain")

    if flags.susm == "REAL":
        by_stream: dict = {}
        for i, a in enumerate(h.arcs):
            by_stream.setdefault((a.link, a.stream), []).append(i)
        for idxs in by_stream.values():
            clique(idxs, "stream")

    if flags.duplex == "HD":
        ins: dict = {}
        outs: dict = {}
        for i, a in enumerate(h.arcs):
            outs.setdefault(a.tail.orig, []).append(i)
            ins.setdefault(a.head.orig, []).append(i)
        for v in {x.id for x in net.vertices}:
            for i in ins.get(v, ()):
                for j in outs.get(v, ()):
                    connect(i, j, "half-duplex")

    if flags.interference == "PI":
        by_link: dict = {}
        for i, a in enumerate(h.arcs):
            by_link.setdefault(a.link, []).append(i)
        for pair in net.interference_pairs:
            la, lb = sorted(pair)
            for i in by_link.get(la, ()):
                for j in by_link.get(lb, ()):
                    connect(i, j, "interference")

    return ConflictGraph(
        net, flags, h, tuple(frozenset(s) for s in adj), edge_rule
    )


def _split_key(sv) -> tuple:
    return (sv.orig, sv.copy)


def _vertex_key(arc: ExpandedArc) -> tuple:
    return (_split_key(arc.tail), _split_key(arc.head), -1 if arc.stream is None else arc.stream)


def orient_conflict_graph(cg: ConflictGraph) -> ConflictGraph:
    """Impose the chain-then-lexicographic orientation on every edge.

    An edge from an arc into vertex v to an arc out of vertex v (with
    distinct far endpoints) points along the chain; every other edge points
    from the lexicographically smaller arc to the larger, ordering split
    vertices by (network vertex id, copy index).
    """
    arcs = cg.arcs
    out = [set() for _ in range(cg.n())]
    for e in cg.edge_rule:
        i, j = sorted(e)
        a, b = arcs[i], arcs[j]
        if a.head.orig == b.tail.orig and a.tail.orig != b.head.orig:
            out[i].add(j)
        elif b.head.orig == a.tail.orig and b.tail.orig != a.head.orig:
            out[j].add(i)
        elif _vertex_key(a) < _vertex_key(b):
            out[i].add(j)
        else:
            out[j].add(i)
    return ConflictGraph(
        cg.net, cg.flags, cg.expanded, cg.adj, cg.edge_rule,
        tuple(frozenset(s) for s in out),
    )


def lslo_ordering(cg: ConflictGraph, t: Sequence) -> list:
    """Largest-surplus-last ordering of the oriented conflict graph.

    Surplus of u is t(in-neighbors) minus t(out-neighbors); the largest is
    extracted to the back and deleted.  Ties put the lower index earlier in
    the final ordering, so an edgeless graph comes out in index order.
    """
    if cg.orientation is None:
        raise ValueError("conflict graph is not oriented")
    n = cg.n()
    alive = set(range(n))
    outs = [set(s) for s in cg.orientation]
    ins = [set() for _ in range(n)]
    for i, s in enumerate(outs):
        for j in s:
            ins[j].add(i)
    order = [0] * n
    for pos in range(n - 1, -1, -1):
        best = None
        best_s = None
        for u in sorted(alive, reverse=True):
            s = sum(t[v] for v in ins[u]) - sum(t[v] for v in outs[u])
            if best_s is None or s > best_s:
                best, best_s = u, s
        order[pos] = best
        alive.remove(best)
        for v in outs[best]:
            ins[v].discard(best)
        for v in ins[best]:
            outs[v].discard(best)
    return order


def solve_stream_times(
    net: DirectedNetwork,
    cg: ConflictGraph,
    polytope: str,
    ordering: Optional[Sequence] = None,
    exact: bool = False,
):
    """Stream times maximizing the minimum relay throughput over Q or Q',
    then re-optimized for network throughput at that value.

    Q caps the time mass of every vertex-plus-smaller-neighbors set at 1
    under the given ordering; Q' caps every closed in-neighborhood at 1/2.
    Returns (theta, t).
    """
    n = cg.n()
    relays = net.relays()
    macros = set(net.macros())
    zero = Fraction(0) if exact else 0.0
    one = Fraction(1) if exact else 1.0
    caps = [Fraction(a.capacity) if exact else float(a.capacity) for a in cg.arcs]
    eps = 0 if exact else lp.EPS_OPT

    relay_rows = []
    for rid in relays:
        row = [zero] * n
        for i, a in enumerate(cg.arcs):
            if a.head.orig == rid:
                row[i] += caps[i]
            if a.tail.orig == rid:
                row[i] -= caps[i]
        relay_rows.append(row)

    poly_rows = []
    poly_rhs = []
    if polytope == "Q":
        order = list(ordering) if ordering is not None else list(range(n))
        pos = {v: k for k, v in enumerate(order)}
        for v in order:
            members = [v] + [u for u in cg.adj[v] if pos[u] < pos[v]]
            row = [zero] * n
            for u in members:
                row[u] = one
            poly_rows.append(row)
            poly_rhs.append(one)
    elif polytope == "Q'":
        if cg.orientation is None:
            raise ValueError("Q' needs an oriented conflict graph")
        ins = [set() for _ in range(n)]
        for i, s in enumerate(cg.orientation):
            for j in s:
                ins[j].add(i)
        for u in range(n):
            row = [zero] * n
            row[u] = one
            for v in ins[u]:
                row[v] = one
            poly_rows.append(row)
            poly_rhs.append(one / 2 if exact else 0.5)
    else:
        raise ValueError(f"unknown polytope {polytope!r}")

    # phase A: max theta
    A = [row + [-one] for row in relay_rows] + [row + [zero] for row in poly_rows]
    b = [zero] * len(relay_rows) + poly_rhs
    senses = [">="] * len(relay_rows) + ["<="] * len(poly_rows)
    c = [zero] * n + [one]
    solA = lp.solve_explicit_lp(A, b, c, senses, maximize=True, eps=eps)
    theta = solA.objective

    # phase B: max macro-sourced throughput at fixed theta
    A2 = [list(row) for row in relay_rows] + [list(row) for row in poly_rows]
    b2 = [theta] * len(relay_rows) + poly_rhs
    c2 = [caps[i] if cg.arcs[i].tail.orig in macros else zero for i in range(n)]
    solB = lp.solve_explicit_lp(A2, b2, c2, senses, maximize=True, eps=eps)
    return theta, list(solB.x)


def f3wc_color(cg: ConflictGraph, t: Sequence, ordering: Sequence):
    """First-fit fractional weighted coloring: repeatedly peel a first-fit
    maximal independent set of the positive-time vertices and charge it the
    minimum remaining time of its members.  Covers t exactly."""
    exact = not any(isinstance(x, float) for x in t)
    work = list(t)
    if not exact:
        work = [0.0 if x < T_DUST else x for x in work]
    alive = {i for i in range(cg.n()) if work[i] > 0}
    classes = []
    while alive:
        chosen: list = []
        taken: set = set()
        for v in ordering:
            if v in alive and not (cg.adj[v] & taken):
                chosen.append(v)
                taken.add(v)
        lam = min(work[v] for v in chosen)
        classes.append((frozenset(chosen), lam))
        for v in chosen:
            work[v] -= lam
            if not work[v] > (0 if exact else T_DUST):
                work[v] = 0
                alive.discard(v)
    return classes


def coloring_to_schedule(net: DirectedNetwork, cg: ConflictGraph, coloring) -> Schedule:
    """Each color class becomes a slot of its weight; slot lengths are then
    scaled so the schedule is exactly unit time."""
    total = sum((lam for _, lam in coloring), start=0)
    if not coloring or not total > 0:
        raise EmptyColoring("coloring has zero total weight")
    slots = []
    for members, lam in coloring:
        per_link: dict = {}
        pairs = []
        for i in sorted(members):
            a = cg.arcs[i]
            if a.stream is not None:
                pairs.append((a.link, a.stream))
            else:
                s = per_link.get(a.link, 0)
                per_link[a.link] = s + 1
                pairs.append((a.link, s))
        slots.append(Slot(frozenset(pairs), lam / total))
    return Schedule(tuple(slots))


@dataclass(frozen=True)
class F3wcBounds:
    applicable: bool
    alpha_star: Optional[object] = None
    beta_star: Optional[object] = None
    note: str = ""


def f3wc_bounds(net: DirectedNetwork, flags: Optional[ModelFlags] = None) -> F3wcBounds:
    """Worst-case guarantees: FAO achieves theta*/alpha*, LSLO theta*/(2 beta*)."""
    flags = flags or net.flags
    if flags.duplex == "FD" and flags.interference == "NI":
        return F3wcBounds(False, note="exact polynomial solver exists for (FD, NI)")
    links = net.links

    def intf_sum(lid, smaller_only):
        total = 0
        for other in range(len(links)):
            if other != lid and net.link_interferes(lid, other):
                if smaller_only and not other < lid:
                    continue
                total += links[other].d
        return total

    if flags.interference == "PI":
        if flags.duplex == "FD":
            amax = max(intf_sum(l, False) for l in range(len(links)))
            bmax = max(intf_sum(l, True) for l in range(len(links)))
            if flags.susm == "REAL":
                return F3wcBounds(True, max(1, amax) + 2, max(1, bmax) + 2)
            return F3wcBounds(True, amax + 2, bmax + 2)
        alpha = max(
            net.r(l.tail) + net.r(l.head) + intf_sum(i, False)
            for i, l in enumerate(links)
        )
        beta = max(net.r(l.tail) + intf_sum(i, True) for i, l in enumerate(links)) + 1
        return F3wcBounds(True, alpha, beta)
    # HD, NI
    alpha = max(net.r(l.tail) + net.r(l.head) for l in links)
    beta = max(net.r(v.id) for v in net.vertices) + 1
    return F3wcBounds(True, alpha, beta)


def _finish(original, net, link_map, cg, theta_lp, t, ordering, extras) -> MtfsSolution:
    coloring = f3wc_color(cg, t, ordering)
    try:
        sched = coloring_to_schedule(net, cg, coloring)
    except EmptyColoring:
        sched = Schedule((Slot(frozenset(), 1),))
    sched = Schedule(
        tuple(
            Slot(frozenset((link_map[l], s) for l, s in slot.arcs), slot.duration)
            for slot in sched.slots
        )
    )
    report = evaluate_schedule(original, sched)
    extras = dict(extras, theta_lp=theta_lp, classes=len(coloring))
    return MtfsSolution(report.maxmin, sched, report.network, {}, extras)


def f3wc_fao(
    net: DirectedNetwork, flags: Optional[ModelFlags] = None, exact: bool = False
) -> MtfsSolution:
    """Fixed-and-arbitrary-ordering variant: the polytope Q and the coloring
    both use the conflict-graph creation order."""
    flags = flags or net.flags
    original = net
    net, link_map = normalize_with_link_map(net)
    cg = build_conflict_graph(net, flags)
    ordering = list(range(cg.n()))
    theta, t = solve_stream_times(net, cg, "Q", ordering, exact)
    return _finish(
        original, net, link_map, cg, theta, t, ordering,
        {"bounds": f3wc_bounds(net, flags)},
    )


def f3wc_lslo(
    net: DirectedNetwork, flags: Optional[ModelFlags] = None, exact: bool = False
) -> MtfsSolution:
    """Largest-surplus-last variant: stream times over the oriented polytope
    Q', colored in the surplus-derived ordering."""
    flags = flags or net.flags
    original = net
    net, link_map = normalize_with_link_map(net)
    cg = orient_conflict_graph(build_conflict_graph(net, flags))
    theta, t = solve_stream_times(net, cg, "Q'", None, exact)
    ordering = lslo_ordering(cg, t)
    return _finish(
        original, net, link_map, cg, theta, t, ordering,
        {"bounds": f3wc_bounds(net, flags)},
    )
