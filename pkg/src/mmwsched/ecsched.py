"""Edge-coloring approximation for full-duplex, no-interference networks
under the equal-capacity spatial-multiplexing model.

Step one relaxes the schedule polytope to per-vertex RF-time budgets and
solves two small LPs for stream times (an upper bound on the optimum,
since the constraint set is necessary but not sufficient).  Step two
quantizes the times at granularity ``t_g``, splits nodes into single-RF
vertices, installs one parallel edge per quantum, edge-colors the
resulting multigraph with at most ``3*ceil(max_degree/2)`` colors, turns
every color class into a timeslot of length ``t_g``, and rescales the
schedule to unit length.  Smaller granularity costs more colors but loses
less throughput; as ``t_g`` approaches zero the guarantee tends to 2/3 of
the step-one bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional, Sequence

from . import lp
from .netmodel import (
    DirectedNetwork,
    ModelFlags,
    Schedule,
    Slot,
    evaluate_schedule,
    prune_macro_inbound,
)
from .optfd import ModelMismatch, MtfsSolution

TIME_DUST = 1e-12


@dataclass(frozen=True)
class EcConfig:
    granularity: object = 0.1

    def __post_init__(self):
        if not (0 < self.granularity <= 1):
            raise ValueError(f"granularity must be in (0, 1], got {self.granularity}")


def _check_flags(flags: ModelFlags):
    if (flags.duplex, flags.interference, flags.susm) != ("FD", "NI", "MAX"):
        raise ModelMismatch(
            "edge-coloring scheduling needs (FD, NI, MAX); got "
            f"({flags.duplex}, {flags.interference}, {flags.susm})"
        )


def ec_link_times(net: DirectedNetwork, exact: bool = False):
    """Relaxed stream times: max-min relay throughput subject only to the
    per-vertex RF-time budgets, then network throughput at that value.

    Returns (theta, {(link, stream): time}) keyed by the input network's
    link ids.  theta is an upper bound on the true max-min throughput.
    A relay with no inflow yields theta = 0 rather than an error; this LP
    does not need the feed-tree initial solution the exact solvers use.
    """
    _check_flags(net.flags)
    net, link_map = prune_macro_inbound(net)
    arcs = list(net.arcs())
    n = len(arcs)
    zero = Fraction(0) if exact else 0.0
    one = Fraction(1) if exact else 1.0
    caps = [Fraction(a.capacity) if exact else float(a.capacity) for a in arcs]
    relays = net.relays()
    macros = set(net.macros())
    eps = 0 if exact else lp.EPS_OPT

    relay_rows = []
    for rid in relays:
        row = [zero] * n
        for i, a in enumerate(arcs):
            if a.head == rid:
                row[i] += caps[i]
            if a.tail == rid:
                row[i] -= caps[i]
        relay_rows.append(row)
    node_rows = []
    node_rhs = []
    for v in net.vertices:
        row = [one if v.id in (a.tail, a.head) else zero for a in arcs]
        node_rows.append(row)
        node_rhs.append(net.r(v.id) * one)

    A = [row + [-one] for row in relay_rows] + [row + [zero] for row in node_rows]
    b = [zero] * len(relay_rows) + node_rhs
    senses = [">="] * len(relay_rows) + ["<="] * len(node_rows)
    c = [zero] * n + [one]
    solA = lp.solve_explicit_lp(A, b, c, senses, maximize=True, eps=eps)
    theta = solA.objective

    A2 = [list(r) for r in relay_rows] + [list(r) for r in node_rows]
    b2 = [theta] * len(relay_rows) + node_rhs
    c2 = [caps[i] if arcs[i].tail in macros else zero for i in range(n)]
    solB = lp.solve_explicit_lp(A2, b2, c2, senses, maximize=True, eps=eps)
    times = {
        (link_map[a.link], a.stream): solB.x[i]
        for i, a in enumerate(arcs)
        if solB.x[i] > 0
    }
    return theta, times


def _euler_orient(vertices: Sequence, edges: Sequence):
    """Orient a multigraph so each vertex's in/out degrees differ by at most
    one: pair odd-degree vertices with dummy edges, walk Euler circuits."""
    adj: dict = {v: [] for v in vertices}
    total = list(edges)
    for eid, (u, v) in enumerate(edges):
        adj[u].append((eid, v))
        adj[v].append((eid, u))
    odd = [v for v in vertices if len(adj[v]) % 2 == 1]
    for a, b in zip(odd[::2], odd[1::2]):
        eid = len(total)
        total.append((a, b))
        adj[a].append((eid, b))
        adj[b].append((eid, a))
    used = [False] * len(total)
    ptr = {v: 0 for v in vertices}
    orient: dict = {}
    for start in vertices:
        while ptr[start] < len(adj[start]):
            if used[adj[start][ptr[start]][0]]:
                ptr[start] += 1
                continue
            stack = [start]
            while stack:
                v = stack[-1]
                while ptr[v] < len(adj[v]) and used[adj[v][ptr[v]][0]]:
                    ptr[v] += 1
                if ptr[v] == len(adj[v]):
                    stack.pop()
                    continue
                eid, w = adj[v][ptr[v]]
                used[eid] = True
                orient[eid] = (v, w)
                stack.append(w)
    return [orient[eid] for eid in range(len(edges))]


def _bipartite_edge_color(edges: Sequence, ncolors: int):
    """Exact edge coloring of a bipartite multigraph with ncolors colors
    (Koenig), by single-edge insertion with alternating-path recoloring."""
    at: dict = {}
    color = [None] * len(edges)

    def palette(v):
        return at.setdefault(v, {})

    for eid, (x, y) in enumerate(edges):
        common = next(
            (c for c in range(ncolors) if c not in palette(x) and c not in palette(y)),
            None,
        )
        if common is not None:
            color[eid] = common
            palette(x)[common] = eid
            palette(y)[common] = eid
            continue
        c1 = next(c for c in range(ncolors) if c not in palette(x))
        c2 = next(c for c in range(ncolors) if c not in palette(y))
        # flip the (c1, c2)-alternating path starting at y; bipartiteness
        # guarantees it never reaches x
        w, want = y, c1
        path = []
        while want in palette(w):
            pe = palette(w)[want]
            path.append(pe)
            a, b = edges[pe]
            w = b if a == w else a
            want = c2 if want == c1 else c1
        for pe in path:
            a, b = edges[pe]
            old = color[pe]
            new = c2 if old == c1 else c1
            for q in (a, b):
                if palette(q).get(old) == pe:
                    del palette(q)[old]
            color[pe] = new
            palette(a)[new] = pe
            palette(b)[new] = pe
        color[eid] = c1
        palette(x)[c1] = eid
        palette(y)[c1] = eid
    return color


def karloff_edge_color(vertices: Sequence, edges: Sequence):
    """Proper edge coloring of a loopless multigraph with at most
    3*ceil(max_degree/2) colors.

    Euler-orients the graph, colors the bipartite out/in double cover with
    ceil(max_degree/2) colors, and splits each class (a union of paths and
    cycles in the original graph) into at most three matchings.  Returns
    (colors, kappa).
    """
    if not edges:
        return [], 0
    deg: dict = {v: 0 for v in vertices}
    for u, v in edges:
        if u == v:
            raise ValueError("loop edge")
        deg[u] += 1
        deg[v] += 1
    delta = max(deg.values())
    half = (delta + 1) // 2
    oriented = _euler_orient(vertices, edges)
    cover = [((u, "out"), (v, "in")) for u, v in oriented]
    base = _bipartite_edge_color(cover, half)

    colors = [None] * len(edges)
    for b in range(half):
        members = [eid for eid in range(len(edges)) if base[eid] == b]
        # each vertex has <= 1 out and <= 1 in member: paths and cycles
        adj: dict = {}
        for eid in members:
            u, v = edges[eid]
            adj.setdefault(u, []).append((eid, v))
            adj.setdefault(v, []).append((eid, u))
        seen: set = set()

        def trail(v0, e0):
            chain = []
            v, e = v0, e0
            while True:
                seen.add(e)
                chain.append(e)
                a, c = edges[e]
                v = c if a == v else a
                nxt = [e2 for e2, _ in adj[v] if e2 not in seen]
                if not nxt:
                    return chain
                e = nxt[0]

        for v0 in sorted(adj, key=str):  # paths first, from their endpoints
            if len(adj[v0]) == 1 and adj[v0][0][0] not in seen:
                for i, e in enumerate(trail(v0, adj[v0][0][0])):
                    colors[e] = (b, i % 2)
        for e0 in members:  # remaining components are cycles
            if e0 in seen:
                continue
            chain = trail(edges[e0][0], e0)
            for i, e in enumerate(chain):
                colors[e] = (b, i % 2)
            if len(chain) % 2 == 1 and len(chain) > 1:
                colors[chain[0]] = (b, 2)  # odd cycle needs a third matching
    remap: dict = {}
    for eid in range(len(edges)):
        key = colors[eid]
        if key not in remap:
            remap[key] = len(remap)
        colors[eid] = remap[key]
    return colors, len(remap)


def ec_schedule(
    net: DirectedNetwork,
    times: Optional[Mapping] = None,
    config: EcConfig = EcConfig(),
    exact: bool = False,
) -> MtfsSolution:
    """Quantize stream times, edge-color the quantum multigraph, and emit
    the scaled schedule.

    Slots come out grouped by color, each color owning total length
    ``1/kappa``; within a color, arcs are active for exactly their assigned
    quantum, so the final per-stream time is ``t / (kappa * t_g)``.

    Stream times reference the input network's link ids (incoming macro
    arcs can never carry time, so normalization is immaterial here).
    """
    _check_flags(net.flags)
    if times is None:
        theta_step1, times = ec_link_times(net, exact)
    else:
        theta_step1 = None
    tg = Fraction(config.granularity) if exact else float(config.granularity)
    rf = {v.id: v.rf_chains for v in net.vertices}

    # split nodes: stream time spreads evenly over the RF-chain pairs
    split_arcs = []  # ((tail, i), (head, j), origin, time)
    for (link_id, stream), t in sorted(times.items()):
        if not t > TIME_DUST:
            continue
        l = net.links[link_id]
        share = t / (rf[l.tail] * rf[l.head])
        for i in range(rf[l.tail]):
            for j in range(rf[l.head]):
                split_arcs.append(((l.tail, i), (l.head, j), (link_id, stream), share))

    # quantum multigraph: ceil(t / tg) parallel edges per split arc
    vertices = sorted({a[0] for a in split_arcs} | {a[1] for a in split_arcs})
    edges = []
    durations = []
    origins = []
    for tail, head, origin, t in split_arcs:
        k = int(-(-t // tg)) if isinstance(t, Fraction) else math.ceil(t / tg)
        rem = t - (k - 1) * tg
        if rem <= TIME_DUST and k > 1:  # quantization dust from float division
            k -= 1
            rem = tg
        for copy in range(k):
            edges.append((tail, head))
            durations.append(tg if copy < k - 1 else rem)
            origins.append(origin)

    colors, kappa = karloff_edge_color(vertices, edges)
    if kappa == 0:
        sched = Schedule((Slot(frozenset(), Fraction(1) if exact else 1.0),))
        report = evaluate_schedule(net, sched)
        return MtfsSolution(report.maxmin, sched, report.network, {}, {"kappa": 0})

    scale = kappa * tg
    slots = []
    color_of_slot = []
    for color in range(kappa):
        members = [eid for eid in range(len(edges)) if colors[eid] == color]
        # the class owns a span of tg; arcs start together and each stops
        # after its own quantum, so peel a sub-slot per distinct duration
        members.sort(key=lambda e: durations[e])
        elapsed = tg * 0
        i = 0
        while i < len(members):
            cut = durations[members[i]]
            span = cut - elapsed
            if span > 0:
                active = members[i:]
                per_link: dict = {}
                pairs = []
                for eid in active:
                    link_id, _ = origins[eid]
                    s = per_link.get(link_id, 0)
                    per_link[link_id] = s + 1
                    pairs.append((link_id, s))
                slots.append(Slot(frozenset(pairs), span / scale))
                color_of_slot.append(color)
                elapsed = cut
            while i < len(members) and durations[members[i]] == cut:
                i += 1
        if elapsed < tg:
            slots.append(Slot(frozenset(), (tg - elapsed) / scale))
            color_of_slot.append(color)

    sched = Schedule(tuple(slots))
    report = evaluate_schedule(net, sched)
    r_total = net.total_rf()
    final_times = {k: t / scale for k, t in times.items()}
    degs: dict = {}
    for u, v in edges:
        degs[u] = degs.get(u, 0) + 1
        degs[v] = degs.get(v, 0) + 1
    extras = {
        "kappa": kappa,
        "granularity": config.granularity,
        "theta_step1": theta_step1,
        "final_link_times": final_times,
        "color_of_slot": tuple(color_of_slot),
        "bound_factor": 2 / (3 * (r_total + 2) * (float(tg)) + 3),
        "dm_max_degree": max(degs.values()) if degs else 0,
        "dm_vertices": len(vertices),
        "dm_edges": len(edges),
    }
    return MtfsSolution(report.maxmin, sched, report.network, {}, extras)


def solve(
    net: DirectedNetwork, config: EcConfig = EcConfig(), exact: bool = False
) -> MtfsSolution:
    """Step one (relaxed LP) plus step two (edge-coloring schedule)."""
    theta, times = ec_link_times(net, exact)
    sol = ec_schedule(net, times, config, exact)
    extras = dict(sol.extras, theta_step1=theta)
    return MtfsSolution(sol.theta_star, sol.schedule, sol.network_throughput, {}, extras)
