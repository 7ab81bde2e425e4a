"""Ground-truth machinery for certifying the solvers at desk scale.

Everything here is exhaustive or reduces to an exhaustive primitive: stream
activation sets are enumerated subset by subset, the schedule LPs are solved
over all enumerated columns in exact rational arithmetic, and satisfiability
reduction instances are checked against truth tables.  None of it shares a
code path with the solvers it certifies, except the generic simplex engine
reused by the pricing-based half-duplex LP.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from . import lp, matching, optfd
from .lp import ArtificialColumn, BasisState, MatchingColumn, ThetaColumn
from .netmodel import (
    MACRO,
    RELAY,
    DirectedNetwork,
    Link,
    ModelFlags,
    Schedule,
    Slot,
    Vertex,
    normalize_with_link_map,
)

ENUM_LIMIT_BMATCH = 22
ENUM_LIMIT_HD = 14
ENUM_LIMIT_MWHS = 20


class TooLarge(ValueError):
    pass


class EmptyClause(ValueError):
    pass


def enumerate_activations(
    net: DirectedNetwork, flags: Optional[ModelFlags] = None, limit: int = ENUM_LIMIT_HD
):
    """All stream sets schedulable in one timeslot under ``flags``.

    A set is schedulable when per-vertex incidences stay within the RF
    budgets, no vertex both sends and receives (HD only) and no two active
    links interfere (PI only).  Includes the empty set; results are sorted
    by (size, arc index tuple) so column orders are reproducible.
    """
    flags = flags or net.flags
    arcs = list(net.arcs())
    if len(arcs) > limit:
        raise TooLarge(f"{len(arcs)} arcs exceed enumeration limit {limit}")
    hd = flags.duplex == "HD"
    pi = flags.interference == "PI"
    deg = {v.id: 0 for v in net.vertices}
    senders: dict = {}
    receivers: dict = {}
    active_links: list = []
    chosen: list = []
    out = []

    def rec(i):
        if i == len(arcs):
            out.append(tuple(chosen))
            return
        rec(i + 1)
        a = arcs[i]
        if deg[a.tail] >= net.r(a.tail) or deg[a.head] >= net.r(a.head):
            return
        if hd and (receivers.get(a.tail) or senders.get(a.head)):
            return
        if pi and any(net.link_interferes(a.link, l) for l in active_links):
            return
        deg[a.tail] += 1
        deg[a.head] += 1
        senders[a.tail] = senders.get(a.tail, 0) + 1
        receivers[a.head] = receivers.get(a.head, 0) + 1
        active_links.append(a.link)
        chosen.append(i)
        rec(i + 1)
        chosen.pop()
        active_links.pop()
        deg[a.tail] -= 1
        deg[a.head] -= 1
        senders[a.tail] -= 1
        receivers[a.head] -= 1

    rec(0)
    cols = [frozenset((arcs[i].link, arcs[i].stream) for i in sub) for sub in out]
    order = sorted(range(len(out)), key=lambda k: (len(out[k]), out[k]))
    return [cols[k] for k in order]


def _column_entry(net: DirectedNetwork, vid: int, col, exact: bool = True):
    total = Fraction(0) if exact else 0.0
    for link_id, stream in col:
        l = net.links[link_id]
        c = Fraction(l.stream_capacities[stream]) if exact else float(
            l.stream_capacities[stream]
        )
        if l.head == vid:
            total += c
        if l.tail == vid:
            total -= c
    return total


def node_matching_matrix(net: DirectedNetwork, limit: int = ENUM_LIMIT_BMATCH):
    """Rows: vertices in id order. Columns: nonempty simple b-matchings in
    (size, lex) order.  Entry: inflow minus outflow capacity at the vertex.
    Returns (matrix, columns)."""
    flags = ModelFlags("FD", "NI", net.flags.susm)
    cols = [c for c in enumerate_activations(net, flags, limit) if c]
    order = sorted(v.id for v in net.vertices)
    mat = [[_column_entry(net, vid, c) for c in cols] for vid in order]
    return mat, cols


def node_hd_subgraph_matrix(net: DirectedNetwork, limit: int = ENUM_LIMIT_HD):
    """Half-duplex analogue of :func:`node_matching_matrix`."""
    flags = ModelFlags("HD", "NI", net.flags.susm)
    cols = [c for c in enumerate_activations(net, flags, limit) if c]
    order = sorted(v.id for v in net.vertices)
    mat = [[_column_entry(net, vid, c) for c in cols] for vid in order]
    return mat, cols


def relay_rows(net: DirectedNetwork, mat):
    order = sorted(v.id for v in net.vertices)
    keep = [i for i, vid in enumerate(order) if net.vertex(vid).role == RELAY]
    return [mat[i] for i in keep]


def brute_force_mtfs(
    net: DirectedNetwork,
    flags: Optional[ModelFlags] = None,
    limit: int = ENUM_LIMIT_HD,
    exact: bool = True,
):
    """Solve the schedule LPs over every enumerated activation set.

    Returns (theta_star, network_throughput, schedule), exact rationals by
    default.  Feasibility of the emitted schedule holds by construction.
    """
    net, link_map = normalize_with_link_map(net)
    flags = flags or net.flags
    cols = enumerate_activations(net, flags, limit)
    relays = net.relays()
    macros = set(net.macros())
    m = len(relays)
    K = len(cols)
    zero = Fraction(0) if exact else 0.0
    one = Fraction(1) if exact else 1.0
    a = [[_column_entry(net, rid, c, exact) for c in cols] for rid in relays]
    srcs = []
    for c in cols:
        t = zero
        for link_id, stream in c:
            l = net.links[link_id]
            if l.tail in macros:
                t += Fraction(l.stream_capacities[stream]) if exact else float(
                    l.stream_capacities[stream]
                )
        srcs.append(t)
    eps = 0 if exact else lp.EPS_OPT

    # phase 1: max theta  s.t.  a.t - theta >= 0 per relay, sum t = 1
    A1 = [row + [-one] for row in a] + [[one] * K + [zero]]
    b1 = [zero] * m + [one]
    c1 = [zero] * K + [one]
    s1 = [">="] * m + ["="]
    sol1 = lp.solve_explicit_lp(A1, b1, c1, s1, maximize=True, eps=eps)
    theta = sol1.objective

    # phase 2: max macro-sourced throughput with every relay at theta
    A2 = [list(row) for row in a] + [[one] * K]
    b2 = [theta] * m + [one]
    s2 = [">="] * m + ["="]
    sol2 = lp.solve_explicit_lp(A2, b2, srcs, s2, maximize=True, eps=eps)
    slots = tuple(
        Slot(frozenset((link_map[l], s) for l, s in cols[j]), sol2.x[j])
        for j in range(K)
        if sol2.x[j] > 0
    )
    return theta, sol2.objective, Schedule(slots)


def max_weight_hd_subgraph(
    net: DirectedNetwork,
    weights: Optional[dict] = None,
    limit: int = ENUM_LIMIT_MWHS,
):
    """Exhaustive maximum-weight half-duplex subgraph (stream keyed weights
    default to capacities).  Returns (stream set, weight)."""
    arcs = list(net.arcs())
    if len(arcs) > limit:
        raise TooLarge(f"{len(arcs)} arcs exceed enumeration limit {limit}")
    if weights is None:
        weights = {(a.link, a.stream): a.capacity for a in arcs}
    best = (frozenset(), 0)
    flags = ModelFlags("HD", "NI", net.flags.susm)
    for col in enumerate_activations(net, flags, limit):
        w = sum(weights[k] for k in col) if col else 0
        if w > best[1]:
            best = (col, w)
    return best


# ---------------------------------------------------------------------------
# Exact half-duplex MTFS LP by column generation with an exhaustive pricer.
# Needed for reduction instances whose arc count exceeds subset enumeration.


def _solve_sided_component(arcs, weights, r):
    """Max-weight degree-bounded arc set once sender/receiver sides are
    fixed (every arc's tail may only send and head only receive).

    Call a vertex tight when its incident arc count exceeds its RF budget.
    If no arc joins two tight vertices, each tight vertex independently
    keeps its top-r arcs and everything else is taken whole; otherwise an
    exact b-matching decides.
    """
    deg: dict = {}
    for a in arcs:
        deg[a.tail] = deg.get(a.tail, 0) + 1
        deg[a.head] = deg.get(a.head, 0) + 1
    tight = {v for v, d in deg.items() if d > r[v]}
    if any(a.tail in tight and a.head in tight for a in arcs):
        edges = tuple(
            matching.Edge(("s", a.tail), ("r", a.head), weights[(a.link, a.stream)], (a.link, a.stream))
            for a in arcs
        )
        verts = tuple(sorted({v for e in edges for v in (e.u, e.v)}))
        b = {v: r[v[1]] for v in verts}
        chosen, w = matching.max_weight_simple_b_matching(
            matching.WeightedGraph(verts, edges), b
        )
        return w, [e.tag for e in chosen]
    w = 0
    keys = []
    by_tight: dict = {}
    for a in arcs:
        side = a.tail if a.tail in tight else (a.head if a.head in tight else None)
        if side is None:
            w += weights[(a.link, a.stream)]
            keys.append((a.link, a.stream))
        else:
            by_tight.setdefault(side, []).append(a)
    for v, lst in by_tight.items():
        lst.sort(key=lambda a: weights[(a.link, a.stream)], reverse=True)
        for a in lst[: r[v]]:
            w += weights[(a.link, a.stream)]
            keys.append((a.link, a.stream))
    return w, keys


def _exact_mwhs_engine(net: DirectedNetwork):
    """Exact max-weight half-duplex subgraph for arbitrary weights.

    Positive-weight arcs split into weakly connected components, which are
    independent; within a component, every vertex carrying positive arcs in
    both directions is assigned to the sender or the receiver side
    exhaustively, and the best sided solution wins.  Exponential only in
    the per-component count of two-way vertices.
    """
    all_arcs = list(net.arcs())
    r = {v.id: v.rf_chains for v in net.vertices}

    def engine(weights: dict):
        arcs = [a for a in all_arcs if weights[(a.link, a.stream)] > 0]
        if not arcs:
            return 0, []
        parent: dict = {}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for a in arcs:
            parent.setdefault(a.tail, a.tail)
            parent.setdefault(a.head, a.head)
            ra, rb = find(a.tail), find(a.head)
            if ra != rb:
                parent[ra] = rb
        comps: dict = {}
        for a in arcs:
            comps.setdefault(find(a.tail), []).append(a)

        total = 0
        keys: list = []
        for comp in comps.values():
            tails = {a.tail for a in comp}
            heads = {a.head for a in comp}
            free = sorted(tails & heads)
            best = (0, [])
            for bits in itertools.product((0, 1), repeat=len(free)):
                send = {v for v, bit in zip(free, bits) if bit}
                recv = {v for v, bit in zip(free, bits) if not bit}
                allowed = [
                    a for a in comp if a.tail not in recv and a.head not in send
                ]
                if not allowed:
                    continue
                w, k = _solve_sided_component(allowed, weights, r)
                if w > best[0]:
                    best = (w, k)
            total += best[0]
            keys.extend(best[1])
        return total, keys

    return engine


def hd_mtfs_lp(net: DirectedNetwork, exact: bool = True):
    """Exact max-min throughput and best network throughput under HD/NI.

    Column generation over half-duplex subgraphs with the exhaustive pricer;
    exponential in the number of two-way vertices but exact.  Returns
    (theta_star, network_throughput, schedule).
    """
    _, state, prob = optfd.initial_basic_schedule(net, exact)
    eps = 0 if exact else lp.EPS_OPT
    engine = _exact_mwhs_engine(prob.net)
    form1 = prob.form(1)
    state = lp.revised_simplex(form1, state, prob.pricer(1, engine), eps=eps)
    theta = state.value_of(ThetaColumn())
    columns = [
        ArtificialColumn() if isinstance(c, ThetaColumn) else c for c in state.columns
    ]
    form2 = prob.form(2, theta)
    binv = [list(row) for row in state.binv]
    state2 = BasisState(columns, binv, lp._matvec(binv, list(form2.g)))
    state2 = lp.revised_simplex(form2, state2, prob.pricer(2, engine), eps=eps)
    slots = []
    tput = prob.zero
    for col, x in zip(state2.columns, state2.x):
        if isinstance(col, MatchingColumn) and x > 0:
            slots.append(Slot(prob.emit(col.arcs), x))
            tput += prob.macro_sourced(col) * x
    return theta, tput, Schedule(tuple(slots))


# ---------------------------------------------------------------------------
# Satisfiability reduction instance generators.  A formula is a sequence of
# clauses; a clause is a sequence of non-zero ints (negative = negated var).


def _check_cnf(cnf):
    if not cnf:
        raise EmptyClause("formula has no clauses")
    for k, clause in enumerate(cnf):
        if not clause:
            raise EmptyClause(f"clause {k} is empty")
        if any(lit == 0 for lit in clause):
            raise ValueError("literal 0 is invalid")
    return sorted({abs(lit) for clause in cnf for lit in clause})


def cnf_satisfiable(cnf) -> bool:
    """Truth-table satisfiability decision (the independent reference)."""
    vids = _check_cnf(cnf)
    for bits in itertools.product((False, True), repeat=len(vids)):
        assign = dict(zip(vids, bits))
        if all(
            any(assign[abs(l)] == (l > 0) for l in clause) for clause in cnf
        ):
            return True
    return False


def sat_to_mwhs(cnf):
    """Reduction: formula -> DAG network whose maximum-weight half-duplex
    subgraph has weight K + L exactly when the formula is satisfiable
    (K clauses, L variables; all arcs weight 1)."""
    vids = _check_cnf(cnf)
    L, K = len(vids), len(cnf)
    vid_index = {v: i for i, v in enumerate(vids)}
    p = {v: 3 * vid_index[v] for v in vids}
    n = {v: 3 * vid_index[v] + 1 for v in vids}
    rr = {v: 3 * vid_index[v] + 2 for v in vids}
    q = {k: 3 * L + k for k in range(K)}
    links = []
    outdeg: dict = {}
    for k, clause in enumerate(cnf):
        for lit in set(clause):
            tail = p[abs(lit)] if lit > 0 else n[abs(lit)]
            links.append((tail, q[k]))
            outdeg[tail] = outdeg.get(tail, 0) + 1
    for v in vids:
        links.append((rr[v], p[v]))
        links.append((rr[v], n[v]))
    vertices = []
    for v in vids:
        vertices.append(Vertex(p[v], RELAY, max(outdeg.get(p[v], 0), 1)))
        vertices.append(Vertex(n[v], RELAY, max(outdeg.get(n[v], 0), 1)))
        vertices.append(Vertex(rr[v], MACRO, 1))
    for k in range(K):
        vertices.append(Vertex(q[k], RELAY, 1))
    net = DirectedNetwork(
        tuple(vertices),
        tuple(Link(t, h, (1,)) for t, h in sorted(set(links))),
        flags=ModelFlags("HD", "NI", "MAX"),
    )
    return net, K + L


def sat_to_hdmtfs(cnf):
    """Reduction: formula -> network where a unit-time half-duplex schedule
    attains max-min throughput 1 together with network throughput
    4L(K/2+1) exactly when the formula is satisfiable."""
    vids = _check_cnf(cnf)
    L, K = len(vids), len(cnf)
    big = Fraction(K, 2) + 1
    nid = itertools.count()
    p = {(v, m): next(nid) for v in vids for m in (1, 2)}
    n = {(v, m): next(nid) for v in vids for m in (1, 2)}
    rr = {(v, m): next(nid) for v in vids for m in (1, 2, 3, 4)}
    q = {k: next(nid) for k in range(K)}
    links = []
    outdeg: dict = {}

    def add(tail, head, cap):
        links.append((tail, head, cap))
        outdeg[tail] = outdeg.get(tail, 0) + 1

    for k, clause in enumerate(cnf):
        for lit in set(clause):
            side = p if lit > 0 else n
            add(side[(abs(lit), 1)], q[k], 1)
            add(side[(abs(lit), 2)], q[k], 1)
    for v in vids:
        add(rr[(v, 1)], p[(v, 1)], big)
        add(rr[(v, 1)], n[(v, 1)], big)
        add(rr[(v, 2)], p[(v, 2)], big)
        add(rr[(v, 2)], n[(v, 2)], big)
        add(rr[(v, 3)], p[(v, 2)], big)
        add(rr[(v, 3)], n[(v, 1)], big)
        add(rr[(v, 4)], p[(v, 1)], big)
        add(rr[(v, 4)], n[(v, 2)], big)
    vertices = []
    for v in vids:
        for m in (1, 2):
            vertices.append(Vertex(p[(v, m)], RELAY, max(outdeg.get(p[(v, m)], 0), 2)))
            vertices.append(Vertex(n[(v, m)], RELAY, max(outdeg.get(n[(v, m)], 0), 2)))
        for m in (1, 2, 3, 4):
            vertices.append(Vertex(rr[(v, m)], MACRO, 1))
    for k in range(K):
        vertices.append(Vertex(q[k], RELAY, 1))
    net = DirectedNetwork(
        tuple(sorted(vertices, key=lambda v: v.id)),
        tuple(Link(t, h, (c,)) for t, h, c in sorted(links, key=lambda x: (x[0], x[1]))),
        flags=ModelFlags("HD", "NI", "MAX"),
    )
    return net, 1, 4 * L * big
