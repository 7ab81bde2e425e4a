"""Optimal full-duplex max-min fair scheduling under the no-interference
model.

The schedule LP has one variable per simple b-matching of the network (a
set of streams that can run concurrently given the RF-chain budgets), so
columns are generated on demand: the entering column is found by a
maximum-weight simple b-matching whose edge weights come from the current
simplex duals.  Phase one maximizes the minimum relay throughput, phase
two maximizes network throughput while pinning every relay at that value.

Because data streams are just parallel arcs of the network, the REAL
spatial-multiplexing model needs no dedicated code path: pricing on the
stream multigraph covers both models.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional

from . import lp, matching
from .lp import ArtificialColumn, BasisState, MatchingColumn, SurplusColumn, ThetaColumn
from .netmodel import (
    DirectedNetwork,
    ModelFlags,
    Schedule,
    Slot,
    normalize_with_link_map,
)


class ModelMismatch(ValueError):
    """Solver invoked on a network whose model flags it does not support."""


class NumericalInconsistency(RuntimeError):
    """Phase-two artificial variable failed to vanish (theta* drift)."""


@dataclass(frozen=True)
class MtfsSolution:
    theta_star: object
    schedule: Schedule
    network_throughput: object
    iterations: Mapping[str, int] = field(default_factory=dict)
    extras: Mapping[str, object] = field(default_factory=dict)


def _convert(value, exact: bool):
    return Fraction(value) if exact else float(value)


def _check_flags(flags: ModelFlags):
    if flags.duplex != "FD" or flags.interference != "NI":
        raise ModelMismatch(
            f"optimal FD scheduling needs (FD, NI); network is "
            f"({flags.duplex}, {flags.interference})"
        )


class _MtfsProblem:
    """Shared state for both column-generation phases on one network.

    Operates on the downlink-normalized network; :meth:`emit` translates a
    column's streams back to the link ids of the network the caller gave.
    """

    def __init__(self, original: DirectedNetwork, exact: bool):
        self.original = original
        net, self.link_map = normalize_with_link_map(original)
        self.net = net
        self.exact = exact
        self.relays = net.relays()
        self.m = len(self.relays)
        self.row = {rid: i for i, rid in enumerate(self.relays)}
        self.b = {v.id: v.rf_chains for v in net.vertices}
        self.macros = set(net.macros())
        self.zero = Fraction(0) if exact else 0.0
        self.one = Fraction(1) if exact else 1.0
        self.cap = {
            (a.link, a.stream): _convert(a.capacity, exact) for a in net.arcs()
        }
        self.arc_ends = {(a.link, a.stream): (a.tail, a.head) for a in net.arcs()}

    def emit(self, arcs) -> frozenset:
        return frozenset((self.link_map[l], s) for l, s in arcs)

    def column_vector(self, col):
        vec = [self.zero] * (self.m + 1)
        if isinstance(col, MatchingColumn):
            for key in col.arcs:
                tail, head = self.arc_ends[key]
                c = self.cap[key]
                if head in self.row:
                    vec[self.row[head]] += c
                if tail in self.row:
                    vec[self.row[tail]] -= c
            vec[self.m] = self.one
        elif isinstance(col, (ThetaColumn, ArtificialColumn)):
            for i in range(self.m):
                vec[i] = -self.one
        elif isinstance(col, SurplusColumn):
            vec[col.k] = -self.one
        else:
            raise TypeError(f"unknown column {col!r}")
        return vec

    def macro_sourced(self, col: MatchingColumn):
        return sum(
            (self.cap[key] for key in col.arcs if self.arc_ends[key][0] in self.macros),
            start=self.zero,
        )

    def form(self, phase: int, theta_star=None) -> lp.StandardForm:
        if phase == 1:
            g = tuple([self.zero] * self.m + [self.one])

            def cost(col):
                return -self.one if isinstance(col, ThetaColumn) else self.zero

        else:
            g = tuple([theta_star] * self.m + [self.one])

            def cost(col):
                if isinstance(col, MatchingColumn):
                    return -self.macro_sourced(col)
                return self.zero

        return lp.StandardForm(self.m + 1, g, self.column_vector, cost)

    def arc_weights(self, p, phase: int) -> dict:
        """Pricing weights per stream from the duals: the reduced cost of a
        potential timeslot is the negated total weight of its streams."""
        w = {}
        for key, (tail, head) in self.arc_ends.items():
            c = self.cap[key]
            pj = p[self.row[head]]
            if tail in self.row:
                w[key] = c * (pj - p[self.row[tail]])
            elif phase == 1:
                w[key] = c * pj
            else:
                w[key] = c * (pj + self.one)
        return w

    def _bmatching_engine(self, weights: dict):
        edges = tuple(
            matching.Edge(tail, head, weights[key], key)
            for key, (tail, head) in self.arc_ends.items()
        )
        graph = matching.WeightedGraph(tuple(v.id for v in self.net.vertices), edges)
        chosen, z = matching.max_weight_simple_b_matching(graph, self.b)
        return z, [e.tag for e in chosen]

    def pricer(self, phase: int, engine=None):
        """Minimum-reduced-cost column search; ``engine`` maximizes total
        weight over schedulable stream sets (default: simple b-matching)."""
        engine = engine or self._bmatching_engine

        def price(p):
            z, keys = engine(self.arc_weights(p, phase))
            eta1 = -z - p[self.m]
            head = sum(p[: self.m], start=self.zero)
            eta2 = (-self.one + head) if phase == 1 else head
            k3 = min(range(self.m), key=lambda k: (p[k], k))
            eta3 = p[k3]
            eta = min(eta1, eta2, eta3)
            if eta == eta1:
                col = MatchingColumn(frozenset(keys))
            elif eta == eta2:
                col = ThetaColumn() if phase == 1 else ArtificialColumn()
            else:
                col = SurplusColumn(k3)
            return eta, col

        return price


def initial_basic_schedule(net: DirectedNetwork, exact: bool = False):
    """Initial feasible basis: a BFS forest over first streams.

    Each relay's forest arc becomes a single-arc timeslot; durations solve
    the unique system where all relay throughputs are equal and the slots
    fill unit time.  Returns (schedule, basis, problem).
    """
    prob = _MtfsProblem(net, exact)
    net = prob.net
    out: dict = {}
    for i, l in enumerate(net.links):
        out.setdefault(l.tail, []).append((l.head, i))
    parent: dict = {}
    visited = set(net.macros())
    frontier = sorted(visited)
    while frontier:
        nxt = []
        for v in frontier:
            for head, link in sorted(out.get(v, ())):
                if head not in visited:
                    visited.add(head)
                    parent[head] = (link, 0)  # first stream of the link
                    nxt.append(head)
        frontier = sorted(nxt)
    columns = [MatchingColumn(frozenset([parent[r]])) for r in prob.relays]
    columns.append(ThetaColumn())
    form = prob.form(1)
    state = lp.make_basis(form, columns)
    slots = tuple(
        Slot(prob.emit(col.arcs), x)
        for col, x in zip(state.columns, state.x)
        if isinstance(col, MatchingColumn)
    )
    return Schedule(slots), state, prob


def price_phase1(net: DirectedNetwork, duals, exact: bool = False):
    """Minimum reduced cost over all columns at the given duals (phase 1)."""
    prob = _MtfsProblem(net, exact)
    return prob.pricer(1)(list(duals))


def solve_maxmin_theta(net: DirectedNetwork, exact: bool = False):
    """Column generation for the max-min relay throughput theta*."""
    _check_flags(net.flags)
    _, state, prob = initial_basic_schedule(net, exact)
    eps = 0 if exact else lp.EPS_OPT
    form = prob.form(1)
    state = lp.revised_simplex(form, state, prob.pricer(1), eps=eps)
    theta = state.value_of(ThetaColumn())
    return theta, state, prob


def solve_mtfs(net: DirectedNetwork, theta_star=None, state=None, exact: bool = False):
    """Maximize network throughput subject to every relay making theta*.

    Reuses the phase-one basis: the theta column is reinterpreted as the
    artificial variable, which is zero-valued in the shifted right-hand
    side and must stay zero at the optimum.
    """
    if theta_star is None or state is None:
        theta_star, state, prob = solve_maxmin_theta(net, exact)
    else:
        _check_flags(net.flags)
        prob = _MtfsProblem(net, exact)
    phase1_pivots = state.pivots
    eps = 0 if exact else lp.EPS_OPT
    columns = [
        ArtificialColumn() if isinstance(c, ThetaColumn) else c for c in state.columns
    ]
    form2 = prob.form(2, theta_star)
    binv = [list(row) for row in state.binv]
    state2 = BasisState(columns, binv, lp._matvec(binv, list(form2.g)))
    state2 = lp.revised_simplex(form2, state2, prob.pricer(2), eps=eps)
    y = state2.value_of(ArtificialColumn())
    if y > 1e-6:
        raise NumericalInconsistency(f"artificial variable stuck at {y}")
    slots = []
    tput = prob.zero
    for col, x in zip(state2.columns, state2.x):
        if isinstance(col, MatchingColumn) and x > 0:
            slots.append(Slot(prob.emit(col.arcs), x))
            tput += prob.macro_sourced(col) * x
    return MtfsSolution(
        theta_star,
        Schedule(tuple(slots)),
        tput,
        {"phase1": phase1_pivots, "phase2": state2.pivots},
    )


def solve(net: DirectedNetwork, exact: bool = False) -> MtfsSolution:
    """Full pipeline: theta* by phase one, then the throughput-optimal
    schedule at theta* by phase two."""
    theta, state, _ = solve_maxmin_theta(net, exact)
    return solve_mtfs(net, theta, state, exact)
