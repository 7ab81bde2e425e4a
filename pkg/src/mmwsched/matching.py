"""Maximum-weight simple b-matching via reductions to perfect matching.

A simple b-matching picks each edge at most once such that every vertex
``v`` is covered at most ``b(v)`` times.  Two reductions turn this into a
maximum-weight perfect matching problem:

* the vertex-copy (Tutte) reduction, applicable when parallel edges within
  an endpoint pair are interchangeable (equal weight, at least
  ``min(b(u), b(v))`` of them) so the pair can be collapsed to one edge of
  a strict graph whose copy-matching multiplicity selects streams;
* the inner-vertex (Schrijver) reduction, applicable to arbitrary
  multigraphs with per-edge distinct weights.

The perfect-matching engine is the blossom algorithm from networkx, which
is exact for integer and ``Fraction`` weights.  Everything here is a pure
function; independent solves may run concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Optional, Sequence

import networkx as nx


class NoPerfectMatching(ValueError):
    pass


class TooLarge(ValueError):
    pass


@dataclass(frozen=True)
class Edge:
    u: int
    v: int
    weight: object
    tag: object = None

    def endpoints(self) -> frozenset:
        return frozenset((self.u, self.v))


@dataclass(frozen=True)
class WeightedGraph:
    """Undirected weighted multigraph without loops."""

    vertices: tuple
    edges: tuple

    def __post_init__(self):
        vs = set(self.vertices)
        for e in self.edges:
            if e.u == e.v:
                raise ValueError(f"loop at {e.u}")
            if e.u not in vs or e.v not in vs:
                raise ValueError(f"edge {e} references unknown vertex")

    def is_strict(self) -> bool:
        pairs = [e.endpoints() for e in self.edges]
        return len(set(pairs)) == len(pairs)

    def degree(self, v) -> int:
        return sum(1 for e in self.edges if v in (e.u, e.v))


def max_weight_perfect_matching(g: WeightedGraph):
    """Exact maximum-weight perfect matching; raises NoPerfectMatching.

    Parallel edges are collapsed keeping the heaviest representative, which
    never changes the optimum of a perfect matching.
    """
    n = len(g.vertices)
    if n % 2 == 1:
        raise NoPerfectMatching(f"odd vertex count {n}")
    G = nx.Graph()
    G.add_nodes_from(g.vertices)
    best: dict = {}
    for e in g.edges:
        key = (e.u, e.v) if str(e.u) <= str(e.v) else (e.v, e.u)
        if key not in best or e.weight > best[key].weight:
            best[key] = e
    for e in best.values():
        G.add_edge(e.u, e.v, weight=e.weight, edge=e)
    mate = nx.max_weight_matching(G, maxcardinality=True)
    if 2 * len(mate) != n:
        raise NoPerfectMatching("graph admits no perfect matching")
    chosen = [G[u][v]["edge"] for u, v in mate]
    weight = sum(e.weight for e in chosen)
    return chosen, weight


@dataclass(frozen=True)
class Reduction:
    """A perfect-matching instance plus the decoder back to a b-matching."""

    graph: WeightedGraph
    decode: Callable


def tutte_reduce(g: WeightedGraph, b: Mapping) -> Reduction:
    """Vertex-copy reduction for a strict graph.

    Every vertex becomes ``b(v)`` copies, every edge becomes
    ``b(u)*b(v)`` same-weight copy edges, and the whole graph is duplicated
    with zero-weight twin edges joining symmetric copies.  A perfect
    matching's copy-A edges decode to (edge, multiplicity) pairs with
    multiplicity at most ``min(b(u), b(v))``.
    """
    if not g.is_strict():
        raise ValueError("tutte_reduce requires a strict graph")
    verts = []
    edges = []
    for side in ("A", "B"):
        for v in g.vertices:
            verts.extend((side, v, i) for i in range(b[v]))
        for idx, e in enumerate(g.edges):
            for i in range(b[e.u]):
                for j in range(b[e.v]):
                    edges.append(
                        Edge((side, e.u, i), (side, e.v, j), e.weight, ("edge", idx))
                    )
    for v in g.vertices:  # twin edges between symmetric copies
        for i in range(b[v]):
            edges.append(Edge(("A", v, i), ("B", v, i), 0, ("twin", v, i)))

    def decode(matching: Sequence[Edge]):
        mult: dict = {}
        for m in matching:
            if m.tag and m.tag[0] == "edge" and m.u[0] == "A" and m.v[0] == "A":
                mult[m.tag[1]] = mult.get(m.tag[1], 0) + 1
        return [(g.edges[i], k) for i, k in sorted(mult.items())]

    return Reduction(WeightedGraph(tuple(verts), tuple(edges)), decode)


def schrijver_reduce(g: WeightedGraph, b: Mapping) -> Reduction:
    """Inner-vertex reduction for an arbitrary multigraph.

    ``b(v)`` is clamped to ``deg(v)`` (larger values can never bind).  Each
    edge ``e = {u, v}`` gets two inner vertices and ``b(u)+b(v)+1`` edges of
    weight ``w(e)``; outer copies are duplicated and twinned, inner vertices
    are duplicated but not twinned.  A matched ``{u_copy, e_u}`` pair in
    copy A decodes to ``e`` being picked.
    """
    bc = {v: min(b[v], g.degree(v)) for v in g.vertices}
    verts = []
    edges = []
    for side in ("A", "B"):
        for v in g.vertices:
            verts.extend((side, "o", v, i) for i in range(bc[v]))
        for idx, e in enumerate(g.edges):
            eu = (side, "i", idx, "u")
            ev = (side, "i", idx, "v")
            verts.extend((eu, ev))
            for i in range(bc[e.u]):
                edges.append(Edge((side, "o", e.u, i), eu, e.weight, ("use", idx)))
            for j in range(bc[e.v]):
                edges.append(Edge(ev, (side, "o", e.v, j), e.weight, ("use", idx)))
            edges.append(Edge(eu, ev, e.weight, ("skip", idx)))
    for v in g.vertices:
        for i in range(bc[v]):
            edges.append(Edge(("A", "o", v, i), ("B", "o", v, i), 0, ("twin", v, i)))

    def decode(matching: Sequence[Edge]):
        used: dict = {}
        for m in matching:
            if m.tag and m.tag[0] == "use":
                side = m.u[0] if isinstance(m.u, tuple) else m.v[0]
                if side == "A":
                    used[m.tag[1]] = used.get(m.tag[1], 0) + 1
        # an edge is picked iff both its inner vertices matched outward
        return [(g.edges[i], 1) for i, k in sorted(used.items()) if k == 2]

    return Reduction(WeightedGraph(tuple(verts), tuple(edges)), decode)


def _parallel_classes(edges: Sequence[Edge]) -> dict:
    classes: dict = {}
    for i, e in enumerate(edges):
        classes.setdefault(e.endpoints(), []).append(i)
    return classes


def _tutte_pattern(edges: Sequence[Edge], b: Mapping) -> bool:
    """True when every parallel class is collapsible for the copy reduction:
    uniform weight and at least min(b(u), b(v)) interchangeable edges."""
    for pair, idxs in _parallel_classes(edges).items():
        u, v = tuple(pair)
        ws = {edges[i].weight for i in idxs}
        if len(ws) != 1:
            return False
        if len(idxs) < min(b[u], b[v]):
            return False
    return True


def max_weight_simple_b_matching(g: WeightedGraph, b: Mapping):
    """Exact maximum-weight simple b-matching; returns (edges, weight).

    Non-positive edges are dropped up front (the empty b-matching has weight
    zero, so an optimum never needs them).  Inputs whose parallel classes
    are interchangeable route through the vertex-copy reduction, everything
    else through the inner-vertex reduction; ``b == 1`` everywhere collapses
    to an ordinary maximum-weight matching.
    """
    pos = [e for e in g.edges if e.weight > 0]
    if not pos:
        return [], 0
    touched = sorted({v for e in pos for v in (e.u, e.v)}, key=str)
    sub = WeightedGraph(tuple(touched), tuple(pos))

    if all(b[v] == 1 for v in touched):
        G = nx.Graph()
        G.add_nodes_from(touched)
        for e in pos:
            cur = G.get_edge_data(e.u, e.v)
            if cur is None or e.weight > cur["weight"]:
                G.add_edge(e.u, e.v, weight=e.weight, edge=e)
        mate = nx.max_weight_matching(G)
        chosen = [G[u][v]["edge"] for u, v in mate]
        return chosen, sum(e.weight for e in chosen)

    if _tutte_pattern(pos, b):
        classes = _parallel_classes(pos)
        reps = tuple(sub.edges[idxs[0]] for idxs in classes.values())
        strict = WeightedGraph(tuple(touched), reps)
        red = tutte_reduce(strict, b)
        matching, _ = max_weight_perfect_matching(red.graph)
        chosen = []
        for rep, mult in red.decode(matching):
            idxs = classes[rep.endpoints()]
            chosen.extend(sub.edges[i] for i in idxs[:mult])
    else:
        red = schrijver_reduce(sub, b)
        matching, _ = max_weight_perfect_matching(red.graph)
        chosen = [e for e, _ in red.decode(matching)]
    return chosen, sum(e.weight for e in chosen)


def enumerate_simple_b_matchings(g: WeightedGraph, b: Mapping, limit: int = 22):
    """All edge subsets satisfying the degree bounds, including the empty set.

    Exhaustive with degree pruning; refuses graphs above ``limit`` edges.
    """
    if len(g.edges) > limit:
        raise TooLarge(f"{len(g.edges)} edges exceed enumeration limit {limit}")
    out = []
    deg: dict = {v: 0 for v in g.vertices}
    chosen: list = []

    def rec(i: int):
        if i == len(g.edges):
            out.append(tuple(chosen))
            return
        rec(i + 1)
        e = g.edges[i]
        if deg[e.u] < b[e.u] and deg[e.v] < b[e.v]:
            deg[e.u] += 1
            deg[e.v] += 1
            chosen.append(e)
            rec(i + 1)
            chosen.pop()
            deg[e.u] -= 1
            deg[e.v] -= 1

    rec(0)
    return out
