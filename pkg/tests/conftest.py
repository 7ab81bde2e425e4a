"""Shared fixtures: the worked three-node example and random desk-scale
network generators used by the property tests."""

import random
from fractions import Fraction

import pytest

from mmwsched.netmodel import (
    MACRO,
    RELAY,
    DirectedNetwork,
    Link,
    ModelFlags,
    Vertex,
)


def three_node(flags=ModelFlags("FD", "NI", "MAX")) -> DirectedNetwork:
    """One macro feeding two relays, all with two RF chains; capacities
    chosen so the optimum is 5 under FD and 24/7 under HD."""
    return DirectedNetwork(
        (Vertex(0, MACRO, 2), Vertex(1, RELAY, 2), Vertex(2, RELAY, 2)),
        (Link(0, 1, (8, 8)), Link(0, 2, (2, 2)), Link(1, 2, (3, 3))),
        flags=flags,
    )


def random_net(
    rng: random.Random,
    max_vertices: int = 5,
    max_rf: int = 2,
    max_streams: int = 2,
    max_links: int = 7,
    flags: ModelFlags = ModelFlags("FD", "NI", "MAX"),
    interference_prob: float = 0.0,
) -> DirectedNetwork:
    """Random connected network with rational capacities.

    Every relay is wired to be reachable (a random feed tree), then extra
    links are sprinkled until the budget runs out.
    """
    n = rng.randint(2, max_vertices)
    n_macros = rng.randint(1, max(1, n - 1))
    vertices = []
    for vid in range(n):
        role = MACRO if vid < n_macros else RELAY
        vertices.append(Vertex(vid, role, rng.randint(1, max_rf)))
    rf = {v.id: v.rf_chains for v in vertices}

    def caps(a, b):
        if flags.susm == "MAX":  # full diversity: equal streams, full count
            d = min(rf[a], rf[b])
            return (Fraction(rng.randint(1, 12), rng.randint(1, 3)),) * d
        d = rng.randint(1, min(max_streams, rf[a], rf[b]))
        vals = sorted(
            (Fraction(rng.randint(1, 12), rng.randint(1, 3)) for _ in range(d)),
            reverse=True,
        )
        return tuple(vals)

    links = {}
    for vid in range(n_macros, n):  # feed every relay from something earlier
        src = rng.randrange(0, vid)
        links[(src, vid)] = caps(src, vid)
    budget = max(0, max_links - len(links))
    for _ in range(budget):
        a, b = rng.sample(range(n), 2)
        if vertices[b].role == MACRO or (a, b) in links:
            continue
        links[(a, b)] = caps(a, b)
    ordered = sorted(links)
    pairs = set()
    if interference_prob > 0:
        for i in range(len(ordered)):
            for j in range(i + 1, len(ordered)):
                (t1, h1), (t2, h2) = ordered[i], ordered[j]
                if {t1, h1} & {t2, h2}:
                    continue
                if rng.random() < interference_prob:
                    pairs.add(frozenset((i, j)))
    return DirectedNetwork(
        tuple(vertices),
        tuple(Link(t, h, links[(t, h)]) for t, h in ordered),
        frozenset(pairs),
        flags,
    )


def uniform_orthogonal_net(rng: random.Random, r_relay: int = 2) -> DirectedNetwork:
    """Random instance of the polynomial half-duplex case: equal relay RF
    counts, macro RF counts integer multiples of it, MAX multiplexing."""
    n_relays = rng.randint(2, 4)
    n_macros = rng.randint(1, 2)
    vertices = []
    for m in range(n_macros):
        vertices.append(Vertex(m, MACRO, r_relay * rng.randint(1, 2)))
    for k in range(n_relays):
        vertices.append(Vertex(n_macros + k, RELAY, r_relay))
    rf = {v.id: v.rf_chains for v in vertices}
    links = {}
    for vid in range(n_macros, n_macros + n_relays):
        src = rng.randrange(0, vid)
        d = min(rf[src], rf[vid])
        links[(src, vid)] = (Fraction(rng.randint(1, 10)),) * d
    for _ in range(3):
        a, b = rng.sample(range(n_macros + n_relays), 2)
        if vertices[b].role == MACRO or (a, b) in links:
            continue
        d = min(rf[a], rf[b])
        links[(a, b)] = (Fraction(rng.randint(1, 10)),) * d
    return DirectedNetwork(
        tuple(vertices),
        tuple(Link(t, h, links[(t, h)]) for t, h in sorted(links)),
        flags=ModelFlags("HD", "NI", "MAX"),
    )


@pytest.fixture
def rng():
    return random.Random(20240817)
