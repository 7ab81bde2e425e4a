import random
from fractions import Fraction

import pytest

from mmwsched import opthd, optfd, oracle
from mmwsched.netmodel import (
    MACRO,
    RELAY,
    DirectedNetwork,
    Link,
    ModelFlags,
    Vertex,
    evaluate_schedule,
    validate_schedule,
)
from mmwsched.opthd import NonUniformMultiplicity, NotUniformOrthogonal
from mmwsched.optfd import ModelMismatch

from conftest import random_net, three_node, uniform_orthogonal_net

HD = ModelFlags("HD", "NI", "MAX")


def test_mwhs_uniform_path():
    arcs = [("a", "b", 5, 0), ("a", "b", 5, 1), ("b", "c", 4, 2), ("b", "c", 4, 3)]
    chosen, w = opthd.mwhs_uniform(arcs, 2)
    assert w == 10
    assert {a[3] for a in chosen} == {0, 1}


def test_mwhs_uniform_all_nonpositive():
    chosen, w = opthd.mwhs_uniform([("a", "b", -2, 0), ("a", "b", -2, 1)], 2)
    assert chosen == [] and w == 0


def test_mwhs_uniform_single_pair():
    chosen, w = opthd.mwhs_uniform([("a", "b", 2, i) for i in range(3)], 3)
    assert w == 6 and len(chosen) == 3


def test_mwhs_uniform_rejects_mixed():
    with pytest.raises(NonUniformMultiplicity):
        opthd.mwhs_uniform([("a", "b", 5, 0)], 2)
    with pytest.raises(NonUniformMultiplicity):
        opthd.mwhs_uniform([("a", "b", 5, 0), ("a", "b", 4, 1)], 2)


def test_mwhs_uniform_matches_exhaustive(rng):
    # against a brute-force scan over all degree-bounded bipartite subsets
    import itertools

    for _ in range(25):
        R = rng.randint(1, 3)
        nv = rng.randint(2, 4)
        pairs = list(itertools.combinations(range(nv), 2))
        rng.shuffle(pairs)
        arcs = []
        for u, v in pairs[: rng.randint(1, 3)]:
            w = Fraction(rng.randint(-3, 9))
            if rng.random() < 0.5:
                u, v = v, u
            for k in range(R):
                arcs.append((u, v, w, len(arcs)))
        if 10 < len(arcs):
            continue
        _, got = opthd.mwhs_uniform(arcs, R)
        best = Fraction(0)
        for mask in itertools.product((0, 1), repeat=len(arcs)):
            sub = [a for a, bit in zip(arcs, mask) if bit]
            deg: dict = {}
            send, recv = set(), set()
            ok = True
            for u, v, w, _ in sub:
                deg[u] = deg.get(u, 0) + 1
                deg[v] = deg.get(v, 0) + 1
                send.add(u)
                recv.add(v)
            if any(d > R for d in deg.values()) or (send & recv):
                continue
            best = max(best, sum((w for _, _, w, _ in sub), start=Fraction(0)))
        assert got == best


def test_uniform_three_node_matches_figure():
    net = three_node(HD)
    sol = opthd.opt_hd_mtfs_uniform(net, exact=True)
    assert sol.theta_star == Fraction(24, 7)
    durations = sorted(s.duration for s in sol.schedule.slots)
    assert durations == [Fraction(3, 7), Fraction(4, 7)]
    assert not validate_schedule(net, sol.schedule)
    assert evaluate_schedule(net, sol.schedule).maxmin == Fraction(24, 7)


def test_uniform_single_rf_equals_fd():
    net = DirectedNetwork(
        (Vertex(0, MACRO, 1), Vertex(1, RELAY, 1), Vertex(2, RELAY, 1)),
        (Link(0, 1, (8,)), Link(0, 2, (2,)), Link(1, 2, (3,))),
        flags=HD,
    )
    hd = opthd.opt_hd_mtfs_uniform(net, exact=True)
    fd = optfd.solve(
        DirectedNetwork(net.vertices, net.links, flags=ModelFlags("FD", "NI", "MAX")),
        exact=True,
    )
    assert hd.theta_star == fd.theta_star  # HD constraint is vacuous at r = 1


def test_uniform_macro_split():
    net = DirectedNetwork(
        (Vertex(0, MACRO, 4), Vertex(1, RELAY, 2), Vertex(2, RELAY, 2)),
        (Link(0, 1, (6, 6)), Link(0, 2, (5, 5))),
        flags=HD,
    )
    sol = opthd.opt_hd_mtfs_uniform(net, exact=True)
    assert sol.extras["parallel_copies"] == 2
    # split macro can feed both relays at once with two streams each
    assert sol.theta_star == 10
    assert not validate_schedule(net, sol.schedule)


def test_uniform_validation_errors():
    bad_rf = DirectedNetwork(
        (Vertex(0, MACRO, 3), Vertex(1, RELAY, 2), Vertex(2, RELAY, 2)),
        (Link(0, 1, (6, 6)), Link(0, 2, (5, 5))),
        flags=HD,
    )
    with pytest.raises(NotUniformOrthogonal):
        opthd.opt_hd_mtfs_uniform(bad_rf)
    mixed_relays = DirectedNetwork(
        (Vertex(0, MACRO, 2), Vertex(1, RELAY, 2), Vertex(2, RELAY, 1)),
        (Link(0, 1, (6, 6)), Link(0, 2, (5,))),
        flags=HD,
    )
    with pytest.raises(NotUniformOrthogonal):
        opthd.opt_hd_mtfs_uniform(mixed_relays)


def test_uniform_matches_oracle(rng):
    for _ in range(12):
        net = uniform_orthogonal_net(rng)
        sol = opthd.opt_hd_mtfs_uniform(net, exact=True)
        try:
            theta, _, _ = oracle.brute_force_mtfs(net, HD)
        except oracle.TooLarge:
            continue
        assert sol.theta_star == theta


def test_pds_equals_uniform_optimum(rng):
    for _ in range(12):
        net = uniform_orthogonal_net(rng)
        uni = opthd.opt_hd_mtfs_uniform(net, exact=True)
        sol, _ = opthd.pds(net, exact=True)
        assert sol.theta_star == uni.theta_star


def test_pds_transform_split_allocations():
    net = DirectedNetwork(
        (Vertex(0, MACRO, 5), Vertex(1, RELAY, 2), Vertex(2, RELAY, 2)),
        (Link(0, 1, (6, 6)), Link(0, 2, (5, 5)), Link(1, 2, (3, 3))),
        flags=HD,
    )
    _, tr = opthd.pds(net, exact=True)
    assert tr.d_min == 2
    assert [rf for _, rf in tr.splits[0]] == [2, 3]
    assert sum(rf for _, rf in tr.splits[0]) == 5


def test_pds_streams_activate_together():
    rng = random.Random(3)
    for _ in range(10):
        net = random_net(rng, flags=HD)
        sol, tr = opthd.pds(net, exact=True)
        groups = {frozenset(g) for g in tr.reverse.values()}
        for slot in sol.schedule.slots:
            remaining = set(slot.arcs)
            # the slot decomposes exactly into whole merged-arc groups
            while remaining:
                g = next(g for g in groups if next(iter(remaining)) in g)
                assert g <= remaining
                remaining -= g


def test_pds_respects_bound_and_validator(rng):
    for _ in range(15):
        net = random_net(rng, max_vertices=5, flags=HD)
        sol, _ = opthd.pds(net, exact=True)
        assert not validate_schedule(net, sol.schedule, HD)
        gamma = opthd.pds_bound_gamma(net)
        try:
            theta, _, _ = oracle.brute_force_mtfs(net, HD)
        except oracle.TooLarge:
            continue
        assert sol.theta_star >= theta / gamma.gamma_star
        assert theta >= sol.theta_star  # PDS never beats the optimum


def test_pds_needs_hd_ni():
    with pytest.raises(ModelMismatch):
        opthd.pds(three_node(ModelFlags("FD", "NI", "MAX")))
    with pytest.raises(ModelMismatch):
        opthd.pds(three_node(ModelFlags("HD", "PI", "MAX")))


def test_gamma_formula_max_model():
    net = DirectedNetwork(
        (Vertex(0, MACRO, 5), Vertex(1, RELAY, 3), Vertex(2, RELAY, 3)),
        (Link(0, 1, (6, 6, 6)), Link(0, 2, (5, 5, 5)), Link(1, 2, (3, 3, 3))),
        flags=HD,
    )
    g = opthd.pds_bound_gamma(net)
    assert g.gamma_star == Fraction(5, 3)


def test_gamma_below_two_when_macros_dominate(rng):
    # relays share r, macros have at least r: the guarantee beats 1/2
    for _ in range(10):
        net = uniform_orthogonal_net(rng)
        g = opthd.pds_bound_gamma(net)
        assert g.gamma_star < 2


def test_gamma_uniform_orthogonal_is_one():
    net = three_node(HD)
    assert opthd.pds_bound_gamma(net).gamma_star == 1


def test_fd_hd_sandwich(rng):
    for _ in range(15):
        net = random_net(rng, max_vertices=5)
        fd, _, _ = oracle.brute_force_mtfs(net, ModelFlags("FD", "NI", "MAX"))
        hd, _, _ = oracle.brute_force_mtfs(net, HD)
        assert hd <= fd
