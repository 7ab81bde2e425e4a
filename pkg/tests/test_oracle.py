import itertools
import random
from fractions import Fraction

import pytest

from mmwsched import oracle, optfd
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
from mmwsched.oracle import (
    EmptyClause,
    TooLarge,
    brute_force_mtfs,
    cnf_satisfiable,
    enumerate_activations,
    hd_mtfs_lp,
    max_weight_hd_subgraph,
    node_hd_subgraph_matrix,
    node_matching_matrix,
    relay_rows,
    sat_to_hdmtfs,
    sat_to_mwhs,
)

from conftest import random_net, three_node


def figure_bmatching_net():
    # two streams (8, 6) on the first hop, one stream (3) on the second
    return DirectedNetwork(
        (Vertex(0, MACRO, 2), Vertex(1, RELAY, 2), Vertex(2, RELAY, 2)),
        (Link(0, 1, (8, 6)), Link(1, 2, (3,))),
        flags=ModelFlags("FD", "NI", "REAL"),
    )


def figure_hd_net():
    # two equal streams forward, opposite single streams on the second hop
    return DirectedNetwork(
        (Vertex(0, MACRO, 2), Vertex(1, RELAY, 2), Vertex(2, RELAY, 1)),
        (Link(0, 1, (8, 8)), Link(1, 2, (3,)), Link(2, 1, (3,))),
        flags=ModelFlags("HD", "NI", "MAX"),
    )


def test_node_matching_matrix_figure():
    mat, cols = node_matching_matrix(figure_bmatching_net())
    assert len(cols) == 6
    assert mat == [
        [-8, -6, 0, -14, -8, -6],
        [8, 6, -3, 14, 5, 3],
        [0, 0, 3, 0, 3, 3],
    ]


def test_node_matching_matrix_single_arc():
    net = DirectedNetwork(
        (Vertex(0, MACRO, 1), Vertex(1, RELAY, 1)),
        (Link(0, 1, (Fraction(7, 2),)),),
    )
    mat, cols = node_matching_matrix(net)
    assert cols == [frozenset({(0, 0)})]
    assert mat == [[Fraction(-7, 2)], [Fraction(7, 2)]]


def test_relay_rows_submatrix():
    net = figure_bmatching_net()
    mat, _ = node_matching_matrix(net)
    assert relay_rows(net, mat) == mat[1:]


def test_node_hd_subgraph_matrix_figure():
    mat, cols = node_hd_subgraph_matrix(figure_hd_net())
    assert len(cols) == 7
    assert mat == [
        [-8, -8, 0, 0, -16, -8, -8],
        [8, 8, -3, 3, 16, 11, 11],
        [0, 0, 3, -3, 0, -3, -3],
    ]


def test_node_hd_subgraph_two_vertex_degenerate():
    net = DirectedNetwork(
        (Vertex(0, MACRO, 1), Vertex(1, RELAY, 1)),
        (Link(0, 1, (5,)),),
        flags=ModelFlags("HD", "NI", "MAX"),
    )
    mat, cols = node_hd_subgraph_matrix(net)
    assert cols == [frozenset({(0, 0)})]


def test_enumeration_too_large():
    verts = [Vertex(0, MACRO, 1)] + [Vertex(i, RELAY, 1) for i in range(1, 6)]
    links = tuple(Link(0, i, (1,)) for i in range(1, 6))
    net = DirectedNetwork(tuple(verts), links)
    with pytest.raises(TooLarge):
        enumerate_activations(net, limit=3)


def test_brute_force_three_node():
    net = three_node()
    theta, tput, sched = brute_force_mtfs(net)
    assert theta == 5 and tput == 10
    assert not validate_schedule(net, sched)
    hd_theta, hd_tput, hd_sched = brute_force_mtfs(net, ModelFlags("HD", "NI", "MAX"))
    assert hd_theta == Fraction(24, 7)
    assert not validate_schedule(net, hd_sched, ModelFlags("HD", "NI", "MAX"))


def test_brute_force_single_relay():
    net = DirectedNetwork(
        (Vertex(0, MACRO, 1), Vertex(1, RELAY, 1)),
        (Link(0, 1, (Fraction(13, 4),)),),
    )
    theta, tput, sched = brute_force_mtfs(net)
    assert theta == Fraction(13, 4)
    assert len(sched.slots) == 1


def test_brute_force_respects_interference():
    net = DirectedNetwork(
        (Vertex(0, MACRO, 1), Vertex(1, RELAY, 1), Vertex(2, MACRO, 1), Vertex(3, RELAY, 1)),
        (Link(0, 1, (4,)), Link(2, 3, (4,))),
        frozenset({frozenset((0, 1))}),
        ModelFlags("FD", "PI", "MAX"),
    )
    theta, _, _ = brute_force_mtfs(net)
    assert theta == 2  # interference forces time sharing
    ni = DirectedNetwork(net.vertices, net.links, flags=ModelFlags("FD", "NI", "MAX"))
    theta_ni, _, _ = brute_force_mtfs(ni)
    assert theta_ni == 4


def test_hd_mtfs_lp_matches_enumeration(rng):
    for _ in range(10):
        net = random_net(rng, max_vertices=4, max_links=5,
                         flags=ModelFlags("HD", "NI", "MAX"))
        t1, p1, _ = brute_force_mtfs(net)
        t2, p2, sched = hd_mtfs_lp(net)
        assert t1 == t2
        assert p1 == p2
        assert not validate_schedule(net, sched)


def test_sat_to_mwhs_structure():
    cnf = [[1, 2], [1, -2]]
    net, target = sat_to_mwhs(cnf)
    assert len(net.vertices) == 8  # 3L + K
    assert target == 4  # K + L
    assert all(c == 1 for l in net.links for c in l.stream_capacities)


def test_sat_to_mwhs_decides_satisfiability():
    sat_formula = [[1, 2], [1, -2]]
    _, weight = max_weight_hd_subgraph(sat_to_mwhs(sat_formula)[0])
    assert weight == sat_to_mwhs(sat_formula)[1]
    unsat_formula = [[1], [-1]]
    net, target = sat_to_mwhs(unsat_formula)
    _, weight = max_weight_hd_subgraph(net)
    assert weight < target


def test_sat_to_mwhs_empty_clause():
    with pytest.raises(EmptyClause):
        sat_to_mwhs([[1], []])
    with pytest.raises(EmptyClause):
        sat_to_mwhs([])


def test_sat_to_hdmtfs_structure():
    cnf = [[1, 2], [1, -2]]
    net, theta_t, alpha_t = sat_to_hdmtfs(cnf)
    assert len(net.vertices) == 18  # 8L + K
    assert theta_t == 1
    assert alpha_t == 4 * 2 * 2  # 4L(K/2+1) with L = K = 2
    big = {c for l in net.links for c in l.stream_capacities if c != 1}
    assert big == {2}  # K/2 + 1


def test_sat_to_hdmtfs_decides_satisfiability():
    net, theta_t, alpha_t = sat_to_hdmtfs([[1, 2], [1, -2]])
    theta, tput, _ = hd_mtfs_lp(net)
    assert theta >= theta_t and tput == alpha_t
    net_u, theta_t, alpha_t = sat_to_hdmtfs([[1], [-1]])
    theta_u, tput_u, _ = hd_mtfs_lp(net_u)
    assert not (theta_u >= theta_t and tput_u >= alpha_t)


def test_cnf_satisfiable_truth_table():
    assert cnf_satisfiable([[1, 2], [-1], [-2, 1]]) is False
    assert cnf_satisfiable([[1, -2], [2]]) is True


def test_oracle_equals_optfd(rng):
    for _ in range(20):
        net = random_net(rng, flags=ModelFlags("FD", "NI", "REAL"))
        theta, _, _ = brute_force_mtfs(net)
        assert optfd.solve(net, exact=True).theta_star == theta
