import math
import networkx as nx
import numpy as np
import pytest

from paradox_lens.degree_structure import (
    DegreeStatsError,
    assortativity_from_joint,
    degree_stats,
    exceeding_incidences,
    mu_x,
    paradox_weights,
    q_exceed_prob,
)
from paradox_lens.graph import Graph

from .utils import brute_incidence_counts, compare_via_json, graph_from_pairs


def _to_networkx(g: Graph) -> nx.Graph:
    h = nx.Graph()
    h.add_nodes_from(range(g.node_count))
    u, v = g.edges()
    h.add_edges_from(zip(u.tolist(), v.tolist()))
    return h


def test_star_stats(star5: Graph):
    stats = degree_stats(star5)

    assert stats.degrees.tolist() == [1, 4]
    assert stats.node_counts.tolist() == [4, 1]
    assert stats.p_map() == {1: 0.8, 4: 0.2}
    assert stats.q_map() == {1: 0.5, 4: 0.5}
    assert stats.joint_map() == {(1, 4): 0.5, (4, 1): 0.5}
    assert stats.mean_degree == pytest.approx(1.6)
    assert stats.assortativity == pytest.approx(-1.0)
    assert stats.var_q == pytest.approx(2.25)


def test_star_exceedance(star5: Graph):
    stats = degree_stats(star5)
    assert q_exceed_prob(stats) == pytest.approx(0.8)
    assert mu_x(stats) == {1: 1.0, 4: 0.0}


def test_double_star_stats(double_star: Graph):
    stats = degree_stats(double_star)
    assert stats.degrees.tolist() == [1, 4]
    assert stats.node_counts.tolist() == [6, 2]
    # the hub-hub edge contributes 2 ordered pairs out of 14
    assert stats.joint_map()[(4, 4)] == pytest.approx(2 / 14)
    assert stats.assortativity < 0


@pytest.mark.parametrize("fixture", ["k4", "k5", "cycle6"])
def test_regular_graphs_have_zero_assortativity(fixture: str, request):
    stats = degree_stats(request.getfixturevalue(fixture))
    assert stats.assortativity == 0.0
    assert stats.var_q == 0.0
    assert all(v == 0.0 for v in mu_x(stats).values())
    assert q_exceed_prob(stats) == 0.0


def test_assortativity_matches_networkx(random_graphs: list[Graph]):
    checked = 0
    for g in random_graphs:
        stats = degree_stats(g)
        expected = nx.degree_assortativity_coefficient(_to_networkx(g))
        if math.isnan(expected):
            assert stats.assortativity == 0.0
            continue
        assert stats.assortativity == pytest.approx(expected, abs=1e-9)
        checked += 1
    assert checked > 150


def test_joint_is_normalized_and_symmetric(random_graphs: list[Graph]):
    for g in random_graphs:
        stats = degree_stats(g)
        dense = stats.joint.toarray()
        assert dense.sum() == pytest.approx(1.0)
        assert np.array_equal(dense, dense.T)
        assert np.allclose(dense.sum(axis=1), stats.q)
        assert int(stats.joint_counts.sum()) == stats.endpoint_total


def test_exceeding_incidences_match_enumeration(random_graphs: list[Graph]):
    for g in random_graphs:
        stats = degree_stats(g)
        brute = brute_incidence_counts(g)
        above = dict(zip(stats.degrees.tolist(), exceeding_incidences(stats).tolist()))
        for k, (incidences, exceeding) in brute.items():
            assert above[k] == exceeding
        mu = mu_x(stats)
        assert compare_via_json(sorted(mu), sorted(brute))
        for k, (incidences, exceeding) in brute.items():
            assert mu[k] == exceeding / incidences


def test_q_exceed_is_node_average_of_xbar(random_graphs: list[Graph]):
    for g in random_graphs[:50]:
        stats = degree_stats(g)
        deg = g.degree.tolist()
        expected = sum(
            sum(deg[w] > deg[v] for w in g.neighbors(v).tolist()) / deg[v] for v in range(g.node_count) if deg[v]
        )
        assert q_exceed_prob(stats) == pytest.approx(expected / g.node_count)


def test_paradox_weights_exclude_isolated():
    g = graph_from_pairs(4, [(0, 1), (1, 2)])
    stats = degree_stats(g)
    assert stats.degrees.tolist() == [0, 1, 2]
    assert stats.p_map()[0] == 0.25
    assert 0 not in stats.q_map()
    assert paradox_weights(stats) == pytest.approx({1: 2 / 3, 2: 1 / 3})


def test_assortativity_from_single_class():
    assert assortativity_from_joint(np.array([3]), np.array([[1.0]])) == (0.0, 0.0)


def test_assortativity_from_dense_joint():
    r, var_q = assortativity_from_joint(np.array([1, 4]), np.array([[0.0, 0.5], [0.5, 0.0]]))
    assert r == pytest.approx(-1.0)
    assert var_q == pytest.approx(2.25)


def test_no_edges():
    g = Graph.from_edges(3, np.array([], dtype=np.int64), np.array([], dtype=np.int64))
    with pytest.raises(DegreeStatsError):
        degree_stats(g)


def test_frames(star5: Graph):
    stats = degree_stats(star5)
    degree_frame = stats.degree_frame()
    assert degree_frame.columns.tolist() == ["k", "nodes", "p", "endpoints", "q"]
    assert degree_frame["k"].tolist() == [1, 4]

    joint_frame = stats.joint_frame()
    assert joint_frame.columns.tolist() == ["k", "k2", "count", "e"]
    assert joint_frame[["k", "k2", "count"]].values.tolist() == [[1, 4, 4], [4, 1, 4]]
    assert joint_frame["e"].sum() == pytest.approx(1.0)


def test_path_stats(path3: Graph):
    stats = degree_stats(path3)
    assert stats.joint_map() == {(1, 2): 0.5, (2, 1): 0.5}
    assert stats.assortativity == pytest.approx(-1.0)
    assert q_exceed_prob(stats) == pytest.approx(2 / 3)
    assert mu_x(stats) == {1: 1.0, 2: 0.0}


def test_product_joint_has_zero_assortativity():
    rng = np.random.default_rng(7)
    degrees = np.array([1, 2, 3, 5, 8, 13, 40])
    for _ in range(20):
        q = rng.random(degrees.shape[0])
        q /= q.sum()
        r, var_q = assortativity_from_joint(degrees, np.outer(q, q))
        assert var_q > 0
        assert r == pytest.approx(0.0, abs=1e-9)
