import numpy as np
import pytest

from paradox_lens.constants import DEFINITION_MEDIAN_STRICT, DEFINITION_XBAR_MAJORITY
from paradox_lens.degree_structure import degree_stats
from paradox_lens.generate import generate_2k
from paradox_lens.graph import Graph
from paradox_lens.models import GenerationSpec, LogNormalParams
from paradox_lens.observed import (
    ParadoxError,
    ParadoxProfile,
    critical_degree,
    definition_disagreements,
    mu_half_crossing,
    observed_paradox,
    paradox_indicators,
    weighted_global,
)
from paradox_lens.triplet_structure import exceedance_profile

from . import shared_data as sd
from .utils import brute_paradox_counts, graph_from_pairs


@pytest.mark.parametrize("definition", [DEFINITION_MEDIAN_STRICT, DEFINITION_XBAR_MAJORITY])
def test_star(star5: Graph, definition: str):
    observed = observed_paradox(star5, definition)
    assert observed.global_p == 0.8
    assert observed.k_c == 1
    assert observed.f_map() == {1: 1.0, 4: 0.0}
    assert observed.paradox_nodes.tolist() == [4, 0]
    assert observed.excluded_isolated == 0
    assert observed.definition == definition


@pytest.mark.parametrize("fixture", ["k4", "k5", "cycle6"])
def test_regular_graphs(fixture: str, request):
    g = request.getfixturevalue(fixture)
    for definition in (DEFINITION_MEDIAN_STRICT, DEFINITION_XBAR_MAJORITY):
        observed = observed_paradox(g, definition)
        assert observed.global_p == 0.0
        assert np.all(observed.f == 0.0)
        assert observed.k_c == int(g.degree[0])


def test_path(path4: Graph):
    # ends (degree 1) see a degree-2 neighbor; the middle nodes see one larger neighbor out of two
    observed = observed_paradox(path4, DEFINITION_MEDIAN_STRICT)
    assert observed.f_map() == {1: 1.0, 2: 0.0}
    assert observed.global_p == 0.5


def test_matches_brute_force(random_graphs: list[Graph]):
    for g in random_graphs:
        brute = brute_paradox_counts(g)
        median = observed_paradox(g, DEFINITION_MEDIAN_STRICT)
        majority = observed_paradox(g, DEFINITION_XBAR_MAJORITY)

        assert median.degrees.tolist() == sorted(brute)
        assert median.nodes.tolist() == [brute[k][0] for k in sorted(brute)]
        assert median.paradox_nodes.tolist() == [brute[k][1] for k in sorted(brute)]
        assert majority.paradox_nodes.tolist() == [brute[k][2] for k in sorted(brute)]

        active = sum(v[0] for v in brute.values())
        assert median.global_p == sum(v[1] for v in brute.values()) / active
        assert majority.global_p == sum(v[2] for v in brute.values()) / active
        assert median.global_p == pytest.approx(weighted_global(median.p, median.f))


def test_disagreement(disagreement: Graph):
    assert definition_disagreements(disagreement) == {2: 1}
    assert observed_paradox(disagreement, DEFINITION_MEDIAN_STRICT).global_p == pytest.approx(6 / 7)
    assert observed_paradox(disagreement, DEFINITION_XBAR_MAJORITY).global_p == pytest.approx(5 / 7)


def test_disagreements_only_at_even_degrees(random_graphs: list[Graph]):
    seen = 0
    for g in random_graphs:
        disagreements = definition_disagreements(g)
        assert all(k % 2 == 0 for k in disagreements)
        seen += sum(disagreements.values())
    # the median-strict test is the looser one at even k: some disagreement must show up over 200 graphs
    assert seen > 0


def test_median_strict_implies_no_less_than_majority(random_graphs: list[Graph]):
    for g in random_graphs:
        _, median_strict, xbar_majority = paradox_indicators(g)
        assert np.all(median_strict | ~xbar_majority)


def test_isolated_nodes_excluded():
    g = graph_from_pairs(4, [(0, 1), (1, 2)])
    observed = observed_paradox(g)
    assert observed.excluded_isolated == 1
    assert observed.nodes.tolist() == [2, 1]
    assert observed.p.sum() == pytest.approx(1.0)
    assert observed.global_p == pytest.approx(2 / 3)


def test_critical_degree(star5: Graph, double_star: Graph):
    assert critical_degree(degree_stats(star5)) == 1
    # q(1) = 6/14 < 1/2
    assert critical_degree(degree_stats(double_star)) == 4
    assert observed_paradox(double_star).k_c == 4


def test_mu_half_crossing(star5: Graph, k5: Graph):
    assert mu_half_crossing(exceedance_profile(star5)) == 4
    assert mu_half_crossing(exceedance_profile(k5)) == 4


def test_invalid_definition(star5: Graph):
    with pytest.raises(ParadoxError):
        observed_paradox(star5, "median")  # type: ignore


def test_invalid_profile_source():
    with pytest.raises(ParadoxError):
        ParadoxProfile(
            degrees=np.array([1]),
            f=np.array([0.0]),
            p=np.array([1.0]),
            global_p=0.0,
            k_c=None,
            definition=DEFINITION_XBAR_MAJORITY,
            source="model-4k",  # type: ignore
        )


def test_all_isolated():
    g = Graph.from_edges(3, np.array([], dtype=np.int64), np.array([], dtype=np.int64))
    with pytest.raises(ParadoxError):
        observed_paradox(g)


def test_profile_frame(star5: Graph):
    df = observed_paradox(star5).to_frame()
    assert df.columns.tolist() == ["k", "f_observed", "nodes", "paradox_nodes"]
    assert df["paradox_nodes"].tolist() == [4, 0]


def test_critical_degree_of_lognormal_graph():
    params = LogNormalParams(m=sd.LOGNORMAL_M, s=sd.LOGNORMAL_S, c=0.0)
    g, _ = generate_2k(GenerationSpec(target_e=params, node_count=20_000, seed=sd.TEST_SEED))

    k_c = critical_degree(degree_stats(g))
    # median of the edge-endpoint degrees
    endpoints = np.sort(np.repeat(g.degree, g.degree))
    assert k_c == int(endpoints[g.edge_count - 1])
    assert abs(k_c - np.exp(sd.LOGNORMAL_M)) <= 2
