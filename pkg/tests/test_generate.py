import io
import math
import numpy as np
import pytest

from paradox_lens.degree_structure import degree_stats
from paradox_lens.generate import (
    CorePeripheryError,
    GenerationError,
    NonGraphicalError,
    class_pair_tv,
    configuration_model,
    fit_target,
    generate_2k,
    generate_core_periphery,
    joint_from_csv,
    joint_target_matrix,
    rewire_to_assortativity,
    spec_digest,
)
from paradox_lens.graph import Graph
from paradox_lens.lognormal import lognormal_assortativity
from paradox_lens.models import CorePeripheryWiring, GenerationSpec, JointDegreeTarget, LogNormalParams
from paradox_lens.observed import observed_paradox
from paradox_lens.triplet_structure import exceedance_profile
from paradox_lens.utils import frame_to_csv

from . import shared_data as sd
from .utils import compare_model_json, graph_from_pairs


REGULAR_3 = JointDegreeTarget(entries=((3, 3, 1.0),))

UNCORRELATED_3_6_12 = JointDegreeTarget(entries=tuple((k, k2, 1 / 9) for k in (3, 6, 12) for k2 in (3, 6, 12)))


@pytest.fixture(scope="module")
def heterogeneous_spec() -> GenerationSpec:
    return GenerationSpec(
        target_e=LogNormalParams(m=1.5, s=0.8, c=0.0),
        node_count=3000,
        seed=sd.TEST_SEED,
        k_max=500,
    )


def _assert_simple(g: Graph):
    u, v = g.edges()
    assert np.all(u < v)
    assert np.unique(u * g.node_count + v).shape[0] == u.shape[0]


def test_regular_target():
    g, report = generate_2k(GenerationSpec(target_e=REGULAR_3, node_count=100, seed=sd.TEST_SEED))

    _assert_simple(g)
    assert g.node_count == 100
    assert report.dropped_conflicts == 0
    assert np.all(g.degree == 3)
    assert g.edge_count == 150
    assert report.realized_assortativity == 0.0
    assert report.joint_tv_distance == pytest.approx(0.0, abs=1e-12)
    assert report.degree_tv_distance == pytest.approx(0.0, abs=1e-12)


def test_generation_is_deterministic():
    spec = GenerationSpec(target_e=UNCORRELATED_3_6_12, node_count=2000, seed=7)
    g1, r1 = generate_2k(spec)
    g2, r2 = generate_2k(spec)

    assert np.array_equal(g1.indptr, g2.indptr)
    assert np.array_equal(g1.indices, g2.indices)
    assert compare_model_json(r1, r2)
    assert r1.spec_digest == spec_digest(spec)

    g3, _ = generate_2k(spec.model_copy(update={"seed": 8}))
    assert not np.array_equal(g1.indices, g3.indices)


def test_uncorrelated_target_has_no_pair_correlation():
    g, report = generate_2k(GenerationSpec(target_e=UNCORRELATED_3_6_12, node_count=20_000, seed=sd.TEST_SEED))

    _assert_simple(g)
    assert report.degree_tv_distance < 0.01
    assert report.joint_tv_distance < 0.02

    profile = exceedance_profile(g)
    for k, rho in profile.rho_map().items():
        if rho is None:
            continue
        pairs = int(profile.pairs_per_class[profile.degrees == k][0])
        assert abs(rho) < 3 / math.sqrt(pairs)


def test_lognormal_target_assortativity():
    params = LogNormalParams(m=sd.LOGNORMAL_M, s=sd.LOGNORMAL_S, c=-0.5)
    spec = GenerationSpec(target_e=params, node_count=100_000, seed=sd.TEST_SEED)
    g, report = generate_2k(spec)

    _assert_simple(g)
    stats = degree_stats(g)
    assert report.degree_tv_distance < 0.01
    assert report.dropped_conflicts == 0
    assert report.realized_assortativity == stats.assortativity
    assert report.target_assortativity == pytest.approx(fit_target(spec).assortativity(), abs=1e-12)
    assert stats.assortativity == pytest.approx(report.target_assortativity, abs=0.03)
    # the populated classes stop well short of the s=1.25 tail, so only the sign matches the closed form
    assert math.copysign(1.0, stats.assortativity) == math.copysign(1.0, lognormal_assortativity(params))


def test_lognormal_target_matches_closed_form_on_covered_support():
    # s=0.5 at 10^5 nodes populates nearly all of the second moment of q
    params = LogNormalParams(m=3.0, s=0.5, c=-0.5)
    g, report = generate_2k(GenerationSpec(target_e=params, node_count=100_000, seed=sd.TEST_SEED))

    _assert_simple(g)
    assert lognormal_assortativity(params) == pytest.approx(-0.4137, abs=1e-4)
    assert report.realized_assortativity == pytest.approx(lognormal_assortativity(params), abs=0.03)


def test_fit_target_respects_stubs_and_simple_graph_capacity(heterogeneous_spec: GenerationSpec):
    fitted = fit_target(heterogeneous_spec)

    assert fitted.node_count == heterogeneous_spec.node_count
    assert np.allclose(fitted.ends, fitted.ends.T)
    assert np.allclose(fitted.ends.sum(axis=1), fitted.degrees * fitted.class_counts, rtol=1e-8)

    cap = np.outer(fitted.class_counts, fitted.class_counts).astype(np.float64)
    np.fill_diagonal(cap, fitted.class_counts * (fitted.class_counts - 1))
    assert np.all(fitted.ends <= cap * (1 + 1e-12))

    assert math.fsum(fitted.p_map().values()) == pytest.approx(1.0)
    assert all(0.0 <= mu <= 1.0 for mu in fitted.mu_map().values())
    # the highest populated class has no larger partner
    assert fitted.mu_map()[int(fitted.degrees[-1])] == 0.0


def test_fit_target_of_uncorrelated_target():
    fitted = fit_target(GenerationSpec(target_e=UNCORRELATED_3_6_12, node_count=20_000, seed=1))
    assert fitted.degrees.tolist() == [3, 6, 12]
    assert fitted.class_counts.tolist() == [11428, 5715, 2857]
    assert fitted.assortativity() == pytest.approx(0.0, abs=1e-3)


def test_class_pair_tv_of_proportional_drops():
    # 4 of 2817 edges dropped (1.4e-3 of the edges), spread over the classes like the edges themselves
    a = np.array([0] * 2000 + [0] * 817)
    b = np.array([0] * 2000 + [1] * 817)
    kept_a = np.array([0] * 1997 + [0] * 816)
    kept_b = np.array([0] * 1997 + [1] * 816)

    shift = class_pair_tv(a, b, kept_a, kept_b)
    assert shift < 1e-3
    assert shift == pytest.approx(abs(2000 / 2817 - 1997 / 2813), abs=1e-12)


def test_class_pair_tv_is_orientation_free():
    a, b = np.array([0, 1, 2]), np.array([1, 2, 2])
    assert class_pair_tv(a, b, b, a) == 0.0
    # all mass moved to another cell
    assert class_pair_tv(a, b, np.array([0]), np.array([0])) == pytest.approx(1.0)


def test_odd_degree_sum_suggests_node_count():
    with pytest.raises(NonGraphicalError) as e:
        generate_2k(GenerationSpec(target_e=REGULAR_3, node_count=101, seed=1))
    assert e.value.suggested_node_count == 102
    assert "try node_count=102" in str(e.value)


def test_parity_fix_moves_one_node():
    # rounded counts (11429, 5714, 2857) give an odd stub total; one degree-3 node becomes degree 6
    g, _ = generate_2k(GenerationSpec(target_e=UNCORRELATED_3_6_12, node_count=20_000, seed=1))
    degrees, counts = np.unique(g.degree, return_counts=True)
    assert int(g.degree.sum()) % 2 == 0
    assert degrees.tolist() == [3, 6, 12]
    assert counts.tolist() == [11428, 5715, 2857]


def test_degree_larger_than_node_count():
    with pytest.raises(NonGraphicalError) as e:
        generate_2k(GenerationSpec(target_e=REGULAR_3, node_count=2, seed=1))
    assert e.value.suggested_node_count == 4


def test_joint_target_matrix():
    degrees, e = joint_target_matrix(UNCORRELATED_3_6_12)
    assert degrees.tolist() == [3, 6, 12]
    assert np.allclose(e, 1 / 9)


def test_joint_from_analyze_csv(double_star: Graph):
    stats = degree_stats(double_star)
    target = joint_from_csv(io.StringIO(frame_to_csv(stats.joint_frame())))

    degrees, e = joint_target_matrix(target)
    assert degrees.tolist() == [1, 4]
    assert np.allclose(e, stats.joint.toarray())


def test_joint_from_csv_e_column():
    target = joint_from_csv(io.StringIO("k,k2,e\n1,2,0.25\n2,1,0.25\n2,2,0.5\n"))
    degrees, e = joint_target_matrix(target)
    assert degrees.tolist() == [1, 2]
    assert np.allclose(e, [[0.0, 0.25], [0.25, 0.5]])


@pytest.mark.parametrize(
    "text",
    [
        "a,b,count\n1,2,3\n",
        "k,k2,weight\n1,2,3\n",
        "k,k2,count\n1,2,0\n2,1,0\n",
    ],
)
def test_joint_from_csv_errors(text: str):
    with pytest.raises(GenerationError):
        joint_from_csv(io.StringIO(text))


def test_joint_from_csv_asymmetric():
    with pytest.raises(ValueError):
        joint_from_csv(io.StringIO("k,k2,count\n1,2,3\n2,2,1\n"))


def test_configuration_model():
    deg = np.array([3] * 40 + [6] * 10 + [1] * 20)
    g, report = configuration_model(deg, seed=sd.TEST_SEED)

    _assert_simple(g)
    assert report.dropped_conflicts == 0
    assert np.array_equal(g.degree, deg)
    assert report.degree_tv_distance == pytest.approx(0.0, abs=1e-12)

    g2, report2 = configuration_model(deg, seed=sd.TEST_SEED)
    assert np.array_equal(g.indices, g2.indices)
    assert report.spec_digest == report2.spec_digest


@pytest.mark.parametrize(
    "deg, error",
    [
        (np.array([1, 1, 1]), NonGraphicalError),
        (np.array([4, 2, 1, 1]), NonGraphicalError),
        (np.array([0, 0]), GenerationError),
        (np.array([2]), GenerationError),
        (np.array([1, -1, 2]), GenerationError),
    ],
)
def test_configuration_model_errors(deg: np.ndarray, error: type):
    with pytest.raises(error):
        configuration_model(deg, seed=1)


# Rewiring ---------------------------------------------------------------------------------------------------------


@pytest.fixture(scope="module")
def heterogeneous_graph(heterogeneous_spec: GenerationSpec) -> Graph:
    return generate_2k(heterogeneous_spec)[0]


def test_rewire_already_within_tolerance(double_star: Graph):
    r = degree_stats(double_star).assortativity
    result = rewire_to_assortativity(double_star, r, 0.01, 1000, seed=1)
    assert result.reached
    assert result.steps == 0
    assert result.graph is double_star


def test_rewire_reaches_nearby_target(heterogeneous_graph: Graph):
    initial = degree_stats(heterogeneous_graph).assortativity
    result = rewire_to_assortativity(heterogeneous_graph, initial - 0.05, 0.01, 200_000, seed=1)

    assert result.reached
    assert abs(result.achieved_r - (initial - 0.05)) <= 0.01 + 1e-9
    assert result.initial_r == initial


def test_rewire_toward_disassortative(heterogeneous_graph: Graph):
    result = rewire_to_assortativity(heterogeneous_graph, -0.3, 0.005, 200_000, seed=sd.TEST_SEED)
    g = result.graph

    _assert_simple(g)
    assert result.achieved_r < result.initial_r - 0.1
    assert result.accepted_swaps > 0
    assert result.steps <= 200_000
    # double-edge swaps keep every node's degree
    assert np.array_equal(g.degree, heterogeneous_graph.degree)
    assert g.edge_count == heterogeneous_graph.edge_count

    before = observed_paradox(heterogeneous_graph).global_p
    after = observed_paradox(g).global_p
    assert after > before


def test_rewire_regular_graph_unreachable(cycle6: Graph):
    result = rewire_to_assortativity(cycle6, 0.5, 0.01, 1000, seed=1)
    assert not result.reached
    assert result.achieved_r == 0.0
    assert result.accepted_swaps == 0


def test_rewire_errors(star5: Graph):
    with pytest.raises(GenerationError):
        rewire_to_assortativity(star5, 1.5, 0.01, 100, seed=1)
    with pytest.raises(GenerationError):
        rewire_to_assortativity(graph_from_pairs(2, [(0, 1)]), 0.0, 0.01, 100, seed=1)


# Core-periphery ---------------------------------------------------------------------------------------------------


def test_core_periphery_structure(core_periphery_low: Graph):
    g = core_periphery_low
    deg = g.degree
    n_core, n_mid = sd.CP_N_CORE, sd.CP_N_MID
    mid = range(n_core, n_core + n_mid)

    assert g.node_count == sd.CP_N_CORE + sd.CP_N_MID + sd.CP_N_LEAF
    _assert_simple(g)
    assert np.all(deg[n_core : n_core + n_mid] == sd.CP_MID_DEGREE)

    leaf_deg = deg[n_core + n_mid :]
    assert leaf_deg.min() >= 1
    assert leaf_deg.max() - leaf_deg.min() <= 1
    assert leaf_deg.max() < sd.CP_MID_DEGREE

    # every mid node sends 9 edges to one tier and 1 to the other
    core_links = {int(np.count_nonzero(g.neighbors(v) < n_core)) for v in mid}
    assert core_links == {1, 9}

    # leaves only touch the mid tier
    for v in range(n_core + n_mid, g.node_count, 500):
        nbrs = g.neighbors(v)
        assert np.all((nbrs >= n_core) & (nbrs < n_core + n_mid))


def test_core_periphery_deterministic():
    wiring = CorePeripheryWiring(mid_degree=4, beta=0.5, majority=0.75)
    g1 = generate_core_periphery(10, 50, 50, wiring, seed=3)
    g2 = generate_core_periphery(10, 50, 50, wiring, seed=3)
    assert np.array_equal(g1.indices, g2.indices)


@pytest.mark.parametrize(
    "n_core, n_mid, n_leaf, beta",
    [
        (0, 10, 10, 0.5),
        (5, 10, 100, 0.5),
        (20, 10, 1000, 1.0),
        (20, 100, 9, 0.0),
    ],
)
def test_core_periphery_infeasible(n_core: int, n_mid: int, n_leaf: int, beta: float):
    wiring = CorePeripheryWiring(mid_degree=10, beta=beta, majority=0.9)
    with pytest.raises(CorePeripheryError):
        generate_core_periphery(n_core, n_mid, n_leaf, wiring, seed=1)


def test_core_periphery_rejects_core_below_mid_degree():
    # 0.1 * 49 core-core edges plus 10 * 1 / 50 mid links per core node is about 5 < 10
    wiring = CorePeripheryWiring(mid_degree=10, beta=0.0, majority=0.9, core_density=0.1)
    with pytest.raises(CorePeripheryError, match="does not exceed mid_degree=10"):
        generate_core_periphery(50, 10, 30, wiring, seed=1)


def test_core_periphery_core_degrees_exceed_mid_degree(core_periphery_low: Graph):
    assert sd.CP_WIRING_LOW.expected_core_degree(sd.CP_N_CORE, sd.CP_N_MID) == pytest.approx(151.5)
    assert core_periphery_low.degree[: sd.CP_N_CORE].min() > sd.CP_MID_DEGREE
