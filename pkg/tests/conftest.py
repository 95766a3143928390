import numpy as np
import pytest

import os

os.environ["PARADOX_LENS_LOG_LEVEL"] = "warning"
os.environ["PARADOX_LENS_THREADS"] = "2"

from paradox_lens.generate import generate_core_periphery
from paradox_lens.graph import Graph

from . import shared_data as sd
from .utils import graph_from_pairs, random_simple_graph


@pytest.fixture
def star5() -> Graph:
    return graph_from_pairs(5, sd.STAR_5_EDGES)


@pytest.fixture
def k4() -> Graph:
    return graph_from_pairs(4, sd.K_4_EDGES)


@pytest.fixture
def k5() -> Graph:
    return graph_from_pairs(5, sd.K_5_EDGES)


@pytest.fixture
def cycle6() -> Graph:
    return graph_from_pairs(6, sd.CYCLE_6_EDGES)


@pytest.fixture
def path3() -> Graph:
    return graph_from_pairs(3, sd.PATH_3_EDGES)


@pytest.fixture
def path4() -> Graph:
    return graph_from_pairs(4, sd.PATH_4_EDGES)


@pytest.fixture
def double_star() -> Graph:
    return graph_from_pairs(8, sd.DOUBLE_STAR_EDGES)


@pytest.fixture
def lone_wedge() -> Graph:
    return graph_from_pairs(5, sd.LONE_WEDGE_EDGES)


@pytest.fixture
def disagreement() -> Graph:
    return graph_from_pairs(7, sd.DISAGREEMENT_EDGES)


@pytest.fixture(scope="session")
def random_graphs() -> list[Graph]:
    rng = np.random.default_rng(sd.TEST_SEED)
    return [random_simple_graph(rng) for _ in range(200)]


@pytest.fixture(scope="session")
def core_periphery_low() -> Graph:
    return generate_core_periphery(sd.CP_N_CORE, sd.CP_N_MID, sd.CP_N_LEAF, sd.CP_WIRING_LOW, sd.TEST_SEED)


@pytest.fixture(scope="session")
def core_periphery_high() -> Graph:
    return generate_core_periphery(sd.CP_N_CORE, sd.CP_N_MID, sd.CP_N_LEAF, sd.CP_WIRING_HIGH, sd.TEST_SEED)


@pytest.fixture(scope="session")
def core_periphery_even() -> Graph:
    return generate_core_periphery(sd.CP_N_CORE, sd.CP_N_MID, sd.CP_N_LEAF, sd.CP_WIRING_EVEN, sd.TEST_SEED)


@pytest.fixture
def star5_file(tmp_path):
    path = tmp_path / "star5.txt"
    path.write_text(sd.STAR_5_EDGE_LIST)
    return path


def _write_pairs(path, pairs: list[tuple[int, int]]):
    path.write_text("".join(f"{a} {b}\n" for a, b in pairs))
    return path


@pytest.fixture
def k5_file(tmp_path):
    return _write_pairs(tmp_path / "k5.txt", sd.K_5_EDGES)


@pytest.fixture
def cycle6_file(tmp_path):
    return _write_pairs(tmp_path / "cycle6.txt", sd.CYCLE_6_EDGES)


@pytest.fixture
def lone_wedge_file(tmp_path):
    return _write_pairs(tmp_path / "lone_wedge.txt", sd.LONE_WEDGE_EDGES)


@pytest.fixture
def double_star_file(tmp_path):
    return _write_pairs(tmp_path / "double_star.txt", sd.DOUBLE_STAR_EDGES)
