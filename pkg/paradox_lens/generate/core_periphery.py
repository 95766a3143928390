import math
import numpy as np

from ..graph import Graph
from ..logger import logger
from ..models import CorePeripheryWiring
from .two_k import GenerationError

__all__ = [
    "CorePeripheryError",
    "generate_core_periphery",
]


class CorePeripheryError(GenerationError):
    pass


def generate_core_periphery(n_core: int, n_mid: int, n_leaf: int, wiring: CorePeripheryWiring, seed: int) -> Graph:
    """
    Three-tier graph with controlled neighbor-neighbor degree correlation at the mid tier.

    Node ids: core 0..n_core-1, mid tier next, leaves last. The core is a G(n_core, core_density) random graph. Every
    mid node has exactly mid_degree edges; with probability beta it sends round(mid_degree * majority) of them to
    distinct core nodes and the rest to leaves, otherwise the split is reversed. Leaf stubs are dealt round-robin over
    a shuffled leaf order, so leaf degrees differ by at most one. Tier sizes whose expected core degree would not exceed
    mid_degree are rejected.
    """

    if min(n_core, n_mid, n_leaf) < 1:
        raise CorePeripheryError("every tier needs at least one node")

    d = wiring.mid_degree
    major, minor = wiring.core_link_split

    if max(major, minor) > min(n_core, n_leaf):
        raise CorePeripheryError(
            f"mid_degree={d} with majority={wiring.majority} needs {major} distinct core and leaf nodes "
            f"(have {n_core} core, {n_leaf} leaves)"
        )

    try:
        wiring.check_tiers(n_core, n_mid)
    except ValueError as e:
        raise CorePeripheryError(str(e)) from e

    rng = np.random.default_rng(seed)
    n = n_core + n_mid + n_leaf

    rows, cols = np.triu_indices(n_core, k=1)
    kept = rng.random(rows.shape[0]) < wiring.core_density
    src, dst = [rows[kept]], [cols[kept]]

    core_preferring = rng.random(n_mid) < wiring.beta
    core_links = np.where(core_preferring, major, minor)
    leaf_links = d - core_links

    leaf_stubs = int(leaf_links.sum())
    if leaf_stubs < n_leaf:
        raise CorePeripheryError(f"{leaf_stubs} mid-to-leaf edges cannot give all {n_leaf} leaves a neighbor")
    if math.ceil(leaf_stubs / n_leaf) >= d:
        raise CorePeripheryError(
            f"leaves would reach degree {math.ceil(leaf_stubs / n_leaf)}, not below mid_degree={d}; add leaves"
        )

    mid_ids = np.arange(n_core, n_core + n_mid, dtype=np.int64)

    for node, count in zip(mid_ids.tolist(), core_links.tolist()):
        if count:
            src.append(np.full(count, node, dtype=np.int64))
            dst.append(rng.choice(n_core, size=count, replace=False))

    # consecutive stubs of one mid node land on distinct leaves since leaf_links <= n_leaf
    leaf_order = n_core + n_mid + rng.permutation(n_leaf)
    src.append(np.repeat(mid_ids, leaf_links))
    dst.append(leaf_order[np.arange(leaf_stubs) % n_leaf])

    g = Graph.from_edges(n, np.concatenate(src), np.concatenate(dst))

    logger.info(
        f"Generated core-periphery graph: {n_core} core, {n_mid} mid, {n_leaf} leaves, {g.edge_count} edges "
        f"({int(core_preferring.sum())} core-preferring mid nodes, seed {seed})"
    )

    return g
