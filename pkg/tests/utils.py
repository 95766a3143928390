import json
import numpy as np
import statistics

from itertools import combinations
from pydantic import BaseModel

from paradox_lens.graph import Graph

__all__ = [
    "compare_via_json",
    "compare_model_json",
    "graph_from_pairs",
    "random_simple_graph",
    "brute_paradox_counts",
    "brute_wedge_counts",
    "brute_incidence_counts",
]


def compare_via_json(x: dict | list, y: dict | list) -> bool:
    return json.dumps(x, sort_keys=True) == json.dumps(y, sort_keys=True)


def compare_model_json(x: BaseModel, y: BaseModel, **kwargs) -> bool:
    return compare_via_json(x.model_dump(mode="json", **kwargs), y.model_dump(mode="json", **kwargs))


def graph_from_pairs(n: int, pairs: list[tuple[int, int]]) -> Graph:
    return Graph.from_edges(n, np.array([a for a, _ in pairs], dtype=np.int64), np.array([b for _, b in pairs]))


def random_simple_graph(rng: np.random.Generator, max_nodes: int = 50) -> Graph:
    """G(n, p) with random n in [2, max_nodes] and p in (0, 0.5), re-drawn until it has at least one edge."""
    while True:
        n = int(rng.integers(2, max_nodes + 1))
        density = float(rng.uniform(0.02, 0.5))
        pairs = [(i, j) for i, j in combinations(range(n), 2) if rng.random() < density]
        if pairs:
            return graph_from_pairs(n, pairs)


def _adjacency(g: Graph) -> list[list[int]]:
    return [g.neighbors(v).tolist() for v in range(g.node_count)]


def brute_paradox_counts(g: Graph) -> dict[int, tuple[int, int, int]]:
    """Per degree k >= 1: (nodes, median-strict paradox nodes, xbar-majority paradox nodes), node by node."""
    adj = _adjacency(g)
    deg = [len(a) for a in adj]
    out: dict[int, list[int]] = {}
    for v, nbrs in enumerate(adj):
        k = deg[v]
        if k == 0:
            continue
        nbr_deg = [deg[w] for w in nbrs]
        row = out.setdefault(k, [0, 0, 0])
        row[0] += 1
        row[1] += int(statistics.median(nbr_deg) > k)
        row[2] += int(2 * sum(d > k for d in nbr_deg) > k)
    return {k: tuple(v) for k, v in out.items()}


def brute_wedge_counts(g: Graph) -> dict[int, tuple[int, int]]:
    """Per degree k >= 2: (wedges centered on degree-k nodes, wedges whose two ends both exceed k), by enumeration."""
    adj = _adjacency(g)
    deg = [len(a) for a in adj]
    out: dict[int, list[int]] = {}
    for v, nbrs in enumerate(adj):
        k = deg[v]
        if k < 2:
            continue
        row = out.setdefault(k, [0, 0])
        for i, j in combinations(nbrs, 2):
            row[0] += 1
            row[1] += int(deg[i] > k and deg[j] > k)
    return {k: tuple(v) for k, v in out.items()}


def brute_incidence_counts(g: Graph) -> dict[int, tuple[int, int]]:
    """Per degree k >= 1: (incidences k N_k, incidences whose neighbor has a larger degree)."""
    adj = _adjacency(g)
    deg = [len(a) for a in adj]
    out: dict[int, list[int]] = {}
    for v, nbrs in enumerate(adj):
        if deg[v] == 0:
            continue
        row = out.setdefault(deg[v], [0, 0])
        for w in nbrs:
            row[0] += 1
            row[1] += int(deg[w] > deg[v])
    return {k: tuple(v) for k, v in out.items()}
