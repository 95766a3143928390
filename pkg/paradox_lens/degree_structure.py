import math
import numpy as np
import pandas as pd

from dataclasses import dataclass
from functools import cached_property
from scipy import sparse

from .graph import Graph

__all__ = [
    "DegreeStatsError",
    "DegreeStats",
    "degree_stats",
    "assortativity_from_joint",
    "q_exceed_prob",
    "mu_x",
    "exceeding_incidences",
    "paradox_weights",
]


class DegreeStatsError(Exception):
    pass


@dataclass(frozen=True, eq=False)
class DegreeStats:
    """
    1K and 2K summary of a graph. Probabilities are kept alongside the integer counts they are derived from, so every
    value is an exact ratio of integers: p(k) = node_counts / node_total, q(k) = endpoint_counts / (2 * edge_count),
    e(k, k') = joint_counts / (2 * edge_count).
    """

    # Occurring degrees, ascending (includes 0 when the graph has isolated nodes)
    degrees: np.ndarray
    node_counts: np.ndarray
    node_total: int
    edge_count: int
    # Ordered endpoint-pair counts indexed by degree class position; symmetric
    joint_counts: sparse.csr_array
    assortativity: float
    var_q: float

    @property
    def endpoint_total(self) -> int:
        return 2 * self.edge_count

    @property
    def endpoint_counts(self) -> np.ndarray:
        return self.degrees * self.node_counts

    @property
    def p(self) -> np.ndarray:
        return self.node_counts / self.node_total

    @property
    def q(self) -> np.ndarray:
        return self.endpoint_counts / self.endpoint_total

    @property
    def mean_degree(self) -> float:
        return self.endpoint_total / self.node_total

    @cached_property
    def joint(self) -> sparse.csr_array:
        return self.joint_counts / self.endpoint_total

    def p_map(self) -> dict[int, float]:
        return dict(zip(self.degrees.tolist(), self.p.tolist()))

    def q_map(self) -> dict[int, float]:
        return {k: v for k, v in zip(self.degrees.tolist(), self.q.tolist()) if k > 0}

    def joint_map(self) -> dict[tuple[int, int], float]:
        coo = self.joint.tocoo()
        return {
            (int(self.degrees[i]), int(self.degrees[j])): float(v)
            for i, j, v in zip(coo.row.tolist(), coo.col.tolist(), coo.data.tolist())
        }

    def class_index(self, k: int) -> int | None:
        i = int(np.searchsorted(self.degrees, k))
        return i if i < self.degrees.shape[0] and self.degrees[i] == k else None

    def degree_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "k": self.degrees,
                "nodes": self.node_counts,
                "p": self.p,
                "endpoints": self.endpoint_counts,
                "q": self.q,
            }
        )

    def joint_frame(self) -> pd.DataFrame:
        coo = self.joint_counts.tocoo()
        order = np.lexsort((coo.col, coo.row))
        rows, cols, counts = coo.row[order], coo.col[order], coo.data[order]
        return pd.DataFrame(
            {
                "k": self.degrees[rows],
                "k2": self.degrees[cols],
                "count": counts,
                "e": counts / self.endpoint_total,
            }
        )


def assortativity_from_joint(degrees: np.ndarray, e: sparse.sparray | np.ndarray) -> tuple[float, float]:
    """
    Evaluates r = (1 / Var_q(k)) * sum_{k,k'} k k' [e(k,k') - q(k) q(k')] for a symmetric joint degree distribution
    e whose rows and columns are indexed by ``degrees``.
    :return: (r, Var_q(k)); r is 0 by convention when q is concentrated on a single degree.
    """

    k = np.asarray(degrees, dtype=np.float64)
    q = np.asarray(e.sum(axis=1)).ravel()

    if np.count_nonzero(q) <= 1:
        return 0.0, 0.0

    mean_q = float(k @ q)
    var_q = float((k * k) @ q) - mean_q * mean_q
    if var_q <= 0.0:
        return 0.0, 0.0

    e_kk = float(k @ np.asarray(e @ k).ravel())
    r = (e_kk - mean_q * mean_q) / var_q
    return min(1.0, max(-1.0, r)), var_q


def degree_stats(g: Graph) -> DegreeStats:
    if g.edge_count == 0:
        raise DegreeStatsError("degree statistics undefined")

    deg = g.degree
    degrees, node_counts = np.unique(deg, return_counts=True)
    class_of_node = np.searchsorted(degrees, deg)

    rows = class_of_node[g.incidence_owner()]
    cols = class_of_node[g.indices]
    n_classes = degrees.shape[0]

    joint_counts = sparse.coo_array(
        (np.ones(rows.shape[0], dtype=np.int64), (rows, cols)),
        shape=(n_classes, n_classes),
    ).tocsr()
    joint_counts.sum_duplicates()

    r, var_q = assortativity_from_joint(degrees, joint_counts / (2 * g.edge_count))

    return DegreeStats(
        degrees=degrees.astype(np.int64),
        node_counts=node_counts.astype(np.int64),
        node_total=g.node_count,
        edge_count=g.edge_count,
        joint_counts=joint_counts,
        assortativity=r,
        var_q=var_q,
    )


def exceeding_incidences(stats: DegreeStats) -> np.ndarray:
    """
    Per degree class, the number of (degree-k node, neighbor) incidences whose neighbor degree is strictly greater
    than k; ties count as not exceeding.
    """
    coo = stats.joint_counts.tocoo()
    above = coo.col > coo.row  # class positions are ordered by degree
    counts = np.zeros(stats.degrees.shape[0], dtype=np.int64)
    np.add.at(counts, coo.row[above], coo.data[above].astype(np.int64))
    return counts


def q_exceed_prob(stats: DegreeStats) -> float:
    """Q_> = <k> sum_k sum_{k' > k} e(k, k') / k."""
    above = exceeding_incidences(stats)
    return math.fsum(
        int(a) / (int(k) * stats.node_total) for k, a in zip(stats.degrees.tolist(), above.tolist()) if k > 0
    )


def mu_x(stats: DegreeStats) -> dict[int, float]:
    """mu_x(k) = sum_{k' > k} e(k, k') / q(k) for every occurring degree k >= 1."""
    above = exceeding_incidences(stats)
    return {
        int(k): int(a) / int(ends)
        for k, a, ends in zip(stats.degrees.tolist(), above.tolist(), stats.endpoint_counts.tolist())
        if k > 0
    }


def paradox_weights(stats: DegreeStats) -> dict[int, float]:
    """p(k) conditioned on k >= 1; isolated nodes take no part in paradox statistics."""
    active = stats.node_total - sum(int(c) for k, c in zip(stats.degrees, stats.node_counts) if k == 0)
    return {int(k): int(c) / active for k, c in zip(stats.degrees.tolist(), stats.node_counts.tolist()) if k > 0}
