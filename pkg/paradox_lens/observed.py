import math
import numpy as np
import pandas as pd

from dataclasses import dataclass, field
from typing import Literal

from .constants import DEFINITION_MEDIAN_STRICT, DEFINITIONS, SOURCE_OBSERVED, SOURCES
from .degree_structure import DegreeStats
from .graph import Graph
from .triplet_structure import ExceedanceProfile, neighbor_exceed_counts

__all__ = [
    "ParadoxError",
    "Definition",
    "Source",
    "ParadoxProfile",
    "paradox_indicators",
    "observed_paradox",
    "critical_degree",
    "critical_degree_from_counts",
    "definition_disagreements",
    "mu_half_crossing",
    "weighted_global",
]


Definition = Literal["median-strict", "xbar-majority"]
Source = Literal["observed", "model-2k-binomial", "model-2k-gauss", "model-3k"]


class ParadoxError(Exception):
    pass


@dataclass(frozen=True, eq=False)
class ParadoxProfile:
    """
    Per-degree-class paradox probability f(k) for degrees k >= 1, with the weights p(k) it is averaged under:
    global_p = sum_k p(k) f(k). For observed profiles, p(k) is the degree distribution of non-isolated nodes and
    paradox_nodes holds the integer counts behind f.
    """

    degrees: np.ndarray
    f: np.ndarray
    p: np.ndarray
    global_p: float
    k_c: int | None
    definition: Definition
    source: Source
    nodes: np.ndarray | None = None
    paradox_nodes: np.ndarray | None = None
    excluded_isolated: int = 0
    flags: dict[int, tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self):
        if self.definition not in DEFINITIONS:
            raise ParadoxError(f"unknown paradox definition: {self.definition}")
        if self.source not in SOURCES:
            raise ParadoxError(f"unknown profile source: {self.source}")

    def f_map(self) -> dict[int, float]:
        return dict(zip(self.degrees.tolist(), self.f.tolist()))

    def to_frame(self, column: str = "f_observed") -> pd.DataFrame:
        data = {"k": self.degrees, column: self.f}
        if self.nodes is not None:
            data["nodes"] = self.nodes
        if self.paradox_nodes is not None:
            data["paradox_nodes"] = self.paradox_nodes
        return pd.DataFrame(data)


def critical_degree_from_counts(degrees: np.ndarray, endpoint_counts: np.ndarray) -> int:
    """Smallest degree at which the cumulative edge-endpoint distribution q reaches 1/2."""
    cumulative = np.cumsum(endpoint_counts)
    return int(degrees[np.searchsorted(2 * cumulative, cumulative[-1], side="left")])


def critical_degree(stats: DegreeStats) -> int:
    """k_c = Median(q(k)), with the cumulative >= 1/2 convention."""
    return critical_degree_from_counts(stats.degrees, stats.endpoint_counts)


def paradox_indicators(g: Graph) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    For every node with degree >= 1, whether it is in the paradox regime under each definition.
    :return: (active node ids, median-strict indicator, xbar-majority indicator)
    """

    deg = g.degree
    active = np.flatnonzero(deg > 0)
    if active.shape[0] == 0:
        raise ParadoxError("every node is isolated")

    owner = g.incidence_owner()
    nbr_deg = deg[g.indices]
    # sort neighbor degrees within each node's segment; segments stay in place since owner is non-decreasing
    sorted_nbr_deg = nbr_deg[np.lexsort((nbr_deg, owner))]

    k = deg[active]
    start = g.indptr[active]
    # Even k: the median is the mean of the two central values, so median > k iff their sum > 2k
    central_sum = sorted_nbr_deg[start + (k - 1) // 2] + sorted_nbr_deg[start + k // 2]
    median_strict = central_sum > 2 * k

    xbar_majority = 2 * neighbor_exceed_counts(g)[active] > k

    return active, median_strict, xbar_majority


def observed_paradox(g: Graph, definition: Definition = DEFINITION_MEDIAN_STRICT) -> ParadoxProfile:
    active, median_strict, xbar_majority = paradox_indicators(g)

    match definition:
        case "median-strict":
            in_paradox = median_strict
        case "xbar-majority":
            in_paradox = xbar_majority
        case _:
            raise ParadoxError(f"unknown paradox definition: {definition}")

    deg = g.degree
    degrees, class_of_node, nodes = np.unique(deg[active], return_inverse=True, return_counts=True)
    paradox_nodes = np.bincount(class_of_node[in_paradox], minlength=degrees.shape[0]).astype(np.int64)

    active_total = int(active.shape[0])
    f = np.array([int(a) / int(b) for a, b in zip(paradox_nodes.tolist(), nodes.tolist())], dtype=np.float64)

    return ParadoxProfile(
        degrees=degrees.astype(np.int64),
        f=f,
        p=nodes / active_total,
        global_p=int(paradox_nodes.sum()) / active_total,
        k_c=critical_degree_from_counts(degrees, degrees * nodes),
        definition=definition,
        source=SOURCE_OBSERVED,
        nodes=nodes.astype(np.int64),
        paradox_nodes=paradox_nodes,
        excluded_isolated=g.node_count - active_total,
    )


def definition_disagreements(g: Graph) -> dict[int, int]:
    """
    Number of nodes per degree class whose median-strict and xbar-majority verdicts differ. Only even degrees can
    appear: for odd k the two definitions coincide.
    """
    active, median_strict, xbar_majority = paradox_indicators(g)
    k = g.degree[active][median_strict != xbar_majority]
    degrees, counts = np.unique(k, return_counts=True)
    return dict(zip(degrees.tolist(), counts.tolist()))


def mu_half_crossing(profile: ExceedanceProfile) -> int | None:
    """Smallest degree class whose empirical mu_x(k) is at most 1/2, or None if mu_x stays above 1/2."""
    below = np.flatnonzero(profile.mu <= 0.5)
    return int(profile.degrees[below[0]]) if below.shape[0] else None


def weighted_global(weights: np.ndarray, f: np.ndarray) -> float:
    return math.fsum((weights * f).tolist())
