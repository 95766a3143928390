import math
import numpy as np
import pandas as pd

from dataclasses import dataclass
from fractions import Fraction

from .graph import Graph

__all__ = [
    "TripletStructureError",
    "DegreeClassNotFoundError",
    "ExceedanceProfile",
    "XbarDistribution",
    "neighbor_exceed_counts",
    "pair_exceed_prob",
    "exceedance_profile",
    "xbar_distribution",
    "smoothed_profile",
]


class TripletStructureError(Exception):
    pass


class DegreeClassNotFoundError(TripletStructureError):
    pass


@dataclass(frozen=True, eq=False)
class ExceedanceProfile:
    """
    Per-degree-class exceedance statistics for every occurring degree k >= 1.

    For a degree-k node v, n_>(v) counts the neighbors with degree strictly greater than k. Class sums:
      - exceeding = sum_v n_>(v), over incidences = k N_k, gives mu_x(k)
      - pair_hits = sum_v C(n_>(v), 2), over pairs = N_k C(k, 2), gives P(k'_i > k, k'_j > k | k)
    cov and rho are masked where undefined (no neighbor pairs, fewer than two pairs, or mu in {0, 1}).
    """

    degrees: np.ndarray
    nodes_per_class: np.ndarray
    incidences: np.ndarray
    exceeding: np.ndarray
    pairs_per_class: np.ndarray
    pair_hits: np.ndarray
    mu: np.ndarray
    cov: np.ma.MaskedArray
    rho: np.ma.MaskedArray

    def mu_map(self) -> dict[int, float]:
        return dict(zip(self.degrees.tolist(), self.mu.tolist()))

    def cov_map(self) -> dict[int, float]:
        """Covariance for every class where it is defined."""
        mask = np.ma.getmaskarray(self.cov)
        return {k: float(c) for k, c, m in zip(self.degrees.tolist(), self.cov.data, mask) if not m}

    def rho_map(self) -> dict[int, float | None]:
        """Correlation per class; None marks an undefined entry."""
        return {
            k: (None if m else float(r))
            for k, r, m in zip(self.degrees.tolist(), self.rho.data, np.ma.getmaskarray(self.rho))
        }

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "k": self.degrees,
                "mu": self.mu,
                "cov": pd.array(self.cov.tolist(fill_value=None), dtype="Float64"),
                "rho": pd.array(self.rho.tolist(fill_value=None), dtype="Float64"),
                "nodes": self.nodes_per_class,
                "pairs": self.pairs_per_class,
                "exceeding": self.exceeding,
                "incidences": self.incidences,
                "pair_hits": self.pair_hits,
            }
        )


@dataclass(frozen=True, eq=False)
class XbarDistribution:
    """Histogram of x-bar = n_>(v) / k over the degree-k nodes; counts[j] is the number of nodes with x-bar = j / k."""

    degree: int
    counts: np.ndarray

    @property
    def histogram(self) -> dict[Fraction, int]:
        return {Fraction(j, self.degree): int(c) for j, c in enumerate(self.counts.tolist()) if c}

    @property
    def node_count(self) -> int:
        return int(self.counts.sum())

    def mean(self) -> Fraction:
        return Fraction(int(np.arange(self.degree + 1) @ self.counts), self.degree * self.node_count)

    def variance(self) -> float:
        j = np.arange(self.degree + 1, dtype=np.float64) / self.degree
        mean = float(self.mean())
        return float(((j - mean) ** 2) @ self.counts) / self.node_count

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "xbar": np.arange(self.degree + 1) / self.degree,
                "count": self.counts,
            }
        )


def neighbor_exceed_counts(g: Graph) -> np.ndarray:
    """n_>(v): number of neighbors of v with degree strictly greater than deg(v)."""
    deg = g.degree
    owner = g.incidence_owner()
    return np.bincount(owner[deg[g.indices] > deg[owner]], minlength=g.node_count).astype(np.int64)


def _class_sums(deg: np.ndarray, n_gt: np.ndarray) -> tuple[np.ndarray, ...]:
    active = deg > 0
    degrees, class_of_node, nodes = np.unique(deg[active], return_inverse=True, return_counts=True)
    n_gt = n_gt[active]

    exceeding = np.zeros(degrees.shape[0], dtype=np.int64)
    np.add.at(exceeding, class_of_node, n_gt)

    pair_hits = np.zeros(degrees.shape[0], dtype=np.int64)
    np.add.at(pair_hits, class_of_node, n_gt * (n_gt - 1) // 2)

    return degrees.astype(np.int64), nodes.astype(np.int64), exceeding, pair_hits


def pair_exceed_prob(g: Graph) -> dict[int, float]:
    """
    P(k'_i > k, k'_j > k | k) for every degree class k >= 2, from the per-node identity
    sum_{i<j} x_i x_j = C(n_>(v), 2); no wedge is materialized.
    """
    deg = g.degree
    if not np.any(deg >= 2):
        raise TripletStructureError("pair statistics need at least one node of degree 2 or more")

    degrees, nodes, _, pair_hits = _class_sums(deg, neighbor_exceed_counts(g))
    return {
        int(k): int(h) / (int(n) * (int(k) * (int(k) - 1) // 2))
        for k, n, h in zip(degrees.tolist(), nodes.tolist(), pair_hits.tolist())
        if k >= 2
    }


def exceedance_profile(g: Graph) -> ExceedanceProfile:
    degrees, nodes, exceeding, pair_hits = _class_sums(g.degree, neighbor_exceed_counts(g))

    incidences = degrees * nodes
    pairs = nodes * (degrees * (degrees - 1) // 2)
    mu = np.array([int(a) / int(b) for a, b in zip(exceeding.tolist(), incidences.tolist())], dtype=np.float64)

    has_pairs = pairs > 0
    pair_prob = np.zeros_like(mu)
    pair_prob[has_pairs] = [int(h) / int(p) for h, p in zip(pair_hits[has_pairs].tolist(), pairs[has_pairs].tolist())]
    cov = np.ma.masked_array(pair_prob - mu * mu, mask=~has_pairs)

    bernoulli_var = mu * (1.0 - mu)
    rho_defined = has_pairs & (pairs >= 2) & (exceeding > 0) & (exceeding < incidences)
    rho_values = np.zeros_like(mu)
    rho_values[rho_defined] = cov.data[rho_defined] / bernoulli_var[rho_defined]
    rho = np.ma.masked_array(np.clip(rho_values, -1.0, 1.0), mask=~rho_defined)

    return ExceedanceProfile(
        degrees=degrees,
        nodes_per_class=nodes,
        incidences=incidences,
        exceeding=exceeding,
        pairs_per_class=pairs,
        pair_hits=pair_hits,
        mu=mu,
        cov=cov,
        rho=rho,
    )


def xbar_distribution(g: Graph, k: int) -> XbarDistribution:
    deg = g.degree
    members = deg == k
    if k < 1 or not np.any(members):
        raise DegreeClassNotFoundError(f"no nodes of degree {k}")
    counts = np.bincount(neighbor_exceed_counts(g)[members], minlength=k + 1).astype(np.int64)
    return XbarDistribution(degree=k, counts=counts)


def smoothed_profile(profile: ExceedanceProfile, min_samples: int = 30, bin_ratio: float = 1.5) -> pd.DataFrame:
    """
    Display smoothing: degree classes are grouped into geometric bins (edges at powers of ``bin_ratio``) and
    consecutive bins are merged until each holds at least ``min_samples`` nodes. mu is pooled from the integer
    counts; rho is the pair-weighted mean of the defined per-class values.
    """

    bin_of_class = np.floor(np.log(profile.degrees) / math.log(bin_ratio) + 1e-12).astype(np.int64)
    rho_mask = np.ma.getmaskarray(profile.rho)

    groups: list[list[int]] = []
    current: list[int] = []
    current_nodes = 0

    for b in np.unique(bin_of_class).tolist():
        members = np.flatnonzero(bin_of_class == b).tolist()
        current.extend(members)
        current_nodes += int(profile.nodes_per_class[members].sum())
        if current_nodes >= min_samples:
            groups.append(current)
            current, current_nodes = [], 0

    if current:
        if groups:
            groups[-1].extend(current)
        else:
            groups.append(current)

    rows = []
    for members in groups:
        idx = np.array(members)
        k_lo, k_hi = int(profile.degrees[idx].min()), int(profile.degrees[idx].max())
        weights = profile.pairs_per_class[idx][~rho_mask[idx]]
        rho_values = profile.rho.data[idx][~rho_mask[idx]]
        rows.append(
            {
                "k_min": k_lo,
                "k_max": k_hi,
                "k_mid": math.sqrt(k_lo * k_hi),
                "classes": idx.shape[0],
                "nodes": int(profile.nodes_per_class[idx].sum()),
                "pairs": int(profile.pairs_per_class[idx].sum()),
                "mu": int(profile.exceeding[idx].sum()) / int(profile.incidences[idx].sum()),
                "rho": float(weights @ rho_values) / int(weights.sum()) if weights.sum() > 0 else None,
            }
        )

    return pd.DataFrame(rows, columns=["k_min", "k_max", "k_mid", "classes", "nodes", "pairs", "mu", "rho"])
