import math
import numpy as np

from dataclasses import dataclass
from functools import lru_cache
from scipy import special
from typing import NamedTuple, Sequence

from .models import LogNormalParams
from .prediction import gaussian_majority
from .observed import weighted_global

__all__ = [
    "LogNormalError",
    "TruncationError",
    "DEFAULT_TRUNCATION_TOLERANCE",
    "DENSE_K_MAX_LIMIT",
    "LogNormalMarginal",
    "SweepPoint",
    "lognormal_assortativity",
    "lognormal_mu_x",
    "lognormal_f",
    "lognormal_marginal",
    "lognormal_joint",
    "discretize_joint",
    "transition_width",
    "sweep_global_paradox",
]


DEFAULT_TRUNCATION_TOLERANCE = 1e-6

# Largest degree support for dense joint matrices
DENSE_K_MAX_LIMIT = 4_000

# Rows of the joint kernel evaluated at a time when summing it on 1..k_max
_ROW_BLOCK = 256


class LogNormalError(Exception):
    pass


class TruncationError(LogNormalError):
    def __init__(self, k_max: int, truncated_mass: float, tolerance: float):
        self.k_max = k_max
        self.truncated_mass = truncated_mass
        super().__init__(
            f"k_max={k_max} truncates a degree-distribution mass of {truncated_mass:.3e} "
            f"(tolerance {tolerance:.1e}); increase k_max"
        )


@dataclass(frozen=True, eq=False)
class LogNormalMarginal:
    """
    Integer-degree marginals of the bivariate log-normal model on k = 1..k_max: q(k) is the row sum of the discretized
    joint e(k, k') on that support, so it matches lognormal_joint and discretize_joint, and p(k) is proportional to
    q(k) / k.
    """

    degrees: np.ndarray
    q: np.ndarray
    p: np.ndarray
    # Mass of p beyond k_max + 1/2 in the continuous model
    truncated_mass: float

    @property
    def mean_degree(self) -> float:
        return float(self.degrees @ self.p)


class SweepPoint(NamedTuple):
    c: float
    r: float
    p_paradox: float


def lognormal_assortativity(params: LogNormalParams) -> float:
    """r = (e^{c s^2} - 1) / (e^{s^2} - 1); bounded by -e^{-s^2} <= r <= 1."""
    s2 = params.s * params.s
    return float(math.expm1(params.c * s2) / math.expm1(s2))


def _conditional_scale(params: LogNormalParams) -> float:
    return math.sqrt((1.0 - params.c) / (1.0 + params.c)) / params.s


def lognormal_mu_x(params: LogNormalParams, k: float | np.ndarray) -> float | np.ndarray:
    """
    mu_x(k) = 1 - Phi(((log k - m) / s) sqrt((1 - c) / (1 + c))): probability that the far end of an edge whose near
    end has degree k has a larger degree. Equals 1/2 at k = e^m for every (s, c).
    """
    k_arr = np.asarray(k, dtype=np.float64)
    if np.any(k_arr <= 0):
        raise LogNormalError("mu_x is defined for positive degrees only")
    mu = special.ndtr(-(np.log(k_arr) - params.m) * _conditional_scale(params))
    return float(mu) if np.ndim(k) == 0 else mu


def lognormal_f(params: LogNormalParams, k: int | np.ndarray) -> float | np.ndarray:
    """2K Gaussian paradox probability evaluated at the closed-form mu_x(k); f(1) = mu_x(1)."""
    k_arr = np.atleast_1d(np.asarray(k, dtype=np.int64))
    if np.any(k_arr < 1):
        raise LogNormalError("f is defined for degrees k >= 1")
    mu = np.atleast_1d(lognormal_mu_x(params, k_arr.astype(np.float64)))
    f, _ = gaussian_majority(k_arr, mu, np.zeros_like(mu))
    return float(f[0]) if np.ndim(k) == 0 else f


def _truncated_p_mass(params: LogNormalParams, k_max: int) -> float:
    # p(k) ~ q(k) / k is again log-normal, with log-mean m - s^2
    return float(special.ndtr(-(math.log(k_max + 0.5) - (params.m - params.s * params.s)) / params.s))


def _joint_kernel(params: LogNormalParams, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    # Bivariate log-normal density at the unit-cell midpoints (rows x cols), up to a constant
    x = (np.log(rows) - params.m) / params.s
    y = (np.log(cols) - params.m) / params.s
    c = params.c
    quad = (x[:, None] ** 2 - 2.0 * c * np.outer(x, y) + y[None, :] ** 2) / (2.0 * (1.0 - c * c))
    return np.exp(-quad) / np.outer(rows, cols)


@lru_cache(maxsize=32)
def _kernel_row_sums(params: LogNormalParams, k_max: int) -> np.ndarray:
    kf = np.arange(1, k_max + 1, dtype=np.float64)
    sums = np.concatenate(
        [_joint_kernel(params, kf[i : i + _ROW_BLOCK], kf).sum(axis=1) for i in range(0, k_max, _ROW_BLOCK)]
    )
    # shared through the cache
    sums.setflags(write=False)
    return sums


def lognormal_marginal(
    params: LogNormalParams,
    k_max: int,
    tolerance: float = DEFAULT_TRUNCATION_TOLERANCE,
) -> LogNormalMarginal:
    if k_max < 2:
        raise LogNormalError(f"k_max must be at least 2, got {k_max}")

    truncated = _truncated_p_mass(params, k_max)
    if truncated > tolerance:
        raise TruncationError(k_max, truncated, tolerance)

    degrees = np.arange(1, k_max + 1, dtype=np.int64)
    rows = _kernel_row_sums(params, k_max)

    q = rows / rows.sum()
    p = q / degrees
    p /= p.sum()

    return LogNormalMarginal(degrees=degrees, q=q, p=p, truncated_mass=truncated)


def lognormal_joint(params: LogNormalParams, degrees: np.ndarray) -> np.ndarray:
    """
    Midpoint evaluation of the bivariate log-normal e(k, k') on the unit cells of the given degrees, renormalized to sum
    to 1 over that support.
    :return: Dense symmetric matrix with e[i, j] = e(degrees[i], degrees[j])
    """

    kf = np.asarray(degrees, dtype=np.float64)
    if kf.shape[0] > DENSE_K_MAX_LIMIT:
        raise LogNormalError(f"dense discretization supports at most {DENSE_K_MAX_LIMIT} degree classes")
    if np.any(kf < 1):
        raise LogNormalError("degrees must be positive")

    e = _joint_kernel(params, kf, kf)
    e /= e.sum()
    # Exact symmetry; the formula is symmetric up to rounding
    return 0.5 * (e + e.T)


def discretize_joint(params: LogNormalParams, k_max: int) -> tuple[np.ndarray, np.ndarray]:
    """
    Dense midpoint discretization of the bivariate log-normal e(k, k') for k, k' = 1..k_max.
    :return: (degrees, e) with e[i, j] = e(degrees[i], degrees[j])
    """

    if not (2 <= k_max <= DENSE_K_MAX_LIMIT):
        raise LogNormalError(f"dense discretization needs 2 <= k_max <= {DENSE_K_MAX_LIMIT}, got {k_max}")

    degrees = np.arange(1, k_max + 1, dtype=np.int64)
    return degrees, lognormal_joint(params, degrees)


def transition_width(params: LogNormalParams, upper: float = 0.9, lower: float = 0.1, k_max: int = 10_000) -> int:
    """Number of integer degrees 1 <= k <= k_max whose analytic f(k) lies strictly between ``lower`` and ``upper``."""
    if not (0.0 <= lower < upper <= 1.0):
        raise LogNormalError(f"expected 0 <= lower < upper <= 1, got lower={lower}, upper={upper}")
    f = lognormal_f(params, np.arange(1, k_max + 1, dtype=np.int64))
    return int(np.count_nonzero((f > lower) & (f < upper)))


def sweep_global_paradox(
    m: float,
    s: float,
    c_grid: Sequence[float],
    k_max: int,
    tolerance: float = DEFAULT_TRUNCATION_TOLERANCE,
) -> list[SweepPoint]:
    """
    Analytic global paradox fraction P = sum_k p(k) f(k) for each correlation c in ``c_grid``, with p(k) the
    discretized marginal of that c. Points are returned in grid order.
    """

    points = []
    for c in c_grid:
        params = LogNormalParams(m=m, s=s, c=c)
        marginal = lognormal_marginal(params, k_max, tolerance)
        points.append(
            SweepPoint(
                c=params.c,
                r=lognormal_assortativity(params),
                p_paradox=weighted_global(marginal.p, lognormal_f(params, marginal.degrees)),
            )
        )
    return points
