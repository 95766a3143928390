import numpy as np

from scipy import special

from .constants import (
    DEFINITION_XBAR_MAJORITY,
    FLAG_VARIANCE_CLAMPED,
    SOURCE_2K_BINOMIAL,
    SOURCE_2K_GAUSS,
    SOURCE_3K,
)
from .logger import logger
from .models import ModelInputs
from .observed import ParadoxProfile, weighted_global

__all__ = [
    "ModelInputError",
    "DEFAULT_VARIANCE_FLOOR_EPSILON",
    "std_normal_cdf",
    "binomial_majority",
    "gaussian_majority",
    "predict_2k_binomial",
    "predict_2k_gauss",
    "predict_3k",
    "predict_all",
]


# Models compare sum_i x_i > k/2 with ties excluded, i.e. the xbar-majority definition.
# A strict majority of k neighbors means at least floor(k/2) + 1 of them.

DEFAULT_VARIANCE_FLOOR_EPSILON = 1e-6


class ModelInputError(ValueError):
    pass


def std_normal_cdf(z: float) -> float:
    """Phi(z), evaluated through the complementary error function so both tails keep full relative accuracy."""
    return float(special.ndtr(z))


def binomial_majority(k: np.ndarray, mu: np.ndarray) -> np.ndarray:
    """
    P(Binomial(k, mu) > k / 2) = sum_{i = floor(k/2) + 1}^{k} C(k, i) mu^i (1 - mu)^(k - i), through the regularized
    incomplete beta function; stays finite for k in the hundreds of thousands.
    """
    k = np.asarray(k, dtype=np.int64)
    mu = np.asarray(mu, dtype=np.float64)
    f = special.bdtrc(k // 2, k, mu)
    return np.clip(np.where(mu <= 0.0, 0.0, np.where(mu >= 1.0, 1.0, f)), 0.0, 1.0)


def gaussian_majority(
    k: np.ndarray,
    mu: np.ndarray,
    cov: np.ndarray,
    epsilon: float = DEFAULT_VARIANCE_FLOOR_EPSILON,
) -> tuple[np.ndarray, np.ndarray]:
    """
    f(k) = 1 - Phi((1/2 - mu) / sigma) with sigma^2 = mu(1 - mu)/k + ((k - 1)/k) Cov(x_i, x_j). With cov = 0 this is
    exactly the 2K Gaussian form. Degree-1 classes take the exact value f(1) = mu.
    :return: (f, mask of classes whose non-positive variance was clamped to epsilon * mu(1 - mu) / k)
    """

    k = np.asarray(k, dtype=np.int64)
    mu = np.asarray(mu, dtype=np.float64)
    cov = np.asarray(cov, dtype=np.float64)

    kf = k.astype(np.float64)
    bernoulli_var = mu * (1.0 - mu)
    var = bernoulli_var / kf + ((kf - 1.0) / kf) * cov

    degenerate = (mu <= 0.0) | (mu >= 1.0)
    clamped = ~degenerate & (k > 1) & (var <= 0.0)
    var = np.where(clamped, epsilon * bernoulli_var / kf, var)

    with np.errstate(divide="ignore", invalid="ignore"):
        f = special.ndtr(-(0.5 - mu) / np.sqrt(var))

    f = np.where(mu <= 0.0, 0.0, np.where(mu >= 1.0, 1.0, f))
    f = np.where(k == 1, mu, f)
    return f, clamped


def _inputs(mu: dict[int, float], pop: dict[int, float], cov: dict[int, float] | None = None) -> ModelInputs:
    try:
        return ModelInputs(mu=mu, cov=cov, p=pop)
    except ValueError as e:
        raise ModelInputError(str(e)) from e


def _arrays(inputs: ModelInputs) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    ks = np.array(sorted(inputs.mu), dtype=np.int64)
    mus = np.array([inputs.mu[k] for k in ks.tolist()], dtype=np.float64)
    weights = np.array([inputs.p[k] for k in ks.tolist()], dtype=np.float64)
    return ks, mus, weights


def _profile(ks, f, weights, source, k_c, flags=None) -> ParadoxProfile:
    return ParadoxProfile(
        degrees=ks,
        f=f,
        p=weights,
        global_p=weighted_global(weights, f),
        k_c=k_c,
        definition=DEFINITION_XBAR_MAJORITY,
        source=source,
        flags=flags or {},
    )


def predict_2k_binomial(mu: dict[int, float], pop: dict[int, float], k_c: int | None = None) -> ParadoxProfile:
    ks, mus, weights = _arrays(_inputs(mu, pop))
    return _profile(ks, binomial_majority(ks, mus), weights, SOURCE_2K_BINOMIAL, k_c)


def predict_2k_gauss(mu: dict[int, float], pop: dict[int, float], k_c: int | None = None) -> ParadoxProfile:
    ks, mus, weights = _arrays(_inputs(mu, pop))
    f, _ = gaussian_majority(ks, mus, np.zeros_like(mus))
    return _profile(ks, f, weights, SOURCE_2K_GAUSS, k_c)


def predict_3k(
    mu: dict[int, float],
    cov: dict[int, float],
    pop: dict[int, float],
    k_c: int | None = None,
    epsilon: float = DEFAULT_VARIANCE_FLOOR_EPSILON,
) -> ParadoxProfile:
    inputs = _inputs(mu, pop, cov)
    ks, mus, weights = _arrays(inputs)
    covs = np.array([inputs.cov.get(k, 0.0) if k >= 2 else 0.0 for k in ks.tolist()], dtype=np.float64)

    f, clamped = gaussian_majority(ks, mus, covs, epsilon)

    flags: dict[int, tuple[str, ...]] = {}
    for k in ks[clamped].tolist():
        logger.warning(
            f"3K variance for degree class {k} is not positive (cov={inputs.cov[k]:.6g}, mu={inputs.mu[k]:.6g}); "
            f"clamped to epsilon * mu(1 - mu) / k with epsilon={epsilon:g}"
        )
        flags[k] = (FLAG_VARIANCE_CLAMPED,)

    return _profile(ks, f, weights, SOURCE_3K, k_c, flags)


def predict_all(
    mu: dict[int, float],
    cov: dict[int, float],
    pop: dict[int, float],
    k_c: int | None = None,
    epsilon: float = DEFAULT_VARIANCE_FLOOR_EPSILON,
) -> dict[str, ParadoxProfile]:
    return {
        SOURCE_2K_BINOMIAL: predict_2k_binomial(mu, pop, k_c),
        SOURCE_2K_GAUSS: predict_2k_gauss(mu, pop, k_c),
        SOURCE_3K: predict_3k(mu, cov, pop, k_c, epsilon),
    }
