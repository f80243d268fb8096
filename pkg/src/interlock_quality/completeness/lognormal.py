"""Lognormal revenue model with a fixed scale parameter."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ..exceptions import NonPositiveValue

DEFAULT_SIGMA = 2.0


@dataclass(frozen=True)
class LognormalFit:
    mu: float
    sigma: float
    n: int

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")

    @property
    def mean(self) -> float:
        """Implied mean ``exp(mu + sigma^2 / 2)``."""
        return math.exp(self.mu + self.sigma ** 2 / 2)


def _positive_sample(sample) -> np.ndarray:
    x = np.asarray(sample, dtype=float).ravel()
    if not np.all(np.isfinite(x)):
        raise ValueError("sample contains non-finite values")
    if np.any(x <= 0):
        raise NonPositiveValue("lognormal fitting needs strictly positive values")
    return x


def fit_mu_fixed_sigma(sample, sigma: float = DEFAULT_SIGMA) -> LognormalFit:
    """Maximum-likelihood location for a known scale: the mean of the logs."""
    x = _positive_sample(sample)
    if len(x) < 2:
        raise ValueError("need at least 2 observations")
    return LognormalFit(float(np.log(x).mean()), float(sigma), len(x))


def mean_std_offset(sigma: float) -> float:
    """``log s - log m`` for a lognormal with scale ``sigma``."""
    return 0.5 * math.log(math.expm1(sigma ** 2))


def lognormal_moments(mu: float, sigma: float) -> tuple[float, float]:
    """Population mean and standard deviation."""
    m = math.exp(mu + sigma ** 2 / 2)
    return m, m * math.sqrt(math.expm1(sigma ** 2))


def mean_std_residual(mean: float, std: float, sigma: float) -> float:
    return math.log(std) - math.log(mean) - mean_std_offset(sigma)


def mean_std_check(fit: LognormalFit, sample) -> float:
    """Deviation of a sample from the lognormal std-proportional-to-mean line.

    Zero when the sample's standard deviation and mean sit exactly where a
    lognormal with ``fit.sigma`` puts them.
    """
    x = _positive_sample(sample)
    if len(x) < 100:
        raise ValueError("mean/std diagnostic needs at least 100 observations")
    return mean_std_residual(float(x.mean()), float(x.std(ddof=1)), fit.sigma)


class FixedScaleLognormal(BaseEstimator):
    """Estimator form of :func:`fit_mu_fixed_sigma` (``fit`` sets ``mu_``)."""

    def __init__(self, sigma=DEFAULT_SIGMA):
        self.sigma = sigma

    def fit(self, X, y=None):
        fit = fit_mu_fixed_sigma(X, self.sigma)
        self.mu_ = fit.mu
        self.n_samples_ = fit.n
        return self

    def score_samples(self, X):
        check_is_fitted(self, "mu_")
        x = _positive_sample(X)
        return norm.logpdf(np.log(x), self.mu_, self.sigma) - np.log(x)

    def score(self, X, y=None):
        return float(self.score_samples(X).mean())
