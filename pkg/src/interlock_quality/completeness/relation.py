"""Completeness from observed and predicted mean revenue.

Firms are assumed to enter a register in decreasing order of revenue, so a
register holding the top fraction ``C`` of a country's firms over-states the
mean revenue. A log-linear relation between ``C``, the observed mean and the
predicted true mean is fitted on countries with known coverage and then
inverted for the rest.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.stats import norm
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .._validation import check_fraction
from ..exceptions import NonPositiveMean, RankDeficient
from .lognormal import DEFAULT_SIGMA

# (a0, a1, a2) in ln C = a0 + a1 ln R_obs + a2 ln R_hat, as published for the global firm register
PUBLISHED_COEFFICIENTS = (-1.3855, -0.954, 1.1120)


def _design(r_obs, r_hat) -> np.ndarray:
    r_obs = np.asarray(r_obs, dtype=float)
    r_hat = np.asarray(r_hat, dtype=float)
    if np.any(r_obs <= 0) or np.any(r_hat <= 0):
        raise NonPositiveMean("mean revenues must be positive")
    return np.column_stack([np.ones(len(r_obs)), np.log(r_obs), np.log(r_hat)])


def fit_c_relation(observations: Iterable[Sequence[float]]) -> tuple[float, float, float]:
    """Least-squares fit of ``ln C = a0 + a1 ln R_obs + a2 ln R_hat``.

    ``observations`` holds ``(C, r_obs_mean, r_hat_mean)`` triples.
    """
    obs = np.asarray(list(observations), dtype=float)
    if obs.ndim != 2 or obs.shape[1] != 3:
        raise ValueError("observations must be (C, r_obs_mean, r_hat_mean) triples")
    if len(obs) < 4:
        raise RankDeficient(f"need at least 4 observations, got {len(obs)}")
    if np.any(obs <= 0) or not np.all(np.isfinite(obs)):
        raise NonPositiveMean("all observation values must be positive and finite")
    A = _design(obs[:, 1], obs[:, 2])
    coef, _, rank, _ = np.linalg.lstsq(A, np.log(obs[:, 0]), rcond=None)
    if rank < 3:
        raise RankDeficient("observed and predicted means are collinear; cannot separate their effects")
    return tuple(float(c) for c in coef)


class CompletenessRelation(RegressorMixin, BaseEstimator):
    """Estimator form of the completeness relation.

    ``X`` columns are ``(r_obs_mean, r_hat_mean)``; ``y`` is ``C``.
    ``predict`` returns ``C`` clamped to (0, 1]. Passing ``coefficients``
    fixes the relation and ``fit`` only validates shapes.
    """

    def __init__(self, coefficients=None):
        self.coefficients = coefficients

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != 2:
            raise ValueError("X must have columns (r_obs_mean, r_hat_mean)")
        if self.coefficients is not None:
            self.coef_ = np.asarray(self.coefficients, dtype=float)
        else:
            if y is None:
                raise ValueError("y (known completeness) is required unless coefficients are given")
            y = np.asarray(y, dtype=float)
            self.coef_ = np.array(fit_c_relation(np.column_stack([y, X])))
        self.n_features_in_ = 2
        return self

    def predict_raw(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X, dtype=np.float64)
        return np.exp(_design(X[:, 0], X[:, 1]) @ self.coef_)

    def predict(self, X):
        return np.minimum(self.predict_raw(X), 1.0)

    def score(self, X, y, sample_weight=None):
        """R^2 of the log-linear fit (in ln C)."""
        pred = np.log(self.predict_raw(X))
        ly = np.log(np.asarray(y, dtype=float))
        ss_res = float(((ly - pred) ** 2).sum())
        ss_tot = float(((ly - ly.mean()) ** 2).sum())
        return 1 - ss_res / ss_tot if ss_tot > 0 else float("nan")


@dataclass(frozen=True)
class CompletenessEstimate:
    country: str
    r_obs_mean: float
    r_hat_mean: float
    mu: float
    C: float
    clamped: bool
    raw_C: float

    def to_dict(self) -> dict:
        return asdict(self)


def estimate_completeness(coeffs: Sequence[float], r_obs_mean: float, r_hat_mean: float,
                          country: str = "", sigma: float = DEFAULT_SIGMA) -> CompletenessEstimate:
    """Plug means into the relation; ``C`` above 1 is clamped and flagged."""
    if not (r_obs_mean > 0 and r_hat_mean > 0):
        raise NonPositiveMean("mean revenues must be positive")
    a0, a1, a2 = coeffs
    raw = math.exp(a0 + a1 * math.log(r_obs_mean) + a2 * math.log(r_hat_mean))
    mu = math.log(r_hat_mean) - sigma ** 2 / 2
    return CompletenessEstimate(country, r_obs_mean, r_hat_mean, mu, min(raw, 1.0), raw > 1.0, raw)


def truncation_quantile(mu: float, sigma: float, C: float) -> float:
    """Revenue above which the top fraction ``C`` of a lognormal population lies."""
    check_fraction(C, "C")
    if C == 1.0:
        return 0.0
    return math.exp(mu + sigma * norm.ppf(1.0 - C))


def expected_distribution(mu: float, sigma: float, C: float, bins: Sequence[float]) -> np.ndarray:
    """Bin masses of a lognormal cut to its top fraction ``C``.

    ``bins`` are increasing edges (``0`` and ``inf`` allowed); mass beyond
    the outermost edges is not reported.
    """
    check_fraction(C, "C")
    edges = np.asarray(bins, dtype=float)
    if edges.ndim != 1 or len(edges) < 2 or np.any(np.diff(edges) <= 0):
        raise ValueError("bins must be at least two strictly increasing edges")
    if np.any(edges < 0):
        raise ValueError("bin edges must be nonnegative")
    with np.errstate(divide="ignore"):
        z = (np.log(edges) - mu) / sigma
    # upper-tail probabilities keep precision when C is tiny
    sf = norm.sf(z)
    cut = min(C, 1.0)
    sf = np.minimum(sf, cut)
    return (sf[:-1] - sf[1:]) / cut


def observed_histogram(sample, bins: Sequence[float]) -> np.ndarray:
    """Fraction of ``sample`` falling in each bin (relative to the whole sample)."""
    x = np.asarray(sample, dtype=float)
    counts, _ = np.histogram(x, bins=np.asarray(bins, dtype=float))
    return counts / len(x) if len(x) else counts.astype(float)


def log_bins(low: float, high: float, n_bins: int, open_ends: bool = True) -> np.ndarray:
    """``n_bins`` log-spaced bins from ``low`` to ``high``, optionally with 0/inf tails."""
    edges = np.geomspace(low, high, n_bins + 1)
    if open_ends:
        edges = np.concatenate([[0.0], edges, [np.inf]])
    return edges


@dataclass(frozen=True)
class GdpImputation:
    total_revenue: float
    slope: float
    intercept: float
    r2: float


def impute_total_revenue_from_gdp(known: Iterable[Sequence[float]], query_gdp: float) -> GdpImputation:
    """Predict aggregate firm revenue from GDP with a log-log least-squares line."""
    pairs = np.asarray(list(known), dtype=float)
    if pairs.ndim != 2 or pairs.shape[1] != 2:
        raise ValueError("known must be (gdp, total_revenue) pairs")
    if len(pairs) < 3:
        raise RankDeficient(f"need at least 3 known pairs, got {len(pairs)}")
    if np.any(pairs <= 0) or not query_gdp > 0:
        raise NonPositiveMean("GDP and revenue values must be positive")
    lx, ly = np.log(pairs[:, 0]), np.log(pairs[:, 1])
    A = np.column_stack([np.ones(len(lx)), lx])
    coef, _, rank, _ = np.linalg.lstsq(A, ly, rcond=None)
    if rank < 2:
        raise RankDeficient("all known GDP values are equal")
    resid = ly - A @ coef
    ss_tot = float(((ly - ly.mean()) ** 2).sum())
    r2 = 1.0 - float((resid ** 2).sum()) / ss_tot if ss_tot > 0 else 1.0
    pred = math.exp(coef[0] + coef[1] * math.log(query_gdp))
    return GdpImputation(pred, float(coef[1]), float(coef[0]), r2)
