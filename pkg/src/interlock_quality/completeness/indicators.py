"""Country-level regression of log mean firm revenue on development indicators.

Bootstrap ensembles of linear epsilon-insensitive regressions are fitted on
random subsets of countries; the indicator with the smallest mean absolute
standardised coefficient is dropped and the ensemble refitted until
``core_size`` indicators remain. The final ensemble average is the model.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .._seeding import derive_rng
from ..exceptions import InsufficientCountries, MissingSelectedIndicator, SingularFeatures
from ..ingest import IndicatorTable
from .svr import fit_linear_svr

logger = logging.getLogger(__name__)

MIN_COUNTRIES = 15


class IndicatorRegressor(RegressorMixin, BaseEstimator):
    """Bagged linear SVR with backward elimination to a core of indicators.

    Parameters
    ----------
    n_models : int, default=1000
        Bootstrap models per elimination round.
    subsample : float, default=0.75
        Fraction of countries drawn (without replacement) for each model.
    core_size : int, default=10
        Number of indicators kept.
    C, epsilon : float
        SVR penalty and insensitivity width.
    impute : bool, default=True
        Replace missing values with training column medians; when False,
        missing values raise.
    random_state : int, default=0
    n_jobs : int, default=1
        Worker threads for bootstrap fits; results do not depend on it.

    Attributes
    ----------
    selected_ : list of int
        Surviving column indices, by decreasing absolute mean effect.
    coef_ : ndarray
        Mean standardised coefficient of each selected column.
    intercept_ : float
    effect_std_ : ndarray
        Spread of those coefficients across bootstrap models.
    selection_frequency_ : ndarray, one per input column
        Share of first-round bootstrap models in which the column ranked
        among the ``core_size`` largest absolute coefficients.
    mean_ , scale_ , median_ : ndarray
        Standardisation and imputation statistics for every input column.
    """

    def __init__(self, n_models=1000, subsample=0.75, core_size=10, C=1.0, epsilon=0.1,
                 impute=True, random_state=0, n_jobs=1):
        self.n_models = n_models
        self.subsample = subsample
        self.core_size = core_size
        self.C = C
        self.epsilon = epsilon
        self.impute = impute
        self.random_state = random_state
        self.n_jobs = n_jobs

    def _prepare(self, X):
        X = check_array(X, dtype=np.float64, ensure_all_finite="allow-nan")
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} columns, got {X.shape[1]}")
        return X

    def fit(self, X, y):
        X = check_array(X, dtype=np.float64, ensure_all_finite="allow-nan")
        y = np.asarray(y, dtype=float).ravel()
        n, p = X.shape
        if len(y) != n:
            raise ValueError("X and y have different numbers of rows")
        if not np.all(np.isfinite(y)):
            raise ValueError("targets must be finite")
        if n < MIN_COUNTRIES:
            raise InsufficientCountries(f"need at least {MIN_COUNTRIES} countries with targets, got {n}")
        if not 0 < self.subsample <= 1:
            raise ValueError("subsample must lie in (0, 1]")
        self.n_features_in_ = p
        missing = np.isnan(X)
        if missing.all(axis=0).any():
            raise SingularFeatures(f"columns with no observed values: {np.flatnonzero(missing.all(axis=0)).tolist()}")
        self.median_ = np.nanmedian(X, axis=0)
        if missing.any():
            if not self.impute:
                raise MissingSelectedIndicator("missing indicator values and imputation is disabled")
            X = np.where(missing, self.median_, X)
        self.mean_ = X.mean(axis=0)
        self.scale_ = X.std(axis=0)
        constant = np.flatnonzero(self.scale_ == 0)
        if len(constant):
            raise SingularFeatures(f"constant columns: {constant.tolist()}")
        Z = (X - self.mean_) / self.scale_
        self.train_min_ = Z.min(axis=0)
        self.train_max_ = Z.max(axis=0)
        self.target_center_ = float(y.mean())
        yc = y - self.target_center_
        size = max(2, int(round(self.subsample * n)))
        subsets = [np.sort(derive_rng(self.random_state, "indicator-subsample", m).choice(n, size, replace=False))
                   for m in range(self.n_models)]
        core = min(self.core_size, p)
        active = list(range(p))
        freq = None
        while True:
            coefs, biases = self._ensemble(Z[:, active], yc, subsets)
            if freq is None:
                freq = np.zeros(p)
                top = np.argsort(-np.abs(coefs), axis=1, kind="stable")[:, :core]
                for j in top.ravel():
                    freq[active[j]] += 1
                freq /= self.n_models
            if len(active) <= core:
                break
            worst = int(np.argmin(np.abs(coefs).mean(axis=0)))
            logger.debug("dropping indicator column %d", active[worst])
            del active[worst]
        mean_coef = coefs.mean(axis=0)
        order = np.argsort(-np.abs(mean_coef), kind="stable")
        self.selected_ = [active[i] for i in order]
        self.coef_ = mean_coef[order]
        self.effect_std_ = coefs.std(axis=0)[order]
        self.intercept_ = self.target_center_ + float(biases.mean())
        self.selection_frequency_ = freq
        return self

    def _fit_one(self, Z, y, idx, m):
        # bagging averages away far more than a looser stopping rule leaves behind
        coef, bias, _ = fit_linear_svr(Z[idx], y[idx], self.C, self.epsilon, tol=1e-4, max_iter=1000, seed=m)
        return coef, bias

    def _ensemble(self, Z, y, subsets):
        Z = np.ascontiguousarray(Z)
        jobs = list(enumerate(subsets))
        if self.n_jobs and self.n_jobs > 1:
            with ThreadPoolExecutor(max_workers=self.n_jobs) as pool:
                results = list(pool.map(lambda t: self._fit_one(Z, y, t[1], t[0]), jobs))
        else:
            results = [self._fit_one(Z, y, idx, m) for m, idx in jobs]
        coefs = np.array([r[0] for r in results])
        biases = np.array([r[1] for r in results])
        return coefs, biases

    def _standardize_selected(self, X):
        X = self._prepare(X)
        sel = self.selected_
        Xs = X[:, sel]
        miss = np.isnan(Xs)
        if miss.any():
            if not self.impute:
                raise MissingSelectedIndicator("selected indicator values are missing and imputation is disabled")
            Xs = np.where(miss, self.median_[sel], Xs)
        return (Xs - self.mean_[sel]) / self.scale_[sel]

    def predict(self, X):
        """Predicted log mean revenue."""
        check_is_fitted(self, "coef_")
        return self.intercept_ + self._standardize_selected(X) @ self.coef_

    def extrapolated(self, X) -> np.ndarray:
        """True for rows with a selected indicator outside the training range."""
        check_is_fitted(self, "coef_")
        Zs = self._standardize_selected(X)
        sel = self.selected_
        return np.any((Zs < self.train_min_[sel]) | (Zs > self.train_max_[sel]), axis=1)


@dataclass
class IndicatorModel:
    """A fitted :class:`IndicatorRegressor` bound to indicator codes."""

    codes: list[str]
    regressor: IndicatorRegressor

    @property
    def selected(self) -> list[str]:
        return [self.codes[j] for j in self.regressor.selected_]

    @property
    def coefficients(self) -> dict[str, float]:
        return dict(zip(self.selected, map(float, self.regressor.coef_)))

    @property
    def intercept(self) -> float:
        return self.regressor.intercept_

    @property
    def selection_frequency(self) -> dict[str, float]:
        return dict(zip(self.codes, map(float, self.regressor.selection_frequency_)))

    def to_dict(self) -> dict:
        r = self.regressor
        rows = []
        for code, j, coef, spread in zip(self.selected, r.selected_, r.coef_, r.effect_std_):
            rows.append({
                "code": code,
                "mean_effect": float(coef),
                "effect_std": float(spread),
                "selection_pct": 100.0 * float(r.selection_frequency_[j]),
                "train_mean": float(r.mean_[j]),
                "train_scale": float(r.scale_[j]),
            })
        return {
            "intercept": float(r.intercept_),
            "indicators": rows,
            "selection_pct_all": {c: 100.0 * float(f) for c, f in zip(self.codes, r.selection_frequency_)},
            "params": r.get_params(),
            "log_base": "e",
        }

    def row(self, indicators: Mapping[str, float | None]) -> np.ndarray:
        return np.array([[np.nan if indicators.get(c) is None else indicators[c] for c in self.codes]])


def fit_indicator_model(table: IndicatorTable, targets: Mapping[str, float], *, n_models: int = 1000,
                        subsample: float = 0.75, core_size: int = 10, seed: int = 0, impute: bool = True,
                        C: float = 1.0, epsilon: float = 0.1, threads: int = 1) -> IndicatorModel:
    """Fit on countries that have both indicators and a ``ln R_hat`` target."""
    countries = [c for c in table.countries if c in targets]
    if len(countries) < MIN_COUNTRIES:
        raise InsufficientCountries(f"need at least {MIN_COUNTRIES} countries with targets, got {len(countries)}")
    _, codes, X = table.matrix(countries=countries)
    y = np.array([targets[c] for c in countries])
    reg = IndicatorRegressor(n_models=n_models, subsample=subsample, core_size=core_size, C=C,
                             epsilon=epsilon, impute=impute, random_state=seed, n_jobs=threads)
    reg.fit(X, y)
    return IndicatorModel(codes, reg)


@dataclass(frozen=True)
class RhatEstimate:
    r_hat_mean: float
    log_r_hat: float
    extrapolated: bool


def estimate_rhat(model: IndicatorModel, indicators: Mapping[str, float | None]) -> RhatEstimate:
    """Predicted mean firm revenue (USD) for one country's indicator row."""
    row = model.row(indicators)
    log_r = float(model.regressor.predict(row)[0])
    extrapolated = bool(model.regressor.extrapolated(row)[0])
    if extrapolated:
        logger.warning("indicator values outside the training range; R_hat is extrapolated")
    r_hat = math.exp(log_r) if log_r < 709.0 else math.inf
    return RhatEstimate(r_hat, log_r, extrapolated)
