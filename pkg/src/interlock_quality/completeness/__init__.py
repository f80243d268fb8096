"""Completeness of firm registers whose small firms are missing not at random."""

from .coverage import coverage_by_size_class
from .gibrat import GibratParams, gibrat_generate
from .indicators import (
    IndicatorModel,
    IndicatorRegressor,
    RhatEstimate,
    estimate_rhat,
    fit_indicator_model,
)
from .lognormal import (
    DEFAULT_SIGMA,
    FixedScaleLognormal,
    LognormalFit,
    fit_mu_fixed_sigma,
    lognormal_moments,
    mean_std_check,
    mean_std_offset,
    mean_std_residual,
)
from .relation import (
    PUBLISHED_COEFFICIENTS,
    CompletenessEstimate,
    CompletenessRelation,
    GdpImputation,
    estimate_completeness,
    expected_distribution,
    fit_c_relation,
    impute_total_revenue_from_gdp,
    log_bins,
    observed_histogram,
    truncation_quantile,
)
from .svr import LinearEpsilonSVR, fit_linear_svr

__all__ = [
    "DEFAULT_SIGMA",
    "PUBLISHED_COEFFICIENTS",
    "CompletenessEstimate",
    "CompletenessRelation",
    "FixedScaleLognormal",
    "GdpImputation",
    "GibratParams",
    "IndicatorModel",
    "IndicatorRegressor",
    "LinearEpsilonSVR",
    "LognormalFit",
    "RhatEstimate",
    "coverage_by_size_class",
    "estimate_completeness",
    "estimate_rhat",
    "expected_distribution",
    "fit_c_relation",
    "fit_indicator_model",
    "fit_linear_svr",
    "fit_mu_fixed_sigma",
    "gibrat_generate",
    "impute_total_revenue_from_gdp",
    "lognormal_moments",
    "log_bins",
    "mean_std_check",
    "mean_std_offset",
    "mean_std_residual",
    "observed_histogram",
    "truncation_quantile",
]
