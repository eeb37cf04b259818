"""Public API for :mod:`seasolr`.

This module re-exports the series types, the proportional-odds models with
trigonometric (TSOLR) and indicator (ISOLR) seasonal covariates, the classical
baselines and the auto-association measures so they can be imported directly
from ``seasolr``.

The simulation study lives in :mod:`seasolr.simulation`; run the command-line
front end with ``seasolr``.
"""

from .series import (
    CategoryScheme,
    OrdinalSeries,
    encode_series,
    decode_codes,
    frequency_distribution,
    transition_matrix,
    month_category_intensity,
    rate_evolution,
    category_distribution_by,
)
from .calendar import CalendarConfig
from .features import (
    CovariateSpec,
    FourierTermSpec,
    IndicatorSpec,
    LagSpec,
    build_design,
    tsolr_aqi_spec,
    isolr_aqi_spec,
)
from .polr import (
    FitOptions,
    FitReport,
    PolrModel,
    PolrParams,
    category_probs,
    cumulative_probs,
    fit,
    fit_model,
    forecast_window,
    log_likelihood,
    predict_one_step,
)
from .baselines import fit_markov, fit_mtd, fit_par, forecast_baseline
from .association import association_profile
from .metrics import accuracy, weighted_f1
from .io import read_series_csv

__all__ = [
    "CategoryScheme",
    "OrdinalSeries",
    "encode_series",
    "decode_codes",
    "frequency_distribution",
    "transition_matrix",
    "month_category_intensity",
    "rate_evolution",
    "category_distribution_by",
    "CalendarConfig",
    "CovariateSpec",
    "FourierTermSpec",
    "IndicatorSpec",
    "LagSpec",
    "build_design",
    "tsolr_aqi_spec",
    "isolr_aqi_spec",
    "FitOptions",
    "FitReport",
    "PolrModel",
    "PolrParams",
    "category_probs",
    "cumulative_probs",
    "fit",
    "fit_model",
    "forecast_window",
    "log_likelihood",
    "predict_one_step",
    "fit_markov",
    "fit_mtd",
    "fit_par",
    "forecast_baseline",
    "association_profile",
    "accuracy",
    "weighted_f1",
    "read_series_csv",
]
