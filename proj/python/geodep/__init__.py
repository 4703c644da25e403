"""Variograms, Gaussian-process regression and dimension expansion."""

from ._core import (
    ConditioningError,
    Expansion,
    FitResult,
    GeodepError,
    ParseError,
    ValidationError,
    VariogramModel,
    equivalence_check,
    equivalence_sweep,
    fit_variogram,
    gp_predict,
    interpolate_latent,
    learn_expansion,
    log_marginal_likelihood,
    morans_i,
    stationarity_report,
    stationary_sample,
    two_regime_sample,
    variogram,
    weight_space_predict,
)

__all__ = [
    "ConditioningError",
    "Expansion",
    "FitResult",
    "GeodepError",
    "ParseError",
    "ValidationError",
    "VariogramModel",
    "equivalence_check",
    "equivalence_sweep",
    "fit_variogram",
    "gp_predict",
    "interpolate_latent",
    "learn_expansion",
    "log_marginal_likelihood",
    "morans_i",
    "stationarity_report",
    "stationary_sample",
    "two_regime_sample",
    "variogram",
    "weight_space_predict",
]
