"""Extreme-value index and extreme-quantile estimation for dependent series."""

from ._core import (
    ConfigError,
    __version__,
    ab_optimal_misspecified,
    av_optimal,
    backtest,
    covariance_r,
    gamma_dhmz,
    gamma_unbiased,
    hill,
    hill_bootstrap_ci,
    kupiec,
    mcstudy,
    neg_log_returns,
    quantile,
    reference_model,
    rho_estimate,
    simulate,
)

__all__ = [
    "ConfigError",
    "__version__",
    "ab_optimal_misspecified",
    "av_optimal",
    "backtest",
    "covariance_r",
    "gamma_dhmz",
    "gamma_unbiased",
    "hill",
    "hill_bootstrap_ci",
    "kupiec",
    "mcstudy",
    "neg_log_returns",
    "quantile",
    "reference_model",
    "rho_estimate",
    "simulate",
]
