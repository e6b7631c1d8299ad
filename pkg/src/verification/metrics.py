"""
Moments, deterministic error metrics and correlations.

Every statistic uses population moments (divide by n). Under that convention
the calibration and CLIPER identities in reference.py hold exactly on finite
samples, not just asymptotically.
"""
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from verification.errors import DataError, DegenerateStatisticError, ParameterError
from verification.series import ObservationSeries, PairedSeries, lag_pairs


@dataclass(frozen=True)
class MomentSummary:
    """Mean and population standard deviation of a sample."""

    mean: float
    std: float
    n: int


@dataclass(frozen=True)
class MetricReport:
    """
    Error metrics of one paired series.

    rho is None when either side is constant (correlation undefined).
    """

    bias: float
    mae: float
    mse: float
    rmse: float
    nmae: float
    nrmse: float
    rho: Optional[float]
    n: int
    normalizer: float

    @property
    def rho_defined(self) -> bool:
        return self.rho is not None


def _is_constant(values: np.ndarray) -> bool:
    return bool(np.ptp(values) == 0.0)


def moments(values: Sequence[float]) -> MomentSummary:
    """Mean and population standard deviation."""
    array = np.asarray(values, dtype=float).ravel()
    if array.size == 0:
        raise DataError("cannot take moments of an empty sample")
    std = 0.0 if _is_constant(array) else float(np.std(array))
    return MomentSummary(mean=float(np.mean(array)), std=std, n=int(array.size))


def pearson(p: PairedSeries) -> float:
    """
    Pearson correlation of the forecast and observation sides.

    Raises:
        DegenerateStatisticError: Fewer than 3 pairs or a constant side.
    """
    if p.n < 3:
        raise DegenerateStatisticError("rho", f"correlation needs at least 3 pairs, got {p.n}")
    if _is_constant(p.f):
        raise DegenerateStatisticError("rho", "correlation undefined: forecast is constant")
    if _is_constant(p.x):
        raise DegenerateStatisticError("rho", "correlation undefined: observation is constant")

    df = p.f - p.f.mean()
    dx = p.x - p.x.mean()
    cov = np.mean(df * dx)
    rho = cov / (np.sqrt(np.mean(df * df)) * np.sqrt(np.mean(dx * dx)))
    return float(np.clip(rho, -1.0, 1.0))


def error_metrics(p: PairedSeries, normalizer: float) -> MetricReport:
    """
    Bias, MAE, MSE, RMSE, their normalized forms, and the correlation.

    Args:
        p: Paired forecasts and observations.
        normalizer: Positive denominator for nMAE and nRMSE (mean observation
            or plant capacity).

    Returns:
        MetricReport. Its rho is None when the correlation is undefined.
    """
    if not np.isfinite(normalizer) or normalizer <= 0:
        raise ParameterError(f"normalizer must be positive, got {normalizer}")

    error = p.f - p.x
    mae = float(np.mean(np.abs(error)))
    mse = float(np.mean(error * error))
    rmse = float(np.sqrt(mse))

    try:
        rho: Optional[float] = pearson(p)
    except DegenerateStatisticError:
        rho = None

    return MetricReport(
        bias=float(np.mean(error)),
        mae=mae,
        mse=mse,
        rmse=rmse,
        nmae=mae / normalizer,
        nrmse=rmse / normalizer,
        rho=rho,
        n=p.n,
        normalizer=float(normalizer),
    )


def lag_autocorrelation(obs: ObservationSeries, h: int) -> float:
    """
    Lag-h autocorrelation gamma(h): the Pearson correlation between the
    lag-h persistence and the observations, over the overlapping pairs only
    (each side with its own mean and standard deviation).
    """
    if h < 1:
        raise ParameterError(f"lag must be a positive number of steps, got {h}")
    if len(obs) < h + 3:
        raise DataError(f"series of length {len(obs)} is too short for lag-{h} autocorrelation")
    try:
        return pearson(lag_pairs(obs, h))
    except DegenerateStatisticError as e:
        raise DegenerateStatisticError("gamma_h", f"lag-{h} autocorrelation undefined: {e}") from e


def dispersion_ratio(p: PairedSeries) -> float:
    """sigma(f) / sigma(x); below 1 means the forecast is underdispersed."""
    sigma_x = moments(p.x).std
    if sigma_x == 0:
        raise DegenerateStatisticError("sigma_x", "observation is constant")
    return moments(p.f).std / sigma_x


def mean_absolute_error(f: np.ndarray, x: np.ndarray) -> float:
    return float(np.mean(np.abs(np.asarray(f) - np.asarray(x))))


def root_mean_square_error(f: np.ndarray, x: np.ndarray) -> float:
    error = np.asarray(f) - np.asarray(x)
    return float(np.sqrt(np.mean(error * error)))
