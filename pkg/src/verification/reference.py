"""
Reference forecasts (climatology, persistence, CLIPER) and skill scores.

CLIPER is the convex combination of climatology and persistence. On the
lag-h overlap it is built as

    cliper_t = c + w * s * (x[t-h] - m)

with c and m the means of the target and lagged sides and s the ratio of
their standard deviations. With w = gamma(h) this is exactly the least-squares
linear calibration of persistence, so its RMSE is sqrt(1 - gamma^2) sigma(x)
on finite samples.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from config import GAMMA_TOL, GOLDEN_TOL, REPORT_KEYS
from verification.errors import DataError, DegenerateStatisticError, ParameterError
from verification.metrics import (
    error_metrics,
    lag_autocorrelation,
    mean_absolute_error,
    moments,
    pearson,
)
from verification.series import ObservationSeries, PairedSeries, lag_pairs

logger = logging.getLogger(__name__)

DIRECTIVES = ("mse", "mae")


@dataclass(frozen=True)
class CliperModel:
    """
    A fitted CLIPER reference.

    Attributes:
        climatology_mean: Mean of the target side of the lag-h overlap.
        weight_w: Persistence weight, clamped to [0, 1].
        horizon_h: Lag in steps.
        directive: "mse" or "mae".
        weight_clipped: True when clamping changed the weight.
        unclipped_weight: Weight before clamping (gamma(h) for "mse").
        persistence_mean: Mean of the lagged side of the overlap.
        scale_ratio: sigma(target side) / sigma(lagged side).
    """

    climatology_mean: float
    weight_w: float
    horizon_h: int
    directive: str
    weight_clipped: bool
    unclipped_weight: float
    persistence_mean: float = 0.0
    scale_ratio: float = 1.0


@dataclass
class SkillReport:
    """Full verification of one forecast against its references."""

    n: int
    horizon_h: int
    rho: float
    gamma_h: float
    sigma_x: float
    rmse_f: float
    mae_f: float
    nmae: float
    nrmse: float
    rmse_cliper: float
    mae_cliper: float
    s_rmse_actual: float
    s_mae_actual: float
    s_rmse_potential: float
    s_mse_potential: float
    mase: float
    s_mse_actual: float = float("nan")
    overlap_n: int = 0
    name: str = ""
    warnings: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        """Serializable dict with exactly the report keys."""
        out = {key: getattr(self, key) for key in REPORT_KEYS}
        out["warnings"] = list(self.warnings)
        return out


# =============================================================================
# Reference forecasts
# =============================================================================

def climatology_forecast(obs: ObservationSeries) -> np.ndarray:
    """Constant forecast equal to the mean observation."""
    return np.full(len(obs), float(np.mean(obs.values)))


def persistence_forecast(obs: ObservationSeries, h: int) -> PairedSeries:
    """h-step persistence: x[t-h] as the forecast of x[t]."""
    return lag_pairs(obs, h)


def cliper_forecast(model: CliperModel, obs: ObservationSeries) -> PairedSeries:
    """Apply a CLIPER model to the lag overlap of obs."""
    lagged = lag_pairs(obs, model.horizon_h)
    return PairedSeries(
        f=_cliper_values(model.climatology_mean, model.persistence_mean,
                         model.scale_ratio, model.weight_w, lagged.f),
        x=lagged.x,
        dropped=lagged.dropped,
    )


def _cliper_values(
    climatology: float,
    persistence_mean: float,
    scale: float,
    weight: float,
    lagged: np.ndarray,
) -> np.ndarray:
    return climatology + weight * scale * (lagged - persistence_mean)


def _golden_section(objective: Callable[[float], float], lo: float, hi: float, tol: float) -> float:
    """Minimize a unimodal function on [lo, hi] to an interval width of tol."""
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = objective(c), objective(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = objective(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = objective(d)
    return (a + b) / 2.0


def fit_cliper(obs: ObservationSeries, h: int, directive: str = "mse") -> CliperModel:
    """
    Fit the CLIPER reference for a directive.

    "mse" takes w = gamma(h), clamped to [0, 1]. "mae" searches w in [0, 1]
    for the lowest in-sample MAE (convex in w) by golden section.

    Args:
        obs: Observation series.
        h: Horizon in steps.
        directive: "mse" or "mae".
    """
    directive = directive.lower()
    if directive not in DIRECTIVES:
        raise ParameterError(f"unknown CLIPER directive '{directive}', expected one of {DIRECTIVES}")

    gamma = lag_autocorrelation(obs, h)
    overlap = lag_pairs(obs, h)
    target = moments(overlap.x)
    lagged = moments(overlap.f)
    scale = target.std / lagged.std

    def overlap_mae(w: float) -> float:
        values = _cliper_values(target.mean, lagged.mean, scale, w, overlap.f)
        return mean_absolute_error(values, overlap.x)

    if directive == "mse":
        unclipped = gamma
        weight = min(max(gamma, 0.0), 1.0)
    else:
        searched = _golden_section(overlap_mae, 0.0, 1.0, GOLDEN_TOL)
        # The bracket endpoints and the least-squares weight are scored too
        candidates = [searched, 0.0, 1.0, min(max(gamma, 0.0), 1.0)]
        weight = min(candidates, key=overlap_mae)
        unclipped = weight

    clipped = weight != unclipped
    if clipped:
        logger.warning(
            "CLIPER weight clipped from %.6g to %.6g at horizon %d", unclipped, weight, h
        )

    return CliperModel(
        climatology_mean=target.mean,
        weight_w=float(weight),
        horizon_h=h,
        directive=directive,
        weight_clipped=clipped,
        unclipped_weight=float(unclipped),
        persistence_mean=lagged.mean,
        scale_ratio=float(scale),
    )


# =============================================================================
# Skill scores
# =============================================================================

def cliper_rmse(sigma_x: float, gamma_h: float) -> float:
    """RMSE of the least-squares CLIPER: sqrt(1 - gamma^2) * sigma."""
    if sigma_x < 0:
        raise ParameterError(f"standard deviation must be non-negative, got {sigma_x}")
    if abs(gamma_h) > 1.0 + GAMMA_TOL:
        raise ParameterError(f"autocorrelation must lie in [-1, 1], got {gamma_h}")
    return math.sqrt(max(0.0, 1.0 - gamma_h * gamma_h)) * sigma_x


def skill_score(a_f: float, a_r: float, a_p: float = 0.0) -> float:
    """
    Generic skill score (A_f - A_r) / (A_p - A_r).

    1 is perfect, 0 matches the reference, negative is worse than it.
    """
    if a_r == a_p:
        raise DegenerateStatisticError(
            "reference", "skill undefined: the reference is already perfect"
        )
    return (a_f - a_r) / (a_p - a_r)


def _check_potential_inputs(rho: float, gamma_h: float) -> None:
    if abs(rho) > 1.0 + GAMMA_TOL:
        raise ParameterError(f"correlation must lie in [-1, 1], got {rho}")
    if abs(gamma_h) >= 1.0:
        raise DegenerateStatisticError(
            "gamma_h", f"potential skill undefined for |gamma(h)| = {abs(gamma_h)}"
        )


def potential_rmse_skill(rho: float, gamma_h: float) -> float:
    """
    RMSE skill the forecast would reach after least-squares linear calibration:
    1 - sqrt((1 - rho^2) / (1 - gamma^2)).
    """
    _check_potential_inputs(rho, gamma_h)
    ratio = max(0.0, 1.0 - rho * rho) / (1.0 - gamma_h * gamma_h)
    return 1.0 - math.sqrt(ratio)


def potential_mse_skill(rho: float, gamma_h: float) -> float:
    """MSE counterpart of potential_rmse_skill: 1 - (1 - rho^2) / (1 - gamma^2)."""
    _check_potential_inputs(rho, gamma_h)
    return 1.0 - max(0.0, 1.0 - rho * rho) / (1.0 - gamma_h * gamma_h)


def mase(p: PairedSeries, obs: ObservationSeries) -> float:
    """MAE of the forecast scaled by the MAE of one-step persistence."""
    if len(obs) < 3:
        raise DataError(f"MASE needs at least 3 observations, got {len(obs)}")
    persistence = lag_pairs(obs, 1)
    scale = mean_absolute_error(persistence.f, persistence.x)
    if scale == 0:
        raise DegenerateStatisticError("mase", "MASE undefined: observations are constant")
    return mean_absolute_error(p.f, p.x) / scale


def verify(
    p: PairedSeries,
    obs: ObservationSeries,
    h: int,
    normalizer: Optional[float] = None,
    name: str = "",
) -> SkillReport:
    """
    Score a forecast against climatology, persistence and CLIPER.

    Args:
        p: Forecast/observation pairs.
        obs: Full observation series (for gamma(h), CLIPER and MASE).
        h: Horizon in steps.
        normalizer: Denominator of nMAE/nRMSE. Defaults to the mean
            observation over the pairs.
        name: Forecast name carried into the report.

    Returns:
        SkillReport. The RMSE skill uses the closed-form CLIPER RMSE with
        sigma(x) of the forecast's own pairs, so the potential score is the
        actual score of the least-squares-calibrated forecast.
    """
    if normalizer is None:
        normalizer = float(np.mean(p.x))
        if normalizer <= 0:
            raise DegenerateStatisticError(
                "normalizer", f"mean observation {normalizer} cannot normalize errors"
            )

    rho = pearson(p)
    gamma = lag_autocorrelation(obs, h)
    if abs(gamma) >= 1.0 - GAMMA_TOL:
        raise DegenerateStatisticError(
            "gamma_h", f"|gamma({h})| = 1: persistence is perfect, skill undefined"
        )

    scores = error_metrics(p, normalizer)
    sigma_x = moments(p.x).std
    rmse_cp = cliper_rmse(sigma_x, gamma)

    mse_model = fit_cliper(obs, h, "mse")
    mae_model = fit_cliper(obs, h, "mae")
    mae_reference = cliper_forecast(mae_model, obs)
    mae_cp = mean_absolute_error(mae_reference.f, mae_reference.x)

    warnings = []
    if mse_model.weight_clipped:
        warnings.append("weight_clipped")
    if rho < 0:
        warnings.append("negative_correlation")

    s_rmse_potential = potential_rmse_skill(rho, gamma)
    return SkillReport(
        n=p.n,
        horizon_h=h,
        rho=rho,
        gamma_h=gamma,
        sigma_x=sigma_x,
        rmse_f=scores.rmse,
        mae_f=scores.mae,
        nmae=scores.nmae,
        nrmse=scores.nrmse,
        rmse_cliper=rmse_cp,
        mae_cliper=mae_cp,
        s_rmse_actual=skill_score(scores.rmse, rmse_cp),
        s_mae_actual=skill_score(scores.mae, mae_cp),
        s_rmse_potential=s_rmse_potential,
        s_mse_potential=potential_mse_skill(rho, gamma),
        mase=mase(p, obs),
        s_mse_actual=skill_score(scores.mse, rmse_cp * rmse_cp),
        overlap_n=mae_reference.n,
        name=name,
        warnings=warnings,
    )
