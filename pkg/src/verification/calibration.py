"""
Linear calibration f = a + b * f' under three directives.

- mse: ordinary least squares; unbiased and underdispersed by construction
- mae: least absolute deviations (exact enumeration for small samples, IRLS above)
- variance: matches the mean and standard deviation of the observations
"""
import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from config import IRLS_EPSILON, IRLS_MAX_ITER, IRLS_TOL, LAD_EXACT_MAX_N
from verification.errors import DataError, DegenerateStatisticError, ParameterError
from verification.metrics import mean_absolute_error, moments, root_mean_square_error
from verification.series import PairedSeries

logger = logging.getLogger(__name__)

SCHEMES = ("mse", "mae", "variance")


@dataclass(frozen=True)
class LinearCalibration:
    """
    Affine transform fitted under one directive.

    Attributes:
        intercept_a: Offset, in units of the observations.
        gain_b: Dimensionless slope.
        scheme: "mse", "mae" or "variance".
        fit_n: Pairs used for the fit.
        converged: False when an iterative solver hit its iteration cap;
            the best iterate is kept.
    """

    intercept_a: float
    gain_b: float
    scheme: str
    fit_n: int
    converged: bool = True

    def __post_init__(self):
        if not (np.isfinite(self.intercept_a) and np.isfinite(self.gain_b)):
            raise DegenerateStatisticError(
                "gain", f"{self.scheme} calibration produced non-finite coefficients"
            )

    def to_dict(self) -> dict:
        return {
            "a": self.intercept_a,
            "b": self.gain_b,
            "scheme": self.scheme,
            "fit_n": self.fit_n,
            "converged": self.converged,
        }


@dataclass(frozen=True)
class CalibrationSummary:
    """In-sample verification of one calibration, scored by every metric."""

    calibration: LinearCalibration
    mae: float
    rmse: float
    dispersion: float


def _check_fit_sample(p: PairedSeries, scheme: str) -> None:
    if p.n < 3:
        raise DataError(f"{scheme} calibration needs at least 3 pairs, got {p.n}")
    if np.ptp(p.f) == 0.0:
        raise DegenerateStatisticError(
            "gain", f"{scheme} calibration undefined: raw forecast is constant"
        )


def apply(c: LinearCalibration, f_prime: Sequence[float]) -> np.ndarray:
    """Elementwise a + b * f'. Missing (NaN) entries stay missing."""
    return c.intercept_a + c.gain_b * np.asarray(f_prime, dtype=float)


def fit_mse_linear(p: PairedSeries) -> LinearCalibration:
    """
    Least-squares calibration: b = cov(f', x) / var(f'), a = mean(x) - b mean(f').

    The result is unbiased in-sample and its RMSE is sqrt(1 - rho^2) sigma(x).
    """
    _check_fit_sample(p, "mse")
    mean_f = p.f.mean()
    mean_x = p.x.mean()
    df = p.f - mean_f
    gain = np.mean(df * (p.x - mean_x)) / np.mean(df * df)
    return LinearCalibration(
        intercept_a=float(mean_x - gain * mean_f),
        gain_b=float(gain),
        scheme="mse",
        fit_n=p.n,
    )


def fit_variance_linear(p: PairedSeries) -> LinearCalibration:
    """Variance-corrected calibration: b = sigma(x) / sigma(f'), mean matched."""
    _check_fit_sample(p, "variance")
    mf = moments(p.f)
    mx = moments(p.x)
    gain = mx.std / mf.std
    return LinearCalibration(
        intercept_a=float(mx.mean - gain * mf.mean),
        gain_b=float(gain),
        scheme="variance",
        fit_n=p.n,
    )


# =============================================================================
# Least absolute deviations
# =============================================================================

def _lad_exact(f: np.ndarray, x: np.ndarray) -> Tuple[float, float]:
    """
    Exact two-parameter LAD by enumeration.

    Some optimal line interpolates two points with distinct f, so scoring
    every such line (plus the flat median lines) finds the optimum. Ties
    go to the smallest |b|, then the smallest |a|.
    """
    n = f.size
    intercepts: List[np.ndarray] = []
    gains: List[np.ndarray] = []
    costs: List[np.ndarray] = []

    for i in range(n - 1):
        df = f[i + 1:] - f[i]
        distinct = df != 0
        if not distinct.any():
            continue
        b = (x[i + 1:][distinct] - x[i]) / df[distinct]
        a = x[i] - b * f[i]
        residual = x[None, :] - a[:, None] - b[:, None] * f[None, :]
        intercepts.append(a)
        gains.append(b)
        costs.append(np.abs(residual).sum(axis=1))

    ordered = np.sort(x)
    medians = np.unique([ordered[(n - 1) // 2], ordered[n // 2]])
    intercepts.append(medians)
    gains.append(np.zeros_like(medians))
    costs.append(np.abs(x[None, :] - medians[:, None]).sum(axis=1))

    a_all = np.concatenate(intercepts)
    b_all = np.concatenate(gains)
    cost_all = np.concatenate(costs) / n

    best = cost_all.min()
    tolerance = 1e-12 * (best + np.mean(np.abs(x)))
    tied = np.flatnonzero(cost_all <= best + tolerance)
    order = np.lexsort((np.abs(a_all[tied]), np.abs(b_all[tied])))
    pick = tied[order[0]]
    return float(a_all[pick]), float(b_all[pick])


def _lad_irls(
    f: np.ndarray,
    x: np.ndarray,
    start: LinearCalibration,
) -> Tuple[float, float, bool]:
    """
    LAD by iteratively reweighted least squares, started from the MSE fit.

    Returns:
        Tuple of (a, b, converged). The lowest-MAE iterate is returned even
        when the iteration cap is hit.
    """
    design = np.column_stack([np.ones_like(f), f])
    beta = np.array([start.intercept_a, start.gain_b])
    best_beta = beta
    best_cost = mean_absolute_error(design @ beta, x)
    converged = False

    for iteration in range(1, IRLS_MAX_ITER + 1):
        residual = x - design @ beta
        root_w = 1.0 / np.sqrt(np.maximum(np.abs(residual), IRLS_EPSILON))
        new_beta, *_ = np.linalg.lstsq(design * root_w[:, None], x * root_w, rcond=None)

        cost = mean_absolute_error(design @ new_beta, x)
        if cost < best_cost:
            best_beta, best_cost = new_beta, cost

        step = np.max(np.abs(new_beta - beta))
        beta = new_beta
        if step <= IRLS_TOL * (1.0 + np.max(np.abs(beta))):
            converged = True
            logger.debug("IRLS converged after %d iterations", iteration)
            break

    if not converged:
        logger.warning(
            "IRLS did not converge in %d iterations; keeping best iterate (MAE %.6g)",
            IRLS_MAX_ITER,
            best_cost,
        )
    return float(best_beta[0]), float(best_beta[1]), converged


def fit_mae_linear(p: PairedSeries, method: str = "auto") -> LinearCalibration:
    """
    Least-absolute-deviations calibration, minimizing mean |x - (a + b f')|.

    Args:
        p: Fitting pairs.
        method: "exact", "irls", or "auto" (exact up to LAD_EXACT_MAX_N pairs).

    Returns:
        LinearCalibration with scheme "mae". converged is False if IRLS
        stopped at its iteration cap.
    """
    _check_fit_sample(p, "mae")
    if method == "auto":
        method = "exact" if p.n <= LAD_EXACT_MAX_N else "irls"

    if method == "exact":
        a, b = _lad_exact(p.f, p.x)
        converged = True
    elif method == "irls":
        a, b, converged = _lad_irls(p.f, p.x, fit_mse_linear(p))
    else:
        raise ParameterError(f"unknown LAD method '{method}'")

    return LinearCalibration(
        intercept_a=a,
        gain_b=b,
        scheme="mae",
        fit_n=p.n,
        converged=converged,
    )


# =============================================================================
# Scheme dispatch
# =============================================================================

SCHEME_FITTERS: Dict[str, Callable[[PairedSeries], LinearCalibration]] = {
    "mse": fit_mse_linear,
    "mae": fit_mae_linear,
    "variance": fit_variance_linear,
}


def fit_calibration(p: PairedSeries, scheme: str) -> LinearCalibration:
    """Fit the calibration for a directive name."""
    fitter = SCHEME_FITTERS.get(scheme.lower())
    if fitter is None:
        raise ParameterError(f"unknown calibration scheme '{scheme}', expected one of {SCHEMES}")
    return fitter(p)


def calibration_table(
    p: PairedSeries,
    schemes: Sequence[str] = SCHEMES,
    evaluate: Optional[PairedSeries] = None,
) -> List[CalibrationSummary]:
    """
    Fit every scheme on p and score each by MAE, RMSE and dispersion ratio.

    Args:
        p: Fitting pairs.
        schemes: Directives to fit.
        evaluate: Pairs to score on. Defaults to p (in-sample).
    """
    target = evaluate if evaluate is not None else p
    sigma_x = moments(target.x).std
    summaries = []
    for scheme in schemes:
        calibration = fit_calibration(p, scheme)
        calibrated = apply(calibration, target.f)
        summaries.append(
            CalibrationSummary(
                calibration=calibration,
                mae=mean_absolute_error(calibrated, target.x),
                rmse=root_mean_square_error(calibrated, target.x),
                dispersion=moments(calibrated).std / sigma_x if sigma_x > 0 else float("nan"),
            )
        )
    return summaries
