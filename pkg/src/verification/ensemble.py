"""
Ensemble evaluation: score many forecast sets against one observation
series, mark the MAE-RMSE Pareto front, and export scatter data.
"""
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from config import (
    ENSEMBLE_CSV_COLUMNS,
    GAMMA_TOL,
    SVG_HEIGHT,
    SVG_LIGHTNESS_RANGE,
    SVG_PAD_FRACTION,
    SVG_POINT_RADIUS,
    SVG_WIDTH,
)
from verification.errors import (
    DataError,
    DegenerateStatisticError,
    ParameterError,
)
from verification.metrics import error_metrics, lag_autocorrelation, moments
from verification.reference import cliper_rmse, potential_rmse_skill, skill_score
from verification.series import ForecastSeries, ObservationSeries, pair

logger = logging.getLogger(__name__)

NAN = float("nan")


@dataclass
class EnsembleRow:
    """One forecast set's position in the nMAE-nRMSE plane."""

    name: str
    nmae: float
    nrmse: float
    rho: float
    s_rmse_actual: float
    s_rmse_potential: float
    on_front: bool = False
    problem: str = ""  # why a row is degenerate, empty otherwise

    @property
    def degenerate(self) -> bool:
        return bool(self.problem)

    def to_dict(self) -> dict:
        """CSV row with lowercase booleans."""
        return {
            "name": self.name,
            "nmae": self.nmae,
            "nrmse": self.nrmse,
            "rho": self.rho,
            "s_rmse_actual": self.s_rmse_actual,
            "s_rmse_potential": self.s_rmse_potential,
            "on_front": "true" if self.on_front else "false",
        }


# =============================================================================
# Pareto front
# =============================================================================

def pareto_front(points: Sequence[Tuple[float, float]]) -> List[bool]:
    """
    Mark the non-dominated (mae, rmse) points.

    Point i is dominated when some j has mae_j <= mae_i and rmse_j <= rmse_i
    with at least one strict. Exact duplicates of a front point all stay on
    the front. Sort-and-sweep, O(n log n).
    """
    array = np.asarray(points, dtype=float).reshape(-1, 2)
    if array.shape[0] == 0:
        raise ParameterError("pareto_front needs at least one point")
    if not np.all(np.isfinite(array)):
        raise ParameterError("pareto_front points must be finite")

    mae, rmse = array[:, 0], array[:, 1]
    order = np.lexsort((rmse, mae))
    on_front = np.zeros(array.shape[0], dtype=bool)

    best_before = math.inf  # lowest rmse among strictly smaller mae
    start = 0
    while start < order.size:
        stop = start
        while stop < order.size and mae[order[stop]] == mae[order[start]]:
            stop += 1
        group = order[start:stop]
        group_min = rmse[group[0]]  # sorted by rmse within equal mae
        if group_min < best_before:
            on_front[group] = rmse[group] == group_min
        best_before = min(best_before, group_min)
        start = stop

    return on_front.tolist()


# =============================================================================
# Evaluation
# =============================================================================

def _degenerate_row(name: str, problem: str, nmae: float = NAN, nrmse: float = NAN) -> EnsembleRow:
    logger.warning("forecast '%s' is degenerate: %s", name, problem)
    return EnsembleRow(
        name=name,
        nmae=nmae,
        nrmse=nrmse,
        rho=NAN,
        s_rmse_actual=NAN,
        s_rmse_potential=NAN,
        problem=problem,
    )


def _score_member(
    obs: ObservationSeries,
    fcst: ForecastSeries,
    gamma: float,
    normalizer: Optional[float],
) -> EnsembleRow:
    try:
        p = pair(obs, fcst)
    except DataError as e:
        return _degenerate_row(fcst.name, str(e))
    if p.n < 3:
        return _degenerate_row(fcst.name, f"only {p.n} valid pairs")

    scale = normalizer if normalizer is not None else float(np.mean(p.x))
    if not scale > 0:
        return _degenerate_row(fcst.name, f"normalizer {scale} is not positive")

    scores = error_metrics(p, scale)
    if scores.rho is None:
        return _degenerate_row(fcst.name, "correlation undefined", scores.nmae, scores.nrmse)

    rmse_cp = cliper_rmse(moments(p.x).std, gamma)
    return EnsembleRow(
        name=fcst.name,
        nmae=scores.nmae,
        nrmse=scores.nrmse,
        rho=scores.rho,
        s_rmse_actual=skill_score(scores.rmse, rmse_cp),
        s_rmse_potential=potential_rmse_skill(scores.rho, gamma),
    )


def evaluate_ensemble(
    obs: ObservationSeries,
    forecasts: Sequence[ForecastSeries],
    h: int,
    normalizer: Optional[float] = None,
) -> List[EnsembleRow]:
    """
    Score every forecast set and mark the Pareto front.

    Degenerate members come back as flagged rows (NaN scores, never on the
    front) instead of failing the whole run.

    Args:
        obs: Observation series shared by all members.
        forecasts: Forecast sets, one row each, in this order.
        h: Horizon in steps for gamma(h).
        normalizer: Fixed denominator (e.g. capacity). None normalizes each
            member by the mean observation over its own pairs.

    Returns:
        List of EnsembleRow in input order.
    """
    if not forecasts:
        raise ParameterError("no forecasts to evaluate")
    if normalizer is not None and not normalizer > 0:
        raise ParameterError(f"normalizer must be positive, got {normalizer}")

    gamma = lag_autocorrelation(obs, h)
    if abs(gamma) >= 1.0 - GAMMA_TOL:
        raise DegenerateStatisticError("gamma_h", f"|gamma({h})| = 1, skill undefined")

    rows = [_score_member(obs, fcst, gamma, normalizer) for fcst in forecasts]

    usable = [i for i, row in enumerate(rows) if not row.degenerate]
    if not usable:
        raise DataError("no usable forecasts in the ensemble")

    front = pareto_front([(rows[i].nmae, rows[i].nrmse) for i in usable])
    for i, flag in zip(usable, front):
        rows[i].on_front = flag
    return rows


def ensemble_summary(rows: Sequence[EnsembleRow]) -> Dict[str, object]:
    """Front size and the names of the min-nMAE, min-nRMSE and max-potential members."""
    scored = [row for row in rows if not row.degenerate]
    if not scored:
        raise DataError("no scored ensemble members")
    return {
        "members": len(rows),
        "front_size": sum(row.on_front for row in rows),
        "min_nmae": min(scored, key=lambda row: row.nmae).name,
        "min_nrmse": min(scored, key=lambda row: row.nrmse).name,
        "max_potential": max(scored, key=lambda row: row.s_rmse_potential).name,
    }


# =============================================================================
# Export
# =============================================================================

def rows_to_frame(rows: Sequence[EnsembleRow]) -> pd.DataFrame:
    return pd.DataFrame([row.to_dict() for row in rows], columns=ENSEMBLE_CSV_COLUMNS)


def _axis(values: np.ndarray) -> Tuple[float, float]:
    lo, hi = float(values.min()), float(values.max())
    span = hi - lo
    if span == 0:
        span = abs(lo) or 1.0
    pad = SVG_PAD_FRACTION * span
    return lo - pad, hi + pad


def render_scatter_svg(rows: Sequence[EnsembleRow], color_by: str = "potential") -> str:
    """
    SVG scatter of nRMSE against nMAE.

    Fill runs from light to dark grey with rising skill (or correlation);
    Pareto-front points get a red outline and are drawn last.
    """
    attribute = {"potential": "s_rmse_potential", "rho": "rho"}.get(color_by)
    if attribute is None:
        raise ParameterError(f"unknown color_by '{color_by}', expected 'potential' or 'rho'")

    points = [row for row in rows if np.isfinite(row.nmae) and np.isfinite(row.nrmse)]
    if not points:
        raise DataError("no finite points to plot")

    x_lo, x_hi = _axis(np.array([row.nmae for row in points]))
    y_lo, y_hi = _axis(np.array([row.nrmse for row in points]))

    shades = np.array([getattr(row, attribute) for row in points], dtype=float)
    finite = shades[np.isfinite(shades)]
    s_lo = float(finite.min()) if finite.size else 0.0
    s_hi = float(finite.max()) if finite.size else 0.0
    light, dark = SVG_LIGHTNESS_RANGE

    def lightness(value: float) -> float:
        if not np.isfinite(value):
            return light
        t = 0.5 if s_hi == s_lo else (value - s_lo) / (s_hi - s_lo)
        return light + t * (dark - light)

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {SVG_WIDTH} {SVG_HEIGHT}" '
        f'width="{SVG_WIDTH}" height="{SVG_HEIGHT}">',
        f'<rect x="0" y="0" width="{SVG_WIDTH}" height="{SVG_HEIGHT}" fill="white"/>',
    ]
    ordered = [row for row in points if not row.on_front] + [row for row in points if row.on_front]
    for row in ordered:
        cx = (row.nmae - x_lo) / (x_hi - x_lo) * SVG_WIDTH
        cy = SVG_HEIGHT - (row.nrmse - y_lo) / (y_hi - y_lo) * SVG_HEIGHT
        stroke = ' stroke="red" stroke-width="1.5"' if row.on_front else ""
        lines.append(
            f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="{SVG_POINT_RADIUS}" '
            f'fill="hsl(0,0%,{lightness(getattr(row, attribute)):.1f}%)"{stroke}/>'
        )
    lines.append(f'<text x="{SVG_WIDTH / 2:.0f}" y="{SVG_HEIGHT - 6}" font-size="12" '
                 f'text-anchor="middle">nMAE [{x_lo:.4g}, {x_hi:.4g}]</text>')
    lines.append(f'<text x="12" y="{SVG_HEIGHT / 2:.0f}" font-size="12" '
                 f'transform="rotate(-90 12 {SVG_HEIGHT / 2:.0f})" '
                 f'text-anchor="middle">nRMSE [{y_lo:.4g}, {y_hi:.4g}]</text>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def scatter_export(
    rows: Sequence[EnsembleRow],
    csv_path: Union[str, Path],
    svg_path: Optional[Union[str, Path]] = None,
    color_by: str = "potential",
) -> None:
    """
    Write the ensemble CSV and, optionally, the SVG scatter.

    Args:
        rows: Evaluated members.
        csv_path: CSV destination.
        svg_path: Optional SVG destination.
        color_by: "potential" or "rho" shading for the SVG.
    """
    if not rows:
        raise ParameterError("nothing to export")
    try:
        rows_to_frame(rows).to_csv(csv_path, index=False, lineterminator="\n")
        if svg_path is not None:
            svg = render_scatter_svg(rows, color_by)
            with open(svg_path, "w", newline="\n") as f:
                f.write(svg)
    except OSError as e:
        raise DataError(f"cannot write output: {e}") from e
