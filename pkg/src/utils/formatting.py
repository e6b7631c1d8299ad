"""
Rendering of skill reports and calibration results for the CLI.

Machine formats (JSON, CSV) carry skill as fractions; only the text
table shows percentages.
"""
import io
import json
from typing import List, Sequence

import pandas as pd

from config import REPORT_KEYS
from verification.calibration import CalibrationSummary, LinearCalibration
from verification.reference import SkillReport

SKILL_KEYS = {"s_rmse_actual", "s_mae_actual", "s_rmse_potential", "s_mse_potential"}


def reports_to_json(reports: Sequence[SkillReport]) -> str:
    """One report as an object, several as an object keyed by forecast name."""
    if len(reports) == 1:
        payload = reports[0].to_dict()
    else:
        payload = {report.name: report.to_dict() for report in reports}
    return json.dumps(payload, indent=2) + "\n"


def reports_to_csv(reports: Sequence[SkillReport]) -> str:
    rows = []
    for report in reports:
        row = {"name": report.name}
        row.update(report.to_dict())
        row["warnings"] = ";".join(report.warnings)
        rows.append(row)
    buffer = io.StringIO()
    pd.DataFrame(rows, columns=["name"] + REPORT_KEYS).to_csv(buffer, index=False, lineterminator="\n")
    return buffer.getvalue()


def _format_value(key: str, value) -> str:
    if key in SKILL_KEYS or key == "s_mse_actual":
        return f"{100.0 * value:.2f}%"
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def format_report_text(report: SkillReport) -> str:
    """Aligned key/value table for one report."""
    lines = [f"Forecast: {report.name or '-'}", "-" * 40]
    keys = [k for k in REPORT_KEYS if k != "warnings"]
    keys.insert(keys.index("s_rmse_potential"), "s_mse_actual")
    for key in keys:
        lines.append(f"  {key:<18} {_format_value(key, getattr(report, key))}")
    lines.append(f"  {'overlap_n':<18} {report.overlap_n}")
    lines.append(f"  {'warnings':<18} {', '.join(report.warnings) or 'none'}")
    return "\n".join(lines) + "\n"


def reports_to_text(reports: Sequence[SkillReport]) -> str:
    return "\n".join(format_report_text(report) for report in reports)


def format_calibration(name: str, calibration: LinearCalibration) -> str:
    flag = "" if calibration.converged else "  (not converged)"
    return (
        f"{name}: a={calibration.intercept_a:.6g} b={calibration.gain_b:.6g} "
        f"scheme={calibration.scheme} fit_n={calibration.fit_n}{flag}"
    )


def calibrations_to_csv(coefficients: Sequence[dict]) -> str:
    """One row per (forecast, scheme) fit."""
    buffer = io.StringIO()
    pd.DataFrame(
        list(coefficients), columns=["forecast", "a", "b", "scheme", "fit_n", "converged"]
    ).to_csv(buffer, index=False, lineterminator="\n")
    return buffer.getvalue()


def format_calibration_table(name: str, summaries: List[CalibrationSummary], raw_dispersion: float) -> str:
    """Per-directive table: coefficients, MAE, RMSE and dispersion ratio."""
    lines = [
        f"Forecast: {name}  (raw dispersion {raw_dispersion:.4f})",
        f"  {'scheme':<9} {'a':>12} {'b':>10} {'MAE':>12} {'RMSE':>12} {'sigma_f/sigma_x':>16}",
    ]
    for s in summaries:
        c = s.calibration
        lines.append(
            f"  {c.scheme:<9} {c.intercept_a:>12.6g} {c.gain_b:>10.6g} "
            f"{s.mae:>12.6g} {s.rmse:>12.6g} {s.dispersion:>16.4f}"
        )
    return "\n".join(lines) + "\n"
