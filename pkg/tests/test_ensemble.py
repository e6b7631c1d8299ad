"""
Tests for ensemble scoring, the Pareto front and scatter export.
"""
import pytest
import sys
import os
import re

import numpy as np
import pandas as pd

# Add src to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from utils.synthetic import gen_ar1, gen_ensemble, gen_forecast
from verification.ensemble import (
    EnsembleRow,
    ensemble_summary,
    evaluate_ensemble,
    pareto_front,
    render_scatter_svg,
    scatter_export,
)
from verification.errors import DataError, ParameterError
from verification.series import ForecastSeries


def brute_force_front(points):
    """O(n^2) dominance check."""
    array = np.asarray(points, dtype=float)
    mae, rmse = array[:, 0], array[:, 1]
    no_worse = (mae[None, :] <= mae[:, None]) & (rmse[None, :] <= rmse[:, None])
    better = (mae[None, :] < mae[:, None]) | (rmse[None, :] < rmse[:, None])
    return (~(no_worse & better).any(axis=1)).tolist()


def make_row(name, nmae, nrmse, potential=0.2, on_front=False):
    return EnsembleRow(
        name=name,
        nmae=nmae,
        nrmse=nrmse,
        rho=0.8,
        s_rmse_actual=0.1,
        s_rmse_potential=potential,
        on_front=on_front,
    )


class TestParetoFront:
    """Tests for non-dominated point marking."""

    def test_three_points(self):
        """(2, 2) is dominated by (1, 1)."""
        assert pareto_front([(1, 1), (2, 2), (0.5, 3)]) == [True, False, True]

    def test_identical_points(self):
        """Without a strict improvement nothing is dominated."""
        assert pareto_front([(1, 2)] * 4) == [True] * 4

    def test_single_point(self):
        """One point is its own front."""
        assert pareto_front([(3, 4)]) == [True]

    def test_equal_mae_keeps_lowest_rmse(self):
        """Equal MAE with higher RMSE is dominated."""
        assert pareto_front([(1, 2), (1, 3), (2, 1)]) == [True, False, True]

    def test_matches_brute_force(self):
        """Sweep agrees with pairwise dominance, ties included."""
        rng = np.random.default_rng(0)
        for trial in range(1000):
            n = int(rng.integers(1, 201))
            if trial % 2:
                points = rng.integers(0, 12, size=(n, 2)).astype(float)
            else:
                points = rng.random((n, 2))
            assert pareto_front(points) == brute_force_front(points)

    def test_monotone_rescaling(self):
        """Increasing transforms of either axis keep the front."""
        points = np.random.default_rng(1).random((80, 2))
        rescaled = np.column_stack([3 * points[:, 0] + 1, np.exp(points[:, 1])])
        assert pareto_front(points) == pareto_front(rescaled)

    def test_rejects_empty_and_non_finite(self):
        """Points must exist and be finite."""
        with pytest.raises(ParameterError):
            pareto_front([])
        with pytest.raises(ParameterError):
            pareto_front([(1.0, np.nan)])


class TestEvaluateEnsemble:
    """Tests for scoring a set of forecasts against one series."""

    @pytest.fixture
    def obs(self):
        return gen_ar1(400, 0.8, 4.0, 1.0, seed=30)

    def test_single_forecast(self, obs):
        """A lone member is on the front."""
        rows = evaluate_ensemble(obs, [gen_forecast(obs, 0.8, 0, 1, seed=31)], 1)
        assert len(rows) == 1
        assert rows[0].on_front

    def test_identical_forecasts(self, obs):
        """Duplicates score the same and share the front."""
        f = gen_forecast(obs, 0.8, 0, 1, seed=32)
        twin = ForecastSeries(name="twin", values=f.values)
        rows = evaluate_ensemble(obs, [f, twin], 1)
        assert rows[0].nmae == rows[1].nmae
        assert rows[0].nrmse == rows[1].nrmse
        assert rows[0].on_front and rows[1].on_front

    def test_order_and_names(self, obs):
        """Rows come back in input order."""
        base = gen_forecast(obs, 0.8, 0, 1, seed=33)
        members = gen_ensemble(obs, base, 5, seed=34)
        rows = evaluate_ensemble(obs, members, 1)
        assert [r.name for r in rows] == [m.name for m in members]

    def test_front_agrees_with_brute_force(self, obs):
        """The marked front is the brute-force front of the scored points."""
        base = gen_forecast(obs, 0.8, 0, 1, seed=35)
        rows = evaluate_ensemble(obs, gen_ensemble(obs, base, 100, seed=36), 1)
        points = [(r.nmae, r.nrmse) for r in rows]
        assert [r.on_front for r in rows] == brute_force_front(points)

        best_mae = min(rows, key=lambda r: (r.nmae, r.nrmse))
        best_rmse = min(rows, key=lambda r: (r.nrmse, r.nmae))
        assert best_mae.on_front
        assert best_rmse.on_front

    def test_degenerate_member_flagged(self, obs):
        """A constant forecast is reported, never on the front."""
        good = gen_forecast(obs, 0.8, 0, 1, seed=37)
        flat = ForecastSeries(name="flat", values=np.full(len(obs), 4.0))
        rows = evaluate_ensemble(obs, [good, flat], 1)
        assert rows[1].degenerate
        assert not rows[1].on_front
        assert np.isnan(rows[1].s_rmse_potential)
        assert rows[0].on_front

    def test_all_degenerate(self, obs):
        """Nothing usable is a data error."""
        flat = ForecastSeries(name="flat", values=np.full(len(obs), 4.0))
        with pytest.raises(DataError):
            evaluate_ensemble(obs, [flat], 1)

    def test_empty(self, obs):
        """An empty ensemble is a usage error."""
        with pytest.raises(ParameterError):
            evaluate_ensemble(obs, [], 1)

    def test_summary(self, obs):
        """Summary names the extreme members."""
        base = gen_forecast(obs, 0.8, 0, 1, seed=38)
        rows = evaluate_ensemble(obs, gen_ensemble(obs, base, 20, seed=39), 1)
        summary = ensemble_summary(rows)
        assert summary["members"] == 20
        assert summary["front_size"] == sum(r.on_front for r in rows)
        assert summary["min_nmae"] == min(rows, key=lambda r: r.nmae).name
        assert summary["max_potential"] == max(rows, key=lambda r: r.s_rmse_potential).name


class TestScatterExport:
    """Tests for the CSV and SVG outputs."""

    def test_single_row_csv(self, tmp_path):
        """Header plus one row."""
        path = tmp_path / "rows.csv"
        scatter_export([make_row("a", 0.2, 0.3, on_front=True)], path)
        lines = path.read_text().splitlines()
        assert len(lines) == 2
        assert lines[0] == "name,nmae,nrmse,rho,s_rmse_actual,s_rmse_potential,on_front"
        assert lines[1].endswith(",true")

    def test_front_column(self, tmp_path):
        """on_front follows the marked front."""
        points = [(1, 1), (2, 2), (0.5, 3)]
        flags = pareto_front(points)
        rows = [make_row(f"m{i}", m, r, on_front=flag) for i, ((m, r), flag) in enumerate(zip(points, flags))]
        path = tmp_path / "rows.csv"
        scatter_export(rows, path)
        frame = pd.read_csv(path, dtype=str)
        assert list(frame["on_front"]) == ["true", "false", "true"]

    def test_svg_written(self, tmp_path):
        """SVG has the fixed viewBox and one red outline per front point."""
        rows = [
            make_row("a", 1, 1, potential=0.1, on_front=True),
            make_row("b", 2, 2, potential=0.3),
            make_row("c", 0.5, 3, potential=0.2, on_front=True),
        ]
        svg_path = tmp_path / "scatter.svg"
        scatter_export(rows, tmp_path / "rows.csv", svg_path)
        svg = svg_path.read_text()
        assert 'viewBox="0 0 800 600"' in svg
        assert svg.count("<circle") == 3
        assert svg.count('stroke="red"') == 2
        assert 'r="4"' in svg

    def test_uniform_fill(self):
        """Equal potential skill gives one fill colour."""
        rows = [make_row(str(i), i, 4 - i, potential=0.3) for i in range(1, 4)]
        fills = set(re.findall(r'fill="(hsl[^"]+)"', render_scatter_svg(rows)))
        assert len(fills) == 1

    def test_fill_darkens_with_skill(self):
        """Lowest skill is lightest, highest is darkest."""
        rows = [make_row("lo", 1, 3, potential=0.0), make_row("hi", 3, 1, potential=0.5)]
        svg = render_scatter_svg(rows)
        assert "hsl(0,0%,85.0%)" in svg
        assert "hsl(0,0%,15.0%)" in svg

    def test_bad_color_by(self):
        """Only potential and rho shading exist."""
        with pytest.raises(ParameterError):
            render_scatter_svg([make_row("a", 1, 1)], color_by="mase")

    def test_unwritable_path(self, tmp_path):
        """Write failures surface as data errors."""
        with pytest.raises(DataError):
            scatter_export([make_row("a", 1, 1)], tmp_path / "missing" / "rows.csv")


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
