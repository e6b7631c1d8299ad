"""
Tests for the command-line entry point: outputs and exit codes.
"""
import pytest
import sys
import os
import hashlib
import io
import json

import pandas as pd

# Add src to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from config import REPORT_KEYS
from main import main
from utils.synthetic import gen_ar1, gen_ensemble, gen_forecast, to_frame
from verification.calibration import apply, fit_mse_linear
from verification.series import ForecastSeries, pair


def write_csv(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def synth_file(tmp_path, *flags, name="synth.csv"):
    path = str(tmp_path / name)
    assert main(["synth", "--out", path, *flags]) == 0
    return path


def digest(path):
    with open(path, "rb") as f:
        return hashlib.sha256(f.read()).hexdigest()


PERFECT = "time,obs,fcst\n" + "".join(
    f"{t},{x},{x}\n" for t, x in enumerate([1, 3, 2, 5, 4, 6, 3, 7, 5, 8, 4, 6])
)


class TestScore:
    """Tests for the score subcommand."""

    def test_perfect_forecast_json(self, tmp_path, capsys):
        """f = x has full actual and potential skill."""
        path = write_csv(tmp_path, PERFECT)
        assert main(["score", "--input", path, "--format", "json"]) == 0
        report = json.loads(capsys.readouterr().out)
        assert list(report) == REPORT_KEYS
        assert report["s_rmse_actual"] == pytest.approx(1.0)
        assert report["s_rmse_potential"] == pytest.approx(1.0)
        assert report["n"] == 12

    def test_potential_from_synthetic(self, tmp_path, capsys):
        """rho = 0.8 and gamma = 0.6 give potential skill near 0.25."""
        path = synth_file(tmp_path, "--n", "20000", "--phi", "0.6", "--rho-target", "0.8",
                          "--mu", "5", "--seed", "3")
        capsys.readouterr()
        assert main(["score", "--input", path, "--fcst-cols", "fcst", "--format", "json"]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["s_rmse_potential"] == pytest.approx(0.25, abs=0.03)

    def test_link_identity_survives_json(self, tmp_path, capsys):
        """Parsed skill values still satisfy 1 - S_mse = (1 - S_rmse)^2."""
        path = synth_file(tmp_path, "--n", "500", "--seed", "4", "--mu", "3")
        capsys.readouterr()
        assert main(["score", "--input", path, "--format", "json"]) == 0
        report = json.loads(capsys.readouterr().out)
        left = 1 - report["s_mse_potential"]
        right = (1 - report["s_rmse_potential"]) ** 2
        assert left == pytest.approx(right, abs=1e-12)

    def test_several_forecasts_keyed_by_name(self, tmp_path, capsys):
        """Multiple columns come back as an object per forecast."""
        path = synth_file(tmp_path, "--n", "300", "--members", "2", "--mu", "3")
        capsys.readouterr()
        assert main(["score", "--input", path, "--format", "json"]) == 0
        reports = json.loads(capsys.readouterr().out)
        assert list(reports) == ["fcst", "fcst_1", "fcst_2"]

    def test_text_and_csv_formats(self, tmp_path, capsys):
        """Text shows percentages, CSV keeps fractions."""
        path = write_csv(tmp_path, PERFECT)
        assert main(["score", "--input", path]) == 0
        assert "100.00%" in capsys.readouterr().out
        assert main(["score", "--input", path, "--format", "csv"]) == 0
        frame = pd.read_csv(io.StringIO(capsys.readouterr().out))
        assert frame.loc[0, "s_rmse_actual"] == pytest.approx(1.0)

    def test_constant_observations(self, tmp_path, capsys):
        """Degenerate statistics exit with 3 and name the statistic."""
        path = write_csv(tmp_path, "obs,fcst\n" + "".join(f"2,{v}\n" for v in range(10)))
        assert main(["score", "--input", path]) == 3
        assert "degenerate statistic" in capsys.readouterr().err

    def test_missing_file(self, tmp_path):
        """Unreadable input exits with 2."""
        assert main(["score", "--input", str(tmp_path / "absent.csv")]) == 2

    def test_usage_errors(self, tmp_path):
        """Bad flags exit with 1."""
        path = write_csv(tmp_path, PERFECT)
        assert main(["score", "--input", path, "--horizon", "0"]) == 1
        assert main(["score", "--input", path, "--normalize", "median"]) == 1
        assert main(["score"]) == 1
        assert main(["forecast"]) == 1

    def test_capacity_normalizer(self, tmp_path, capsys):
        """capacity:<value> divides errors by the capacity."""
        path = synth_file(tmp_path, "--n", "300", "--mu", "3")
        capsys.readouterr()
        assert main(["score", "--input", path, "--normalize", "capacity:10", "--format", "json"]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["nmae"] == pytest.approx(report["mae_f"] / 10)

    def test_repeat_runs_identical(self, tmp_path):
        """Same inputs and flags give byte-identical output."""
        path = synth_file(tmp_path, "--n", "400", "--members", "3", "--mu", "3")
        first, second = str(tmp_path / "a.json"), str(tmp_path / "b.json")
        assert main(["score", "--input", path, "--format", "json", "--out", first]) == 0
        assert main(["score", "--input", path, "--format", "json", "--out", second]) == 0
        assert digest(first) == digest(second)


class TestCalibrate:
    """Tests for the calibrate subcommand."""

    def test_mse_four_point(self, tmp_path, capsys):
        """The small dataset calibrates to a = -0.5, b = 1."""
        path = write_csv(tmp_path, "obs,fcst\n1,2\n2,2\n3,4\n4,4\n")
        out = str(tmp_path / "cal.csv")
        assert main(["calibrate", "--input", path, "--scheme", "mse",
                     "--format", "json", "--out", out]) == 0
        coefficients = json.loads(capsys.readouterr().out)
        assert coefficients[0]["a"] == pytest.approx(-0.5)
        assert coefficients[0]["b"] == pytest.approx(1.0)
        assert coefficients[0]["fit_n"] == 4
        frame = pd.read_csv(out)
        assert list(frame["fcst_cal_mse"]) == pytest.approx([1.5, 1.5, 3.5, 3.5])

    def test_variance_identity(self, tmp_path, capsys):
        """f' = x needs no change."""
        path = write_csv(tmp_path, PERFECT)
        out = str(tmp_path / "cal.csv")
        assert main(["calibrate", "--input", path, "--scheme", "variance",
                     "--format", "json", "--out", out]) == 0
        coefficients = json.loads(capsys.readouterr().out)
        assert coefficients[0]["a"] == pytest.approx(0.0, abs=1e-12)
        assert coefficients[0]["b"] == pytest.approx(1.0)

    def test_all_schemes(self, tmp_path):
        """--scheme all adds one column per directive."""
        path = synth_file(tmp_path, "--n", "200", "--mu", "3")
        out = str(tmp_path / "cal.csv")
        assert main(["calibrate", "--input", path, "--scheme", "all", "--out", out]) == 0
        columns = list(pd.read_csv(out).columns)
        for scheme in ("mse", "mae", "variance"):
            assert f"fcst_cal_{scheme}" in columns

    def test_train_fraction(self, tmp_path, capsys):
        """Fits use only the leading share of rows."""
        path = synth_file(tmp_path, "--n", "200", "--mu", "3")
        capsys.readouterr()
        out = str(tmp_path / "cal.csv")
        assert main(["calibrate", "--input", path, "--train-fraction", "0.75",
                     "--format", "json", "--out", out]) == 0
        assert json.loads(capsys.readouterr().out)[0]["fit_n"] == 150

    def test_csv_coefficients(self, tmp_path, capsys):
        """--format csv prints one coefficient row per fit."""
        path = write_csv(tmp_path, "obs,fcst\n1,2\n2,2\n3,4\n4,4\n")
        out = str(tmp_path / "cal.csv")
        assert main(["calibrate", "--input", path, "--scheme", "mse",
                     "--format", "csv", "--out", out]) == 0
        printed = capsys.readouterr().out
        assert "forecast,a,b,scheme,fit_n,converged\n" in printed
        coefficients = pd.read_csv(io.StringIO(printed[printed.index("forecast,a,b"):]))
        assert list(coefficients["forecast"]) == ["fcst"]
        assert coefficients.loc[0, "a"] == pytest.approx(-0.5)
        assert coefficients.loc[0, "b"] == pytest.approx(1.0)
        assert coefficients.loc[0, "fit_n"] == 4

    def test_mae_constant_forecast(self, tmp_path):
        """A constant raw forecast exits with 3."""
        path = write_csv(tmp_path, "obs,fcst\n1,2\n2,2\n3,2\n4,2\n")
        assert main(["calibrate", "--input", path, "--scheme", "mae"]) == 3


class TestEnsemble:
    """Tests for the ensemble subcommand."""

    def test_three_columns(self, tmp_path, capsys):
        """Three members give a four-line CSV and a summary."""
        path = synth_file(tmp_path, "--n", "300", "--members", "2", "--mu", "3")
        out = str(tmp_path / "ens.csv")
        svg = str(tmp_path / "ens.svg")
        capsys.readouterr()
        assert main(["ensemble", "--input", path, "--out", out, "--svg", svg]) == 0
        with open(out) as f:
            assert len(f.read().splitlines()) == 4
        summary = capsys.readouterr().out
        assert "min nMAE" in summary and "max potential" in summary
        assert os.path.exists(svg)

    def test_duplicate_columns(self, tmp_path):
        """Identical columns both sit on the front."""
        frame = pd.read_csv(synth_file(tmp_path, "--n", "300", "--mu", "3"))
        frame["copy"] = frame["fcst"]
        path = str(tmp_path / "dup.csv")
        frame.to_csv(path, index=False)
        out = str(tmp_path / "ens.csv")
        assert main(["ensemble", "--input", path, "--out", out]) == 0
        rows = pd.read_csv(out, dtype=str)
        assert list(rows["on_front"]) == ["true", "true"]
        assert rows.loc[0, "nmae"] == rows.loc[1, "nmae"]

    def test_stdout_csv(self, tmp_path, capsys):
        """Without --out the CSV goes to stdout."""
        path = synth_file(tmp_path, "--n", "300", "--members", "2", "--mu", "3")
        capsys.readouterr()
        assert main(["ensemble", "--input", path]) == 0
        out = capsys.readouterr().out
        assert out.startswith("name,nmae,nrmse,rho,s_rmse_actual,s_rmse_potential,on_front\n")


    def test_max_potential_member_on_front(self, tmp_path, capsys):
        """In a 500-member synthetic ensemble the most skilful-after-calibration member is non-dominated."""
        obs = gen_ar1(2000, 0.85, 4.0, 1.0, seed=41)
        raw = gen_forecast(obs, 0.9, 0.0, 1.0, seed=42, noise="exponential")
        base = ForecastSeries(name="fcst", values=apply(fit_mse_linear(pair(obs, raw)), raw.values))
        path = str(tmp_path / "members.csv")
        to_frame(obs, gen_ensemble(obs, base, 500, seed=43)).to_csv(path, index=False)
        out = str(tmp_path / "ens.csv")
        assert main(["ensemble", "--input", path, "--out", out]) == 0
        rows = pd.read_csv(out, dtype={"on_front": str})
        assert len(rows) == 500
        best = rows.loc[rows["s_rmse_potential"].idxmax()]
        assert best["on_front"] == "true"
        assert f"max potential: {best['name']}" in capsys.readouterr().out


class TestSynth:
    """Tests for the synth subcommand."""

    def test_repeat_runs_identical(self, tmp_path):
        """Same seed, same file."""
        first = synth_file(tmp_path, "--n", "100", "--seed", "7", name="a.csv")
        second = synth_file(tmp_path, "--n", "100", "--seed", "7", name="b.csv")
        assert digest(first) == digest(second)

    def test_layout(self, tmp_path):
        """time, obs, fcst and member columns."""
        path = synth_file(tmp_path, "--n", "50", "--members", "2")
        frame = pd.read_csv(path)
        assert list(frame.columns) == ["time", "obs", "fcst", "fcst_1", "fcst_2"]
        assert len(frame) == 50

    def test_reports_gamma(self, tmp_path, capsys):
        """The sample gamma(1) is reported."""
        synth_file(tmp_path, "--n", "20000", "--phi", "0.9")
        out = capsys.readouterr().out
        assert "sample gamma(1) = 0.9" in out or "sample gamma(1) = 0.8" in out

    def test_negative_gain_warning(self, tmp_path, capsys):
        """gain < 0 warns about the negative correlation."""
        synth_file(tmp_path, "--n", "200", "--gain", "-1", "--rho-target", "0.8")
        assert "negative" in capsys.readouterr().out

    def test_exponential_noise(self, tmp_path):
        """--noise exponential changes the forecast but not the observations."""
        plain = pd.read_csv(synth_file(tmp_path, "--n", "100", "--seed", "5", name="a.csv"))
        skewed = pd.read_csv(synth_file(tmp_path, "--n", "100", "--seed", "5",
                                        "--noise", "exponential", name="b.csv"))
        assert list(plain["obs"]) == list(skewed["obs"])
        assert list(plain["fcst"]) != list(skewed["fcst"])

    def test_bad_parameters(self, tmp_path):
        """Out-of-domain parameters exit with 1."""
        out = str(tmp_path / "s.csv")
        assert main(["synth", "--n", "5", "--out", out]) == 1
        assert main(["synth", "--phi", "1.0", "--out", out]) == 1
        assert main(["synth", "--members", "-1", "--out", out]) == 1
        assert main(["synth", "--seed", "-3", "--out", out]) == 1
        assert main(["synth", "--noise", "uniform", "--out", out]) == 1


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
