"""
Seeded synthetic observations and forecasts with known statistics.

Observations are a stationary Gaussian AR(1) process, so gamma(1) = phi.
Forecasts are affine transforms of the observations plus noise, Gaussian or
centered exponential, sized to hit a target correlation. Output is
reproducible for a given seed within one numpy build; nothing more is
promised.
"""
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from config import (
    DEFAULT_SEED,
    ENSEMBLE_BIAS_FRACTION,
    ENSEMBLE_GAIN_RANGE,
    ENSEMBLE_NOISE_FRACTION,
    FORECAST_NOISE_SHAPES,
)
from verification.errors import DegenerateStatisticError, ParameterError
from verification.metrics import moments
from verification.series import ForecastSeries, ObservationSeries


@dataclass(frozen=True)
class SynthSpec:
    """Parameters of one synthetic dataset."""

    n: int = 1000
    phi: float = 0.8
    mu: float = 1.0
    sigma: float = 1.0
    rho_target: float = 0.8
    bias: float = 0.0
    gain: float = 1.0
    seed: int = DEFAULT_SEED
    noise: str = "gaussian"

    def validate(self) -> None:
        _check_ar1(self.n, self.phi, self.sigma)
        _check_forecast(self.rho_target, self.gain, self.noise)
        if self.seed < 0:
            raise ParameterError(f"seed must be non-negative, got {self.seed}")


def _check_ar1(n: int, phi: float, sigma: float) -> None:
    if n < 10:
        raise ParameterError(f"n must be at least 10, got {n}")
    if not abs(phi) < 1:
        raise ParameterError(f"|phi| must be below 1, got {phi}")
    if not sigma > 0:
        raise ParameterError(f"sigma must be positive, got {sigma}")


def _check_forecast(rho_target: float, gain: float, noise: str) -> None:
    # rho_target = 1 is the noise-free limit
    if not 0 < rho_target <= 1:
        raise ParameterError(f"rho_target must be in (0, 1], got {rho_target}")
    if gain == 0 or not np.isfinite(gain):
        raise ParameterError(f"gain must be finite and non-zero, got {gain}")
    if noise not in FORECAST_NOISE_SHAPES:
        raise ParameterError(f"noise must be one of {FORECAST_NOISE_SHAPES}, got '{noise}'")


def gen_ar1(n: int, phi: float, mu: float, sigma: float, seed: int) -> ObservationSeries:
    """
    Stationary AR(1): x_t = mu + phi (x_{t-1} - mu) + e_t.

    x_0 is drawn from the stationary law N(mu, sigma^2) and the innovations
    have standard deviation sigma * sqrt(1 - phi^2), so every x_t has
    standard deviation sigma. Timestamps are the row indices.
    """
    _check_ar1(n, phi, sigma)
    rng = np.random.default_rng(seed)
    start = rng.normal(0.0, sigma)
    shocks = rng.normal(0.0, sigma * np.sqrt(1.0 - phi * phi), size=n - 1)

    anomaly = [start]
    value = start
    for shock in shocks.tolist():
        value = phi * value + shock
        anomaly.append(value)
    return ObservationSeries(values=mu + np.array(anomaly), timestamps=np.arange(n))


def gen_forecast(
    obs: ObservationSeries,
    rho_target: float,
    bias: float,
    gain: float,
    seed: int,
    name: str = "fcst",
    noise: str = "gaussian",
) -> ForecastSeries:
    """
    f'_t = bias + gain * (x_t + eta_t), var(eta) = sigma(x)^2 (1/rho^2 - 1).

    eta is Gaussian, or for noise="exponential" a centered exponential with
    the same variance, whose errors have a median away from their mean. The
    population correlation with x is rho_target for gain > 0 and -rho_target
    for gain < 0 either way.
    """
    _check_forecast(rho_target, gain, noise)
    sigma_x = moments(obs.values).std
    if sigma_x == 0:
        raise DegenerateStatisticError("sigma_x", "cannot build a forecast for constant observations")

    rng = np.random.default_rng(seed)
    noise_std = sigma_x * np.sqrt(1.0 / rho_target ** 2 - 1.0)
    if noise == "exponential":
        eta = noise_std * (rng.exponential(1.0, size=len(obs)) - 1.0)
    else:
        eta = rng.normal(0.0, noise_std, size=len(obs))
    return ForecastSeries(name=name, values=bias + gain * (obs.values + eta))


def _sorted_sizes(rng: np.random.Generator, rank: np.ndarray) -> np.ndarray:
    """Uniform draws in [0, 1) handed out by rank."""
    return np.sort(rng.uniform(0.0, 1.0, size=rank.size))[rank]


def _orthogonal_noise(rng: np.random.Generator, basis: np.ndarray) -> np.ndarray:
    """Gaussian draw with its projection on basis removed, rescaled to unit variance."""
    draw = rng.normal(0.0, 1.0, size=basis.shape[0])
    residual = draw - basis @ (basis.T @ draw)
    scale = residual.std()
    return residual / scale if scale > 0 else np.zeros_like(residual)


def gen_ensemble(
    obs: ObservationSeries,
    base: ForecastSeries,
    count: int,
    seed: int,
    bias_fraction: float = ENSEMBLE_BIAS_FRACTION,
    gain_range: Tuple[float, float] = ENSEMBLE_GAIN_RANGE,
    noise_fraction: float = ENSEMBLE_NOISE_FRACTION,
) -> List[ForecastSeries]:
    """
    Perturbed copies of a base forecast f' with mean m:

        f_k = m + bias_k + gain_k (f' - m + noise_k)

    Bias is uniform in +/- bias_fraction * mean(x), gain uniform in
    gain_range on either side of 1 and the noise standard deviation uniform
    in [0, noise_fraction * sigma(x)]. The three sizes are matched by rank,
    so the member with the smallest bias also has the smallest gain change
    and the least noise. Each noise series has zero sample mean and zero
    sample covariance with x and f', which makes a member's correlation
    with x a strictly decreasing function of its noise level.

    Args:
        obs: Observations the ranges are scaled to.
        base: Forecast to perturb, finite and row-aligned with obs.
        count: Number of members, at least 2.
        seed: PRNG seed.

    Returns:
        Members named "<base>_1" .. "<base>_<count>".
    """
    if count < 2:
        raise ParameterError(f"ensemble needs at least 2 members, got {count}")
    low_gain, high_gain = gain_range
    if bias_fraction < 0 or noise_fraction < 0 or not 0 < low_gain <= high_gain:
        raise ParameterError("ensemble perturbation ranges are invalid")
    if len(base) != len(obs):
        raise ParameterError(
            f"base forecast has {len(base)} rows but observations have {len(obs)}"
        )
    if not np.all(np.isfinite(base.values)):
        raise ParameterError(f"base forecast '{base.name}' has missing values")

    x = moments(obs.values)
    rng = np.random.default_rng(seed)
    bias_span = bias_fraction * abs(x.mean)
    center = min(max(1.0, low_gain), high_gain)

    rank = rng.permutation(count)
    bias_size = _sorted_sizes(rng, rank)
    gain_size = _sorted_sizes(rng, rank)
    noise_size = _sorted_sizes(rng, rank)
    bias_sign = rng.choice([-1.0, 1.0], size=count)
    gain_up = rng.random(count) < 0.5

    anomaly = base.values - base.values.mean()
    basis, _ = np.linalg.qr(np.column_stack([np.ones(len(obs)), obs.values, base.values]))
    members = []
    for k in range(count):
        bias = bias_sign[k] * bias_size[k] * bias_span
        if gain_up[k]:
            gain = center + gain_size[k] * (high_gain - center)
        else:
            gain = center - gain_size[k] * (center - low_gain)
        noise = noise_size[k] * noise_fraction * x.std * _orthogonal_noise(rng, basis)
        values = base.values + bias + (gain - 1.0) * anomaly + gain * noise
        members.append(ForecastSeries(name=f"{base.name}_{k + 1}", values=values))
    return members


def to_frame(
    obs: ObservationSeries,
    forecasts: Sequence[ForecastSeries],
    obs_col: str = "obs",
) -> pd.DataFrame:
    """Lay a synthetic dataset out in the standard CSV column order."""
    columns = {"time": obs.timestamps if obs.timestamps is not None else np.arange(len(obs))}
    columns[obs_col] = obs.values
    for fcst in forecasts:
        columns[fcst.name] = fcst.values
    return pd.DataFrame(columns)


def generate_dataset(spec: SynthSpec, members: int = 0, name: Optional[str] = None) -> pd.DataFrame:
    """Observations, one base forecast and optional ensemble members as a table."""
    spec.validate()
    obs = gen_ar1(spec.n, spec.phi, spec.mu, spec.sigma, spec.seed)
    base = gen_forecast(obs, spec.rho_target, spec.bias, spec.gain, spec.seed + 1,
                        name=name or "fcst", noise=spec.noise)
    forecasts = [base]
    if members:
        forecasts += gen_ensemble(obs, base, members, spec.seed + 2)
    return to_frame(obs, forecasts)
