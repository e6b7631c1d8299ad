"""
Data model and CSV ingestion for forecast/observation time series.

Lags are counted in rows, not wall time. Timestamps are validated to be
strictly increasing but never enter the arithmetic; irregular sampling is
the caller's responsibility.
"""
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from config import DEFAULT_OBS_COL, MISSING_MARKERS, TIME_COL
from verification.errors import DataError, ParameterError

logger = logging.getLogger(__name__)


def _frozen_array(values: Sequence[float]) -> np.ndarray:
    array = np.array(values, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class ObservationSeries:
    """Ordered observations x, the verification ground truth."""

    values: np.ndarray
    timestamps: Optional[np.ndarray] = None

    def __post_init__(self):
        values = _frozen_array(self.values).ravel()
        if values.size < 1:
            raise DataError("observation series is empty")
        if not np.all(np.isfinite(values)):
            raise DataError("observation series contains missing or non-finite values")
        object.__setattr__(self, "values", values)

        if self.timestamps is not None:
            index = pd.Index(self.timestamps)
            if len(index) != values.size:
                raise DataError(
                    f"timestamps have {len(index)} entries for {values.size} observations"
                )
            if not (index.is_monotonic_increasing and index.is_unique):
                raise DataError("timestamps are not strictly increasing")

    def __len__(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True, eq=False)
class ForecastSeries:
    """A named forecast column, row-aligned to the observations. NaN marks a missing entry."""

    name: str
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen_array(self.values).ravel())

    def __len__(self) -> int:
        return int(self.values.size)

    @property
    def valid_count(self) -> int:
        return int(np.isfinite(self.values).sum())


@dataclass(frozen=True, eq=False)
class PairedSeries:
    """
    Finite (forecast, observation) pairs; the unit every metric works on.

    Attributes:
        f: Forecast values.
        x: Observation values, same length as f.
        dropped: Rows excluded when the pairs were formed.
    """

    f: np.ndarray
    x: np.ndarray
    dropped: int = 0

    def __post_init__(self):
        f = _frozen_array(self.f).ravel()
        x = _frozen_array(self.x).ravel()
        if f.size != x.size:
            raise DataError(f"forecast has {f.size} values but observation has {x.size}")
        if f.size < 1:
            raise DataError("no valid forecast/observation pairs")
        if not (np.all(np.isfinite(f)) and np.all(np.isfinite(x))):
            raise DataError("paired series contains non-finite values")
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "x", x)

    @property
    def n(self) -> int:
        return int(self.f.size)


@dataclass
class IngestReport:
    """Bookkeeping from a CSV read."""

    rows_read: int
    rows_dropped: int
    columns: List[str] = field(default_factory=list)
    qc_threshold_applied: Optional[float] = None

    @property
    def rows_kept(self) -> int:
        return self.rows_read - self.rows_dropped


# =============================================================================
# CSV ingestion
# =============================================================================

def _parse_numeric(column: pd.Series, name: str) -> pd.Series:
    """Parse a text column into floats, missing markers becoming NaN."""
    text = column.str.strip()
    missing = text.isin(MISSING_MARKERS)
    values = pd.to_numeric(text.where(~missing), errors="coerce")
    bad = values.isna() & ~missing
    if bad.any():
        row = int(np.flatnonzero(bad.to_numpy())[0])
        raise DataError(
            f"column '{name}' has non-numeric value {text.iloc[row]!r} on data row {row + 1}"
        )
    return values.astype(float)


def _parse_time(column: pd.Series) -> pd.Series:
    """Parse the time column as integer indices or ISO-8601 instants."""
    text = column.str.strip()
    missing = text.isin(MISSING_MARKERS)
    present = text[~missing]

    as_number = pd.to_numeric(present, errors="coerce")
    if as_number.notna().all() and (as_number == np.floor(as_number)).all():
        parsed = pd.Series(np.nan, index=text.index)
        parsed[~missing] = as_number
        return parsed

    as_time = pd.to_datetime(present, errors="coerce", format="ISO8601")
    if as_time.isna().any():
        bad = present[as_time.isna()].iloc[0]
        raise DataError(f"column '{TIME_COL}' has unparseable value {bad!r}")
    parsed = pd.Series(pd.NaT, index=text.index, dtype=as_time.dtype)
    parsed[~missing] = as_time
    return parsed


def ingest_table(
    path: Union[str, Path],
    obs_col: str = DEFAULT_OBS_COL,
    fcst_cols: Optional[Sequence[str]] = None,
    qc_min_obs: Optional[float] = None,
) -> Tuple[pd.DataFrame, IngestReport]:
    """
    Read a CSV and keep only the rows usable for verification.

    A row is dropped when any selected cell is empty, NaN or non-finite, or
    when its observation is below qc_min_obs. Selected columns come back as
    floats; other columns keep their original text.

    Args:
        path: CSV file with a header row.
        obs_col: Observation column name.
        fcst_cols: Forecast column names. Defaults to every column except
            the observation and time columns.
        qc_min_obs: Optional observation floor (e.g. to drop night values).

    Returns:
        Tuple of (kept rows, IngestReport).
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"input file not found: {path}")

    try:
        raw = pd.read_csv(path, dtype=str, keep_default_na=False)
    except (pd.errors.EmptyDataError, pd.errors.ParserError, UnicodeDecodeError) as e:
        raise DataError(f"could not read {path}: {e}") from e
    raw.columns = [str(c).strip() for c in raw.columns]

    if obs_col not in raw.columns:
        raise DataError(f"observation column '{obs_col}' not found in {list(raw.columns)}")
    if fcst_cols is None:
        fcst_cols = [c for c in raw.columns if c not in (obs_col, TIME_COL)]
    fcst_cols = list(fcst_cols)
    if len(set(fcst_cols)) != len(fcst_cols):
        raise ParameterError(f"forecast columns are not unique: {fcst_cols}")
    missing_cols = [c for c in fcst_cols if c not in raw.columns]
    if missing_cols:
        raise DataError(f"forecast column(s) {missing_cols} not found in {list(raw.columns)}")

    frame = raw.copy()
    if TIME_COL in raw.columns and raw[TIME_COL].str.strip().isin(MISSING_MARKERS).all():
        logger.warning("column '%s' is empty, ignoring it", TIME_COL)
        frame = frame.drop(columns=TIME_COL)
    keep = np.ones(len(frame), dtype=bool)
    for name in [obs_col] + fcst_cols:
        frame[name] = _parse_numeric(raw[name], name)
        keep &= np.isfinite(frame[name].to_numpy())

    if qc_min_obs is not None:
        keep &= frame[obs_col].to_numpy() >= qc_min_obs

    if TIME_COL in frame.columns:
        keep &= _parse_time(raw[TIME_COL]).notna().to_numpy()

    report = IngestReport(
        rows_read=len(frame),
        rows_dropped=int((~keep).sum()),
        columns=[obs_col] + fcst_cols,
        qc_threshold_applied=qc_min_obs,
    )
    if report.rows_kept == 0:
        raise DataError(f"no valid rows in {path} ({report.rows_read} read)")

    kept = frame.loc[keep].reset_index(drop=True)
    if TIME_COL in kept.columns:
        index = pd.Index(_parse_time(kept[TIME_COL]))
        if not (index.is_monotonic_increasing and index.is_unique):
            raise DataError(f"column '{TIME_COL}' is not strictly increasing")

    logger.debug(
        "read %d rows from %s, dropped %d", report.rows_read, path, report.rows_dropped
    )
    return kept, report


def ingest_csv(
    path: Union[str, Path],
    obs_col: str = DEFAULT_OBS_COL,
    fcst_cols: Optional[Sequence[str]] = None,
    qc_min_obs: Optional[float] = None,
) -> Tuple[ObservationSeries, List[ForecastSeries], IngestReport]:
    """
    Read a CSV into an observation series and its forecast columns.

    See ingest_table for the row exclusion rules.

    Returns:
        Tuple of (ObservationSeries, list of ForecastSeries, IngestReport).
    """
    frame, report = ingest_table(path, obs_col, fcst_cols, qc_min_obs)

    timestamps = None
    if TIME_COL in frame.columns:
        timestamps = _parse_time(frame[TIME_COL]).to_numpy()

    obs = ObservationSeries(values=frame[obs_col].to_numpy(dtype=float), timestamps=timestamps)
    forecasts = [
        ForecastSeries(name=name, values=frame[name].to_numpy(dtype=float))
        for name in report.columns[1:]
    ]
    return obs, forecasts, report


# =============================================================================
# Pairing
# =============================================================================

def pair(obs: ObservationSeries, fcst: ForecastSeries) -> PairedSeries:
    """Pair a forecast with the observations, keeping rows valid in both, in order."""
    if len(fcst) != len(obs):
        raise DataError(
            f"forecast '{fcst.name}' has {len(fcst)} rows but observations have {len(obs)}"
        )
    valid = np.isfinite(fcst.values) & np.isfinite(obs.values)
    if not valid.any():
        raise DataError(f"forecast '{fcst.name}' has no valid pairs")
    return PairedSeries(
        f=fcst.values[valid],
        x=obs.values[valid],
        dropped=int((~valid).sum()),
    )


def lag_pairs(obs: ObservationSeries, h: int) -> PairedSeries:
    """
    Pair each observation with the one h rows earlier.

    The lagged value x[t-h] sits in the forecast slot, x[t] in the
    observation slot, for t = h .. n-1.
    """
    if h < 1:
        raise ParameterError(f"lag must be a positive number of steps, got {h}")
    n = len(obs)
    if h >= n - 1:
        raise DataError(f"series of length {n} is too short for lag {h}")
    return PairedSeries(f=obs.values[:-h], x=obs.values[h:], dropped=h)


def split_pairs(p: PairedSeries, train_fraction: float) -> Tuple[PairedSeries, PairedSeries]:
    """
    Split pairs into a leading training part and a trailing evaluation part.

    Args:
        p: Pairs to split, in time order.
        train_fraction: Share of pairs used for training, in (0, 1).

    Returns:
        Tuple of (train, evaluate) PairedSeries.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ParameterError(f"train fraction must be in (0, 1), got {train_fraction}")
    cut = int(np.floor(train_fraction * p.n))
    if cut < 1 or cut > p.n - 1:
        raise DataError(f"cannot split {p.n} pairs at fraction {train_fraction}")
    train = PairedSeries(f=p.f[:cut], x=p.x[:cut], dropped=p.dropped)
    evaluate = PairedSeries(f=p.f[cut:], x=p.x[cut:], dropped=p.dropped)
    return train, evaluate
