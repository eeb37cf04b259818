"""Reading and writing series and tables.

Input CSVs are UTF-8 with a header of either ``date,aqi`` (numeric AQI,
encoded through the category scheme) or ``date,category`` (integer codes).
Rows may come in any order; they are sorted by date. Problems are reported
with the 1-based line numbers of the offending rows (the header is line 1).
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np
import pandas as pd

from .encoders import read_json, write_json
from .errors import InvalidSeriesError
from .series import CategoryScheme, OrdinalSeries, encode_series, frequency_distribution

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def try_is_pandas_df(maybe_df: Any) -> bool:
    """Check whether an object is a pandas ``DataFrame``."""

    return isinstance(maybe_df, pd.DataFrame)


def try_is_polars_df(maybe_df: Any) -> bool:
    """Check whether an object is a polars ``DataFrame`` (``False`` without polars)."""

    try:
        import polars as pl
    except ImportError:
        return False

    return isinstance(maybe_df, pl.DataFrame)


def _line_numbers(mask: Union[np.ndarray, pd.Series]) -> list:
    return (np.flatnonzero(np.asarray(mask)) + 2).tolist()


def series_from_frame(frame: Any, scheme: Optional[CategoryScheme] = None) -> OrdinalSeries:
    """Build a series from a pandas or polars frame with ``date`` and ``aqi`` or ``category``.

    Args:
        frame: pandas or polars ``DataFrame``.
        scheme: Category scheme; defaults to the AQI scheme.

    Raises:
        TypeError: If ``frame`` is not a supported DataFrame.
        InvalidSeriesError: If columns are missing or rows are malformed;
            ``rows`` holds line numbers as if the frame had been read from CSV.
    """

    if try_is_polars_df(frame):
        frame = pd.DataFrame(frame.to_dict(as_series=False))
    elif not try_is_pandas_df(frame):
        raise TypeError(
            f"Unsupported frame type {type(frame).__name__}; pass a pandas or polars DataFrame"
        )
    scheme = scheme or CategoryScheme.aqi()
    frame = frame.reset_index(drop=True)
    columns = [str(c).strip().lower() for c in frame.columns]
    frame.columns = columns
    if "date" not in columns or not ({"aqi", "category"} & set(columns)):
        raise InvalidSeriesError(f"Expected columns date,aqi or date,category; got {columns}")

    dates = pd.to_datetime(frame["date"], format="%Y-%m-%d", errors="coerce")
    bad_dates = dates.isna()
    if bad_dates.any():
        raise InvalidSeriesError("Unparseable dates", _line_numbers(bad_dates))
    duplicated = dates.duplicated(keep=False)
    if duplicated.any():
        raise InvalidSeriesError("Duplicate dates", _line_numbers(duplicated))

    value_column = "aqi" if "aqi" in columns else "category"
    values = pd.to_numeric(frame[value_column], errors="coerce")
    bad_values = values.isna() | ~np.isfinite(values.to_numpy(dtype=float, na_value=np.nan))
    if value_column == "aqi":
        bad_values |= values < 0
    else:
        bad_values |= (values != values.round()) | (values < 0) | (values > scheme.max_code)
    if bad_values.any():
        raise InvalidSeriesError(f"Invalid {value_column} values", _line_numbers(bad_values))

    order = np.argsort(dates.to_numpy(), kind="stable")
    day_array = dates.to_numpy().astype("datetime64[D]")[order]
    value_array = values.to_numpy(dtype=float)[order]
    if value_column == "aqi":
        series = encode_series(day_array, value_array, scheme)
    else:
        series = OrdinalSeries(day_array, value_array.astype(np.int64), scheme)
    if series.gap_days():
        logger.warning(
            "Series has %d missing day(s) in %d gap(s)",
            series.gap_days(),
            len(series.gap_positions()),
        )
    return series


def read_series_csv(path: PathLike, scheme: Optional[CategoryScheme] = None) -> OrdinalSeries:
    """Read a ``date,aqi`` or ``date,category`` CSV file.

    Raises:
        FileNotFoundError: If ``path`` does not exist.
        InvalidSeriesError: On malformed rows, with their line numbers.
    """

    frame = pd.read_csv(path, dtype=str, skipinitialspace=True, encoding="utf-8")
    return series_from_frame(frame, scheme)


def save_series(series: OrdinalSeries, path: PathLike) -> Path:
    return write_json(series.to_dict(), path)


def load_series(path: PathLike) -> OrdinalSeries:
    return OrdinalSeries.from_dict(read_json(path))


def load_series_any(path: PathLike, scheme: Optional[CategoryScheme] = None) -> OrdinalSeries:
    """Load a series from canonical JSON or from CSV, chosen by extension."""

    if Path(path).suffix.lower() == ".json":
        return load_series(path)
    return read_series_csv(path, scheme)


def series_summary(series: OrdinalSeries) -> Dict[str, object]:
    """Date range, per-label counts and the gap report of ``series``."""

    counts = frequency_distribution(series).counts
    return {
        "start": series.start,
        "end": series.end,
        "observations": len(series),
        "counts": {label: int(c) for label, c in zip(series.scheme.labels, counts)},
        "gap_days": series.gap_days(),
        "gap_positions": series.gap_positions(),
    }


def write_frame(frame: pd.DataFrame, path: PathLike) -> Path:
    """Write ``frame`` as UTF-8 CSV without the index, creating parent directories."""

    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(target, index=False, encoding="utf-8", lineterminator="\n")
    return target
