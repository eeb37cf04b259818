"""Ordinal time series and their descriptive statistics.

An :class:`OrdinalSeries` is a strictly increasing run of calendar dates, each
carrying a category code ``0..m`` from a :class:`CategoryScheme`. Dates may have
gaps; every lag-based statistic here pairs an observation only with the one
exactly ``h`` calendar days earlier, so a gap breaks the chain instead of
inventing a transition across it.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from datetime import date
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .calendar import CalendarConfig
from .errors import InvalidSeriesError

logger = logging.getLogger(__name__)

AQI_LABELS = ("Good", "Satisfactory", "Moderate", "Poor", "Very Poor", "Severe")
AQI_BOUNDS = (50.0, 100.0, 200.0, 300.0, 400.0, float("inf"))

#: Sentinel stored on the daily grid for days without an observation.
MISSING = -1


@dataclass(frozen=True)
class CategoryScheme:
    """Ordered categories with inclusive upper cutoffs.

    Attributes:
        labels: Category names in code order.
        bounds: Inclusive upper cutoff per category; the last one is ``inf``.
    """

    labels: Tuple[str, ...]
    bounds: Tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "bounds", tuple(float(b) for b in self.bounds))
        if len(self.labels) < 2:
            raise ValueError("A category scheme needs at least two categories")
        if len(self.labels) != len(self.bounds):
            raise ValueError(
                f"labels ({len(self.labels)}) and bounds ({len(self.bounds)}) differ in length"
            )
        if any(b >= c for b, c in zip(self.bounds, self.bounds[1:])):
            raise ValueError("Category bounds must be strictly increasing")
        if not np.isinf(self.bounds[-1]):
            raise ValueError("The last category bound must be unbounded (inf)")

    @property
    def n_categories(self) -> int:
        return len(self.labels)

    @property
    def max_code(self) -> int:
        """The largest code ``m``."""

        return len(self.labels) - 1

    @classmethod
    def aqi(cls) -> "CategoryScheme":
        """The national six-class AQI scheme (Good ... Severe)."""

        return cls(AQI_LABELS, AQI_BOUNDS)

    @classmethod
    def ordinal(cls, n_categories: int) -> "CategoryScheme":
        """A generic scheme whose cutoffs are the codes themselves.

        Encoding an integer code with this scheme returns the same code, which
        makes it the natural scheme for simulated series.
        """

        labels = tuple(str(i) for i in range(n_categories))
        bounds = tuple(float(i) for i in range(n_categories - 1)) + (float("inf"),)
        return cls(labels, bounds)

    def to_dict(self) -> Dict[str, list]:
        # inf is not valid JSON; the open top class is implied.
        return {"labels": list(self.labels), "bounds": list(self.bounds[:-1])}

    @classmethod
    def from_dict(cls, data: Dict[str, list]) -> "CategoryScheme":
        return cls(tuple(data["labels"]), tuple(data["bounds"]) + (float("inf"),))


def _as_dates(dates: Sequence) -> np.ndarray:
    return np.asarray(dates, dtype="datetime64[D]")


@dataclass(frozen=True, eq=False)
class OrdinalSeries:
    """Date-indexed category codes.

    The arrays are made read-only on construction, so instances can be shared
    freely.

    Attributes:
        dates: ``datetime64[D]`` array, strictly increasing.
        codes: Integer codes in ``0..scheme.max_code``.
        scheme: The category scheme the codes refer to.
    """

    dates: np.ndarray
    codes: np.ndarray
    scheme: CategoryScheme
    _grid: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        dates = np.array(self.dates, dtype="datetime64[D]")
        codes = np.asarray(self.codes)
        if codes.size and not np.issubdtype(codes.dtype, np.integer):
            rounded = np.round(codes)
            if not np.array_equal(rounded, codes):
                raise InvalidSeriesError(
                    "Category codes must be integers",
                    np.flatnonzero(rounded != codes).tolist(),
                )
            codes = rounded
        codes = np.array(codes, dtype=np.int64)
        if dates.ndim != 1 or codes.ndim != 1 or dates.shape != codes.shape:
            raise InvalidSeriesError("dates and codes must be 1-D and equally long")
        if codes.size == 0:
            raise InvalidSeriesError("An ordinal series needs at least one observation")
        steps = np.diff(dates).astype(np.int64)
        if np.any(steps <= 0):
            raise InvalidSeriesError(
                "Dates must be strictly increasing",
                (np.flatnonzero(steps <= 0) + 1).tolist(),
            )
        bad = np.flatnonzero((codes < 0) | (codes > self.scheme.max_code))
        if bad.size:
            raise InvalidSeriesError(
                f"Codes must lie in 0..{self.scheme.max_code}", bad.tolist()
            )

        grid = np.full(int((dates[-1] - dates[0]).astype(np.int64)) + 1, MISSING)
        grid[(dates - dates[0]).astype(np.int64)] = codes
        for array in (dates, codes, grid):
            array.flags.writeable = False
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "codes", codes)
        object.__setattr__(self, "_grid", grid)

    def __len__(self) -> int:
        return int(self.codes.size)

    @classmethod
    def from_codes(
        cls,
        codes: Sequence[int],
        scheme: Optional[CategoryScheme] = None,
        start: date = date(2001, 1, 1),
    ) -> "OrdinalSeries":
        """Build a gap-free daily series starting at ``start``.

        Args:
            codes: Category codes.
            scheme: Scheme for the codes; defaults to a generic ordinal scheme
                sized to the largest code (at least two categories).
            start: Date of the first observation.
        """

        codes = np.asarray(codes, dtype=np.int64)
        if scheme is None:
            scheme = CategoryScheme.ordinal(max(int(codes.max(initial=0)) + 1, 2))
        dates = np.datetime64(start, "D") + np.arange(codes.size)
        return cls(dates, codes, scheme)

    @property
    def start(self) -> date:
        return self.dates[0].astype(object)

    @property
    def end(self) -> date:
        return self.dates[-1].astype(object)

    def date_list(self) -> List[date]:
        return self.dates.astype(object).tolist()

    def gap_days(self) -> int:
        """Number of calendar days between the first and last date with no observation."""

        return int(np.count_nonzero(self._grid == MISSING))

    def gap_positions(self) -> List[int]:
        """Indices ``i`` such that at least one day is missing between observation ``i-1`` and ``i``."""

        steps = np.diff(self.dates).astype(np.int64)
        return (np.flatnonzero(steps > 1) + 1).tolist()

    def calendar_codes(self) -> np.ndarray:
        """Codes on the complete daily grid from first to last date (``-1`` for gaps)."""

        return self._grid

    def window(self, start: Optional[date] = None, end: Optional[date] = None) -> "OrdinalSeries":
        """Return the sub-series with ``start <= date <= end`` (bounds optional).

        Raises:
            ValueError: If no observation falls inside the window.
        """

        mask = np.ones(len(self), dtype=bool)
        if start is not None:
            mask &= self.dates >= np.datetime64(start, "D")
        if end is not None:
            mask &= self.dates <= np.datetime64(end, "D")
        if not mask.any():
            raise ValueError(f"No observations between {start} and {end}")
        return OrdinalSeries(self.dates[mask], self.codes[mask], self.scheme)

    def to_dict(self) -> Dict[str, object]:
        return {
            "scheme": self.scheme.to_dict(),
            "dates": [str(d) for d in self.dates],
            "codes": self.codes.tolist(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, object]) -> "OrdinalSeries":
        return cls(
            np.asarray(data["dates"], dtype="datetime64[D]"),
            np.asarray(data["codes"], dtype=np.int64),
            CategoryScheme.from_dict(data["scheme"]),  # type: ignore[arg-type]
        )


def encode_series(
    dates: Sequence, values: Sequence[float], scheme: CategoryScheme
) -> OrdinalSeries:
    """Map numeric AQI values to category codes.

    A value equal to a cutoff belongs to that cutoff's category (``50`` is
    Good, ``51`` Satisfactory).

    Args:
        dates: One date per value, strictly increasing.
        values: Non-negative finite AQI values.
        scheme: Category scheme providing the cutoffs.

    Returns:
        OrdinalSeries: The encoded series.

    Raises:
        InvalidSeriesError: If any value is negative or non-finite; ``rows``
            lists the offending indices.
    """

    values = np.asarray(values, dtype=float)
    bad = np.flatnonzero(~np.isfinite(values) | (values < 0))
    if bad.size:
        raise InvalidSeriesError(
            f"AQI values must be finite and non-negative (bad rows: {bad.tolist()})",
            bad.tolist(),
        )
    codes = np.searchsorted(np.asarray(scheme.bounds), values, side="left")
    return OrdinalSeries(_as_dates(dates), codes, scheme)


def decode_codes(codes: Sequence[int], scheme: CategoryScheme) -> np.ndarray:
    """Return a representative value per code that encodes back to the same code.

    Bounded categories map to their upper cutoff; the open top category maps
    to one above the last finite cutoff.
    """

    codes = np.asarray(codes, dtype=np.int64)
    bounds = np.asarray(scheme.bounds)
    representatives = bounds.copy()
    representatives[-1] = bounds[-2] + 1.0
    return representatives[codes]


def lagged_codes(series: OrdinalSeries, lags: Sequence[int]) -> np.ndarray:
    """Align each observation with its values ``lags`` calendar days earlier.

    Args:
        series: Source series.
        lags: Non-negative lag orders.

    Returns:
        np.ndarray: Shape ``(rows, 1 + len(lags))``: column 0 is ``Y_t`` and
        column ``k`` is ``Y_{t - lags[k-1]}``. Only rows whose every lagged day
        was observed are kept, in date order.
    """

    grid = series.calendar_codes()
    max_lag = max(lags, default=0)
    if any(h < 0 for h in lags):
        raise ValueError("Lags must be non-negative")
    if max_lag >= grid.size:
        return np.empty((0, 1 + len(lags)), dtype=np.int64)
    current = grid[max_lag:]
    columns = [current] + [grid[max_lag - h : grid.size - h] for h in lags]
    stacked = np.column_stack(columns)
    keep = np.all(stacked != MISSING, axis=1)
    return stacked[keep]


@dataclass(frozen=True, eq=False)
class FrequencyTable:
    counts: np.ndarray
    proportions: np.ndarray


def frequency_distribution(series: OrdinalSeries) -> FrequencyTable:
    """Count how often each category occurs.

    Returns:
        FrequencyTable: Counts and proportions over all ``m + 1`` categories.
    """

    counts = np.bincount(series.codes, minlength=series.scheme.n_categories)
    return FrequencyTable(counts=counts, proportions=counts / counts.sum())


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    """Empirical lag-``h`` transition probabilities.

    Attributes:
        lag: The lag ``h``.
        counts: ``counts[i, j]`` = number of ``(Y_{t-h} = i, Y_t = j)`` pairs.
        probabilities: Row-normalized counts; unsupported rows are all zero.
        empty_rows: Codes ``i`` with no lag-``h`` successor observed.
    """

    lag: int
    counts: np.ndarray
    probabilities: np.ndarray
    empty_rows: Tuple[int, ...]


def transition_matrix(series: OrdinalSeries, lag: int = 1) -> TransitionMatrix:
    """Estimate ``P(Y_t = j | Y_{t-lag} = i)`` from consecutive-day pairs.

    Raises:
        ValueError: If ``lag`` is not positive or not shorter than the series.
    """

    if lag < 1:
        raise ValueError("lag must be a positive integer")
    if lag >= len(series):
        raise ValueError(f"lag {lag} must be smaller than the series length {len(series)}")
    k = series.scheme.n_categories
    pairs = lagged_codes(series, [lag])
    counts = np.zeros((k, k), dtype=np.int64)
    np.add.at(counts, (pairs[:, 1], pairs[:, 0]), 1)
    totals = counts.sum(axis=1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        probabilities = np.where(totals > 0, counts / np.maximum(totals, 1), 0.0)
    empty = tuple(int(i) for i in np.flatnonzero(totals[:, 0] == 0))
    if empty:
        logger.debug("Transition rows without support at lag %d: %s", lag, empty)
    return TransitionMatrix(lag, counts, probabilities, empty)


def month_category_intensity(series: OrdinalSeries, normalize: bool = False) -> np.ndarray:
    """Month-by-category day counts (row ``0`` is January).

    Args:
        series: Source series.
        normalize: Express each month as percentages of the days observed in
            that month (rows without data stay zero).

    Returns:
        np.ndarray: ``12 x (m + 1)`` matrix.
    """

    months = series.dates.astype("datetime64[M]").astype(np.int64) % 12
    table = np.zeros((12, series.scheme.n_categories), dtype=float)
    np.add.at(table, (months, series.codes), 1.0)
    if normalize:
        totals = table.sum(axis=1, keepdims=True)
        table = np.divide(table * 100.0, totals, out=np.zeros_like(table), where=totals > 0)
    return table


def rate_evolution(series: OrdinalSeries) -> np.ndarray:
    """Cumulative count path per category.

    Returns:
        np.ndarray: ``n x (m + 1)``; entry ``(t, j)`` counts ``Y_s = j`` for ``s <= t``.
    """

    indicators = np.eye(series.scheme.n_categories, dtype=np.int64)[series.codes]
    return np.cumsum(indicators, axis=0)


@dataclass(frozen=True, eq=False)
class GroupedDistribution:
    """Category counts per group (year, season, day type or festival phase)."""

    grouping: str
    groups: Tuple[str, ...]
    counts: np.ndarray

    @property
    def percentages(self) -> np.ndarray:
        totals = self.counts.sum(axis=1, keepdims=True)
        return np.divide(
            self.counts * 100.0,
            totals,
            out=np.zeros(self.counts.shape, dtype=float),
            where=totals > 0,
        )


GROUPINGS = ("year", "season", "daytype", "festival_phase")


def category_distribution_by(
    series: OrdinalSeries,
    grouping: str,
    calendar: Optional[CalendarConfig] = None,
) -> GroupedDistribution:
    """Split category counts by a calendar grouping.

    Args:
        series: Source series.
        grouping: One of ``"year"``, ``"season"``, ``"daytype"`` (weekday vs
            weekend) or ``"festival_phase"`` (pre, festival and post windows;
            days outside all three are left out).
        calendar: Calendar definitions; defaults to :class:`CalendarConfig()`.

    Returns:
        GroupedDistribution: Counts with one row per group.
    """

    if grouping not in GROUPINGS:
        raise ValueError(f"Unknown grouping {grouping!r}; expected one of {GROUPINGS}")
    calendar = calendar or CalendarConfig()
    days = series.date_list()

    if grouping == "year":
        keys: List[Optional[str]] = [str(d.year) for d in days]
        groups = sorted(set(k for k in keys if k is not None))
    elif grouping == "season":
        keys = [calendar.season_of(d) for d in days]
        groups = list(calendar.seasons)
    elif grouping == "daytype":
        keys = ["weekend" if calendar.is_weekend(d) else "weekday" for d in days]
        groups = ["weekday", "weekend"]
    else:
        keys = [calendar.festival_phase(d) for d in days]
        groups = ["pre", "festival", "post"]

    index = {g: i for i, g in enumerate(groups)}
    counts = np.zeros((len(groups), series.scheme.n_categories), dtype=np.int64)
    for key, code in zip(keys, series.codes.tolist()):
        if key is not None:
            counts[index[key], code] += 1
    return GroupedDistribution(grouping, tuple(groups), counts)
