"""Seasonal and lagged covariates for the proportional-odds models.

A :class:`CovariateSpec` is an ordered list of terms; its order is the column
order of the design matrix and is stored with every fitted model. Three term
types exist:

* :class:`FourierTermSpec` -- ``sin``/``cos`` (or their absolute values) of
  ``2 pi k t / P`` for a period ``P`` in days and harmonic ``k``;
* :class:`IndicatorSpec` -- 0/1 calendar dummies (season, weekend, festival
  window) and the synthetic block indicators used by the simulation study;
* :class:`LagSpec` -- the raw integer code ``Y_{t-p}`` as a numeric covariate.

The time index ``t`` is ``1`` on the origin date (the first training day) and
counts calendar days from there, so forecasts continue the training index and
gaps do not shift the seasonal phase.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date
from typing import Annotated, Dict, List, Literal, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .calendar import CalendarConfig
from .series import OrdinalSeries

FourierKind = Literal["sin", "cos", "abs_sin", "abs_cos"]
IndicatorKind = Literal["season", "weekend", "festival_window", "sim_block"]
SIM_BLOCKS = ("S1a", "S1b", "S2", "S3")


class FourierTermSpec(BaseModel):
    """One trigonometric covariate ``f(2 pi k t / P)``."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    type: Literal["fourier"] = "fourier"
    period: float = Field(gt=0)
    kind: FourierKind
    harmonic: int = Field(default=1, ge=1)

    @property
    def column(self) -> str:
        return f"{self.kind}_p{self.period:g}_k{self.harmonic}"


class IndicatorSpec(BaseModel):
    """One 0/1 covariate.

    ``level`` names the season for ``kind="season"`` and the block (``S1a``,
    ``S1b``, ``S2`` or ``S3``) for ``kind="sim_block"``; it is unused otherwise.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    type: Literal["indicator"] = "indicator"
    kind: IndicatorKind
    level: Optional[str] = None

    @model_validator(mode="after")
    def _check_level(self) -> "IndicatorSpec":
        if self.kind == "season" and not self.level:
            raise ValueError("season indicators need a level")
        if self.kind == "sim_block" and self.level not in SIM_BLOCKS:
            raise ValueError(f"sim_block level must be one of {SIM_BLOCKS}")
        return self

    @property
    def column(self) -> str:
        if self.kind in ("season", "sim_block"):
            return f"{self.kind}_{self.level}"
        return self.kind


class LagSpec(BaseModel):
    """The response ``p`` days back, as its integer code."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    type: Literal["lag"] = "lag"
    order: int = Field(default=1, ge=1)

    @property
    def column(self) -> str:
        return f"lag_{self.order}"


Term = Annotated[Union[FourierTermSpec, IndicatorSpec, LagSpec], Field(discriminator="type")]


class CovariateSpec(BaseModel):
    """Ordered covariate terms plus the calendar they are evaluated against."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    terms: List[Term] = Field(default_factory=list)
    calendar: CalendarConfig = Field(default_factory=CalendarConfig)

    @model_validator(mode="after")
    def _check_terms(self) -> "CovariateSpec":
        seasons = set(self.calendar.non_baseline_seasons())
        for term in self.terms:
            if isinstance(term, IndicatorSpec) and term.kind == "season":
                if term.level not in seasons:
                    raise ValueError(
                        f"season level {term.level!r} is not a non-baseline season "
                        f"of the calendar ({sorted(seasons)})"
                    )
        columns = self.columns
        if len(set(columns)) != len(columns):
            raise ValueError(f"Duplicate covariate columns: {columns}")
        return self

    @property
    def columns(self) -> Tuple[str, ...]:
        return tuple(term.column for term in self.terms)

    @property
    def lag_orders(self) -> Tuple[int, ...]:
        return tuple(term.order for term in self.terms if isinstance(term, LagSpec))

    @property
    def max_lag(self) -> int:
        return max(self.lag_orders, default=0)

    @property
    def indicators(self) -> Tuple[IndicatorSpec, ...]:
        return tuple(term for term in self.terms if isinstance(term, IndicatorSpec))


# ---------------------------------------------------------------------------
# Scalar feature functions
# ---------------------------------------------------------------------------


def _fourier(t: np.ndarray, spec: FourierTermSpec) -> np.ndarray:
    angle = 2.0 * np.pi * spec.harmonic * np.asarray(t, dtype=float) / spec.period
    if spec.kind == "sin":
        return np.sin(angle)
    if spec.kind == "cos":
        return np.cos(angle)
    if spec.kind == "abs_sin":
        return np.abs(np.sin(angle))
    return np.abs(np.cos(angle))


def fourier_features(t: int, spec: FourierTermSpec) -> float:
    """Evaluate one Fourier term at time index ``t`` (``t >= 1``)."""

    if t < 1:
        raise ValueError(f"time index must be >= 1, got {t}")
    return float(_fourier(np.asarray(t), spec))


def _sim_blocks(t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=np.int64)
    pos100 = (t - 1) % 100 + 1
    pos5 = (t - 1) % 5 + 1
    return np.column_stack(
        [
            (pos100 <= 30),
            (pos100 >= 31) & (pos100 <= 70),
            (pos5 >= 4),
            (pos100 >= 81) & (pos100 <= 85),
        ]
    ).astype(float)


def sim_indicators(t: int) -> Tuple[int, int, int, int]:
    """Block indicators ``(S1a, S1b, S2, S3)`` of the synthetic seasonal design.

    ``S1a`` covers days 1-30 and ``S1b`` days 31-70 of every 100-day block,
    ``S2`` days 4-5 of every 5-day block and ``S3`` days 81-85 of every
    100-day block.
    """

    if t < 1:
        raise ValueError(f"time index must be >= 1, got {t}")
    s1a, s1b, s2, s3 = (int(v) for v in _sim_blocks(np.asarray([t]))[0])
    return s1a, s1b, s2, s3


def _indicator_value(
    indicator: IndicatorSpec, day: date, t: int, calendar: CalendarConfig
) -> float:
    if indicator.kind == "season":
        return float(calendar.season_of(day) == indicator.level)
    if indicator.kind == "weekend":
        return float(calendar.is_weekend(day))
    if indicator.kind == "festival_window":
        return float(calendar.in_festival_window(day))
    return float(_sim_blocks(np.asarray([t]))[0, SIM_BLOCKS.index(indicator.level)])


def indicator_features(day: date, spec: CovariateSpec, t: Optional[int] = None) -> np.ndarray:
    """Evaluate every indicator term of ``spec`` on ``day``, in spec order.

    Args:
        day: Calendar date.
        spec: Covariate spec supplying the indicators and the calendar.
        t: Time index, needed only for ``sim_block`` indicators.

    Raises:
        MissingFestivalDateError: If a festival-window indicator is requested
            for a year without a configured festival date.
    """

    if t is None and any(ind.kind == "sim_block" for ind in spec.indicators):
        raise ValueError("sim_block indicators need a time index")
    return np.asarray(
        [_indicator_value(ind, day, t or 0, spec.calendar) for ind in spec.indicators],
        dtype=float,
    )


def feature_row(
    spec: CovariateSpec, day: date, t: int, lag_values: Mapping[int, int]
) -> np.ndarray:
    """Covariate vector for a single time point, in column order.

    Args:
        spec: Covariate spec.
        day: Calendar date of the time point.
        t: Time index of the time point.
        lag_values: Lag order to the observed (or predicted) code ``Y_{t-p}``.

    Raises:
        ValueError: If a required lag is missing from ``lag_values``.
    """

    row = np.empty(len(spec.terms), dtype=float)
    for i, term in enumerate(spec.terms):
        if isinstance(term, FourierTermSpec):
            row[i] = _fourier(np.asarray(t), term)
        elif isinstance(term, IndicatorSpec):
            row[i] = _indicator_value(term, day, t, spec.calendar)
        else:
            if term.order not in lag_values:
                raise ValueError(f"No value for lag {term.order} at {day}")
            row[i] = float(lag_values[term.order])
    return row


# ---------------------------------------------------------------------------
# Design matrices
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Design:
    """A design matrix aligned with its responses.

    Attributes:
        X: ``rows x len(columns)`` covariates.
        y: Response codes.
        t: Time index per row.
        dates: Date per row.
        columns: Column names in spec order.
    """

    X: np.ndarray
    y: np.ndarray
    t: np.ndarray
    dates: np.ndarray
    columns: Tuple[str, ...]

    def __len__(self) -> int:
        return int(self.y.size)

    def subset(self, mask: np.ndarray) -> "Design":
        return Design(self.X[mask], self.y[mask], self.t[mask], self.dates[mask], self.columns)


def time_index(dates: np.ndarray, origin: date) -> np.ndarray:
    """Calendar-day index with ``t = 1`` on ``origin``."""

    return (np.asarray(dates, dtype="datetime64[D]") - np.datetime64(origin, "D")).astype(
        np.int64
    ) + 1


def build_design(
    series: OrdinalSeries, spec: CovariateSpec, origin: Optional[date] = None
) -> Design:
    """Build the covariate matrix and aligned responses for ``series``.

    Rows whose lagged days were not observed (the first ``max_lag`` days, and
    days right after a gap) are dropped.

    Args:
        series: Observed series.
        spec: Covariate spec; column order follows it.
        origin: Date with time index 1. Defaults to the first date of ``series``.

    Returns:
        Design: The aligned design.

    Raises:
        ValueError: If no row has all of its lags available.
        MissingFestivalDateError: If a festival window is needed for an
            unconfigured year.
    """

    origin = origin or series.start
    grid = series.calendar_codes()
    offsets = (series.dates - series.dates[0]).astype(np.int64)
    keep = np.ones(len(series), dtype=bool)
    lag_columns: Dict[int, np.ndarray] = {}
    for order in spec.lag_orders:
        source = offsets - order
        valid = source >= 0
        values = np.full(len(series), -1, dtype=np.int64)
        values[valid] = grid[source[valid]]
        keep &= values >= 0
        lag_columns[order] = values

    if not keep.any():
        raise ValueError(
            f"No usable rows: the series ({len(series)} observations) cannot supply "
            f"lag {spec.max_lag}"
        )

    dates = series.dates[keep]
    t = time_index(dates, origin)
    X = seasonal_matrix(spec, t, dates)
    for i, term in enumerate(spec.terms):
        if isinstance(term, LagSpec):
            X[:, i] = lag_columns[term.order][keep]
    return Design(X, series.codes[keep].copy(), t, dates, spec.columns)


def seasonal_matrix(
    spec: CovariateSpec, t: np.ndarray, dates: Optional[np.ndarray] = None
) -> np.ndarray:
    """Evaluate every non-lag column at time indices ``t``; lag columns are zero.

    Args:
        spec: Covariate spec.
        t: Time indices (any integers; block indicators wrap around).
        dates: Dates aligned with ``t``, required only for calendar indicators.

    Raises:
        ValueError: If calendar indicators are requested without ``dates``.
    """

    t = np.asarray(t, dtype=np.int64)
    X = np.zeros((t.size, len(spec.terms)), dtype=float)
    days: Optional[List[date]] = None
    for i, term in enumerate(spec.terms):
        if isinstance(term, FourierTermSpec):
            X[:, i] = _fourier(t, term)
        elif isinstance(term, IndicatorSpec):
            if term.kind == "sim_block":
                X[:, i] = _sim_blocks(t)[:, SIM_BLOCKS.index(term.level)]
                continue
            if dates is None:
                raise ValueError(f"{term.column} needs calendar dates")
            if days is None:
                days = np.asarray(dates, dtype="datetime64[D]").astype(object).tolist()
            X[:, i] = [_indicator_value(term, d, 0, spec.calendar) for d in days]
    return X


# ---------------------------------------------------------------------------
# Presets
# ---------------------------------------------------------------------------


def tsolr_aqi_spec(
    calendar: Optional[CalendarConfig] = None,
    periods: Sequence[float] = (7.0, 365.0),
    harmonics: int = 1,
    include_abs: bool = False,
    lags: Sequence[int] = (1,),
) -> CovariateSpec:
    """Trigonometric seasonality for daily data: a cos/sin pair per period and harmonic, then lags."""

    terms: List[Union[FourierTermSpec, IndicatorSpec, LagSpec]] = []
    for period in periods:
        for k in range(1, harmonics + 1):
            terms.append(FourierTermSpec(period=period, kind="cos", harmonic=k))
            terms.append(FourierTermSpec(period=period, kind="sin", harmonic=k))
        if include_abs:
            terms.append(FourierTermSpec(period=period, kind="abs_sin"))
            terms.append(FourierTermSpec(period=period, kind="abs_cos"))
    terms.extend(LagSpec(order=p) for p in lags)
    return CovariateSpec(terms=terms, calendar=calendar or CalendarConfig())


def isolr_aqi_spec(
    calendar: Optional[CalendarConfig] = None, lags: Sequence[int] = (1,)
) -> CovariateSpec:
    """Indicator seasonality: non-baseline seasons, festival window, weekend, then lags."""

    calendar = calendar or CalendarConfig()
    terms: List[Union[FourierTermSpec, IndicatorSpec, LagSpec]] = [
        IndicatorSpec(kind="season", level=level) for level in calendar.non_baseline_seasons()
    ]
    terms.append(IndicatorSpec(kind="festival_window"))
    terms.append(IndicatorSpec(kind="weekend"))
    terms.extend(LagSpec(order=p) for p in lags)
    return CovariateSpec(terms=terms, calendar=calendar)


def tsolr_sim_spec(
    periods: Tuple[float, float, float] = (100.0, 5.0, 100.0), include_abs: bool = True
) -> CovariateSpec:
    """The simulation-study trigonometric form.

    Columns: ``sin``/``cos`` for the first two periods, ``|sin|``/``|cos|`` for
    the third (dropped when ``include_abs`` is false), then lag 1.
    """

    p1, p2, p3 = periods
    terms: List[Union[FourierTermSpec, IndicatorSpec, LagSpec]] = [
        FourierTermSpec(period=p1, kind="sin"),
        FourierTermSpec(period=p1, kind="cos"),
        FourierTermSpec(period=p2, kind="sin"),
        FourierTermSpec(period=p2, kind="cos"),
    ]
    if include_abs:
        terms.append(FourierTermSpec(period=p3, kind="abs_sin"))
        terms.append(FourierTermSpec(period=p3, kind="abs_cos"))
    terms.append(LagSpec(order=1))
    return CovariateSpec(terms=terms)


def isolr_sim_spec() -> CovariateSpec:
    """The simulation-study indicator form: ``S1a, S1b, S2, S3`` and lag 1."""

    terms: List[Union[FourierTermSpec, IndicatorSpec, LagSpec]] = [
        IndicatorSpec(kind="sim_block", level=level) for level in SIM_BLOCKS
    ]
    terms.append(LagSpec(order=1))
    return CovariateSpec(terms=terms)
