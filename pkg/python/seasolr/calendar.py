"""Calendar knowledge used by indicator covariates and grouped summaries.

Season month ranges and festival dates are location specific and the defaults
here only cover seasons. Festival dates are never shipped: they have to come
from the user's configuration, one ISO date per year.
"""

from __future__ import annotations

from datetime import date
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .errors import MissingFestivalDateError

SEASON_LEVELS: Tuple[str, ...] = ("summer", "monsoon", "autumn", "winter")

DEFAULT_SEASONS: Dict[str, List[int]] = {
    "summer": [3, 4, 5],
    "monsoon": [6, 7, 8, 9],
    "autumn": [10, 11],
    "winter": [12, 1, 2],
}

#: Festival phases relative to the festival day, as inclusive day offsets.
FESTIVAL_PHASES: Dict[str, Tuple[int, int]] = {
    "pre": (-22, -8),
    "festival": (-7, 7),
    "post": (8, 22),
}


class CalendarConfig(BaseModel):
    """Season, festival and weekend definitions for a location.

    Attributes:
        seasons: Season name to the calendar months (1-12) it covers. Every
            month must belong to exactly one season.
        baseline_season: Season left out of the one-hot season dummies.
        festivals: Year to festival date.
        weekend_days: ISO weekday numbers counted as weekend (Monday = 0).
        festival_window: Inclusive day offsets around the festival date.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    seasons: Dict[str, List[int]] = Field(
        default_factory=lambda: {k: list(v) for k, v in DEFAULT_SEASONS.items()}
    )
    baseline_season: str = "autumn"
    festivals: Dict[int, date] = Field(default_factory=dict)
    weekend_days: List[int] = Field(default_factory=lambda: [5, 6])
    festival_window: Tuple[int, int] = (-7, 7)

    @field_validator("weekend_days")
    @classmethod
    def _check_weekend_days(cls, value: List[int]) -> List[int]:
        if any(d < 0 or d > 6 for d in value):
            raise ValueError("weekend_days must be weekday numbers 0 (Monday) to 6")
        return sorted(set(value))

    @field_validator("festival_window")
    @classmethod
    def _check_window(cls, value: Tuple[int, int]) -> Tuple[int, int]:
        if value[0] > value[1]:
            raise ValueError("festival_window start must not exceed its end")
        return value

    @model_validator(mode="after")
    def _check_seasons(self) -> "CalendarConfig":
        covered: List[int] = []
        for months in self.seasons.values():
            covered.extend(months)
        if sorted(covered) != list(range(1, 13)):
            raise ValueError("seasons must cover each month 1-12 exactly once")
        if self.baseline_season not in self.seasons:
            raise ValueError(
                f"baseline_season {self.baseline_season!r} is not one of the seasons"
            )
        return self

    def season_of(self, day: date) -> str:
        """Return the season name covering ``day``."""

        for name, months in self.seasons.items():
            if day.month in months:
                return name
        raise AssertionError("validated seasons cover every month")

    def non_baseline_seasons(self) -> List[str]:
        """Season names that get a dummy column, in configuration order."""

        return [name for name in self.seasons if name != self.baseline_season]

    def is_weekend(self, day: date) -> bool:
        return day.weekday() in self.weekend_days

    def festival_date(self, year: int) -> date:
        """Return the configured festival date for ``year``.

        Raises:
            MissingFestivalDateError: If ``year`` is not configured.
        """

        try:
            return self.festivals[year]
        except KeyError:
            raise MissingFestivalDateError(year) from None

    def festival_offset(self, day: date) -> Optional[int]:
        """Signed day distance from ``day`` to the nearest configured festival.

        Festivals in the neighbouring years are considered too, so early-January
        days still see a late-December festival. Returns ``None`` when no
        festival is configured for the year of ``day`` or its neighbours.
        """

        best: Optional[int] = None
        for year in (day.year - 1, day.year, day.year + 1):
            festival = self.festivals.get(year)
            if festival is None:
                continue
            offset = (day - festival).days
            if best is None or abs(offset) < abs(best):
                best = offset
        return best

    def in_festival_window(self, day: date) -> bool:
        """Whether ``day`` lies in the festival window of its year.

        Raises:
            MissingFestivalDateError: If the year of ``day`` has no festival date.
        """

        self.festival_date(day.year)
        offset = self.festival_offset(day)
        start, end = self.festival_window
        return offset is not None and start <= offset <= end

    def festival_phase(self, day: date) -> Optional[str]:
        """Return ``"pre"``, ``"festival"``, ``"post"`` or ``None`` for ``day``."""

        offset = self.festival_offset(day)
        if offset is None:
            return None
        for phase, (start, end) in FESTIVAL_PHASES.items():
            if start <= offset <= end:
                return phase
        return None
