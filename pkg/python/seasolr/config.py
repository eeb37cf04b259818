"""Run configuration shared by the CLI commands.

A run is described by one JSON document validated into :class:`RunConfig`;
command-line flags override single fields and the merged result is written
next to the outputs as ``run_config.json``.
"""

from __future__ import annotations

import os
from datetime import date
from pathlib import Path
from typing import Any, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .association import MEASURES
from .calendar import CalendarConfig
from .encoders import read_json
from .features import CovariateSpec, isolr_aqi_spec, tsolr_aqi_spec
from .polr import FitOptions
from .simulation import SimConfig

ModelName = Literal["tsolr", "isolr", "markov", "mtd", "par"]
POLR_MODELS: Tuple[str, ...] = ("tsolr", "isolr")

DEFAULT_OUT = "seasolr-out"


class TsolrOptions(BaseModel):
    """Preset parameters of the trigonometric covariates for daily data."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    periods: List[float] = Field(default_factory=lambda: [7.0, 365.0])
    harmonics: int = Field(default=1, ge=1)
    include_abs: bool = False
    lags: List[int] = Field(default_factory=lambda: [1])


class IsolrOptions(BaseModel):
    """Preset parameters of the indicator covariates for daily data."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    lags: List[int] = Field(default_factory=lambda: [1])


class RunConfig(BaseModel):
    """Everything a command needs besides its positional arguments.

    ``covariates`` replaces the preset spec of the chosen model when set.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    series: Optional[Path] = None
    out: Optional[Path] = None
    seed: int = 0
    model: ModelName = "tsolr"
    order: int = Field(default=1, ge=1)
    train_end: Optional[date] = None
    test_start: Optional[date] = None
    test_end: Optional[date] = None
    forecast_mode: Literal["rolling", "recursive"] = "rolling"
    calendar: CalendarConfig = Field(default_factory=CalendarConfig)
    tsolr: TsolrOptions = Field(default_factory=TsolrOptions)
    isolr: IsolrOptions = Field(default_factory=IsolrOptions)
    covariates: Optional[CovariateSpec] = None
    fit: FitOptions = Field(default_factory=FitOptions)
    max_lag: int = Field(default=20, ge=0)
    measures: List[str] = Field(default_factory=lambda: list(MEASURES))
    transition_lags: List[int] = Field(default_factory=lambda: [1])
    experiment: Optional[SimConfig] = None

    @model_validator(mode="after")
    def _check(self) -> "RunConfig":
        unknown = sorted(set(self.measures) - set(MEASURES))
        if unknown:
            raise ValueError(f"Unknown measure(s) {unknown}")
        if self.train_end and self.test_start and self.test_start <= self.train_end:
            raise ValueError("test_start must come after train_end")
        if self.test_start and self.test_end and self.test_end < self.test_start:
            raise ValueError("test_end must not precede test_start")
        return self

    def covariate_spec(self) -> CovariateSpec:
        """The covariate spec of ``model`` (only for ``tsolr``/``isolr``)."""

        if self.model not in POLR_MODELS:
            raise ValueError(f"{self.model} takes no covariates")
        if self.covariates is not None:
            if "calendar" in self.covariates.model_fields_set:
                return self.covariates
            return CovariateSpec(terms=self.covariates.terms, calendar=self.calendar)
        if self.model == "tsolr":
            return tsolr_aqi_spec(
                self.calendar,
                periods=self.tsolr.periods,
                harmonics=self.tsolr.harmonics,
                include_abs=self.tsolr.include_abs,
                lags=self.tsolr.lags,
            )
        return isolr_aqi_spec(self.calendar, lags=self.isolr.lags)

    def out_dir(self) -> Path:
        """``out``, else ``$SEASOLR_OUT``, else ``./seasolr-out``."""

        return Path(self.out or os.environ.get("SEASOLR_OUT") or DEFAULT_OUT)


def load_run_config(path: Optional[Path] = None, **overrides: Any) -> RunConfig:
    """Read a run config file (optional) and apply non-``None`` overrides.

    Raises:
        FileNotFoundError: If ``path`` does not exist.
        pydantic.ValidationError: If the merged document is invalid.
    """

    data = read_json(path) if path is not None else {}
    if not isinstance(data, dict):
        raise ValueError(f"{path} must contain a JSON object")
    data.update({key: value for key, value in overrides.items() if value is not None})
    return RunConfig.model_validate(data)
