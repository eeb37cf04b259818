from __future__ import annotations

import json
from datetime import date
from pathlib import Path

import pytest
from pydantic import ValidationError

from seasolr.calendar import CalendarConfig
from seasolr.config import DEFAULT_OUT, RunConfig, load_run_config
from seasolr.features import CovariateSpec, FourierTermSpec, IndicatorSpec, LagSpec

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def _write(tmp_path: Path, data: dict) -> Path:
    path = tmp_path / "run.json"
    path.write_text(json.dumps(data))
    return path


def test_defaults():
    config = load_run_config()
    assert config.model == "tsolr"
    assert config.order == 1
    assert config.forecast_mode == "rolling"
    assert config.max_lag == 20
    assert config.calendar.festivals == {}


def test_overrides_win_and_none_is_ignored(tmp_path):
    path = _write(tmp_path, {"model": "isolr", "seed": 4, "max_lag": 7})
    config = load_run_config(path, seed=None, max_lag=3, model=None)
    assert config.model == "isolr"
    assert config.seed == 4
    assert config.max_lag == 3


def test_unknown_keys_are_rejected(tmp_path):
    with pytest.raises(ValidationError):
        load_run_config(_write(tmp_path, {"modle": "isolr"}))


def test_config_file_must_hold_an_object(tmp_path):
    path = tmp_path / "list.json"
    path.write_text("[1, 2]")
    with pytest.raises(ValueError):
        load_run_config(path)


def test_missing_config_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_run_config(tmp_path / "absent.json")


@pytest.mark.parametrize(
    "fields",
    [
        {"train_end": date(2024, 1, 1), "test_start": date(2024, 1, 1)},
        {"test_start": date(2024, 2, 1), "test_end": date(2024, 1, 31)},
        {"measures": ["kappa", "spearman"]},
        {"model": "arima"},
        {"order": 0},
    ],
)
def test_invalid_settings(fields):
    with pytest.raises(ValidationError):
        RunConfig(**fields)


def test_out_dir_precedence(monkeypatch, tmp_path):
    monkeypatch.delenv("SEASOLR_OUT", raising=False)
    assert RunConfig().out_dir() == Path(DEFAULT_OUT)
    monkeypatch.setenv("SEASOLR_OUT", str(tmp_path / "env"))
    assert RunConfig().out_dir() == tmp_path / "env"
    assert RunConfig(out=tmp_path / "flag").out_dir() == tmp_path / "flag"


# ---------------------------------------------------------------------------
# Covariate specs
# ---------------------------------------------------------------------------


def test_tsolr_spec_follows_options():
    config = RunConfig(tsolr={"periods": [7.0], "harmonics": 2, "lags": [1, 2]})
    assert config.covariate_spec().columns == (
        "cos_p7_k1",
        "sin_p7_k1",
        "cos_p7_k2",
        "sin_p7_k2",
        "lag_1",
        "lag_2",
    )


def test_isolr_spec_uses_the_run_calendar():
    calendar = CalendarConfig(festivals={2024: date(2024, 10, 31)})
    spec = RunConfig(model="isolr", calendar=calendar).covariate_spec()
    assert spec.calendar == calendar
    assert spec.columns == (
        "season_summer",
        "season_monsoon",
        "season_winter",
        "festival_window",
        "weekend",
        "lag_1",
    )


def test_explicit_covariates_inherit_the_calendar():
    calendar = CalendarConfig(festivals={2024: date(2024, 10, 31)})
    terms = [IndicatorSpec(kind="festival_window"), LagSpec(order=1)]
    spec = RunConfig(covariates=CovariateSpec(terms=terms), calendar=calendar).covariate_spec()
    assert spec.calendar == calendar
    assert spec.columns == ("festival_window", "lag_1")

    own = CovariateSpec(terms=[FourierTermSpec(period=7.0, kind="cos")], calendar=CalendarConfig())
    kept = RunConfig(covariates=own, calendar=calendar).covariate_spec()
    assert kept.calendar.festivals == {}


@pytest.mark.parametrize("model", ["markov", "mtd", "par"])
def test_baselines_take_no_covariates(model):
    with pytest.raises(ValueError):
        RunConfig(model=model).covariate_spec()


def test_shipped_kolkata_config_loads():
    config = load_run_config(CONFIGS / "kolkata.json")
    assert config.train_end == date(2023, 12, 31)
    assert config.test_start == date(2024, 1, 1)
    assert sorted(config.calendar.festivals) == [2019, 2020, 2021, 2022, 2023, 2024]
    assert config.calendar.festivals[2022] == date(2022, 10, 24)
    assert len(config.covariate_spec().columns) == 5
