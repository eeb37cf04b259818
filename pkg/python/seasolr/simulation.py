"""Synthetic ordinal series and the Monte-Carlo experiments run on them.

Two generating processes are provided:

* ``tsolr`` -- thresholds plus ``sin``/``cos`` terms with period ``P1``,
  ``sin``/``cos`` with period ``P2``, ``|sin|``/``|cos|`` with period ``P3``
  and a lag-1 term (``P = (100, 5, 100)`` by default);
* ``isolr`` -- thresholds plus the block indicators ``S1a, S1b, S2, S3`` and a
  lag-1 term.

Series are generated step by step: ``Y_t`` is drawn from the cumulative logit
model with the lag term fed by ``Y_{t-1}``; the lag seed before the first step
is category ``0`` and the first ``burn_in`` draws are discarded. Kept draws
have time indices ``1..n`` and are dated from 2001-01-01.

Experiments replicate simulate-then-fit runs. Every replicate gets its own
child of ``SeedSequence([seed, n])``, so results do not depend on the worker
count or completion order.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.special import expit

from .features import CovariateSpec, LagSpec, build_design, isolr_sim_spec, seasonal_matrix, tsolr_sim_spec
from .metrics import accuracy, weighted_f1
from .polr import FitOptions, PolrModel, PolrParams, category_probs, fit, forecast_window
from .series import CategoryScheme, OrdinalSeries

logger = logging.getLogger(__name__)

ProcessKind = Literal["tsolr", "isolr"]
Seed = Union[int, np.random.SeedSequence]

SIM_PERIODS: Tuple[float, float, float] = (100.0, 5.0, 100.0)

#: Named parameter settings: three- and four-category truths for each process.
PRESETS: Dict[str, Dict[str, object]] = {
    "tsolr3": {
        "process": "tsolr",
        "thresholds": [-0.84, 0.84],
        "coefficients": [0.0, 2.0, 0.0, 0.7, 0.0, 0.2, 1.9],
    },
    "tsolr4": {
        "process": "tsolr",
        "thresholds": [-1.1, 0.0, 1.1],
        "coefficients": [0.6, -1.1, 1.4, -0.8, -0.1, -0.4, -0.3],
    },
    "isolr3": {
        "process": "isolr",
        "thresholds": [-0.8, 0.78],
        "coefficients": [0.2, -1.4, 0.3, 0.9, 1.1],
    },
    "isolr4": {
        "process": "isolr",
        "thresholds": [-0.9, 0.02, 1.2],
        "coefficients": [-0.4, -1.3, 0.5, 0.7, 1.2],
    },
}


class SimConfig(BaseModel):
    """Settings of a simulation experiment.

    Attributes:
        process: Generating process.
        thresholds: True thresholds, strictly increasing.
        coefficients: True coefficients in generator column order (seven for
            ``tsolr``, five for ``isolr``).
        sizes: Series lengths ``n`` to run.
        replicates: Replicates per size.
        seed: Master seed.
        train_fraction: Leading share of each series used for fitting in the
            forecasting experiment.
        burn_in: Discarded initial draws.
        periods: ``(P1, P2, P3)`` of the trigonometric terms.
        include_abs: Whether the fitted trigonometric model carries the
            ``|sin|``/``|cos|`` pair.
        workers: Worker processes; ``1`` runs in-process.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    process: ProcessKind
    thresholds: List[float]
    coefficients: List[float]
    sizes: List[int] = Field(default_factory=lambda: [500, 1000, 10000])
    replicates: int = Field(default=1000, ge=1)
    seed: int = 0
    train_fraction: float = Field(default=0.8, gt=0.0, lt=1.0)
    burn_in: int = Field(default=100, ge=0)
    periods: Tuple[float, float, float] = SIM_PERIODS
    include_abs: bool = True
    workers: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def _check(self) -> "SimConfig":
        PolrParams(self.thresholds, self.coefficients)
        expected = 7 if self.process == "tsolr" else 5
        if len(self.coefficients) != expected:
            raise ValueError(
                f"{self.process} needs {expected} coefficients, got {len(self.coefficients)}"
            )
        if not self.sizes or any(n < 10 for n in self.sizes):
            raise ValueError("sizes must be a non-empty list of lengths >= 10")
        if self.process == "isolr" and any(n % 100 for n in self.sizes):
            raise ValueError("isolr series lengths must be multiples of 100")
        return self

    @classmethod
    def preset(cls, name: str, **overrides: object) -> "SimConfig":
        """Build a config from a named truth in :data:`PRESETS`."""

        try:
            base = dict(PRESETS[name])
        except KeyError:
            raise ValueError(f"Unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
        base.update(overrides)
        return cls.model_validate(base)

    @property
    def params(self) -> PolrParams:
        return PolrParams(self.thresholds, self.coefficients)

    def generator_spec(self) -> CovariateSpec:
        if self.process == "tsolr":
            return tsolr_sim_spec(self.periods, include_abs=True)
        return isolr_sim_spec()


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SimulatedSeries:
    """A generated series with the optional per-step trace.

    Attributes:
        series: Kept draws.
        eta: Linear predictor per kept step, when traced.
        probabilities: Category probabilities per kept step, when traced.
    """

    series: OrdinalSeries
    eta: Optional[np.ndarray] = None
    probabilities: Optional[np.ndarray] = None


def simulate(
    spec: CovariateSpec,
    params: PolrParams,
    n: int,
    seed: Seed = 0,
    burn_in: int = 100,
    trace: bool = False,
) -> SimulatedSeries:
    """Sequentially sample ``n`` codes from a cumulative logit chain.

    Args:
        spec: Covariates; only Fourier, block indicator and lag terms are
            supported.
        params: True parameters in ``spec`` column order.
        n: Number of kept draws.
        seed: Integer seed or ``SeedSequence``.
        burn_in: Draws discarded before the kept ones.
        trace: Record ``eta`` and the category probabilities of kept steps.

    Raises:
        ValueError: If ``n < 1`` or the parameters do not match ``spec``.
    """

    if n < 1:
        raise ValueError("n must be positive")
    if params.coefficients.size != len(spec.terms):
        raise ValueError(
            f"{params.coefficients.size} coefficients for {len(spec.terms)} covariates"
        )
    rng = np.random.default_rng(seed)
    total = burn_in + n
    t = np.arange(1 - burn_in, n + 1)
    seasonal = seasonal_matrix(spec, t) @ params.coefficients
    lag_terms = [
        (term.order, float(params.coefficients[i]))
        for i, term in enumerate(spec.terms)
        if isinstance(term, LagSpec)
    ]
    uniforms = rng.random(total)
    codes = np.zeros(total, dtype=np.int64)
    etas = np.empty(total)
    for step in range(total):
        eta = seasonal[step]
        for order, gamma in lag_terms:
            eta += gamma * (codes[step - order] if step >= order else 0)
        cumulative = expit(params.thresholds - eta)
        codes[step] = np.searchsorted(cumulative, uniforms[step], side="left")
        etas[step] = eta

    scheme = CategoryScheme.ordinal(params.n_categories)
    series = OrdinalSeries.from_codes(codes[burn_in:], scheme)
    if not trace:
        return SimulatedSeries(series)
    kept = etas[burn_in:]
    return SimulatedSeries(series, kept, category_probs(params, kept))


def simulate_tsolr(
    params: PolrParams,
    n: int,
    seed: Seed = 0,
    burn_in: int = 100,
    periods: Tuple[float, float, float] = SIM_PERIODS,
) -> OrdinalSeries:
    """Generate from the trigonometric process.

    ``params.coefficients`` are ``(b11, b21, b12, b22, b13, b23, gamma)``: sin
    and cos of period ``P1``, sin and cos of ``P2``, ``|sin|`` and ``|cos|`` of
    ``P3``, then the lag-1 weight.
    """

    return simulate(tsolr_sim_spec(periods, include_abs=True), params, n, seed, burn_in).series


def simulate_isolr(params: PolrParams, n: int, seed: Seed = 0, burn_in: int = 100) -> OrdinalSeries:
    """Generate from the block-indicator process.

    ``params.coefficients`` are ``(b1..b5)`` for ``S1a, S1b, S2, S3`` and the
    lag-1 weight.

    Raises:
        ValueError: If ``n`` is not a multiple of 100.
    """

    if n % 100:
        raise ValueError(f"n must be a multiple of 100, got {n}")
    return simulate(isolr_sim_spec(), params, n, seed, burn_in).series


# ---------------------------------------------------------------------------
# Experiments
# ---------------------------------------------------------------------------

FORECAST_MODELS: Tuple[str, ...] = ("isolr", "tsolr")


@dataclass(frozen=True)
class ExperimentResult:
    """Aggregated experiment output.

    Consistency runs fill ``parameter_names``, ``truth``, ``means`` and
    ``sds``; forecasting runs fill ``models``, ``accuracy`` and
    ``weighted_f1`` (fractions, not percentages). Dictionaries are keyed by
    ``n``. ``used`` counts the replicates aggregated and ``excluded`` those
    dropped because a fit failed or did not converge.
    """

    mode: Literal["consistency", "forecasting"]
    config: SimConfig
    sizes: Tuple[int, ...]
    used: Dict[int, int]
    excluded: Dict[int, int]
    parameter_names: Tuple[str, ...] = ()
    truth: Tuple[float, ...] = ()
    means: Dict[int, List[float]] = field(default_factory=dict)
    sds: Dict[int, List[Optional[float]]] = field(default_factory=dict)
    models: Tuple[str, ...] = ()
    accuracy: Dict[int, Dict[str, float]] = field(default_factory=dict)
    weighted_f1: Dict[int, Dict[str, float]] = field(default_factory=dict)

    def to_frame(self) -> pd.DataFrame:
        """The result as a printable table.

        Consistency: one row per parameter with the truth and a
        ``"mean (sd)"`` column per ``n``. Forecasting: one row per ``n`` with
        accuracy and weighted F1 percentages per model.
        """

        if self.mode == "consistency":
            frame = pd.DataFrame({"parameter": list(self.parameter_names), "true": list(self.truth)})
            for n in self.sizes:
                cells = []
                for mean, sd in zip(self.means[n], self.sds[n]):
                    sd_text = "NA" if sd is None else f"{sd:.2f}"
                    cells.append(f"{mean:.2f} ({sd_text})")
                frame[f"n={n}"] = cells
            return frame

        rows = []
        for n in self.sizes:
            row: Dict[str, object] = {"n": n}
            for model in self.models:
                row[f"{model}_accuracy"] = round(100.0 * self.accuracy[n][model], 2)
                row[f"{model}_weighted_f1"] = round(100.0 * self.weighted_f1[n][model], 2)
            rows.append(row)
        return pd.DataFrame(rows)


@dataclass(frozen=True, eq=False)
class _Outcome:
    ok: bool
    values: Optional[np.ndarray] = None


_QUIET = FitOptions(compute_se=False)


def _consistency_run(task: Tuple[SimConfig, int, np.random.SeedSequence]) -> _Outcome:
    config, n, seed = task
    spec = config.generator_spec()
    series = simulate(spec, config.params, n, seed, config.burn_in).series
    try:
        design = build_design(series, spec)
        report = fit(design.X, design.y, series.scheme.n_categories, design.columns, _QUIET)
    except ValueError as exc:
        logger.warning("Replicate excluded (n=%d): %s", n, exc)
        return _Outcome(False)
    if not report.converged:
        return _Outcome(False)
    return _Outcome(True, report.params.to_vector())


def _forecasting_run(task: Tuple[SimConfig, int, np.random.SeedSequence]) -> _Outcome:
    config, n, seed = task
    series = simulate(config.generator_spec(), config.params, n, seed, config.burn_in).series
    n_train = int(round(config.train_fraction * n))
    train = OrdinalSeries(series.dates[:n_train], series.codes[:n_train], series.scheme)
    test_start = series.dates[n_train].astype(object)
    specs = {
        "isolr": isolr_sim_spec(),
        "tsolr": tsolr_sim_spec(config.periods, include_abs=config.include_abs),
    }
    scores = []
    for name in FORECAST_MODELS:
        try:
            design = build_design(train, specs[name])
            report = fit(design.X, design.y, series.scheme.n_categories, design.columns, _QUIET)
        except ValueError as exc:
            logger.warning("Replicate excluded (n=%d, %s): %s", n, name, exc)
            return _Outcome(False)
        if not report.converged:
            return _Outcome(False)
        model = PolrModel(name, series.scheme, specs[name], train.start, report)
        result = forecast_window(model, series, start=test_start)
        scores.extend([accuracy(result.observed, result.predicted), weighted_f1(result.observed, result.predicted)])
    return _Outcome(True, np.asarray(scores))


def _run_replicates(config: SimConfig, runner, n: int) -> List[_Outcome]:
    seeds = np.random.SeedSequence([config.seed, n]).spawn(config.replicates)
    tasks = [(config, n, seed) for seed in seeds]
    if config.workers == 1:
        return [runner(task) for task in tasks]
    workers = min(config.workers, os.cpu_count() or 1)
    chunksize = max(1, len(tasks) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(runner, tasks, chunksize=chunksize))


def _stack(outcomes: Sequence[_Outcome], n: int) -> Tuple[np.ndarray, int]:
    kept = [o.values for o in outcomes if o.ok]
    excluded = len(outcomes) - len(kept)
    if excluded:
        logger.warning("n=%d: %d of %d replicates excluded", n, excluded, len(outcomes))
    if not kept:
        raise ValueError(f"Every replicate failed at n={n}")
    return np.vstack(kept), excluded


def consistency_experiment(config: SimConfig) -> ExperimentResult:
    """Mean estimates and their empirical SD over replicated simulate-and-fit runs.

    The fitted model has the generator's own covariates. SDs need at least two
    converged replicates and are ``None`` otherwise.

    Raises:
        ValueError: If ``config.process`` is not ``"tsolr"`` or every replicate
            of some size fails.
    """

    if config.process != "tsolr":
        raise ValueError("The consistency experiment uses the trigonometric process")
    spec = config.generator_spec()
    names = tuple(f"theta_{j}" for j in range(len(config.thresholds))) + spec.columns
    means: Dict[int, List[float]] = {}
    sds: Dict[int, List[Optional[float]]] = {}
    used: Dict[int, int] = {}
    excluded: Dict[int, int] = {}
    for n in config.sizes:
        logger.info("Consistency: n=%d, %d replicates", n, config.replicates)
        estimates, excluded[n] = _stack(_run_replicates(config, _consistency_run, n), n)
        used[n] = estimates.shape[0]
        means[n] = estimates.mean(axis=0).tolist()
        if used[n] < 2:
            sds[n] = [None] * len(names)
        else:
            sds[n] = estimates.std(axis=0, ddof=1).tolist()
    return ExperimentResult(
        mode="consistency",
        config=config,
        sizes=tuple(config.sizes),
        used=used,
        excluded=excluded,
        parameter_names=names,
        truth=tuple(config.thresholds) + tuple(config.coefficients),
        means=means,
        sds=sds,
    )


def forecasting_experiment(config: SimConfig) -> ExperimentResult:
    """Mean rolling one-step accuracy and weighted F1 of both model forms.

    Each replicate fits the indicator and the trigonometric model on the
    leading ``train_fraction`` of a block-indicator series and forecasts the
    rest from observed lags.

    Raises:
        ValueError: If ``config.process`` is not ``"isolr"`` or every replicate
            of some size fails.
    """

    if config.process != "isolr":
        raise ValueError("The forecasting experiment uses the block-indicator process")
    acc: Dict[int, Dict[str, float]] = {}
    f1: Dict[int, Dict[str, float]] = {}
    used: Dict[int, int] = {}
    excluded: Dict[int, int] = {}
    for n in config.sizes:
        logger.info("Forecasting: n=%d, %d replicates", n, config.replicates)
        scores, excluded[n] = _stack(_run_replicates(config, _forecasting_run, n), n)
        used[n] = scores.shape[0]
        averages = scores.mean(axis=0)
        acc[n] = {model: float(averages[2 * i]) for i, model in enumerate(FORECAST_MODELS)}
        f1[n] = {model: float(averages[2 * i + 1]) for i, model in enumerate(FORECAST_MODELS)}
    return ExperimentResult(
        mode="forecasting",
        config=config,
        sizes=tuple(config.sizes),
        used=used,
        excluded=excluded,
        models=FORECAST_MODELS,
        accuracy=acc,
        weighted_f1=f1,
    )


def run_experiment(config: SimConfig) -> ExperimentResult:
    """Consistency for the trigonometric process, forecasting for the indicator one."""

    if config.process == "tsolr":
        return consistency_experiment(config)
    return forecasting_experiment(config)
