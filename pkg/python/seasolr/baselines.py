"""Classical categorical time-series baselines: Markov(p), MTD(p) and PAR(p).

All three condition on the last ``p`` observed codes only and take no
covariates. Histories are passed most recent first: ``lags[0]`` is
``Y_{t-1}``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from datetime import date
from pathlib import Path
from typing import Dict, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import optimize

from .encoders import read_json, write_json
from .polr import ForecastResult
from .series import MISSING, OrdinalSeries, frequency_distribution, lagged_codes

logger = logging.getLogger(__name__)

BaselineKind = Literal["markov", "mtd", "par"]

PAR_LOWER = 1e-6
PAR_UPPER = 1.0 - 1e-6
PAR_GRID_STEP = 1e-3


def _check_order(series: OrdinalSeries, order: int) -> np.ndarray:
    if order < 1:
        raise ValueError(f"order must be a positive integer, got {order}")
    if len(series) <= order:
        raise ValueError(f"Series of length {len(series)} cannot support order {order}")
    rows = lagged_codes(series, range(1, order + 1))
    if rows.shape[0] == 0:
        raise ValueError(f"No run of {order + 1} consecutive observed days in the series")
    return rows


def _as_lags(model_order: int, lags: Sequence[int]) -> Tuple[int, ...]:
    if len(lags) < model_order:
        raise ValueError(f"Need {model_order} lagged codes, got {len(lags)}")
    return tuple(int(v) for v in lags[:model_order])


# ---------------------------------------------------------------------------
# Markov chain
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MarkovModel:
    """Order-``p`` Markov chain.

    Attributes:
        order: ``p``.
        n_categories: ``m + 1``.
        transitions: State ``(Y_{t-1}, ..., Y_{t-p})`` to ``P(Y_t = . | state)``;
            only observed states are stored.
        marginal: Empirical marginal, used for unseen states.
    """

    order: int
    n_categories: int
    transitions: Dict[Tuple[int, ...], np.ndarray]
    marginal: np.ndarray

    kind = "markov"

    @property
    def parameter_count(self) -> int:
        return (self.n_categories - 1) * self.n_categories**self.order

    def distribution(self, lags: Sequence[int]) -> np.ndarray:
        state = _as_lags(self.order, lags)
        probs = self.transitions.get(state)
        if probs is None:
            logger.debug("Unseen Markov state %s; using the marginal", state)
            return self.marginal
        return probs

    def to_dict(self) -> Dict[str, object]:
        return {
            "kind": self.kind,
            "order": self.order,
            "n_categories": self.n_categories,
            "marginal": self.marginal,
            "transitions": [
                {"state": list(state), "probabilities": probs}
                for state, probs in sorted(self.transitions.items())
            ],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, object]) -> "MarkovModel":
        return cls(
            order=int(data["order"]),  # type: ignore[arg-type]
            n_categories=int(data["n_categories"]),  # type: ignore[arg-type]
            transitions={
                tuple(entry["state"]): np.asarray(entry["probabilities"], dtype=float)
                for entry in data["transitions"]  # type: ignore[union-attr]
            },
            marginal=np.asarray(data["marginal"], dtype=float),
        )


def fit_markov(series: OrdinalSeries, order: int) -> MarkovModel:
    """Empirical conditional frequencies for every observed state tuple.

    Raises:
        ValueError: If ``order < 1`` or the series is too short.
    """

    rows = _check_order(series, order)
    k = series.scheme.n_categories
    states, inverse = np.unique(rows[:, 1:], axis=0, return_inverse=True)
    inverse = np.asarray(inverse).reshape(-1)
    counts = np.zeros((states.shape[0], k))
    np.add.at(counts, (inverse, rows[:, 0]), 1.0)
    probs = counts / counts.sum(axis=1, keepdims=True)
    transitions = {
        tuple(int(v) for v in state): probs[i] for i, state in enumerate(states)
    }
    logger.info("Markov(%d): %d observed states of %d", order, len(transitions), k**order)
    return MarkovModel(order, k, transitions, frequency_distribution(series).proportions)


# ---------------------------------------------------------------------------
# Mixture transition distribution
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MtdModel:
    """Mixture transition distribution ``P(Y_t | ...) = sum_k lambda_k Q[Y_{t-k}, Y_t]``.

    Attributes:
        order: ``p``.
        weights: ``lambda_1..lambda_p`` on the simplex.
        transition: Shared one-step matrix, rows indexed by the lagged code.
        marginal: Empirical marginal.
        log_likelihood: Conditional log-likelihood at the estimate.
        converged: Whether the alternating updates met the tolerance.
        iterations: Sweeps performed.
    """

    order: int
    weights: np.ndarray
    transition: np.ndarray
    marginal: np.ndarray
    log_likelihood: float = float("nan")
    converged: bool = True
    iterations: int = 0

    kind = "mtd"

    @property
    def n_categories(self) -> int:
        return int(self.transition.shape[0])

    @property
    def parameter_count(self) -> int:
        m = self.n_categories - 1
        return m * (m + 1) + self.order - 1

    def distribution(self, lags: Sequence[int]) -> np.ndarray:
        state = _as_lags(self.order, lags)
        return self.weights @ self.transition[list(state)]

    def to_dict(self) -> Dict[str, object]:
        return {
            "kind": self.kind,
            "order": self.order,
            "weights": self.weights,
            "transition": self.transition,
            "marginal": self.marginal,
            "log_likelihood": self.log_likelihood,
            "converged": self.converged,
            "iterations": self.iterations,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, object]) -> "MtdModel":
        ll = data.get("log_likelihood")
        return cls(
            order=int(data["order"]),  # type: ignore[arg-type]
            weights=np.asarray(data["weights"], dtype=float),
            transition=np.asarray(data["transition"], dtype=float),
            marginal=np.asarray(data["marginal"], dtype=float),
            log_likelihood=float("nan") if ll is None else float(ll),  # type: ignore[arg-type]
            converged=bool(data.get("converged", True)),
            iterations=int(data.get("iterations", 0)),  # type: ignore[arg-type]
        )


def _normalize_rows(weights: np.ndarray, fallback: np.ndarray) -> np.ndarray:
    totals = weights.sum(axis=1, keepdims=True)
    return np.where(totals > 0, weights / np.where(totals > 0, totals, 1.0), fallback)


def fit_mtd(
    series: OrdinalSeries, order: int, tol: float = 1e-8, max_sweeps: int = 1000
) -> MtdModel:
    """Maximum-likelihood MTD fit by alternating weight and matrix updates.

    Each sweep computes the posterior share of every lag component per
    observation, sets ``lambda`` to the mean share and the matrix rows to the
    share-weighted transition counts. Both updates keep the parameters on
    their simplices and never decrease the likelihood. Starts from uniform
    weights and the lag-1 Markov matrix; rows without support take the
    marginal. For ``order=1`` the result is exactly the Markov(1) chain.

    Raises:
        ValueError: If ``order < 1`` or the series is too short.
    """

    rows = _check_order(series, order)
    k = series.scheme.n_categories
    marginal = frequency_distribution(series).proportions
    y, lags = rows[:, 0], rows[:, 1:]

    counts = np.zeros((k, k))
    np.add.at(counts, (lags[:, 0], y), 1.0)
    transition = _normalize_rows(counts, marginal)
    weights = np.full(order, 1.0 / order)

    def mixture(w: np.ndarray, q: np.ndarray) -> np.ndarray:
        return w * q[lags, y[:, None]]

    if order == 1:
        ll = float(np.log(transition[lags[:, 0], y]).sum())
        return MtdModel(1, np.ones(1), transition, marginal, ll, True, 0)

    converged = False
    sweep = 0
    for sweep in range(1, max_sweeps + 1):
        components = mixture(weights, transition)
        totals = np.maximum(components.sum(axis=1, keepdims=True), 1e-300)
        shares = components / totals
        new_weights = shares.mean(axis=0)
        weighted = np.zeros((k, k))
        np.add.at(weighted, (lags.ravel(), np.repeat(y, order)), shares.ravel())
        new_transition = _normalize_rows(weighted, marginal)
        change = max(
            float(np.max(np.abs(new_weights - weights))),
            float(np.max(np.abs(new_transition - transition))),
        )
        weights, transition = new_weights, new_transition
        if change < tol:
            converged = True
            break

    ll = float(np.log(np.maximum(mixture(weights, transition).sum(axis=1), 1e-300)).sum())
    if not converged:
        logger.warning("MTD(%d) did not converge in %d sweeps", order, max_sweeps)
    logger.info("MTD(%d): weights %s, log-likelihood %.4f", order, np.round(weights, 4), ll)
    return MtdModel(order, weights, transition, marginal, ll, converged, sweep)


# ---------------------------------------------------------------------------
# Pegram autoregressive model
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ParModel:
    """``P(Y_t = j | ...) = sum_k phi_k 1(Y_{t-k} = j) + (1 - sum_k phi_k) pi_j``.

    Attributes:
        order: ``p``.
        weights: ``phi_1..phi_p``.
        marginal: ``pi``, the empirical marginal.
        at_boundary: Per weight, whether the estimate sits on the clamp bound.
        log_likelihood: Conditional log-likelihood at the estimate.
    """

    order: int
    weights: np.ndarray
    marginal: np.ndarray
    at_boundary: Tuple[bool, ...] = ()
    log_likelihood: float = float("nan")

    kind = "par"

    @property
    def n_categories(self) -> int:
        return int(self.marginal.size)

    @property
    def parameter_count(self) -> int:
        return self.order + self.n_categories - 1

    def distribution(self, lags: Sequence[int]) -> np.ndarray:
        state = _as_lags(self.order, lags)
        probs = (1.0 - self.weights.sum()) * self.marginal
        for phi, code in zip(self.weights, state):
            probs[code] += phi
        return probs

    def to_dict(self) -> Dict[str, object]:
        return {
            "kind": self.kind,
            "order": self.order,
            "weights": self.weights,
            "marginal": self.marginal,
            "at_boundary": list(self.at_boundary),
            "log_likelihood": self.log_likelihood,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, object]) -> "ParModel":
        ll = data.get("log_likelihood")
        return cls(
            order=int(data["order"]),  # type: ignore[arg-type]
            weights=np.asarray(data["weights"], dtype=float),
            marginal=np.asarray(data["marginal"], dtype=float),
            at_boundary=tuple(bool(v) for v in data.get("at_boundary", ())),  # type: ignore[union-attr]
            log_likelihood=float("nan") if ll is None else float(ll),  # type: ignore[arg-type]
        )


def _par_coordinate(
    base: np.ndarray, slope: np.ndarray, counts: np.ndarray, upper: float
) -> float:
    """Maximize ``sum counts * log(base + phi * slope)`` over ``phi`` in ``[PAR_LOWER, upper]``."""

    def loglik(phi: np.ndarray) -> np.ndarray:
        values = base[:, None] + np.outer(slope, phi)
        return counts @ np.log(np.maximum(values, 1e-300))

    grid = np.append(np.arange(PAR_LOWER, upper, PAR_GRID_STEP), upper)
    scores = loglik(grid)
    best = int(np.argmax(scores))
    lo = grid[max(best - 1, 0)]
    hi = grid[min(best + 1, grid.size - 1)]
    if hi - lo <= 0:
        return float(grid[best])
    refined = optimize.minimize_scalar(
        lambda phi: -float(loglik(np.asarray([phi]))[0]),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": 1e-10},
    )
    if -refined.fun >= scores[best]:
        return float(refined.x)
    return float(grid[best])


def fit_par(
    series: OrdinalSeries, order: int, tol: float = 1e-8, max_sweeps: int = 100
) -> ParModel:
    """Conditional maximum-likelihood PAR fit with ``pi`` fixed at the empirical marginal.

    Each weight is found by a grid search with step ``1e-3`` over its feasible
    interval followed by bounded scalar refinement; for ``order > 1`` the
    weights are swept coordinate-wise until they stop moving. Estimates are
    clamped to ``[1e-6, 1 - 1e-6]`` with ``sum phi < 1``; clamped weights are
    flagged in ``at_boundary``.

    Raises:
        ValueError: If ``order < 1``, the series is too short, or only one
            category is observed.
    """

    rows = _check_order(series, order)
    marginal = frequency_distribution(series).proportions
    if np.count_nonzero(marginal) < 2:
        raise ValueError("PAR needs at least two observed categories")
    y, lags = rows[:, 0], rows[:, 1:]
    matches = (lags == y[:, None]).astype(float)
    pi_y = marginal[y]
    # rows only differ through (matches, pi_y); aggregate them
    keys, counts = np.unique(np.column_stack([matches, pi_y]), axis=0, return_counts=True)
    key_matches, key_pi = keys[:, :order], keys[:, order]
    counts = counts.astype(float)

    weights = np.full(order, PAR_LOWER)
    for sweep in range(1, max_sweeps + 1):
        previous = weights.copy()
        for k in range(order):
            others = weights.sum() - weights[k]
            upper = PAR_UPPER - others
            if upper <= PAR_LOWER:
                weights[k] = PAR_LOWER
                continue
            base = key_matches @ weights - weights[k] * key_matches[:, k] + (1.0 - others) * key_pi
            slope = key_matches[:, k] - key_pi
            weights[k] = _par_coordinate(base, slope, counts, upper)
        if order == 1 or np.max(np.abs(weights - previous)) < tol:
            break
    else:
        logger.warning("PAR(%d) weights still moving after %d sweeps", order, max_sweeps)

    probs = key_matches @ weights + (1.0 - weights.sum()) * key_pi
    ll = float(counts @ np.log(probs))
    boundary_tol = 1e-5
    at_boundary = tuple(
        bool(
            w - PAR_LOWER < boundary_tol
            or (PAR_UPPER - (weights.sum() - w)) - w < boundary_tol
        )
        for w in weights
    )
    if any(at_boundary):
        logger.warning("PAR(%d) weights %s hit the boundary", order, np.round(weights, 6))
    return ParModel(order, weights, marginal, at_boundary, ll)


# ---------------------------------------------------------------------------
# Forecasting and persistence
# ---------------------------------------------------------------------------

BaselineModel = Union[MarkovModel, MtdModel, ParModel]


def fit_baseline(kind: BaselineKind, series: OrdinalSeries, order: int) -> BaselineModel:
    """Dispatch to :func:`fit_markov`, :func:`fit_mtd` or :func:`fit_par`."""

    if kind == "markov":
        return fit_markov(series, order)
    if kind == "mtd":
        return fit_mtd(series, order)
    if kind == "par":
        return fit_par(series, order)
    raise ValueError(f"Unknown baseline {kind!r}")


def forecast_baseline(model: BaselineModel, history: Sequence[int]) -> Tuple[np.ndarray, int]:
    """Next-step distribution and its argmax from a chronological history.

    Args:
        model: Fitted baseline.
        history: Observed codes, oldest first; the last ``order`` are used.

    Returns:
        Tuple of the probability vector and the most likely code (ties go to
        the lower code).

    Raises:
        ValueError: If ``history`` is shorter than the model order.
    """

    if len(history) < model.order:
        raise ValueError(f"History of length {len(history)} is too short for order {model.order}")
    recent = [int(v) for v in history[::-1][: model.order]]
    probs = np.asarray(model.distribution(recent), dtype=float)
    return probs, int(np.argmax(probs))


def forecast_baseline_window(
    model: BaselineModel,
    series: OrdinalSeries,
    start: Optional[date] = None,
    end: Optional[date] = None,
) -> ForecastResult:
    """Rolling one-step forecasts over ``[start, end]`` using observed lags.

    Days whose ``order`` preceding days are not all observed are skipped.

    Raises:
        ValueError: If no day in the window can be forecast.
    """

    window = series.window(start, end)
    grid = series.calendar_codes()
    base = np.datetime64(series.start, "D")
    offsets = (window.dates - base).astype(np.int64)
    dates: List[np.datetime64] = []
    observed: List[int] = []
    rows: List[np.ndarray] = []
    for day, code, offset in zip(window.dates, window.codes, offsets):
        sources = offset - np.arange(1, model.order + 1)
        if sources.min() < 0 or np.any(grid[sources] == MISSING):
            continue
        dates.append(day)
        observed.append(int(code))
        rows.append(np.asarray(model.distribution(grid[sources].tolist()), dtype=float))
    if not rows:
        raise ValueError(f"No forecastable days between {window.start} and {window.end}")
    skipped = len(window) - len(rows)
    if skipped:
        logger.info("Skipped %d day(s) without %d observed lag(s)", skipped, model.order)
    probabilities = np.vstack(rows)
    return ForecastResult(
        np.asarray(dates, dtype="datetime64[D]"),
        np.asarray(observed, dtype=np.int64),
        np.argmax(probabilities, axis=1),
        probabilities,
    )


_BASELINE_TYPES = {"markov": MarkovModel, "mtd": MtdModel, "par": ParModel}


def save_baseline(model: BaselineModel, path: Union[str, Path]) -> Path:
    return write_json(model.to_dict(), path)


def load_baseline(path: Union[str, Path]) -> BaselineModel:
    data = read_json(path)
    try:
        model_type = _BASELINE_TYPES[data["kind"]]
    except KeyError:
        raise ValueError(f"{path} is not a baseline model document") from None
    return model_type.from_dict(data)
