"""Lag-wise auto-association measures for ordinal categorical series.

Every measure is computed from the empirical lag-``h`` joint distribution of
``(Y_t, Y_{t-h})`` pairs. Categories that never occur on one side of the table
are dropped from that side before dividing by marginals. A measure whose
denominator vanishes (a constant series, a table without untied pairs) raises
:class:`~seasolr.errors.UndefinedMeasureError`; :func:`association_profile`
records such values as ``None``.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .errors import UndefinedMeasureError
from .series import CategoryScheme, OrdinalSeries, lagged_codes

logger = logging.getLogger(__name__)

MEASURES: Tuple[str, ...] = (
    "kappa",
    "cramers_v",
    "gk_tau",
    "gk_gamma",
    "pearson_x2",
    "mutual_info",
)

_RANGE_SLACK = 1e-9


@dataclass(frozen=True, eq=False)
class LagContingency:
    """Joint counts of lag-``h`` pairs.

    Attributes:
        lag: ``h``.
        counts: ``counts[j, i]`` = number of ``t`` with ``Y_{t-h} = j`` and
            ``Y_t = i`` (rows are the lagged value, as in a transition matrix).
        joint: ``counts`` divided by the number of pairs.
    """

    lag: int
    counts: np.ndarray
    joint: np.ndarray

    @property
    def n_pairs(self) -> int:
        return int(self.counts.sum())


def lag_contingency(series: OrdinalSeries, h: int) -> LagContingency:
    """Count ``(Y_{t-h}, Y_t)`` pairs over calendar days.

    ``h = 0`` pairs every observation with itself and gives a diagonal table.

    Raises:
        ValueError: If ``h`` is negative or not shorter than the series, or no
            pair is observed.
    """

    if h < 0:
        raise ValueError(f"lag must be non-negative, got {h}")
    if h >= len(series):
        raise ValueError(f"lag {h} must be smaller than the series length {len(series)}")
    pairs = lagged_codes(series, [h])
    if pairs.shape[0] == 0:
        raise ValueError(f"No pair of observations {h} day(s) apart")
    k = series.scheme.n_categories
    counts = np.zeros((k, k), dtype=np.int64)
    np.add.at(counts, (pairs[:, 1], pairs[:, 0]), 1)
    return LagContingency(h, counts, counts / counts.sum())


def _current_by_lagged(table: LagContingency) -> np.ndarray:
    """Float counts with rows ``Y_t`` and columns ``Y_{t-h}``."""

    return table.counts.T.astype(float)


def _trim(counts: np.ndarray) -> np.ndarray:
    rows = counts.sum(axis=1) > 0
    cols = counts.sum(axis=0) > 0
    return counts[np.ix_(rows, cols)]


def _check_range(name: str, value: float, low: float, high: float) -> float:
    if not (low - _RANGE_SLACK <= value <= high + _RANGE_SLACK):
        raise AssertionError(f"{name}={value} outside [{low}, {high}]")
    return float(min(max(value, low), high))


# ---------------------------------------------------------------------------
# Measures on a contingency table
# ---------------------------------------------------------------------------


def _kappa(table: LagContingency) -> float:
    joint = _current_by_lagged(table) / table.n_pairs
    current = joint.sum(axis=1)
    chance = float(np.sum(current**2))
    if 1.0 - chance <= 0.0:
        raise UndefinedMeasureError("kappa is undefined for a single observed category")
    value = (float(np.trace(joint)) - chance) / (1.0 - chance)
    return _check_range("kappa", value, -chance / (1.0 - chance), 1.0)


def _pearson_x2(table: LagContingency) -> Tuple[float, int]:
    counts = _trim(_current_by_lagged(table))
    if min(counts.shape) < 2:
        raise UndefinedMeasureError("Pearson X2 needs two observed categories on both sides")
    n = counts.sum()
    expected = np.outer(counts.sum(axis=1), counts.sum(axis=0)) / n
    value = float(np.sum((counts - expected) ** 2 / expected))
    m_eff = min(counts.shape) - 1
    return _check_range("pearson_x2", value, 0.0, n * m_eff), m_eff


def _cramers_v(table: LagContingency) -> float:
    x2, m_eff = _pearson_x2(table)
    value = np.sqrt(x2 / (table.n_pairs * m_eff))
    return _check_range("cramers_v", float(value), 0.0, 1.0)


def _gk_tau(table: LagContingency) -> float:
    counts = _trim(_current_by_lagged(table))
    joint = counts / counts.sum()
    current = joint.sum(axis=1)
    lagged = joint.sum(axis=0)
    chance = float(np.sum(current**2))
    if 1.0 - chance <= 0.0:
        raise UndefinedMeasureError("tau is undefined for a single observed category")
    explained = float(np.sum(joint**2 / lagged[None, :]))
    return _check_range("gk_tau", (explained - chance) / (1.0 - chance), 0.0, 1.0)


def _gk_gamma(table: LagContingency) -> float:
    counts = _current_by_lagged(table)
    rows, cols = counts.shape
    # ge[i, j]: pairs with current >= i and lagged >= j
    ge = np.zeros((rows + 1, cols + 1))
    ge[:rows, :cols] = counts[::-1, ::-1].cumsum(axis=0).cumsum(axis=1)[::-1, ::-1]
    # le[i, j + 1]: pairs with current >= i and lagged <= j
    le = np.zeros((rows + 1, cols + 1))
    le[:rows, 1:] = counts[::-1, :].cumsum(axis=0)[::-1, :].cumsum(axis=1)
    concordant = float(np.sum(counts * ge[1:, 1:]))
    discordant = float(np.sum(counts * le[1:, :cols]))
    if concordant + discordant == 0.0:
        raise UndefinedMeasureError("gamma is undefined without untied pairs")
    value = (concordant - discordant) / (concordant + discordant)
    return _check_range("gk_gamma", value, -1.0, 1.0)


def _mutual_info(table: LagContingency) -> float:
    joint = _current_by_lagged(table) / table.n_pairs
    current = joint.sum(axis=1)
    lagged = joint.sum(axis=0)
    observed = current[current > 0]
    entropy = float(-np.sum(observed * np.log(observed)))
    if entropy <= 0.0:
        raise UndefinedMeasureError("mutual information is undefined for a single observed category")
    cells = joint > 0
    ratio = joint[cells] / np.outer(current, lagged)[cells]
    value = float(np.sum(joint[cells] * np.log(ratio))) / entropy
    return _check_range("mutual_info", value, 0.0, 1.0)


_MEASURE_FUNCTIONS: Dict[str, Callable[[LagContingency], float]] = {
    "kappa": _kappa,
    "cramers_v": _cramers_v,
    "gk_tau": _gk_tau,
    "gk_gamma": _gk_gamma,
    "pearson_x2": lambda table: _pearson_x2(table)[0],
    "mutual_info": _mutual_info,
}


# ---------------------------------------------------------------------------
# Public per-lag measures
# ---------------------------------------------------------------------------


def cohen_kappa(series: OrdinalSeries, h: int) -> float:
    """Cohen's kappa between ``Y_t`` and ``Y_{t-h}``, chance term ``sum p_i^2``."""

    return _kappa(lag_contingency(series, h))


def cramers_v(series: OrdinalSeries, h: int) -> float:
    """Cramer's V, ``sqrt(X2 / (n m_eff))`` with ``m_eff`` the smaller observed side minus one."""

    return _cramers_v(lag_contingency(series, h))


def gk_tau(series: OrdinalSeries, h: int) -> float:
    """Goodman-Kruskal tau for predicting ``Y_t`` from ``Y_{t-h}``."""

    return _gk_tau(lag_contingency(series, h))


def gk_gamma(series: OrdinalSeries, h: int) -> float:
    """Goodman-Kruskal gamma, ``(C - D) / (C + D)`` over all pairs of lag-``h`` pairs."""

    return _gk_gamma(lag_contingency(series, h))


def pearson_x2(series: OrdinalSeries, h: int) -> float:
    """Pearson's chi-square statistic of the lag-``h`` table."""

    return _pearson_x2(lag_contingency(series, h))[0]


def mutual_info(series: OrdinalSeries, h: int) -> float:
    """Mutual information (natural log) normalized by the entropy of ``Y_t``."""

    return _mutual_info(lag_contingency(series, h))


# ---------------------------------------------------------------------------
# Profiles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AssociationProfile:
    """Measure values per lag; ``None`` marks an undefined value."""

    lags: Tuple[int, ...]
    values: Dict[str, List[Optional[float]]]

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame({"lag": list(self.lags)})
        for name, column in self.values.items():
            frame[name] = [np.nan if v is None else v for v in column]
        return frame


def _check_measures(measures: Sequence[str]) -> Tuple[str, ...]:
    unknown = [name for name in measures if name not in _MEASURE_FUNCTIONS]
    if unknown:
        raise ValueError(f"Unknown measure(s) {unknown}; choose from {list(MEASURES)}")
    return tuple(measures)


def association_profile(
    series: OrdinalSeries,
    max_lag: int,
    measures: Sequence[str] = MEASURES,
    min_lag: int = 1,
) -> AssociationProfile:
    """Evaluate ``measures`` at lags ``min_lag..max_lag``.

    Raises:
        ValueError: If ``max_lag`` is not below half the series length, or a
            measure name is unknown.
    """

    measures = _check_measures(measures)
    if max_lag < min_lag or min_lag < 0:
        raise ValueError(f"Invalid lag range {min_lag}..{max_lag}")
    if max_lag >= len(series) / 2:
        raise ValueError(f"max_lag {max_lag} must be below half the series length {len(series)}")
    lags = tuple(range(min_lag, max_lag + 1))
    values: Dict[str, List[Optional[float]]] = {name: [] for name in measures}
    for h in lags:
        try:
            table: Optional[LagContingency] = lag_contingency(series, h)
        except ValueError:
            table = None
        for name in measures:
            if table is None:
                values[name].append(None)
                continue
            try:
                values[name].append(_MEASURE_FUNCTIONS[name](table))
            except UndefinedMeasureError as exc:
                logger.debug("lag %d: %s", h, exc)
                values[name].append(None)
    return AssociationProfile(lags, values)


@dataclass(frozen=True)
class NullBand:
    """Monte-Carlo quantile band of each measure under independence."""

    lags: Tuple[int, ...]
    lower: Dict[str, List[float]]
    upper: Dict[str, List[float]]

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame({"lag": list(self.lags)})
        for name in self.lower:
            frame[f"{name}_lower"] = self.lower[name]
            frame[f"{name}_upper"] = self.upper[name]
        return frame


def null_band(
    probs: Sequence[float],
    n: int,
    max_lag: int,
    measures: Sequence[str] = MEASURES,
    replicates: int = 200,
    seed: int = 0,
    level: float = 0.95,
) -> NullBand:
    """Band of each measure over i.i.d. series drawn from ``probs``.

    Args:
        probs: Marginal category probabilities.
        n: Length of each simulated series.
        max_lag: Largest lag evaluated (lags start at 1).
        measures: Measure names.
        replicates: Number of simulated series.
        seed: Seed of the random generator.
        level: Central coverage of the band.
    """

    measures = _check_measures(measures)
    if not 0.0 < level < 1.0:
        raise ValueError("level must lie strictly between 0 and 1")
    if replicates < 1:
        raise ValueError("replicates must be positive")
    marginal = np.asarray(probs, dtype=float)
    if marginal.size < 2 or np.any(marginal < 0) or not np.isclose(marginal.sum(), 1.0):
        raise ValueError("probs must be a probability vector over at least two categories")
    scheme = CategoryScheme.ordinal(marginal.size)
    rng = np.random.default_rng(seed)
    draws = np.full((replicates, max_lag, len(measures)), np.nan)
    for r in range(replicates):
        codes = rng.choice(marginal.size, size=n, p=marginal / marginal.sum())
        profile = association_profile(OrdinalSeries.from_codes(codes, scheme), max_lag, measures)
        for k, name in enumerate(measures):
            draws[r, :, k] = [np.nan if v is None else v for v in profile.values[name]]
    alpha = (1.0 - level) / 2.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        low = np.nanquantile(draws, alpha, axis=0)
        high = np.nanquantile(draws, 1.0 - alpha, axis=0)
    return NullBand(
        tuple(range(1, max_lag + 1)),
        {name: low[:, k].tolist() for k, name in enumerate(measures)},
        {name: high[:, k].tolist() for k, name in enumerate(measures)},
    )
