"""Classification metrics for categorical forecasts."""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np
from sklearn import metrics as sk_metrics


def _check(y_true: Sequence[int], y_pred: Sequence[int]) -> None:
    if len(y_true) == 0:
        raise ValueError("Metrics need at least one forecast")
    if len(y_true) != len(y_pred):
        raise ValueError(f"{len(y_true)} true values but {len(y_pred)} predictions")


def accuracy(y_true: Sequence[int], y_pred: Sequence[int]) -> float:
    """Share of exact category matches, in ``[0, 1]``."""

    _check(y_true, y_pred)
    return float(sk_metrics.accuracy_score(y_true, y_pred))


def weighted_f1(y_true: Sequence[int], y_pred: Sequence[int]) -> float:
    """F1 averaged over the true categories, weighted by their support.

    Categories that are predicted but never observed carry zero weight; a
    category with no predictions contributes an F1 of 0.
    """

    _check(y_true, y_pred)
    return float(sk_metrics.f1_score(y_true, y_pred, average="weighted", zero_division=0))


def confusion_matrix(
    y_true: Sequence[int], y_pred: Sequence[int], n_categories: Optional[int] = None
) -> np.ndarray:
    """Counts with rows = true category and columns = predicted category."""

    _check(y_true, y_pred)
    if n_categories is None:
        n_categories = int(max(np.max(y_true), np.max(y_pred))) + 1
    return sk_metrics.confusion_matrix(y_true, y_pred, labels=list(range(n_categories)))
