"""Proportional-odds cumulative logit model.

``logit P(Y_t <= j) = theta_j - eta_t`` for ``j = 0..m-1``, with ordered
thresholds ``theta`` and linear predictor ``eta_t = x_t . beta``. TSOLR and
ISOLR are this model with different covariate specs.

Fitting maximizes the log-likelihood over ``(theta_0, delta_1.., beta)`` where
``theta_j = theta_0 + sum_{k<=j} exp(delta_k)``, so every iterate has strictly
increasing thresholds. Standard errors come from a central-difference Hessian
of the log-likelihood in the original ``(theta, beta)`` coordinates.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from datetime import date, timedelta
from pathlib import Path
from typing import Callable, Dict, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field
from scipy import optimize
from scipy.special import expit

from .encoders import read_json, write_json
from .errors import RankDeficientDesignError
from .features import CovariateSpec, Design, build_design, feature_row, time_index
from .series import MISSING, CategoryScheme, OrdinalSeries

logger = logging.getLogger(__name__)


class FitOptions(BaseModel):
    """Optimizer settings.

    Attributes:
        tol: Convergence threshold on the max-norm of the log-likelihood
            gradient (reparameterized coordinates, full-sample scale).
        max_iter: Iteration cap for the quasi-Newton phase.
        gradient: ``"analytic"`` or ``"numeric"`` (central differences).
        prob_floor: Floor applied to category probabilities before the log.
        compute_se: Whether to compute the Hessian and standard errors.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    tol: float = Field(default=1e-6, gt=0)
    max_iter: int = Field(default=500, ge=1)
    gradient: Literal["analytic", "numeric"] = "analytic"
    prob_floor: float = Field(default=1e-300, gt=0)
    compute_se: bool = True


def _check_thresholds(thresholds: np.ndarray) -> None:
    if thresholds.ndim != 1 or thresholds.size < 1:
        raise ValueError("At least one threshold is required")
    if not np.all(np.isfinite(thresholds)):
        raise ValueError("Thresholds must be finite")
    if np.any(np.diff(thresholds) <= 0):
        raise ValueError(f"Thresholds must be strictly increasing, got {thresholds.tolist()}")


@dataclass(frozen=True, eq=False)
class PolrParams:
    """Thresholds ``theta_0 < ... < theta_{m-1}`` and covariate coefficients ``beta``."""

    thresholds: np.ndarray
    coefficients: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self) -> None:
        thresholds = np.array(self.thresholds, dtype=float).reshape(-1)
        coefficients = np.array(self.coefficients, dtype=float).reshape(-1)
        _check_thresholds(thresholds)
        thresholds.flags.writeable = False
        coefficients.flags.writeable = False
        object.__setattr__(self, "thresholds", thresholds)
        object.__setattr__(self, "coefficients", coefficients)

    @property
    def n_categories(self) -> int:
        return self.thresholds.size + 1

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.thresholds, self.coefficients])

    @classmethod
    def from_vector(cls, vector: Sequence[float], n_thresholds: int) -> "PolrParams":
        vector = np.asarray(vector, dtype=float)
        return cls(vector[:n_thresholds], vector[n_thresholds:])

    def linear_predictor(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.shape[-1] != self.coefficients.size:
            raise ValueError(
                f"Design has {X.shape[-1]} columns but the model has "
                f"{self.coefficients.size} coefficients"
            )
        return X @ self.coefficients


# ---------------------------------------------------------------------------
# Probabilities and likelihood
# ---------------------------------------------------------------------------


def _density(x: np.ndarray) -> np.ndarray:
    # logistic pdf; exactly 0 at +-inf
    return expit(x) * expit(-x)


def cumulative_probs(params: PolrParams, eta: Union[float, np.ndarray]) -> np.ndarray:
    """``P(Y <= j)`` for ``j = 0..m-1``.

    Args:
        params: Model parameters.
        eta: Linear predictor, scalar or 1-D array.

    Returns:
        np.ndarray: Shape ``(m,)`` for scalar ``eta``, else ``(len(eta), m)``.
    """

    eta = np.asarray(eta, dtype=float)
    return expit(params.thresholds - eta[..., None])


def category_probs(params: PolrParams, eta: Union[float, np.ndarray]) -> np.ndarray:
    """``P(Y = j)`` for ``j = 0..m``, the differences of :func:`cumulative_probs`."""

    cumulative = cumulative_probs(params, eta)
    shape = cumulative.shape[:-1] + (1,)
    padded = np.concatenate([np.zeros(shape), cumulative, np.ones(shape)], axis=-1)
    return np.maximum(np.diff(padded, axis=-1), 0.0)


def _interval_bounds(thresholds: np.ndarray, eta: np.ndarray, y: np.ndarray):
    extended = np.concatenate(([-np.inf], thresholds, [np.inf]))
    return extended[y] - eta, extended[y + 1] - eta


def _observed_probs(lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    # F(b) - F(a), switching to survival form S(a) - S(b) in the upper tail
    # where both CDF values round to 1.
    upper_tail = (np.where(np.isfinite(lower), lower, 0.0) + np.where(np.isfinite(upper), upper, 0.0)) > 0
    direct = expit(upper) - expit(lower)
    survival = expit(-lower) - expit(-upper)
    return np.where(upper_tail, survival, direct)


def _loglik_terms(
    thresholds: np.ndarray,
    coefficients: np.ndarray,
    X: np.ndarray,
    y: np.ndarray,
    floor: float,
) -> Tuple[np.ndarray, np.ndarray]:
    eta = X @ coefficients
    lower, upper = _interval_bounds(thresholds, eta, y)
    probs = _observed_probs(lower, upper)
    floored = probs < floor
    return np.log(np.where(floored, floor, probs)), floored


def _validate_xy(X: np.ndarray, y: np.ndarray, n_categories: int) -> Tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim == 1:
        X = np.zeros((y.size, 0)) if X.size == 0 else X.reshape(-1, 1)
    if X.shape[0] != y.size:
        raise ValueError(f"Design has {X.shape[0]} rows but there are {y.size} responses")
    if y.size and (y.min() < 0 or y.max() >= n_categories):
        raise ValueError(f"Responses must lie in 0..{n_categories - 1}")
    return X, y


def log_likelihood(
    params: PolrParams, X: np.ndarray, y: np.ndarray, floor: float = 1e-300
) -> float:
    """Sum over rows of ``log P(Y_t = y_t)``.

    Probabilities below ``floor`` are clamped to it before taking the log; the
    clamp is logged at WARNING level with the number of affected rows.
    """

    X, y = _validate_xy(X, y, params.n_categories)
    terms, floored = _loglik_terms(params.thresholds, params.coefficients, X, y, floor)
    if floored.any():
        logger.warning("%d probabilities floored at %g", int(floored.sum()), floor)
    return float(terms.sum())


def _gradient_theta_beta(
    thresholds: np.ndarray,
    coefficients: np.ndarray,
    X: np.ndarray,
    y: np.ndarray,
    floor: float,
) -> np.ndarray:
    m = thresholds.size
    eta = X @ coefficients
    lower, upper = _interval_bounds(thresholds, eta, y)
    probs = np.maximum(_observed_probs(lower, upper), floor)
    d_upper = _density(upper) / probs
    d_lower = _density(lower) / probs
    grad_theta = np.bincount(y[y < m], weights=d_upper[y < m], minlength=m)[:m]
    grad_theta -= np.bincount(y[y > 0] - 1, weights=d_lower[y > 0], minlength=m)[:m]
    grad_eta = -(d_upper - d_lower)
    return np.concatenate([grad_theta, X.T @ grad_eta])


def log_likelihood_gradient(
    params: PolrParams, X: np.ndarray, y: np.ndarray, floor: float = 1e-300
) -> np.ndarray:
    """Analytic gradient of :func:`log_likelihood` with respect to ``(theta, beta)``."""

    X, y = _validate_xy(X, y, params.n_categories)
    return _gradient_theta_beta(params.thresholds, params.coefficients, X, y, floor)


# ---------------------------------------------------------------------------
# Numerical Hessian
# ---------------------------------------------------------------------------


def hessian_steps(x: np.ndarray) -> np.ndarray:
    """Per-coordinate finite-difference steps ``max(1e-5, 1e-4 |x_i|)``."""

    return np.maximum(1e-5, 1e-4 * np.abs(np.asarray(x, dtype=float)))


def numerical_hessian(fn: Callable[[np.ndarray], float], x: Sequence[float]) -> np.ndarray:
    """Central finite-difference Hessian of ``fn`` at ``x``, symmetrized.

    Uses one fixed step per coordinate from :func:`hessian_steps` and the
    four-point cross difference, both kept local. ``numdifftools.Hessian``
    accepts an explicit ``step``, but its stencil and any extrapolation belong
    to that library version, so saved standard errors could change with an
    upgrade. It would also add a dependency for this one call.

    Args:
        fn: Scalar function of a 1-D array.
        x: Evaluation point.

    Returns:
        np.ndarray: ``(H + H.T) / 2``.
    """

    x = np.asarray(x, dtype=float)
    h = hessian_steps(x)
    n = x.size
    f0 = fn(x)
    H = np.empty((n, n))
    for i in range(n):
        ei = np.zeros(n)
        ei[i] = h[i]
        H[i, i] = (fn(x + ei) - 2.0 * f0 + fn(x - ei)) / h[i] ** 2
        for j in range(i):
            ej = np.zeros(n)
            ej[j] = h[j]
            H[i, j] = (
                fn(x + ei + ej) - fn(x + ei - ej) - fn(x - ei + ej) + fn(x - ei - ej)
            ) / (4.0 * h[i] * h[j])
            H[j, i] = H[i, j]
    return (H + H.T) / 2.0


def covariance_from_hessian(H: np.ndarray) -> Tuple[Optional[np.ndarray], Optional[str]]:
    """Invert the negated Hessian; ``(None, reason)`` when it is not positive definite."""

    information = -(H + H.T) / 2.0
    try:
        np.linalg.cholesky(information)
    except np.linalg.LinAlgError:
        return None, "negated Hessian is not positive definite; standard errors unavailable"
    vcov = np.linalg.inv(information)
    return (vcov + vcov.T) / 2.0, None


# ---------------------------------------------------------------------------
# Fitting
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FitReport:
    """Outcome of :func:`fit`.

    Attributes:
        params: Estimates with back-transformed, increasing thresholds.
        std_errors: ``sqrt(diag(vcov))``, or ``None`` when the Hessian was unusable.
        log_likelihood: Maximized log-likelihood.
        converged: Whether the gradient max-norm fell below the tolerance.
        iterations: Optimizer iterations (quasi-Newton plus Newton polish).
        vcov: Inverse observed information, or ``None``.
        columns: Covariate column names.
        n_obs: Rows used.
        gradient_max: Final gradient max-norm.
        underflow_count: Rows whose probability hit the floor at the optimum.
        message: Diagnostic text.
    """

    params: PolrParams
    std_errors: Optional[np.ndarray]
    log_likelihood: float
    converged: bool
    iterations: int
    vcov: Optional[np.ndarray]
    columns: Tuple[str, ...] = ()
    n_obs: int = 0
    gradient_max: float = float("nan")
    underflow_count: int = 0
    message: str = ""

    @property
    def parameter_names(self) -> List[str]:
        names = [f"theta_{j}" for j in range(self.params.thresholds.size)]
        return names + list(self.columns)

    def to_dict(self) -> Dict[str, object]:
        return {
            "thresholds": self.params.thresholds,
            "coefficients": self.params.coefficients,
            "std_errors": self.std_errors,
            "log_likelihood": self.log_likelihood,
            "converged": self.converged,
            "iterations": self.iterations,
            "vcov": self.vcov,
            "columns": list(self.columns),
            "n_obs": self.n_obs,
            "gradient_max": self.gradient_max,
            "underflow_count": self.underflow_count,
            "message": self.message,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, object]) -> "FitReport":
        def optional_array(value):
            return None if value is None else np.asarray(value, dtype=float)

        gradient_max = data.get("gradient_max")
        return cls(
            params=PolrParams(data["thresholds"], data["coefficients"]),  # type: ignore[arg-type]
            std_errors=optional_array(data.get("std_errors")),
            log_likelihood=float(data["log_likelihood"]),  # type: ignore[arg-type]
            converged=bool(data["converged"]),
            iterations=int(data["iterations"]),  # type: ignore[arg-type]
            vcov=optional_array(data.get("vcov")),
            columns=tuple(data.get("columns", ())),  # type: ignore[arg-type]
            n_obs=int(data.get("n_obs", 0)),  # type: ignore[arg-type]
            gradient_max=float("nan") if gradient_max is None else float(gradient_max),  # type: ignore[arg-type]
            underflow_count=int(data.get("underflow_count", 0)),  # type: ignore[arg-type]
            message=str(data.get("message", "")),
        )


def standard_errors(report: FitReport) -> np.ndarray:
    """Return the standard errors of a fit.

    Raises:
        ValueError: If the fit has no usable covariance matrix.
    """

    if report.std_errors is None:
        raise ValueError(f"Standard errors unavailable: {report.message}")
    return report.std_errors


def empirical_thresholds(y: Sequence[int], n_categories: int, smoothing: float = 0.5) -> np.ndarray:
    """Cumulative logits of the response frequencies.

    With ``smoothing=0`` this is the closed-form MLE of the intercept-only
    model; the default adds half a count per category so that absent
    categories still give finite, strictly increasing thresholds.
    """

    counts = np.bincount(np.asarray(y, dtype=np.int64), minlength=n_categories).astype(float)
    counts += smoothing
    cumulative = np.cumsum(counts)[:-1] / counts.sum()
    return np.log(cumulative / (1.0 - cumulative))


def collinear_columns(X: np.ndarray, columns: Sequence[str]) -> List[str]:
    """Columns that add no rank to ``[1, X]`` given the columns before them."""

    X = np.asarray(X, dtype=float)
    basis = np.ones((X.shape[0], 1))
    rank = 1
    bad: List[str] = []
    for i, name in enumerate(columns):
        candidate = np.column_stack([basis, X[:, i]])
        candidate_rank = np.linalg.matrix_rank(candidate)
        if candidate_rank > rank:
            basis, rank = candidate, candidate_rank
        else:
            bad.append(name)
    return bad


def _to_thresholds(z: np.ndarray, m: int) -> np.ndarray:
    return z[0] + np.concatenate(([0.0], np.cumsum(np.exp(z[1:m]))))


def _from_thresholds(thresholds: np.ndarray) -> np.ndarray:
    return np.concatenate(([thresholds[0]], np.log(np.diff(thresholds))))


def _chain_to_z(grad_theta: np.ndarray, z: np.ndarray, m: int) -> np.ndarray:
    tail_sums = np.cumsum(grad_theta[::-1])[::-1]
    grad_z = np.empty(m)
    grad_z[0] = tail_sums[0]
    grad_z[1:] = np.exp(z[1:m]) * tail_sums[1:]
    return grad_z


class _Objective:
    """Log-likelihood and gradient in reparameterized coordinates."""

    def __init__(self, X: np.ndarray, y: np.ndarray, m: int, options: FitOptions):
        self.X, self.y, self.m, self.options = X, y, m, options

    def loglik(self, z: np.ndarray) -> float:
        thresholds = _to_thresholds(z, self.m)
        terms, _ = _loglik_terms(thresholds, z[self.m :], self.X, self.y, self.options.prob_floor)
        return float(terms.sum())

    def gradient(self, z: np.ndarray) -> np.ndarray:
        if self.options.gradient == "numeric":
            return _central_gradient(self.loglik, z)
        thresholds = _to_thresholds(z, self.m)
        grad = _gradient_theta_beta(thresholds, z[self.m :], self.X, self.y, self.options.prob_floor)
        return np.concatenate([_chain_to_z(grad[: self.m], z, self.m), grad[self.m :]])


def _central_gradient(fn: Callable[[np.ndarray], float], x: np.ndarray) -> np.ndarray:
    h = 1e-6 * np.maximum(1.0, np.abs(x))
    grad = np.empty(x.size)
    for i in range(x.size):
        e = np.zeros(x.size)
        e[i] = h[i]
        grad[i] = (fn(x + e) - fn(x - e)) / (2.0 * h[i])
    return grad


def _newton_polish(objective: _Objective, z: np.ndarray, tol: float, max_steps: int = 50) -> Tuple[np.ndarray, int]:
    steps = 0
    for steps in range(1, max_steps + 1):
        g = objective.gradient(z)
        if np.max(np.abs(g), initial=0.0) < tol:
            return z, steps - 1
        h = 1e-5 * np.maximum(1.0, np.abs(z))
        H = np.empty((z.size, z.size))
        for i in range(z.size):
            e = np.zeros(z.size)
            e[i] = h[i]
            H[:, i] = (objective.gradient(z + e) - objective.gradient(z - e)) / (2.0 * h[i])
        H = (H + H.T) / 2.0
        try:
            np.linalg.cholesky(-H)
        except np.linalg.LinAlgError:
            return z, steps - 1
        direction = np.linalg.solve(-H, g)
        current = objective.loglik(z)
        alpha = 1.0
        for _ in range(30):
            candidate = z + alpha * direction
            if objective.loglik(candidate) >= current - 1e-12 * abs(current):
                break
            alpha /= 2.0
        else:
            return z, steps - 1
        z = candidate
    return z, steps


def fit(
    X: np.ndarray,
    y: np.ndarray,
    n_categories: int,
    columns: Optional[Sequence[str]] = None,
    options: Optional[FitOptions] = None,
) -> FitReport:
    """Maximum-likelihood fit of the proportional-odds model.

    Args:
        X: ``rows x p`` design (no intercept column; thresholds play that role).
        y: Response codes in ``0..n_categories-1``.
        n_categories: ``m + 1``, taken from the category scheme rather than the
            observed responses.
        columns: Column names, used in diagnostics and reports.
        options: Optimizer settings.

    Returns:
        FitReport: Estimates and diagnostics. Non-convergence is reported via
        ``converged=False``, not raised.

    Raises:
        ValueError: If fewer than two distinct categories are observed.
        RankDeficientDesignError: If some columns are collinear.
    """

    options = options or FitOptions()
    X, y = _validate_xy(X, y, n_categories)
    columns = tuple(columns) if columns is not None else tuple(f"x{i}" for i in range(X.shape[1]))
    if len(columns) != X.shape[1]:
        raise ValueError(f"{len(columns)} column names for {X.shape[1]} columns")
    m = n_categories - 1
    if m < 1:
        raise ValueError("At least two categories are required")
    observed = np.unique(y)
    if observed.size < 2:
        raise ValueError(f"At least two distinct response categories are required, got {observed.tolist()}")
    bad = collinear_columns(X, columns)
    if bad:
        raise RankDeficientDesignError(bad)
    absent = sorted(set(range(n_categories)) - set(observed.tolist()))
    if absent:
        logger.warning(
            "Categories %s never occur in the training data; their thresholds are weakly identified",
            absent,
        )

    objective = _Objective(X, y, m, options)
    n = y.size
    z0 = np.concatenate([_from_thresholds(empirical_thresholds(y, n_categories)), np.zeros(X.shape[1])])

    result = optimize.minimize(
        lambda z: -objective.loglik(z) / n,
        z0,
        jac=lambda z: -objective.gradient(z) / n,
        method="BFGS",
        options={"gtol": options.tol / n, "maxiter": options.max_iter, "norm": np.inf},
    )
    z, polish_steps = _newton_polish(objective, result.x, options.tol)
    iterations = int(result.nit) + polish_steps

    gradient_max = float(np.max(np.abs(objective.gradient(z)), initial=0.0))
    converged = gradient_max < options.tol
    thresholds = _to_thresholds(z, m)
    coefficients = z[m:].copy()
    params = PolrParams(thresholds, coefficients)
    terms, floored = _loglik_terms(thresholds, coefficients, X, y, options.prob_floor)
    underflow = int(floored.sum())
    messages = [str(result.message)]
    if underflow:
        logger.warning("%d probabilities floored at the optimum", underflow)
    if not converged:
        logger.warning(
            "Fit did not converge: gradient max-norm %.3g after %d iterations", gradient_max, iterations
        )

    vcov = std_errors = None
    if options.compute_se:

        def original_loglik(x: np.ndarray) -> float:
            values, _ = _loglik_terms(x[:m], x[m:], X, y, options.prob_floor)
            return float(values.sum())

        H = numerical_hessian(original_loglik, params.to_vector())
        vcov, reason = covariance_from_hessian(H)
        if vcov is None:
            logger.warning(reason)
            messages.append(str(reason))
        else:
            std_errors = np.sqrt(np.diag(vcov))

    return FitReport(
        params=params,
        std_errors=std_errors,
        log_likelihood=float(terms.sum()),
        converged=converged,
        iterations=iterations,
        vcov=vcov,
        columns=columns,
        n_obs=int(n),
        gradient_max=gradient_max,
        underflow_count=underflow,
        message="; ".join(messages),
    )


# ---------------------------------------------------------------------------
# Fitted model artefact and forecasting
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PolrModel:
    """A fitted model together with everything needed to forecast with it.

    Attributes:
        name: Free-form label (``"tsolr"``, ``"isolr"``, ...).
        scheme: Category scheme of the response.
        spec: Covariate spec; its column order matches the coefficients.
        origin: Date with time index 1.
        report: The fit.
    """

    name: str
    scheme: CategoryScheme
    spec: CovariateSpec
    origin: date
    report: FitReport

    @property
    def params(self) -> PolrParams:
        return self.report.params

    def summary_frame(self) -> pd.DataFrame:
        """Estimates, standard errors and z values, one row per parameter."""

        estimates = self.params.to_vector()
        se = self.report.std_errors
        se = np.full(estimates.size, np.nan) if se is None else se
        return pd.DataFrame(
            {
                "parameter": self.report.parameter_names,
                "estimate": estimates,
                "std_error": se,
                "z_value": estimates / se,
            }
        )

    def to_dict(self) -> Dict[str, object]:
        return {
            "name": self.name,
            "scheme": self.scheme.to_dict(),
            "spec": self.spec,
            "origin": self.origin,
            "fit": self.report.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, object]) -> "PolrModel":
        return cls(
            name=str(data["name"]),
            scheme=CategoryScheme.from_dict(data["scheme"]),  # type: ignore[arg-type]
            spec=CovariateSpec.model_validate(data["spec"]),
            origin=date.fromisoformat(str(data["origin"])),
            report=FitReport.from_dict(data["fit"]),  # type: ignore[arg-type]
        )

    def save(self, path: Union[str, Path]) -> Path:
        return write_json(self.to_dict(), path)

    @classmethod
    def load(cls, path: Union[str, Path]) -> "PolrModel":
        return cls.from_dict(read_json(path))


def fit_model(
    series: OrdinalSeries,
    spec: CovariateSpec,
    name: str = "polr",
    options: Optional[FitOptions] = None,
) -> PolrModel:
    """Build the design for ``series`` (origin = its first date) and fit it."""

    design = build_design(series, spec)
    report = fit(design.X, design.y, series.scheme.n_categories, design.columns, options)
    return PolrModel(name, series.scheme, spec, series.start, report)


@dataclass(frozen=True, eq=False)
class Prediction:
    """One-step-ahead forecast: category probabilities and their argmax."""

    target: date
    probabilities: np.ndarray
    category: int


def predict_one_step(
    model: PolrModel, history: OrdinalSeries, target: Union[date, int]
) -> Prediction:
    """Forecast the category on ``target`` from the observed ``history``.

    Args:
        model: Fitted model.
        history: Observations supplying the lagged codes.
        target: Target date, or a time index on the model's origin.

    Returns:
        Prediction: Probabilities and the most likely category (ties go to the
        lower code).

    Raises:
        ValueError: If ``history`` lacks a required lagged day.
        MissingFestivalDateError: If the festival window is needed for an
            unconfigured year.
    """

    if isinstance(target, (int, np.integer)):
        target_date = model.origin + timedelta(days=int(target) - 1)
    else:
        target_date = target
    t = int(time_index(np.asarray([target_date], dtype="datetime64[D]"), model.origin)[0])
    grid = history.calendar_codes()
    lag_values: Dict[int, int] = {}
    for order in model.spec.lag_orders:
        offset = (target_date - timedelta(days=order) - history.start).days
        if offset < 0 or offset >= grid.size or grid[offset] == MISSING:
            raise ValueError(
                f"History has no observation {order} day(s) before {target_date}"
            )
        lag_values[order] = int(grid[offset])
    x = feature_row(model.spec, target_date, t, lag_values)
    probabilities = category_probs(model.params, float(model.params.linear_predictor(x)))
    return Prediction(target_date, probabilities, int(np.argmax(probabilities)))


@dataclass(frozen=True, eq=False)
class ForecastResult:
    """Window of one-step forecasts aligned with the observed categories."""

    dates: np.ndarray
    observed: np.ndarray
    predicted: np.ndarray
    probabilities: np.ndarray

    def to_frame(self, labels: Sequence[str]) -> pd.DataFrame:
        frame = pd.DataFrame(
            {
                "date": [str(d) for d in self.dates],
                "true": self.observed,
                "predicted": self.predicted,
            }
        )
        for j, label in enumerate(labels):
            frame[f"p_{label}"] = self.probabilities[:, j]
        return frame


def forecast_window(
    model: PolrModel,
    series: OrdinalSeries,
    start: Optional[date] = None,
    end: Optional[date] = None,
    mode: Literal["rolling", "recursive"] = "rolling",
) -> ForecastResult:
    """One-step forecasts for every observed day in ``[start, end]``.

    ``rolling`` feeds the true observed lags; ``recursive`` feeds the model's
    own predictions for days inside the window. Days whose lags are not
    available are skipped (logged at INFO).

    Raises:
        ValueError: If no day in the window can be forecast.
    """

    window = series.window(start, end)
    window_start = np.datetime64(window.start, "D")
    window_end = np.datetime64(window.end, "D")

    if mode == "rolling":
        design = build_design(series, model.spec, origin=model.origin)
        keep = (design.dates >= window_start) & (design.dates <= window_end)
        if not keep.any():
            raise ValueError(f"No forecastable days between {window.start} and {window.end}")
        design = design.subset(keep)
        probabilities = category_probs(model.params, model.params.linear_predictor(design.X))
        skipped = len(window) - len(design)
        if skipped:
            logger.info("Skipped %d day(s) without the required lags", skipped)
        return ForecastResult(design.dates, design.y, np.argmax(probabilities, axis=1), probabilities)

    if mode != "recursive":
        raise ValueError(f"Unknown forecast mode {mode!r}")
    grid = series.calendar_codes().copy()
    base = np.datetime64(series.start, "D")
    dates: List[np.datetime64] = []
    observed: List[int] = []
    predicted: List[int] = []
    rows: List[np.ndarray] = []
    for day, code in zip(window.dates, window.codes):
        offset = int((day - base).astype(np.int64))
        lag_values: Dict[int, int] = {}
        for order in model.spec.lag_orders:
            source = offset - order
            if source < 0 or grid[source] == MISSING:
                break
            lag_values[order] = int(grid[source])
        else:
            target = day.astype(object)
            t = int(time_index(np.asarray([day]), model.origin)[0])
            x = feature_row(model.spec, target, t, lag_values)
            probs = category_probs(model.params, float(model.params.linear_predictor(x)))
            category = int(np.argmax(probs))
            grid[offset] = category
            dates.append(day)
            observed.append(int(code))
            predicted.append(category)
            rows.append(probs)
            continue
        logger.info("Skipped %s: lagged days unavailable", day)
    if not rows:
        raise ValueError(f"No forecastable days between {window.start} and {window.end}")
    return ForecastResult(
        np.asarray(dates, dtype="datetime64[D]"),
        np.asarray(observed, dtype=np.int64),
        np.asarray(predicted, dtype=np.int64),
        np.vstack(rows),
    )
