from __future__ import annotations

import logging
from datetime import date, timedelta

import numpy as np
import pytest

from seasolr.errors import RankDeficientDesignError
from seasolr.features import CovariateSpec, FourierTermSpec, LagSpec, tsolr_sim_spec
from seasolr.polr import (
    FitOptions,
    PolrModel,
    PolrParams,
    category_probs,
    collinear_columns,
    covariance_from_hessian,
    cumulative_probs,
    empirical_thresholds,
    fit,
    fit_model,
    forecast_window,
    log_likelihood,
    log_likelihood_gradient,
    numerical_hessian,
    predict_one_step,
    standard_errors,
)
from seasolr.series import OrdinalSeries
from seasolr.simulation import PRESETS, simulate_tsolr


def _logistic(x):
    return 1.0 / (1.0 + np.exp(-np.asarray(x, dtype=float)))


def _draw(params: PolrParams, X: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    probs = category_probs(params, params.linear_predictor(X))
    cumulative = np.cumsum(probs, axis=1)[:, :-1]
    return (rng.random(X.shape[0])[:, None] > cumulative).sum(axis=1)


@pytest.fixture(scope="module")
def regression_data():
    rng = np.random.default_rng(2024)
    truth = PolrParams([-1.0, 0.5, 1.5], [1.0, -0.5])
    X = rng.normal(size=(4000, 2))
    return truth, X, _draw(truth, X, rng)


@pytest.fixture(scope="module")
def tsolr_model():
    preset = PRESETS["tsolr3"]
    truth = PolrParams(preset["thresholds"], preset["coefficients"])
    series = simulate_tsolr(truth, 600, seed=11)
    return fit_model(series.window(None, date(2001, 1, 1) + timedelta(days=499)), tsolr_sim_spec(), "tsolr"), series


# ---------------------------------------------------------------------------
# Parameters and probabilities
# ---------------------------------------------------------------------------


def test_params_reject_unordered_thresholds():
    with pytest.raises(ValueError):
        PolrParams([0.5, 0.5])
    with pytest.raises(ValueError):
        PolrParams([1.0, -1.0])
    with pytest.raises(ValueError):
        PolrParams([0.0, np.inf])


def test_params_vector_round_trip():
    params = PolrParams([-1.0, 2.0], [0.3, 0.4, 0.5])
    restored = PolrParams.from_vector(params.to_vector(), 2)
    assert restored.thresholds.tolist() == [-1.0, 2.0]
    assert restored.coefficients.tolist() == [0.3, 0.4, 0.5]
    assert params.n_categories == 3


def test_category_probs_three_categories_at_zero():
    params = PolrParams([-0.84, 0.84])
    cumulative = cumulative_probs(params, 0.0)
    assert cumulative == pytest.approx(_logistic([-0.84, 0.84]))
    probs = category_probs(params, 0.0)
    low = float(_logistic(-0.84))
    assert probs == pytest.approx([low, 1.0 - 2.0 * low, low])
    assert probs.sum() == pytest.approx(1.0, abs=1e-12)


def test_category_probs_rows_sum_to_one_for_extreme_predictors():
    params = PolrParams([-1.1, 0.0, 1.1])
    eta = np.array([-800.0, -40.0, 0.0, 40.0, 800.0])
    probs = category_probs(params, eta)
    assert probs.shape == (5, 4)
    assert np.all(probs >= 0.0)
    assert probs.sum(axis=1) == pytest.approx(np.ones(5), abs=1e-12)
    assert probs[0].tolist() == [1.0, 0.0, 0.0, 0.0]
    assert probs[-1].tolist() == [0.0, 0.0, 0.0, 1.0]


def test_category_probs_sum_to_one_over_random_parameters():
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(100_000):
        m = int(rng.integers(1, 6))
        thresholds = rng.normal(0.0, 3.0) + np.cumsum(rng.exponential(1.5, m) + 1e-3)
        eta = rng.normal(0.0, 10.0, 4)
        probs = category_probs(PolrParams(thresholds), eta)
        assert np.all(probs >= 0.0)
        worst = max(worst, float(np.abs(probs.sum(axis=1) - 1.0).max()))
    assert worst <= 1e-12


def test_shifting_thresholds_and_predictor_together_changes_nothing():
    rng = np.random.default_rng(31)
    worst = 0.0
    for _ in range(200):
        m = int(rng.integers(1, 6))
        thresholds = rng.normal(0.0, 2.0) + np.cumsum(rng.exponential(1.0, m) + 1e-3)
        params = PolrParams(thresholds)
        for e, c in zip(rng.normal(0.0, 3.0, 50), rng.normal(0.0, 5.0, 50)):
            moved = category_probs(PolrParams(thresholds + c), e + c)
            worst = max(worst, float(np.abs(moved - category_probs(params, e)).max()))
    assert worst < 1e-12


def test_linear_predictor_checks_width():
    with pytest.raises(ValueError):
        PolrParams([0.0], [1.0, 2.0]).linear_predictor(np.ones((3, 1)))


# ---------------------------------------------------------------------------
# Likelihood and gradient
# ---------------------------------------------------------------------------


def test_log_likelihood_matches_direct_logistic_differences():
    rng = np.random.default_rng(77)
    for _ in range(200):
        m = int(rng.integers(1, 5))
        p = int(rng.integers(0, 4))
        thresholds = np.sort(rng.normal(0.0, 2.0, m)) + 0.1 * np.arange(m)
        coefficients = rng.normal(0.0, 1.0, p)
        X = rng.normal(size=(5, p))
        y = rng.integers(0, m + 1, 5)
        eta = X @ coefficients
        bounds = np.concatenate(([-np.inf], thresholds, [np.inf]))
        expected = float(np.sum(np.log(_logistic(bounds[y + 1] - eta) - _logistic(bounds[y] - eta))))
        value = log_likelihood(PolrParams(thresholds, coefficients), X, y)
        assert value == pytest.approx(expected, rel=1e-9)


def test_log_likelihood_survival_form_keeps_upper_tail_precision():
    params = PolrParams([0.0], [1.0])
    X = np.array([[-40.0]])
    # P(Y = 1) = 1 - logistic(40), which rounds to zero in the direct form
    value = log_likelihood(params, X, np.array([1]))
    assert value == pytest.approx(-40.0 - np.log1p(np.exp(-40.0)), rel=1e-9)


def test_log_likelihood_floor_is_logged(caplog):
    params = PolrParams([0.0], [1000.0])
    with caplog.at_level(logging.WARNING, logger="seasolr"):
        value = log_likelihood(params, np.array([[1.0]]), np.array([0]), floor=1e-300)
    assert value == pytest.approx(np.log(1e-300))
    assert "floored" in caplog.text


def test_gradient_matches_central_differences_at_random_points(regression_data):
    _, X, y = regression_data
    X, y = X[:300], y[:300]
    rng = np.random.default_rng(13)
    h = 1e-5
    worst = 0.0
    for _ in range(20):
        thresholds = np.sort(rng.normal(0.0, 1.5, 3)) + 0.2 * np.arange(3)
        x0 = np.concatenate([thresholds, rng.normal(0.0, 1.0, 2)])
        analytic = log_likelihood_gradient(PolrParams.from_vector(x0, 3), X, y)
        numeric = np.empty_like(x0)
        for i in range(x0.size):
            step = np.zeros_like(x0)
            step[i] = h
            numeric[i] = (
                log_likelihood(PolrParams.from_vector(x0 + step, 3), X, y)
                - log_likelihood(PolrParams.from_vector(x0 - step, 3), X, y)
            ) / (2 * h)
        error = np.linalg.norm(analytic - numeric) / max(np.linalg.norm(numeric), 1.0)
        worst = max(worst, float(error))
    assert worst <= 1e-4


def test_log_likelihood_rejects_out_of_range_responses():
    with pytest.raises(ValueError):
        log_likelihood(PolrParams([0.0]), np.zeros((2, 0)), np.array([0, 2]))


# ---------------------------------------------------------------------------
# Hessian helpers
# ---------------------------------------------------------------------------


def test_numerical_hessian_of_quadratic():
    A = np.array([[2.0, 0.5, 0.0], [0.5, 1.0, 0.3], [0.0, 0.3, 4.0]])
    H = numerical_hessian(lambda x: -0.5 * x @ A @ x, np.array([0.3, -1.2, 2.0]))
    assert H == pytest.approx(-A, abs=1e-4)
    assert np.array_equal(H, H.T)


def test_covariance_from_hessian():
    vcov, reason = covariance_from_hessian(np.array([[-4.0, 0.0], [0.0, -1.0]]))
    assert reason is None
    assert vcov == pytest.approx(np.diag([0.25, 1.0]))
    vcov, reason = covariance_from_hessian(np.array([[1.0, 0.0], [0.0, -1.0]]))
    assert vcov is None
    assert "positive definite" in reason


# ---------------------------------------------------------------------------
# Fitting
# ---------------------------------------------------------------------------


def test_empirical_thresholds_unsmoothed_is_cumulative_logit():
    y = np.repeat([0, 1, 2], [30, 50, 20])
    thresholds = empirical_thresholds(y, 3, smoothing=0.0)
    assert thresholds == pytest.approx([np.log(0.3 / 0.7), np.log(0.8 / 0.2)])


def test_fit_intercept_only_reaches_closed_form():
    y = np.repeat([0, 1, 2], [30, 50, 20])
    report = fit(np.zeros((100, 0)), y, 3)
    assert report.converged
    assert report.params.thresholds == pytest.approx(
        [np.log(0.3 / 0.7), np.log(0.8 / 0.2)], abs=1e-5
    )
    expected_ll = 30 * np.log(0.3) + 50 * np.log(0.5) + 20 * np.log(0.2)
    assert report.log_likelihood == pytest.approx(expected_ll, rel=1e-9)
    assert report.parameter_names == ["theta_0", "theta_1"]


def test_fit_recovers_coefficients(regression_data):
    truth, X, y = regression_data
    report = fit(X, y, 4, columns=["a", "b"])
    assert report.converged
    assert report.gradient_max < 1e-6
    assert report.params.thresholds == pytest.approx(truth.thresholds, abs=0.15)
    assert report.params.coefficients == pytest.approx(truth.coefficients, abs=0.15)
    se = standard_errors(report)
    assert se.shape == (5,)
    assert np.all(np.isfinite(se)) and np.all(se > 0) and np.all(se < 0.2)
    assert np.allclose(report.vcov, report.vcov.T)
    assert report.parameter_names == ["theta_0", "theta_1", "theta_2", "a", "b"]


def test_fit_numeric_gradient_agrees_with_analytic(regression_data):
    _, X, y = regression_data
    analytic = fit(X[:800], y[:800], 4, options=FitOptions(compute_se=False))
    numeric = fit(X[:800], y[:800], 4, options=FitOptions(compute_se=False, gradient="numeric", tol=1e-4))
    assert numeric.params.to_vector() == pytest.approx(analytic.params.to_vector(), abs=1e-3)
    assert analytic.std_errors is None
    with pytest.raises(ValueError):
        standard_errors(analytic)


def test_fit_ignores_row_order(regression_data):
    _, X, y = regression_data
    X, y = X[:800], y[:800]
    order = np.random.default_rng(3).permutation(800)
    options = FitOptions(compute_se=False)
    original = fit(X, y, 4, options=options)
    shuffled = fit(X[order], y[order], 4, options=options)
    assert shuffled.log_likelihood == pytest.approx(original.log_likelihood, rel=1e-10)
    assert shuffled.params.to_vector() == pytest.approx(original.params.to_vector(), abs=1e-6)


def test_fit_rejects_collinear_columns():
    rng = np.random.default_rng(0)
    a = rng.normal(size=50)
    X = np.column_stack([a, 2.0 * a, np.ones(50)])
    y = (a > 0).astype(int)
    assert collinear_columns(X, ["a", "b", "c"]) == ["b", "c"]
    with pytest.raises(RankDeficientDesignError) as info:
        fit(X, y, 2, columns=["a", "b", "c"])
    assert info.value.columns == ["b", "c"]


def test_fit_requires_two_observed_categories():
    with pytest.raises(ValueError):
        fit(np.zeros((10, 0)), np.zeros(10, dtype=int), 3)


def test_fit_warns_about_absent_categories(caplog):
    y = np.repeat([0, 1, 3], [20, 30, 10])
    with caplog.at_level(logging.WARNING, logger="seasolr"):
        fit(np.zeros((60, 0)), y, 4, options=FitOptions(compute_se=False))
    assert "never occur" in caplog.text


# ---------------------------------------------------------------------------
# Fitted models and forecasting
# ---------------------------------------------------------------------------


def test_fit_model_records_spec_and_origin(tsolr_model):
    model, _ = tsolr_model
    assert model.origin == date(2001, 1, 1)
    assert model.report.columns == tsolr_sim_spec().columns
    assert model.report.n_obs == 499
    frame = model.summary_frame()
    assert frame.columns.tolist() == ["parameter", "estimate", "std_error", "z_value"]
    assert frame["parameter"].tolist()[:2] == ["theta_0", "theta_1"]
    assert len(frame) == 9


def test_model_save_and_load(tsolr_model, tmp_path):
    model, _ = tsolr_model
    path = model.save(tmp_path / "model.json")
    restored = PolrModel.load(path)
    assert restored.name == "tsolr"
    assert restored.origin == model.origin
    assert restored.spec.columns == model.spec.columns
    assert restored.params.to_vector() == pytest.approx(model.params.to_vector(), rel=1e-12)
    assert restored.report.converged == model.report.converged


def test_predict_one_step_matches_rolling_forecast(tsolr_model):
    model, series = tsolr_model
    target = date(2001, 1, 1) + timedelta(days=520)
    prediction = predict_one_step(model, series, target)
    assert prediction.target == target
    assert prediction.probabilities.sum() == pytest.approx(1.0)
    assert prediction.category == int(np.argmax(prediction.probabilities))

    rolling = forecast_window(model, series, target, target)
    assert rolling.probabilities[0] == pytest.approx(prediction.probabilities)

    by_index = predict_one_step(model, series, 521)
    assert by_index.target == target
    assert by_index.probabilities == pytest.approx(prediction.probabilities)


def test_predict_one_step_needs_lagged_history(tsolr_model):
    model, series = tsolr_model
    with pytest.raises(ValueError):
        predict_one_step(model, series, series.end + timedelta(days=2))


def test_forecast_window_rolling_and_recursive(tsolr_model):
    model, series = tsolr_model
    start = date(2001, 1, 1) + timedelta(days=500)
    rolling = forecast_window(model, series, start, None, mode="rolling")
    recursive = forecast_window(model, series, start, None, mode="recursive")
    assert len(rolling.dates) == len(recursive.dates) == 100
    assert rolling.observed.tolist() == series.codes[500:].tolist()
    # both modes see the observed lag on the first forecast day
    assert recursive.probabilities[0] == pytest.approx(rolling.probabilities[0])
    assert rolling.predicted.tolist() == np.argmax(rolling.probabilities, axis=1).tolist()

    frame = rolling.to_frame(series.scheme.labels)
    assert frame.columns.tolist() == ["date", "true", "predicted", "p_0", "p_1", "p_2"]
    with pytest.raises(ValueError):
        forecast_window(model, series, start, None, mode="bogus")


def test_forecast_window_without_lags_is_mode_independent():
    rng = np.random.default_rng(5)
    spec = CovariateSpec(terms=[FourierTermSpec(period=7, kind="cos"), FourierTermSpec(period=7, kind="sin")])
    t = np.arange(1, 201)
    truth = PolrParams([-0.5, 0.5], [1.5, -1.0])
    X = np.column_stack([np.cos(2 * np.pi * t / 7), np.sin(2 * np.pi * t / 7)])
    series = OrdinalSeries.from_codes(_draw(truth, X, rng), start=date(2020, 1, 1))
    model = fit_model(series.window(None, date(2020, 5, 31)), spec, "tsolr")
    rolling = forecast_window(model, series, date(2020, 6, 1), None)
    recursive = forecast_window(model, series, date(2020, 6, 1), None, mode="recursive")
    assert recursive.predicted.tolist() == rolling.predicted.tolist()
    assert model.report.columns == ("cos_p7_k1", "sin_p7_k1")
    assert LagSpec(order=1).column not in model.report.columns
