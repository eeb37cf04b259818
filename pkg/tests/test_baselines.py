from __future__ import annotations

from datetime import date, timedelta

import numpy as np
import pytest

from seasolr.baselines import (
    PAR_UPPER,
    MarkovModel,
    MtdModel,
    ParModel,
    fit_baseline,
    fit_markov,
    fit_mtd,
    fit_par,
    forecast_baseline,
    forecast_baseline_window,
    load_baseline,
    save_baseline,
)
from seasolr.series import CategoryScheme, OrdinalSeries, transition_matrix


def _mtd_series(n: int, weights, Q, seed: int) -> OrdinalSeries:
    rng = np.random.default_rng(seed)
    Q = np.asarray(Q)
    codes = [0, 1]
    for _ in range(n - 2):
        probs = weights[0] * Q[codes[-1]] + weights[1] * Q[codes[-2]]
        codes.append(int(rng.choice(Q.shape[1], p=probs)))
    return OrdinalSeries.from_codes(codes, CategoryScheme.ordinal(Q.shape[1]))


@pytest.fixture(scope="module")
def random_series():
    rng = np.random.default_rng(17)
    return OrdinalSeries.from_codes(rng.integers(0, 4, 600), CategoryScheme.ordinal(4))


# ---------------------------------------------------------------------------
# Markov
# ---------------------------------------------------------------------------


def test_markov_order_one_matches_transition_matrix(random_series):
    model = fit_markov(random_series, 1)
    expected = transition_matrix(random_series).probabilities
    for (state,), probs in model.transitions.items():
        assert probs == pytest.approx(expected[state])
    assert model.parameter_count == 3 * 4


def test_markov_order_two_uses_most_recent_first():
    series = OrdinalSeries.from_codes([0, 1, 2] * 20)
    model = fit_markov(series, 2)
    assert model.distribution([2, 1]).tolist() == [1.0, 0.0, 0.0]
    probs, category = forecast_baseline(model, [0, 1, 2])
    assert category == 0
    assert probs.tolist() == [1.0, 0.0, 0.0]


def test_markov_unseen_state_falls_back_to_marginal():
    series = OrdinalSeries.from_codes([0, 1, 2] * 20)
    model = fit_markov(series, 2)
    assert model.distribution([0, 0]) == pytest.approx([1 / 3, 1 / 3, 1 / 3])


def test_markov_ties_go_to_the_lower_code():
    model = fit_markov(OrdinalSeries.from_codes([0, 1, 0, 0]), 1)
    probs, category = forecast_baseline(model, [1, 0])
    assert probs.tolist() == [0.5, 0.5]
    assert category == 0


def test_parameter_counts():
    scheme = CategoryScheme.ordinal(5)
    series = OrdinalSeries.from_codes(np.arange(200) % 5, scheme)
    assert fit_markov(series, 2).parameter_count == 100
    assert fit_mtd(series, 2).parameter_count == 21
    assert fit_par(series, 2).parameter_count == 6


def test_order_validation():
    series = OrdinalSeries.from_codes([0, 1, 0])
    with pytest.raises(ValueError):
        fit_markov(series, 0)
    with pytest.raises(ValueError):
        fit_mtd(series, 3)
    with pytest.raises(ValueError):
        fit_baseline("arima", series, 1)
    with pytest.raises(ValueError):
        forecast_baseline(fit_markov(series, 2), [1])


# ---------------------------------------------------------------------------
# MTD
# ---------------------------------------------------------------------------


def test_mtd_order_one_is_markov_order_one(random_series):
    markov = fit_markov(random_series, 1)
    mtd = fit_mtd(random_series, 1)
    assert mtd.weights.tolist() == [1.0]
    for code in range(4):
        assert mtd.distribution([code]) == pytest.approx(markov.distribution([code]))

    start = random_series.start + timedelta(days=400)
    from_markov = forecast_baseline_window(markov, random_series, start, None)
    from_mtd = forecast_baseline_window(mtd, random_series, start, None)
    assert from_mtd.predicted.tolist() == from_markov.predicted.tolist()
    assert from_mtd.probabilities == pytest.approx(from_markov.probabilities)


def test_mtd_estimates_stay_on_simplices(random_series):
    model = fit_mtd(random_series, 3)
    assert model.weights.sum() == pytest.approx(1.0)
    assert np.all(model.weights >= 0)
    assert model.transition.sum(axis=1) == pytest.approx(np.ones(4))
    assert model.distribution([0, 1, 2]).sum() == pytest.approx(1.0)


def test_mtd_improves_on_its_starting_point():
    series = _mtd_series(3000, (0.2, 0.8), [[0.9, 0.1], [0.1, 0.9]], seed=4)
    model = fit_mtd(series, 2)

    rows = np.column_stack([series.codes[2:], series.codes[1:-1], series.codes[:-2]])
    start = transition_matrix(series).probabilities
    start_ll = np.log(0.5 * start[rows[:, 1], rows[:, 0]] + 0.5 * start[rows[:, 2], rows[:, 0]]).sum()
    assert model.log_likelihood >= start_ll
    assert model.weights[1] > 0.5


def test_mtd_recovers_lag_weights_from_a_long_series():
    Q = [[0.9, 0.1], [0.1, 0.9]]
    series = _mtd_series(10000, (0.2, 0.8), Q, seed=10)
    model = fit_mtd(series, 2)
    assert model.weights == pytest.approx([0.2, 0.8], abs=0.1)
    assert model.transition == pytest.approx(np.asarray(Q), abs=0.05)


# ---------------------------------------------------------------------------
# PAR
# ---------------------------------------------------------------------------


def test_par_distribution_formula():
    model = ParModel(1, np.array([0.9]), np.array([0.5, 0.3, 0.2]))
    probs, category = forecast_baseline(model, [0, 2])
    assert probs == pytest.approx([0.05, 0.03, 0.92])
    assert category == 2
    assert model.marginal.tolist() == [0.5, 0.3, 0.2]


def test_par_recovers_persistence():
    rng = np.random.default_rng(8)
    marginal = np.array([0.5, 0.3, 0.2])
    codes = [0]
    for _ in range(4000):
        codes.append(codes[-1] if rng.random() < 0.6 else int(rng.choice(3, p=marginal)))
    model = fit_par(OrdinalSeries.from_codes(codes), 1)
    assert model.weights[0] == pytest.approx(0.6, abs=0.05)
    assert model.at_boundary == (False,)


def test_par_flags_boundary_estimates():
    dates = np.concatenate(
        [np.array(["2024-01-01"], dtype="datetime64[D]"), np.datetime64("2024-01-03") + np.arange(20)]
    )
    series = OrdinalSeries(dates, [1] + [0] * 20, CategoryScheme.ordinal(2))
    model = fit_par(series, 1)
    assert model.weights[0] == pytest.approx(PAR_UPPER, abs=1e-5)
    assert model.at_boundary == (True,)


def test_par_needs_two_observed_categories():
    series = OrdinalSeries.from_codes([0] * 10, CategoryScheme.ordinal(2))
    with pytest.raises(ValueError):
        fit_par(series, 1)


def test_par_higher_order_weights_are_feasible(random_series):
    model = fit_par(random_series, 3)
    assert np.all(model.weights >= 1e-6)
    assert model.weights.sum() < 1.0
    assert np.isfinite(model.log_likelihood)


# ---------------------------------------------------------------------------
# Forecast windows and persistence
# ---------------------------------------------------------------------------


def test_forecast_baseline_window_skips_days_after_gaps():
    dates = np.array(
        ["2024-01-01", "2024-01-02", "2024-01-03", "2024-01-05", "2024-01-06"], dtype="datetime64[D]"
    )
    series = OrdinalSeries(dates, [0, 1, 0, 1, 1], CategoryScheme.ordinal(2))
    model = fit_markov(series, 1)
    result = forecast_baseline_window(model, series, date(2024, 1, 2), None)
    assert [str(d) for d in result.dates] == ["2024-01-02", "2024-01-03", "2024-01-06"]
    assert result.observed.tolist() == [1, 0, 1]
    assert result.probabilities[0] == pytest.approx(model.distribution([0]))


@pytest.mark.parametrize("kind", ["markov", "mtd", "par"])
def test_baseline_save_and_load(kind, random_series, tmp_path):
    model = fit_baseline(kind, random_series, 2)
    restored = load_baseline(save_baseline(model, tmp_path / f"{kind}.json"))
    assert type(restored) is type(model)
    assert restored.kind == kind
    for lags in ([0, 1], [3, 3], [2, 0]):
        assert restored.distribution(lags) == pytest.approx(model.distribution(lags))


def test_load_baseline_rejects_other_documents(tmp_path):
    path = tmp_path / "other.json"
    path.write_text('{"name": "tsolr"}\n')
    with pytest.raises(ValueError):
        load_baseline(path)


def test_model_types_are_distinct():
    assert {MarkovModel.kind, MtdModel.kind, ParModel.kind} == {"markov", "mtd", "par"}
