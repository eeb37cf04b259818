"""Tests for ordinal series, AQI encoding and descriptive statistics."""

from __future__ import annotations

from datetime import date

import numpy as np
import pytest

from seasolr.calendar import CalendarConfig
from seasolr.errors import InvalidSeriesError, MissingFestivalDateError
from seasolr.series import (
    CategoryScheme,
    OrdinalSeries,
    category_distribution_by,
    decode_codes,
    encode_series,
    frequency_distribution,
    lagged_codes,
    month_category_intensity,
    rate_evolution,
    transition_matrix,
)


def _days(start: str, n: int) -> np.ndarray:
    return np.datetime64(start, "D") + np.arange(n)


# ---------------------------------------------------------------------------
# Category schemes and encoding
# ---------------------------------------------------------------------------


@pytest.mark.parametrize(
    "value, code",
    [(0, 0), (50, 0), (51, 1), (100, 1), (101, 2), (200, 2), (300, 3), (400, 4), (401, 5), (450, 5)],
)
def test_encode_series_uses_inclusive_upper_cutoffs(value, code):
    series = encode_series(_days("2024-01-01", 1), [value], CategoryScheme.aqi())
    assert series.codes.tolist() == [code]


def test_encode_series_rejects_negative_and_non_finite_values():
    with pytest.raises(InvalidSeriesError) as info:
        encode_series(_days("2024-01-01", 4), [10, -1, 30, np.nan], CategoryScheme.aqi())
    assert info.value.rows == [1, 3]


@pytest.mark.parametrize("scheme", [CategoryScheme.aqi(), CategoryScheme.ordinal(4)])
def test_decode_then_encode_is_identity_on_codes(scheme):
    codes = np.arange(scheme.n_categories)
    values = decode_codes(codes, scheme)
    encoded = encode_series(_days("2024-01-01", codes.size), values, scheme)
    assert encoded.codes.tolist() == codes.tolist()


def test_category_scheme_validation():
    with pytest.raises(ValueError):
        CategoryScheme(("a",), (float("inf"),))
    with pytest.raises(ValueError):
        CategoryScheme(("a", "b"), (10.0, 5.0))
    with pytest.raises(ValueError):
        CategoryScheme(("a", "b"), (10.0, 20.0))


def test_category_scheme_dict_omits_open_bound():
    scheme = CategoryScheme.aqi()
    data = scheme.to_dict()
    assert data["bounds"] == [50.0, 100.0, 200.0, 300.0, 400.0]
    assert CategoryScheme.from_dict(data) == scheme


# ---------------------------------------------------------------------------
# OrdinalSeries invariants
# ---------------------------------------------------------------------------


def test_series_rejects_unsorted_dates_with_rows():
    dates = np.array(["2024-01-02", "2024-01-01"], dtype="datetime64[D]")
    with pytest.raises(InvalidSeriesError) as info:
        OrdinalSeries(dates, [0, 1], CategoryScheme.aqi())
    assert info.value.rows == [1]


def test_series_rejects_out_of_range_codes():
    with pytest.raises(InvalidSeriesError) as info:
        OrdinalSeries(_days("2024-01-01", 3), [0, 6, 2], CategoryScheme.aqi())
    assert info.value.rows == [1]


def test_series_rejects_empty_input():
    with pytest.raises(InvalidSeriesError):
        OrdinalSeries(_days("2024-01-01", 0), [], CategoryScheme.aqi())


def test_series_does_not_alias_caller_arrays():
    codes = np.array([0, 1, 2])
    series = OrdinalSeries(_days("2024-01-01", 3), codes, CategoryScheme.aqi())
    codes[0] = 5
    assert series.codes[0] == 0
    with pytest.raises(ValueError):
        series.codes[0] = 1


def test_series_flags_gaps():
    dates = np.array(["2024-01-01", "2024-01-02", "2024-01-05", "2024-01-06"], dtype="datetime64[D]")
    series = OrdinalSeries(dates, [0, 1, 1, 2], CategoryScheme.aqi())
    assert series.gap_days() == 2
    assert series.gap_positions() == [2]
    assert series.calendar_codes().tolist() == [0, 1, -1, -1, 1, 2]


def test_series_window_and_dict_round_trip():
    series = OrdinalSeries.from_codes([0, 1, 2, 1, 0], start=date(2023, 12, 30))
    window = series.window(date(2024, 1, 1), None)
    assert window.start == date(2024, 1, 1)
    assert window.codes.tolist() == [2, 1, 0]
    restored = OrdinalSeries.from_dict(series.to_dict())
    assert restored.codes.tolist() == series.codes.tolist()
    assert restored.date_list() == series.date_list()
    with pytest.raises(ValueError):
        series.window(date(2025, 1, 1), None)


# ---------------------------------------------------------------------------
# Descriptive statistics
# ---------------------------------------------------------------------------


def test_frequency_distribution_counts_and_proportions():
    table = frequency_distribution(OrdinalSeries.from_codes([0, 0, 1]))
    assert table.counts.tolist() == [2, 1]
    assert table.proportions == pytest.approx([2 / 3, 1 / 3])


def test_frequency_distribution_constant_series():
    series = OrdinalSeries.from_codes([2] * 7, CategoryScheme.ordinal(4))
    assert frequency_distribution(series).proportions.tolist() == [0, 0, 1, 0]


def test_transition_matrix_hand_enumeration():
    tm = transition_matrix(OrdinalSeries.from_codes([0, 0, 1, 1]), lag=1)
    assert tm.probabilities.tolist() == [[0.5, 0.5], [0.0, 1.0]]
    assert tm.counts.tolist() == [[1, 1], [0, 1]]
    assert tm.empty_rows == ()


def test_transition_matrix_alternating_cycle_is_permutation():
    tm = transition_matrix(OrdinalSeries.from_codes([0, 1] * 10))
    assert tm.probabilities.tolist() == [[0.0, 1.0], [1.0, 0.0]]


def test_transition_matrix_flags_unsupported_rows():
    series = OrdinalSeries.from_codes([0, 0, 1], CategoryScheme.ordinal(3))
    tm = transition_matrix(series)
    assert tm.empty_rows == (1, 2)
    assert tm.probabilities[2].tolist() == [0.0, 0.0, 0.0]
    populated = tm.probabilities[0]
    assert populated.sum() == pytest.approx(1.0, abs=1e-12)


def test_transition_matrix_does_not_bridge_gaps():
    dates = np.array(["2024-01-01", "2024-01-02", "2024-01-04"], dtype="datetime64[D]")
    series = OrdinalSeries(dates, [0, 1, 0], CategoryScheme.ordinal(2))
    assert transition_matrix(series).counts.sum() == 1


def test_transition_matrix_rejects_bad_lags():
    series = OrdinalSeries.from_codes([0, 1, 0])
    with pytest.raises(ValueError):
        transition_matrix(series, lag=0)
    with pytest.raises(ValueError):
        transition_matrix(series, lag=3)


def test_lagged_codes_alignment():
    rows = lagged_codes(OrdinalSeries.from_codes([0, 1, 2, 3], CategoryScheme.ordinal(4)), [1, 2])
    assert rows.tolist() == [[2, 1, 0], [3, 2, 1]]


def test_month_category_intensity_single_day():
    series = OrdinalSeries(np.array(["2024-01-15"], dtype="datetime64[D]"), [3], CategoryScheme.aqi())
    table = month_category_intensity(series)
    assert table[0, 3] == 1
    assert table.sum() == 1


def test_month_category_intensity_normalized_rows_sum_to_100():
    rng = np.random.default_rng(3)
    series = OrdinalSeries.from_codes(rng.integers(0, 6, 400), CategoryScheme.aqi(), start=date(2023, 3, 1))
    raw = month_category_intensity(series)
    pct = month_category_intensity(series, normalize=True)
    observed = raw.sum(axis=1) > 0
    assert pct[observed].sum(axis=1) == pytest.approx(np.full(observed.sum(), 100.0), abs=1e-9)
    days_per_month = np.bincount(series.dates.astype("datetime64[M]").astype(int) % 12, minlength=12)
    assert raw.sum(axis=1).tolist() == days_per_month.tolist()


def test_rate_evolution_paths():
    series = OrdinalSeries.from_codes([1, 1, 0])
    paths = rate_evolution(series)
    assert paths[:, 1].tolist() == [1, 2, 2]
    assert paths[-1].tolist() == frequency_distribution(series).counts.tolist()
    assert paths[-1].sum() == len(series)


# ---------------------------------------------------------------------------
# Calendar groupings
# ---------------------------------------------------------------------------


def test_category_distribution_by_daytype_and_season():
    # 2024-01-06 is a Saturday
    series = OrdinalSeries.from_codes([0, 1, 2, 3], CategoryScheme.aqi(), start=date(2024, 1, 5))
    daytype = category_distribution_by(series, "daytype")
    assert daytype.groups == ("weekday", "weekend")
    assert daytype.counts[0].tolist() == [1, 0, 0, 1, 0, 0]
    assert daytype.counts[1].tolist() == [0, 1, 1, 0, 0, 0]
    season = category_distribution_by(series, "season")
    assert season.counts[season.groups.index("winter")].sum() == 4
    assert season.percentages[season.groups.index("winter")].sum() == pytest.approx(100.0)


def test_category_distribution_by_festival_phase():
    calendar = CalendarConfig(festivals={2023: date(2023, 11, 12)})
    series = OrdinalSeries.from_codes([1] * 60, CategoryScheme.aqi(), start=date(2023, 10, 15))
    grouped = category_distribution_by(series, "festival_phase", calendar)
    assert grouped.groups == ("pre", "festival", "post")
    assert grouped.counts[:, 1].tolist() == [15, 15, 15]


def test_category_distribution_by_rejects_unknown_grouping():
    with pytest.raises(ValueError):
        category_distribution_by(OrdinalSeries.from_codes([0, 1]), "quarter")


def test_calendar_validation_and_lookup():
    with pytest.raises(ValueError):
        CalendarConfig(seasons={"all": list(range(1, 12))}, baseline_season="all")
    with pytest.raises(ValueError):
        CalendarConfig(baseline_season="spring")
    calendar = CalendarConfig(festivals={2024: date(2024, 10, 31)})
    assert calendar.season_of(date(2024, 7, 1)) == "monsoon"
    assert calendar.non_baseline_seasons() == ["summer", "monsoon", "winter"]
    assert calendar.in_festival_window(date(2024, 11, 7))
    assert not calendar.in_festival_window(date(2024, 11, 8))
    with pytest.raises(MissingFestivalDateError) as info:
        calendar.in_festival_window(date(2023, 11, 1))
    assert info.value.year == 2023
