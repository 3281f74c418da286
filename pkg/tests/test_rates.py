import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dampwave.rates import (
    TimeSeries,
    certify_bound,
    fit_loglog,
    gap_respecting_window,
    tail_trend_to_zero,
)

T = np.geomspace(10, 200, 30)


def test_fit_exact_power_law():
    fit = fit_loglog(TimeSeries(T, 1 / T))
    assert fit.slope == pytest.approx(-1.0, abs=1e-12)
    assert fit.residual <= 1e-12
    fit = fit_loglog(TimeSeries(T, 3 * T**-1.25))
    assert fit.slope == pytest.approx(-1.25, abs=1e-12)
    assert fit.intercept == pytest.approx(np.log(3), abs=1e-10)


def test_fit_log_contamination():
    # local slope of log(t)/t is -1 + 1/log t, about -0.73 on [10, 200]
    fit = fit_loglog(TimeSeries(T, np.log(T) / T))
    x = np.log(T)
    oracle = np.polyfit(x, np.log(x) - x, 1)[0]
    assert fit.slope == pytest.approx(oracle, abs=1e-12)
    assert -1 < fit.slope < -0.7


def test_fit_needs_samples_and_positive_values():
    with pytest.raises(ValueError, match="samples"):
        fit_loglog(TimeSeries(T[:5], T[:5]))
    v = 1 / T
    v[-1] = 0
    with pytest.raises(ValueError, match="non-positive"):
        fit_loglog(TimeSeries(T, v))


def test_certify_examples():
    c = certify_bound(TimeSeries(T, T**-2.0), 1.0)
    assert c.holds and c.argsup == T[0]
    assert np.all(np.diff(c.running_sup) == 0)
    c = certify_bound(TimeSeries(T, 1 / T), 1.0)
    assert c.holds and c.sup_value == pytest.approx(1.0)
    c = certify_bound(TimeSeries(T, T**-0.5), 1.0)
    assert not c.holds


def test_certify_modifiers():
    s = TimeSeries(T, np.log(T) / T)
    assert certify_bound(s, 1.0, "log").sup_value == pytest.approx(1.0)
    assert certify_bound(TimeSeries(T, 1 / (1 + T)), 1.0, "shifted").sup_value == pytest.approx(1.0)
    with pytest.raises(ValueError):
        certify_bound(s, 1.0, "bogus")
    with pytest.raises(ValueError):
        certify_bound(TimeSeries(np.linspace(0.5, 2, 5), np.ones(5)), 1.0, "log")


def test_tail_trend():
    assert tail_trend_to_zero(TimeSeries(T, T**-1.25), 1.0).decreasing
    assert not tail_trend_to_zero(TimeSeries(T, 1 / T), 1.0).decreasing


def test_gap_window():
    assert gap_respecting_window(10, 200, 1e-4) == (10.0, 200.0)
    assert gap_respecting_window(10, 200, 1e-3) == (10.0, 100.0)
    with pytest.raises(ValueError):
        gap_respecting_window(10, 200, 0.1)


def test_series_validation():
    with pytest.raises(ValueError):
        TimeSeries([1.0, 1.0], [1.0, 2.0])
    with pytest.raises(ValueError):
        TimeSeries([1.0, 2.0], [1.0, np.nan])


@given(
    st.lists(st.floats(1e-6, 1e3), min_size=10, max_size=30),
    st.floats(0.0, 3.0),
    st.floats(0.0, 3.0),
)
def test_certificate_monotone_in_exponent(vals, p, dp):
    t = np.geomspace(1.5, 300, len(vals))
    s = TimeSeries(t, np.array(vals))
    if certify_bound(s, p + dp).holds:
        assert certify_bound(s, p).holds


@given(st.lists(st.floats(1e-6, 1e3), min_size=10, max_size=30))
def test_verdicts_deterministic(vals):
    t = np.geomspace(1.5, 300, len(vals))
    s = TimeSeries(t, np.array(vals))
    assert certify_bound(s, 1.0) == certify_bound(s, 1.0)
    assert tail_trend_to_zero(s, 1.0) == tail_trend_to_zero(s, 1.0)
