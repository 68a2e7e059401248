import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from minqrng.control import (
    FeedbackConfig,
    LoopTrace,
    commanded_drift,
    feedback_step,
    fit_time_constant,
    simulate_loop,
    step_disturbance,
)
from minqrng.errors import ConfigurationError, FitError

CFG = FeedbackConfig()


@given(st.floats(0.01, 100.0))
def test_no_error_no_change(current):
    assert feedback_step(CFG.target_rate, current, CFG) == current


def test_step_direction_and_size():
    up = feedback_step(1.1e6, 10.0, CFG)
    down = feedback_step(1.3e6, 10.0, CFG)
    assert up > 10.0 > down
    assert up - 10.0 == pytest.approx((0.1 / 16) * 1e5 / 1.2e5)
    assert feedback_step(1e12, 1.0, CFG) == 0.0
    with pytest.raises(ConfigurationError):
        feedback_step(-1.0, 1.0, CFG)


def test_config_validation():
    with pytest.raises(ConfigurationError):
        FeedbackConfig(time_constant=0)
    with pytest.raises(ConfigurationError):
        FeedbackConfig(update_period=3.0)
    with pytest.raises(ConfigurationError):
        FeedbackConfig(k_led=-1)


def test_closed_loop_matches_discrete_first_order():
    # with the nominal gain the error shrinks by (1 - dt/T) each update
    trace = simulate_loop(CFG, 20.0, initial_current=5.0)
    err = CFG.target_rate - trace.measured_rate
    assert np.allclose(err[1:] / err[:-1], 1 - 0.1 / 16)


def step_trace(rng=None, duration=200.0):
    return simulate_loop(CFG, duration, k_true=step_disturbance(CFG.k_led, 10.0, 0.9), rng=rng)


def test_step_response_time_constant():
    tau = fit_time_constant(step_trace(), CFG.target_rate, t0=10.0)
    # effective loop gain 0.9 slows the response to 16 / 0.9 s
    assert tau == pytest.approx(16 / 0.9, rel=0.02)
    assert abs(tau - 16) <= 0.25 * 16


def test_step_response_with_counting_noise():
    trace = step_trace(np.random.default_rng(1))
    tau = fit_time_constant(trace, CFG.target_rate, t0=10.0)
    assert abs(tau - 16) <= 0.25 * 16


def test_settles_within_one_percent():
    trace = step_trace()
    late = trace.time_s >= 10.0 + 5 * 16 / 0.9
    assert np.all(np.abs(trace.measured_rate[late] - CFG.target_rate) / CFG.target_rate < 0.01)


def test_cold_start_does_not_overshoot():
    trace = simulate_loop(CFG, 200.0, initial_current=0.0)
    assert trace.measured_rate.max() <= 1.05 * CFG.target_rate
    noisy = simulate_loop(CFG, 200.0, initial_current=0.0, rng=np.random.default_rng(2))
    assert noisy.measured_rate.max() <= 1.05 * CFG.target_rate


def test_commanded_drift_small():
    trace = step_trace(np.random.default_rng(3))
    assert commanded_drift(trace, CFG.k_led) < 0.07
    assert commanded_drift(simulate_loop(CFG, 20.0), CFG.k_led) == 0.0


def test_fit_errors():
    flat = simulate_loop(CFG, 10.0)
    with pytest.raises(FitError):
        fit_time_constant(flat, CFG.target_rate)
    with pytest.raises(FitError):
        fit_time_constant(flat, CFG.target_rate, t0=100.0)


def test_trace_csv():
    trace = LoopTrace(np.array([0.0, 0.1]), np.array([1.2e6, 1.1e6]), np.array([10.0, 10.5]))
    assert trace.to_csv().splitlines() == [
        "time_s,measured_rate,commanded_current",
        "0,1.2e+06,10",
        "0.1,1.1e+06,10.5",
    ]
