"""Count-rate stabilization by slow integral control of the LED current.

The plant is linear: click rate = k_led * current. The controller only
knows a nominal ``k_led`` and integrates the rate error, which gives a
first-order closed-loop response with time constant ``time_constant``
when the nominal gain is right (and ``time_constant * k_nominal / k_true``
when it is not).
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import curve_fit

from .errors import ConfigurationError, FitError

DEVICE_TIME_CONSTANT = 16.0  # s
ACCEPTED_FRACTION = 1.0 / 1.2  # filter keeps ~1.0 of every 1.2 clicks


@dataclass(frozen=True)
class FeedbackConfig:
    target_rate: float = 1.2e6
    time_constant: float = DEVICE_TIME_CONSTANT
    update_period: float = 0.1
    k_led: float = 1.2e5  # clicks/s per microampere; ~10 uA at the target

    def __post_init__(self):
        if not self.time_constant > 0:
            raise ConfigurationError("time_constant must be positive")
        if not 0 < self.update_period <= self.time_constant / 8:
            raise ConfigurationError("update_period must be in (0, time_constant / 8]")
        if not (self.target_rate > 0 and self.k_led > 0):
            raise ConfigurationError("target_rate and k_led must be positive")


def feedback_step(measured_rate: float, current: float, cfg: FeedbackConfig) -> float:
    if measured_rate < 0:
        raise ConfigurationError("measured rate cannot be negative")
    current += (cfg.update_period / cfg.time_constant) * (cfg.target_rate - measured_rate) / cfg.k_led
    return max(current, 0.0)


@dataclass(frozen=True)
class LoopTrace:
    time_s: np.ndarray
    measured_rate: np.ndarray
    commanded_current: np.ndarray

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["time_s", "measured_rate", "commanded_current"])
        for t, r, c in zip(self.time_s, self.measured_rate, self.commanded_current):
            writer.writerow([f"{t:.6g}", f"{r:.6g}", f"{c:.9g}"])
        return buf.getvalue()


def simulate_loop(
    cfg: FeedbackConfig,
    duration: float,
    k_true: Callable[[float], float] | float | None = None,
    initial_current: float | None = None,
    rng: np.random.Generator | None = None,
) -> LoopTrace:
    """Run the loop for ``duration`` seconds.

    ``k_true`` is the plant gain, constant or a function of time (for step
    disturbances); it defaults to the controller's nominal gain. With an
    ``rng`` the rate is measured as Poisson counts over one update period.
    ``initial_current`` defaults to the equilibrium for the nominal gain.
    """
    if k_true is None:
        k_true = cfg.k_led
    gain = k_true if callable(k_true) else (lambda t, k=k_true: k)
    current = cfg.target_rate / cfg.k_led if initial_current is None else initial_current
    steps = int(round(duration / cfg.update_period))
    times = np.arange(steps) * cfg.update_period
    measured = np.empty(steps)
    commanded = np.empty(steps)
    for i, t in enumerate(times):
        rate = gain(t) * current
        if rng is not None:
            rate = rng.poisson(rate * cfg.update_period) / cfg.update_period
        measured[i] = rate
        commanded[i] = current
        current = feedback_step(rate, current, cfg)
    return LoopTrace(times, measured, commanded)


def step_disturbance(k_nominal: float, at: float, factor: float) -> Callable[[float], float]:
    return lambda t: k_nominal * (factor if t >= at else 1.0)


def fit_time_constant(trace: LoopTrace, target: float, t0: float = 0.0) -> float:
    """Fit rate(t) = target - A * exp(-(t - t0) / T) to the trace after ``t0``."""
    sel = trace.time_s >= t0
    t = trace.time_s[sel] - t0
    y = trace.measured_rate[sel]
    if t.size < 3:
        raise FitError("too few samples after the disturbance")
    a0 = target - y[0]
    if a0 == 0:
        raise FitError("no deviation from target to fit")

    def model(t, amp, tau):
        return target - amp * np.exp(-t / tau)

    span = max(t[-1], 1e-9)
    (amp, tau), _ = curve_fit(model, t, y, p0=(a0, span / 4), maxfev=10_000)
    if not (tau > 0 and math.isfinite(tau)):
        raise FitError(f"fit returned invalid time constant {tau}")
    return float(tau)


def commanded_drift(
    trace: LoopTrace,
    k_led: float,
    window_counts: int = 1 << 20,
    accepted_fraction: float = ACCEPTED_FRACTION,
) -> float:
    """Largest relative change of the commanded rate within any window of accepted counts."""
    dt = np.diff(trace.time_s, append=trace.time_s[-1] + (trace.time_s[1] - trace.time_s[0]))
    counts = np.concatenate([[0.0], np.cumsum(trace.measured_rate * dt * accepted_fraction)])
    rate = k_led * trace.commanded_current
    worst = 0.0
    end = 0
    for i in range(rate.size):
        # steps i .. end-1 accumulate at least window_counts
        while end <= rate.size and counts[end] - counts[i] < window_counts:
            end += 1
        if end > rate.size:
            break
        if rate[i] > 0:
            worst = max(worst, float(np.abs(rate[i:end] - rate[i]).max() / rate[i]))
    return worst
