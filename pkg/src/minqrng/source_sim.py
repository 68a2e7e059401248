"""Synthetic single-photon detector click streams.

Photon arrivals are a homogeneous Poisson process. The detector keeps an
arrival with probability ``1 - exp(-gap / recovery_tau)``, where ``gap`` is
measured from the last *kept* click. Dark counts are an independent Poisson
process merged afterwards, and the result is time-tagged on a 16 ns clock.

Randomness comes from numpy's PCG64 generator. Each stage gets its own
child stream spawned from ``SeedSequence(rng_seed)``, so the output is a
pure function of the configuration.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._io import atomic_write
from .errors import ConfigurationError, FormatError

CLOCK_PERIOD_NS = 16.0

DEVICE_RATE = 1.2e6
DEVICE_DARK_RATE = 200.0
DEVICE_TAU_NS = 40.0
DEVICE_WINDOW_NS = 150.0


@dataclass(frozen=True)
class SourceConfig:
    mean_rate: float = DEVICE_RATE
    duration: float = 1.0
    dark_rate: float = DEVICE_DARK_RATE
    rng_seed: int = 0

    def __post_init__(self):
        if not (self.mean_rate > 0 and math.isfinite(self.mean_rate)):
            raise ConfigurationError(f"mean_rate must be positive, got {self.mean_rate}")
        if not self.dark_rate >= 0:
            raise ConfigurationError(f"dark_rate must be non-negative, got {self.dark_rate}")
        if not (self.duration >= 0 and math.isfinite(self.duration)):
            raise ConfigurationError(f"duration must be non-negative, got {self.duration}")
        if not 0 <= self.rng_seed < 2**64:
            raise ConfigurationError("rng_seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class DetectorModel:
    recovery_tau: float = DEVICE_TAU_NS  # ns
    affected_window: float = DEVICE_WINDOW_NS  # ns, informational

    def __post_init__(self):
        if not self.recovery_tau >= 0:
            raise ConfigurationError(f"recovery_tau must be non-negative, got {self.recovery_tau}")
        if not self.affected_window >= self.recovery_tau:
            raise ConfigurationError("affected_window must be at least recovery_tau")


@dataclass(frozen=True)
class TimeTagStream:
    tags: np.ndarray  # uint64 ticks, strictly increasing
    clock_period: float = CLOCK_PERIOD_NS

    def __len__(self):
        return self.tags.size


def _rng_streams(seed: int) -> list[np.random.Generator]:
    """Independent generators for arrivals, detector decisions, dark counts."""
    children = np.random.SeedSequence(seed).spawn(3)
    return [np.random.Generator(np.random.PCG64(s)) for s in children]


def poisson_times(rate: float, duration: float, rng: np.random.Generator) -> np.ndarray:
    """Arrival times on [0, duration) from inverse-CDF exponential gaps."""
    if not rate > 0:
        raise ConfigurationError(f"rate must be positive, got {rate}")
    if duration <= 0:
        return np.zeros(0)
    expected = rate * duration
    chunk = int(expected + 6 * math.sqrt(expected) + 16)
    pieces = []
    t0 = 0.0
    while True:
        u = rng.random(chunk)
        times = t0 + np.cumsum(-np.log1p(-u) / rate)
        pieces.append(times)
        if times[-1] >= duration:
            break
        t0 = times[-1]
        chunk = max(chunk // 4, 1024)
    times = np.concatenate(pieces)
    return times[times < duration]


def generate_ideal_arrivals(cfg: SourceConfig, rng: np.random.Generator | None = None) -> np.ndarray:
    if rng is None:
        rng = _rng_streams(cfg.rng_seed)[0]
    return poisson_times(cfg.mean_rate, cfg.duration, rng)


def acceptance_probability(gap_ns, recovery_tau: float):
    gap_ns = np.asarray(gap_ns, dtype=float)
    if recovery_tau == 0:
        return np.ones_like(gap_ns)
    return -np.expm1(-gap_ns / recovery_tau)


def apply_detector(arrivals, model: DetectorModel, rng: np.random.Generator) -> np.ndarray:
    """Thin ``arrivals`` (seconds) with memory of the last accepted click.

    Whether arrival i is kept depends only on decisions for arrivals < i,
    so the sequential rule has exactly one fixed point. Starting from
    "keep everything" and re-evaluating all decisions against the latest
    kept click reaches it; each pass fixes at least one more leading
    decision, and in practice rejection chains are a few arrivals long.
    """
    arrivals = np.asarray(arrivals, dtype=float)
    if arrivals.size == 0 or model.recovery_tau == 0:
        return arrivals.copy()
    u = rng.random(arrivals.size)
    idx = np.arange(arrivals.size)
    keep = np.ones(arrivals.size, dtype=bool)
    for _ in range(arrivals.size + 1):
        last_kept = np.maximum.accumulate(np.where(keep, idx, -1))
        prev = np.empty(arrivals.size, dtype=np.int64)
        prev[0] = -1
        prev[1:] = last_kept[:-1]
        gap_ns = (arrivals - arrivals[np.maximum(prev, 0)]) * 1e9
        new = u < acceptance_probability(gap_ns, model.recovery_tau)
        new[prev < 0] = True
        if np.array_equal(new, keep):
            break
        keep = new
    return arrivals[keep]


def add_dark_counts(clicks, dark_rate: float, rng: np.random.Generator, duration: float) -> np.ndarray:
    clicks = np.asarray(clicks, dtype=float)
    if dark_rate == 0 or duration <= 0:
        return clicks.copy()
    dark = poisson_times(dark_rate, duration, rng)
    return np.sort(np.concatenate([clicks, dark]), kind="stable")


def discretize(clicks, clock_period: float = CLOCK_PERIOD_NS) -> TimeTagStream:
    """Floor times (seconds) to clock ticks and merge coincident ticks."""
    clicks = np.asarray(clicks, dtype=float)
    # round away float noise like 48e-9 / 16e-9 = 2.9999999999999996
    ticks = np.floor(np.round(clicks / (clock_period * 1e-9), 6)).astype(np.uint64)
    if ticks.size:
        ticks = ticks[np.concatenate([[True], ticks[1:] != ticks[:-1]])]
    return TimeTagStream(ticks, clock_period)


def simulate_clicks(cfg: SourceConfig, model: DetectorModel | None = None) -> np.ndarray:
    """Detector click times in seconds, before time tagging."""
    arrival_rng, detector_rng, dark_rng = _rng_streams(cfg.rng_seed)
    clicks = generate_ideal_arrivals(cfg, arrival_rng)
    if model is not None:
        clicks = apply_detector(clicks, model, detector_rng)
    return add_dark_counts(clicks, cfg.dark_rate, dark_rng, cfg.duration)


def simulate_tags(cfg: SourceConfig, model: DetectorModel | None = None) -> TimeTagStream:
    return discretize(simulate_clicks(cfg, model))


def write_tags(stream: TimeTagStream, path, fmt: str = "bin") -> None:
    if fmt == "bin":
        payload = stream.tags.astype("<u8").tobytes()
    elif fmt == "text":
        payload = "".join(f"{int(t)}\n" for t in stream.tags).encode()
    else:
        raise ConfigurationError(f"unknown tag format {fmt!r}")
    atomic_write(path, [payload])


def read_tags(path, fmt: str = "bin") -> TimeTagStream:
    data = Path(path).read_bytes()
    if fmt == "bin":
        if len(data) % 8:
            raise FormatError(
                f"length {len(data)} is not a multiple of 8", path=path, offset=len(data) - len(data) % 8
            )
        tags = np.frombuffer(data, dtype="<u8").astype(np.uint64)
        step = 8
    elif fmt == "text":
        values, offsets, pos = [], [], 0
        for line in data.splitlines(keepends=True):
            text = line.strip()
            if text:
                try:
                    values.append(int(text))
                except ValueError:
                    raise FormatError(f"not an integer tag: {text[:20]!r}", path=path, offset=pos) from None
                if not 0 <= values[-1] < 2**64:
                    raise FormatError("tag out of 64-bit range", path=path, offset=pos)
                offsets.append(pos)
            pos += len(line)
        tags = np.array(values, dtype=np.uint64)
        step = None
    else:
        raise ConfigurationError(f"unknown tag format {fmt!r}")
    if tags.size > 1:
        bad = np.flatnonzero(tags[1:] <= tags[:-1])
        if bad.size:
            i = int(bad[0]) + 1
            offset = i * step if step else offsets[i]
            raise FormatError("tags are not strictly increasing", path=path, offset=offset)
    return TimeTagStream(tags)
