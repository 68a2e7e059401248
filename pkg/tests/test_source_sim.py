import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from minqrng import source_sim as ss
from minqrng.analysis.histogram import deficit_time_constant, waiting_time_histogram
from minqrng.errors import ConfigurationError, FormatError
from minqrng.intervals import intervals


def test_config_validation():
    with pytest.raises(ConfigurationError):
        ss.SourceConfig(mean_rate=0)
    with pytest.raises(ConfigurationError):
        ss.SourceConfig(mean_rate=-1.0)
    with pytest.raises(ConfigurationError):
        ss.SourceConfig(duration=-1)
    with pytest.raises(ConfigurationError):
        ss.SourceConfig(dark_rate=-1)
    with pytest.raises(ConfigurationError):
        ss.DetectorModel(recovery_tau=40, affected_window=10)


def test_zero_duration_is_empty():
    assert ss.generate_ideal_arrivals(ss.SourceConfig(duration=0.0)).size == 0
    assert len(ss.simulate_tags(ss.SourceConfig(duration=0.0), ss.DetectorModel())) == 0


def test_ideal_gaps_mean_and_ks():
    cfg = ss.SourceConfig(mean_rate=1.2e6, duration=1.0, rng_seed=11)
    t = ss.generate_ideal_arrivals(cfg)
    assert t.min() >= 0 and t.max() < 1.0 and np.all(np.diff(t) > 0)
    gaps = np.diff(t)
    mean_ns = gaps.mean() * 1e9
    se_ns = gaps.std() / math.sqrt(gaps.size) * 1e9
    assert abs(mean_ns - 1e9 / 1.2e6) < 3 * se_ns
    assert abs(t.size - 1.2e6) < 3 * math.sqrt(1.2e6)
    assert stats.kstest(gaps, "expon", args=(0, 1 / 1.2e6)).pvalue > 0.01


def test_determinism():
    cfg = ss.SourceConfig(duration=0.05, rng_seed=42)
    a = ss.simulate_tags(cfg, ss.DetectorModel())
    b = ss.simulate_tags(cfg, ss.DetectorModel())
    c = ss.simulate_tags(ss.SourceConfig(duration=0.05, rng_seed=43), ss.DetectorModel())
    assert a.tags.tobytes() == b.tags.tobytes()
    assert a.tags.tobytes() != c.tags.tobytes()


def test_superposition_of_poisson_streams():
    rng = np.random.default_rng(5)
    a = ss.poisson_times(3e5, 1.0, rng)
    b = ss.poisson_times(7e5, 1.0, rng)
    merged = np.sort(np.concatenate([a, b]))
    assert stats.kstest(np.diff(merged), "expon", args=(0, 1 / 1e6)).pvalue > 0.01


def test_detector_identity_when_tau_zero(rng):
    t = ss.poisson_times(1e6, 0.01, rng)
    out = ss.apply_detector(t, ss.DetectorModel(0.0, 0.0), rng)
    assert np.array_equal(out, t)
    assert ss.apply_detector(np.zeros(0), ss.DetectorModel(), rng).size == 0


def test_acceptance_probability_shape():
    assert ss.acceptance_probability(0.0, 40.0) == 0.0
    assert ss.acceptance_probability(1e-6, 40.0) < 1e-7
    assert ss.acceptance_probability(40.0, 40.0) == pytest.approx(1 - math.exp(-1))
    assert ss.acceptance_probability(1e4, 40.0) == 1.0


def sequential_detector(arrivals, tau_ns, u):
    """Straight loop version of the thinning rule, for cross-checking."""
    kept = []
    last = None
    for t, ui in zip(arrivals, u):
        if last is None or ui < -math.expm1(-(t - last) * 1e9 / tau_ns):
            kept.append(t)
            last = t
    return np.array(kept)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32), st.floats(5.0, 400.0))
def test_vectorized_thinning_matches_loop(seed, tau):
    rng = np.random.default_rng(seed)
    t = ss.poisson_times(5e6, 2e-4, rng)
    u_rng = np.random.default_rng(seed + 1)
    out = ss.apply_detector(t, ss.DetectorModel(tau, tau), u_rng)
    u = np.random.default_rng(seed + 1).random(t.size)
    assert np.array_equal(out, sequential_detector(t, tau, u))


def test_thinning_is_memoryless_beyond_window():
    rng = np.random.default_rng(8)
    t = ss.poisson_times(1.2e6, 1.0, rng)
    out = ss.apply_detector(t, ss.DetectorModel(40.0, 150.0), rng)
    gaps_ns = np.diff(out) * 1e9
    tail = gaps_ns[gaps_ns > 400.0] - 400.0
    assert stats.kstest(tail, "expon", args=(0, 1e9 / 1.2e6)).pvalue > 0.01


def test_detector_deficit_decays_with_tau(device_stream):
    fit = waiting_time_histogram(intervals(device_stream))
    tau = deficit_time_constant(fit)
    assert 32.0 <= tau <= 48.0  # 40 ns +- 20%
    assert fit.deviation_boundary <= 150.0 + 16


def test_dark_counts():
    rng = np.random.default_rng(3)
    clicks = np.array([0.1, 0.2])
    assert np.array_equal(ss.add_dark_counts(clicks, 0.0, rng, 1.0), clicks)
    dark = ss.add_dark_counts(np.zeros(0), 200.0, rng, 10.0)
    assert abs(dark.size - 2000) < 3 * math.sqrt(2000)
    signal = ss.poisson_times(1.2e6, 1.0, rng)
    merged = ss.add_dark_counts(signal, 200.0, rng, 1.0)
    assert np.all(np.diff(merged) >= 0)
    assert abs(merged.size - 1.2002e6) < 3 * math.sqrt(1.2002e6)


@pytest.mark.parametrize(
    "times_ns, ticks",
    [([833], [52]), ([10, 12], [0]), ([0, 16, 33], [0, 1, 2]), ([47.9, 48, 63.99], [2, 3]), ([], [])],
)
def test_discretize(times_ns, ticks):
    out = ss.discretize(np.array(times_ns, dtype=float) * 1e-9)
    assert out.tags.tolist() == ticks
    assert out.tags.dtype == np.uint64


def test_stream_is_strictly_increasing(device_stream):
    assert np.all(np.diff(device_stream.tags.astype(np.int64)) > 0)


@pytest.mark.parametrize("fmt", ["bin", "text"])
def test_tag_file_round_trip(tmp_path, fmt):
    stream = ss.simulate_tags(ss.SourceConfig(duration=0.01, rng_seed=1), ss.DetectorModel())
    path = tmp_path / f"tags.{fmt}"
    ss.write_tags(stream, path, fmt)
    if fmt == "bin":
        assert path.stat().st_size == 8 * len(stream)
        assert int.from_bytes(path.read_bytes()[:8], "little") == int(stream.tags[0])
    assert np.array_equal(ss.read_tags(path, fmt).tags, stream.tags)


def test_tag_file_errors_carry_offsets(tmp_path):
    path = tmp_path / "bad.bin"
    path.write_bytes(np.array([1, 5, 5], dtype="<u8").tobytes())
    with pytest.raises(FormatError) as err:
        ss.read_tags(path)
    assert err.value.offset == 16
    path.write_bytes(b"\x00" * 13)
    with pytest.raises(FormatError) as err:
        ss.read_tags(path)
    assert err.value.offset == 8
    text = tmp_path / "bad.txt"
    text.write_text("1\n2\nxx\n")
    with pytest.raises(FormatError) as err:
        ss.read_tags(text, "text")
    assert err.value.offset == 4
