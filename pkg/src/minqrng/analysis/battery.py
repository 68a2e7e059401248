"""A desk-scale subset of the usual frequency/runs/serial/cusum randomness tests."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from ..errors import InsufficientDataError
from .specfun import erfc, igamc, normal_cdf

ALPHA = 0.01
MIN_BITS = 10_000
BLOCK_SIZE = 128


@dataclass(frozen=True)
class TestResult:
    name: str
    statistic: float
    p_value: float
    passed: bool

    __test__ = False  # not a pytest class


def _as_bits(bits) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.ndim != 1:
        raise ValueError("bits must be one-dimensional")
    return bits


def monobit(bits):
    n = bits.size
    s = 2.0 * int(bits.sum(dtype=np.int64)) - n
    s_obs = abs(s) / math.sqrt(n)
    return s_obs, erfc(s_obs / math.sqrt(2))


def block_frequency(bits, block: int = BLOCK_SIZE):
    nblocks = bits.size // block
    if nblocks == 0:
        raise InsufficientDataError(f"need at least {block} bits for block frequency")
    pi = bits[: nblocks * block].reshape(nblocks, block).mean(axis=1)
    chi2 = 4.0 * block * float(((pi - 0.5) ** 2).sum())
    return chi2, igamc(nblocks / 2, chi2 / 2)


def runs(bits):
    n = bits.size
    pi = float(bits.mean())
    if abs(pi - 0.5) >= 2 / math.sqrt(n):
        # frequency prerequisite failed; the runs statistic is meaningless
        return float("nan"), 0.0
    v = 1 + int(np.count_nonzero(bits[1:] != bits[:-1]))
    num = abs(v - 2 * n * pi * (1 - pi))
    den = 2 * math.sqrt(2 * n) * pi * (1 - pi)
    return float(v), erfc(num / den)


def serial_lag(bits, lag: int):
    """Pair-frequency test on (x[i], x[i+lag]) with cyclic wrap.

    psi2 over pairs minus psi2 over single bits is asymptotically
    chi-square with 2 degrees of freedom for i.i.d. fair bits.
    """
    n = bits.size
    ones = int(bits.sum(dtype=np.int64))
    psi1 = 2.0 / n * (ones**2 + (n - ones) ** 2) - n
    pairs = 2 * bits.astype(np.int64) + np.roll(bits, -lag)
    c = np.bincount(pairs, minlength=4).astype(float)
    psi2 = 4.0 / n * float((c**2).sum()) - n
    stat = psi2 - psi1
    return stat, igamc(1.0, stat / 2)


def cumulative_sums(bits, reverse: bool = False):
    n = bits.size
    x = 2 * bits.astype(np.int64) - 1
    if reverse:
        x = x[::-1]
    z = int(np.abs(np.cumsum(x)).max())
    if z == 0:
        return 0.0, 1.0
    rn = math.sqrt(n)
    # terms whose normal-CDF arguments are all beyond +-40 contribute nothing
    span = int(40 * rn / (4 * z)) + 2
    k_lo = max(math.floor((-n / z + 1) / 4), -span)
    k_hi = min(math.floor((n / z - 1) / 4), span)
    total = 1.0
    for k in range(k_lo, k_hi + 1):
        total -= normal_cdf((4 * k + 1) * z / rn) - normal_cdf((4 * k - 1) * z / rn)
    k_lo = max(math.floor((-n / z - 3) / 4), -span)
    for k in range(k_lo, k_hi + 1):
        total += normal_cdf((4 * k + 3) * z / rn) - normal_cdf((4 * k + 1) * z / rn)
    return float(z), min(max(total, 0.0), 1.0)


def randomness_battery(bits, alpha: float = ALPHA) -> list[TestResult]:
    bits = _as_bits(bits)
    if bits.size < MIN_BITS:
        raise InsufficientDataError(f"battery needs at least {MIN_BITS} bits, got {bits.size}")
    tests = [
        ("monobit", monobit(bits)),
        ("block_frequency", block_frequency(bits)),
        ("runs", runs(bits)),
        ("serial_lag1", serial_lag(bits, 1)),
        ("serial_lag2", serial_lag(bits, 2)),
        ("cusum_forward", cumulative_sums(bits)),
        ("cusum_backward", cumulative_sums(bits, reverse=True)),
    ]
    return [TestResult(name, float(stat), float(p), bool(p >= alpha)) for name, (stat, p) in tests]


def all_passed(results) -> bool:
    return all(r.passed for r in results)


def pass_ratios(streams, alpha: float = ALPHA) -> dict[str, float]:
    """Fraction of streams passing each test."""
    tally: dict[str, int] = {}
    count = 0
    for bits in streams:
        count += 1
        for r in randomness_battery(bits, alpha):
            tally[r.name] = tally.get(r.name, 0) + r.passed
    return {name: passed / count for name, passed in tally.items()}


def battery_csv(results) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["test", "statistic", "p_value", "pass"])
    for r in results:
        writer.writerow([r.name, f"{r.statistic:.6g}", f"{r.p_value:.6g}", int(r.passed)])
    return buf.getvalue()
