"""Exact extraction efficiency of the block Elias extractor.

Nothing is sampled: every pattern class is enumerated and weighted by its
exact probability, so uniform-input results are exact rationals.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from ..elias import block_sizes, class_share, multinomial, pattern_classes
from ..errors import ConfigurationError


def expected_bits_per_class(P: int) -> Fraction:
    """Mean output length over the P equiprobable members of a class."""
    if P < 1:
        raise ConfigurationError(f"class size must be >= 1, got {P}")
    return Fraction(sum(j << j for j in block_sizes(P)), P)


@dataclass(frozen=True)
class EfficiencyPoint:
    M: int
    N: int
    buffer_bits: int
    exact: Fraction | None  # None when p was given as floats
    bits_per_symbol: float


def buffer_bits(M: int, N: int) -> int:
    return N * math.ceil(math.log2(M))


def _compositions(n: int, parts: int):
    if parts == 1:
        yield (n,)
        return
    for first in range(n + 1):
        for rest in _compositions(n - first, parts - 1):
            yield (first,) + rest


def _check_distribution(p, M):
    if len(p) != M:
        raise ConfigurationError(f"distribution has {len(p)} entries, alphabet has {M}")
    if any(x < 0 for x in p):
        raise ConfigurationError("probabilities must be non-negative")
    total = sum(p)
    exact = all(isinstance(x, (int, Fraction)) for x in p)
    if (exact and total != 1) or (not exact and abs(total - 1) > 1e-9):
        raise ConfigurationError(f"probabilities sum to {total}, not 1")
    return exact


def class_probabilities(M: int, N: int) -> dict[tuple[int, ...], Fraction]:
    """Exact probability of each pattern class for uniform letters."""
    return {c.multiplicities: class_share(c, M) for c in pattern_classes(M, N)}


def efficiency(M: int, N: int, p: Sequence | None = None) -> EfficiencyPoint:
    """Expected output bits per input symbol for i.i.d. letters with law ``p``."""
    if M < 1 or N < 1:
        raise ConfigurationError(f"need M >= 1 and N >= 1, got M={M}, N={N}")
    if p is None:
        total = sum(
            class_share(c, M) * expected_bits_per_class(c.permutation_count) for c in pattern_classes(M, N)
        )
        value = Fraction(total) / N
        return EfficiencyPoint(M, N, buffer_bits(M, N), value, float(value))

    exact = _check_distribution(p, M)
    p = [Fraction(x) for x in p] if exact else [float(x) for x in p]
    total = Fraction(0) if exact else 0.0
    # letter-count vectors: each carries P = multinomial(counts) equiprobable words
    for counts in _compositions(N, M):
        P = multinomial(counts)
        prob = P
        for pi, c in zip(p, counts):
            prob *= pi**c
        if prob:
            bits = expected_bits_per_class(P)
            total += prob * (bits if exact else float(bits))
    value = total / N
    return EfficiencyPoint(M, N, buffer_bits(M, N), value if exact else None, float(value))


def entropy_bits(p: Sequence) -> float:
    return -sum(float(x) * math.log2(float(x)) for x in p if x > 0)


def efficiency_curve(alphabets: Sequence[int] = (2, 4, 8, 16), max_buffer_bits: int = 40) -> list[EfficiencyPoint]:
    points = []
    for M in alphabets:
        if M < 2 or M & (M - 1):
            raise ConfigurationError(f"alphabet sizes must be powers of two, got {M}")
        width = M.bit_length() - 1
        for N in range(1, max_buffer_bits // width + 1):
            points.append(efficiency(M, N))
    return points


def best_at_buffer(points: Sequence[EfficiencyPoint], b: int) -> EfficiencyPoint:
    """Highest-yield alphabet among points with exactly ``b`` buffer bits."""
    candidates = [pt for pt in points if pt.buffer_bits == b]
    if not candidates:
        raise ConfigurationError(f"no curve point at b={b}")
    return max(candidates, key=lambda pt: pt.bits_per_symbol)


def curve_csv(points: Sequence[EfficiencyPoint]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["M", "N", "b", "bits_per_symbol"])
    for pt in points:
        writer.writerow([pt.M, pt.N, pt.buffer_bits, f"{pt.bits_per_symbol:.12f}"])
    return buf.getvalue()


__all__ = [
    "EfficiencyPoint",
    "best_at_buffer",
    "buffer_bits",
    "class_probabilities",
    "curve_csv",
    "efficiency",
    "efficiency_curve",
    "entropy_bits",
    "expected_bits_per_class",
]

