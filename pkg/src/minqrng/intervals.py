"""Time tags -> waiting-time samples -> symbols of a 4-letter alphabet."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, ContractViolation, EmptyInputError

DEFAULT_CUTOFF = 10  # ticks; 160 ns at the 16 ns clock
M = 4

# Reflected code over 8 consecutive tick values: 0 1 2 3 3 2 1 0.
REFLECTED = np.array([0, 1, 2, 3, 3, 2, 1, 0], dtype=np.uint8)


@dataclass(frozen=True)
class FilterConfig:
    cutoff_ticks: int = DEFAULT_CUTOFF

    def __post_init__(self):
        if self.cutoff_ticks < 0:
            raise ConfigurationError(f"cutoff_ticks must be >= 0, got {self.cutoff_ticks}")


def intervals(tags) -> np.ndarray:
    tags = np.asarray(getattr(tags, "tags", tags), dtype=np.uint64)
    if tags.size < 2:
        return np.zeros(0, dtype=np.int64)
    return np.diff(tags).astype(np.int64)


def filter_intervals(seq, cfg: FilterConfig = FilterConfig()) -> np.ndarray:
    """Drop samples shorter than the cutoff; neighbours are kept as they are."""
    seq = np.asarray(seq, dtype=np.int64)
    return seq[seq >= cfg.cutoff_ticks]


def map_symbol(ticks: int, cutoff_ticks: int = DEFAULT_CUTOFF) -> int:
    if ticks < cutoff_ticks:
        raise ContractViolation(f"interval {ticks} below cutoff {cutoff_ticks}; filter first")
    return int(REFLECTED[(ticks - cutoff_ticks) % 8])


def map_symbols(seq, cutoff_ticks: int = DEFAULT_CUTOFF) -> np.ndarray:
    seq = np.asarray(seq, dtype=np.int64)
    if seq.size and seq.min() < cutoff_ticks:
        raise ContractViolation(f"intervals below cutoff {cutoff_ticks}; filter first")
    return REFLECTED[(seq - cutoff_ticks) % 8]


def map_symbols_modulo(seq) -> np.ndarray:
    """Plain ``ticks mod 4`` mapping, kept as the baseline the reflected code improves on."""
    return (np.asarray(seq, dtype=np.int64) % M).astype(np.uint8)


@dataclass(frozen=True)
class SymbolStats:
    counts: np.ndarray
    frequencies: np.ndarray
    chi_square: float
    entropy: float  # bits per symbol


def symbol_stats(symbols, alphabet: int = M) -> SymbolStats:
    symbols = np.asarray(symbols)
    if symbols.size == 0:
        raise EmptyInputError("symbol_stats needs at least one symbol")
    counts = np.bincount(symbols.astype(np.int64), minlength=alphabet)[:alphabet]
    freq = counts / symbols.size
    expected = symbols.size / alphabet
    chi2 = float(((counts - expected) ** 2 / expected).sum())
    nz = freq[freq > 0]
    entropy = float(-(nz * np.log2(nz)).sum()) + 0.0
    return SymbolStats(counts, freq, chi2, entropy)


def symbol_distribution(rate_per_tick: float, cutoff_ticks: int = DEFAULT_CUTOFF, scheme: str = "reflected") -> np.ndarray:
    """Exact letter probabilities for geometric intervals beyond the cutoff.

    Above the cutoff, P(ticks = cutoff + j) is proportional to q**j with
    q = exp(-rate_per_tick). Summing over one period of the code (8 for
    reflected, 4 for modulo) gives each letter's share.
    """
    q = np.exp(-rate_per_tick)
    if scheme == "reflected":
        period = 8
        letter = REFLECTED
    elif scheme == "modulo":
        period = M
        letter = (cutoff_ticks + np.arange(period)) % M
    else:
        raise ConfigurationError(f"unknown mapping scheme {scheme!r}")
    weights = q ** np.arange(period) * (1 - q) / (1 - q**period)
    probs = np.zeros(M)
    np.add.at(probs, letter, weights)
    return probs


def total_variation_from_uniform(probs) -> float:
    probs = np.asarray(probs, dtype=float)
    return 0.5 * float(np.abs(probs - 1 / probs.size).sum())
