"""Precomputed extraction table and table-driven streaming extraction.

A word of N symbols (log2(M) bits each, first symbol in the most
significant bits) is used directly as a table address. Each 16-bit entry
holds the word's output bits behind a single leading 1:
``coded = (1 << k) | bits``, so ``k`` is recovered from the highest set bit.

The table is built with a vectorized rank/assign pass over all addresses.
It deliberately does not call :mod:`minqrng.elias`, which serves as the
independent scalar reference in the tests.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from ._io import atomic_write
from .errors import CapacityError, ConfigurationError, ContractViolation, CorruptTableError

MAGIC = b"QRNGLUT1"
VERSION = 1
HEADER_SIZE = 16
# 1: coded = (1 << k) | bits, bits MSB-first; addresses first-symbol-in-MSBs.
CODING_LEFT_PAD_ONE = 1

MAX_BITS = 14
DEVICE_M = 4
DEVICE_N = 10

_BIT_LENGTH = np.array([v.bit_length() for v in range(1 << 16)], dtype=np.int8)


def symbol_width(M: int) -> int:
    if M < 2 or M & (M - 1):
        raise ConfigurationError(f"alphabet size must be a power of two >= 2, got {M}")
    return M.bit_length() - 1


def address_of(word: Sequence[int], M: int = DEVICE_M) -> int:
    w = symbol_width(M)
    addr = 0
    for s in word:
        if not 0 <= s < M:
            raise ContractViolation(f"symbol {s} outside alphabet of size {M}")
        addr = (addr << w) | s
    return addr


def word_of(address: int, M: int = DEVICE_M, N: int = DEVICE_N) -> tuple[int, ...]:
    w = symbol_width(M)
    mask = M - 1
    return tuple((address >> (w * (N - 1 - i))) & mask for i in range(N))


def encode_entry(bits: Sequence[int]) -> int:
    k = len(bits)
    if k > MAX_BITS:
        raise CapacityError(f"{k} output bits do not fit a 16-bit entry (max {MAX_BITS})")
    value = 0
    for b in bits:
        value = (value << 1) | (b & 1)
    return (1 << k) | value


def decode_entry(coded: int) -> tuple[int, ...]:
    if coded <= 0 or coded > 0xFFFF:
        raise CorruptTableError(f"invalid table entry {coded:#06x}")
    k = coded.bit_length() - 1
    return tuple((coded >> (k - 1 - i)) & 1 for i in range(k))


def _build_entries(M: int, N: int) -> np.ndarray:
    w = symbol_width(M)
    if N < 1 or w * N > 24:
        raise ConfigurationError(f"table for M={M}, N={N} needs {w * N} address bits (max 24)")
    if N > 20:
        raise ConfigurationError("word length above 20 overflows 64-bit factorials")
    # the most balanced split of N letters has the largest class
    k = min(M, N)
    balanced = [N // k + (i < N % k) for i in range(k)]
    top = math.factorial(N)
    for c in balanced:
        top //= math.factorial(c)
    if top.bit_length() - 1 > MAX_BITS:
        raise CapacityError(f"M={M}, N={N} produces up to {top.bit_length() - 1} bits per word (max {MAX_BITS})")

    addresses = np.arange(1 << (w * N), dtype=np.int64)
    symbols = np.empty((addresses.size, N), dtype=np.int64)
    for i in range(N):
        symbols[:, i] = (addresses >> (w * (N - 1 - i))) & (M - 1)

    rows = np.arange(addresses.size)
    counts = np.zeros((addresses.size, M), dtype=np.int64)
    for i in range(N):
        counts[rows, symbols[:, i]] += 1

    fact = np.array([math.factorial(n) for n in range(N + 1)], dtype=np.int64)
    # multinomial of the remaining letters; stays <= P throughout the scan
    total = np.full(addresses.size, fact[N], dtype=np.int64)
    for a in range(M):
        total //= fact[counts[:, a]]
    perm = total.copy()

    rank = np.zeros(addresses.size, dtype=np.int64)
    n = N
    for i in range(N):
        s = symbols[:, i]
        smaller = np.cumsum(counts, axis=1)[rows, s] - counts[rows, s]
        rank += total * smaller // n
        total = total * counts[rows, s] // n
        counts[rows, s] -= 1
        n -= 1

    top = int(perm.max()).bit_length() - 1

    entries = np.zeros(addresses.size, dtype=np.int64)
    start = np.zeros(addresses.size, dtype=np.int64)
    pending = np.ones(addresses.size, dtype=bool)
    for a in range(top, -1, -1):
        has_block = ((perm >> a) & 1).astype(bool)
        hit = pending & has_block & (rank < start + (1 << a))
        entries[hit] = (1 << a) | (rank[hit] - start[hit])
        pending &= ~hit
        start += np.where(has_block, 1 << a, 0)
    assert not pending.any()
    return entries.astype(np.uint16)


@dataclass(frozen=True, eq=False)
class ExtractionTable:
    M: int
    N: int
    entries: np.ndarray = field(repr=False)
    coding: int = CODING_LEFT_PAD_ONE

    def __post_init__(self):
        if self.entries.dtype != np.uint16 or self.entries.shape != (self.M ** self.N,):
            raise CorruptTableError(
                f"expected {self.M ** self.N} uint16 entries, got {self.entries.dtype} {self.entries.shape}"
            )
        self.entries.setflags(write=False)

    def __eq__(self, other):
        if not isinstance(other, ExtractionTable):
            return NotImplemented
        return (self.M, self.N, self.coding) == (other.M, other.N, other.coding) and np.array_equal(
            self.entries, other.entries
        )

    def payload(self) -> bytes:
        return self.entries.astype("<u2").tobytes()

    def checksum(self) -> str:
        return hashlib.sha256(self.payload()).hexdigest()

    def lookup(self, word: Sequence[int]) -> tuple[int, ...]:
        return decode_entry(int(self.entries[address_of(word, self.M)]))


def build_table(M: int = DEVICE_M, N: int = DEVICE_N) -> ExtractionTable:
    return ExtractionTable(M, N, _build_entries(M, N))


def _header(table: ExtractionTable) -> bytes:
    return MAGIC + bytes([VERSION, table.M, table.N, table.coding]) + bytes(4)


def write_table(table: ExtractionTable, path, raw: bool = False) -> None:
    """Write the table file; ``raw=True`` writes only the 2-byte entries (flash image)."""
    chunks = [table.payload()] if raw else [_header(table), table.payload()]
    atomic_write(path, chunks)


def read_table(path, M: int | None = None, N: int | None = None) -> ExtractionTable:
    data = Path(path).read_bytes()
    if len(data) < HEADER_SIZE:
        raise CorruptTableError(f"{path}: file too short for a table header ({len(data)} bytes)")
    if data[:8] != MAGIC:
        raise CorruptTableError(f"{path}: bad magic {data[:8]!r}")
    version, m, n, coding = data[8:12]
    if version != VERSION:
        raise CorruptTableError(f"{path}: unsupported table version {version}")
    if coding != CODING_LEFT_PAD_ONE:
        raise CorruptTableError(f"{path}: unknown coding id {coding}")
    if data[12:16] != bytes(4):
        raise CorruptTableError(f"{path}: reserved header bytes are not zero")
    if (M is not None and M != m) or (N is not None and N != n):
        raise ConfigurationError(f"{path}: table is for M={m}, N={n}; requested M={M}, N={N}")
    expected = HEADER_SIZE + 2 * m ** n
    if len(data) != expected:
        raise CorruptTableError(f"{path}: expected {expected} bytes, found {len(data)}")
    entries = np.frombuffer(data, dtype="<u2", offset=HEADER_SIZE).astype(np.uint16)
    if (entries == 0).any():
        first = int(np.flatnonzero(entries == 0)[0])
        raise CorruptTableError(f"{path}: zero entry at address {first:#x}")
    return ExtractionTable(m, n, entries, coding)


def words_to_addresses(symbols: np.ndarray, M: int, N: int) -> np.ndarray:
    w = symbol_width(M)
    words = symbols.reshape(-1, N).astype(np.int64)
    shifts = w * np.arange(N - 1, -1, -1, dtype=np.int64)
    return (words << shifts).sum(axis=1)


def decode_entries(entries: np.ndarray, chunk: int = 1 << 18) -> np.ndarray:
    """Concatenate the bit strings held by a run of table entries (uint8 0/1 array)."""
    entries = np.asarray(entries, dtype=np.int32)
    if entries.size and entries.min() <= 0:
        raise CorruptTableError("zero entry encountered during extraction")
    out = []
    j = np.arange(MAX_BITS, dtype=np.int32)
    for lo in range(0, entries.size, chunk):
        e = entries[lo : lo + chunk]
        k = _BIT_LENGTH[e].astype(np.int32) - 1
        shift = k[:, None] - 1 - j
        valid = shift >= 0
        bits = (e[:, None] >> np.maximum(shift, 0)) & 1
        out.append(bits[valid].astype(np.uint8))
    if not out:
        return np.zeros(0, dtype=np.uint8)
    return np.concatenate(out)


def extract_stream(symbols, table: ExtractionTable, M: int | None = None, N: int | None = None):
    """Table-driven extraction over consecutive non-overlapping words.

    Returns ``(bits, residue)``: a uint8 array of output bits in word order
    and the trailing ``len(symbols) % N`` symbols that did not fill a word.
    """
    if (M is not None and M != table.M) or (N is not None and N != table.N):
        raise ConfigurationError(f"table is for M={table.M}, N={table.N}; requested M={M}, N={N}")
    symbols = np.asarray(symbols)
    if symbols.size and (symbols.min() < 0 or symbols.max() >= table.M):
        raise ContractViolation(f"symbols must lie in [0, {table.M})")
    usable = symbols.size - symbols.size % table.N
    addresses = words_to_addresses(symbols[:usable], table.M, table.N)
    bits = decode_entries(table.entries[addresses])
    return bits, symbols[usable:].copy()


class StreamExtractor:
    """Incremental extractor that carries partial words between chunks."""

    def __init__(self, table: ExtractionTable):
        self.table = table
        self.residue = np.zeros(0, dtype=np.uint8)
        self.words = 0
        self.bits_out = 0

    def feed(self, symbols) -> np.ndarray:
        symbols = np.concatenate([self.residue, np.asarray(symbols, dtype=np.uint8)])
        bits, self.residue = extract_stream(symbols, self.table)
        self.words += (symbols.size - self.residue.size) // self.table.N
        self.bits_out += bits.size
        return bits


class BitPacker:
    """Packs a bit stream MSB-first into bytes, holding back any partial byte."""

    def __init__(self):
        self._pending = np.zeros(0, dtype=np.uint8)
        self.nbits = 0

    def feed(self, bits) -> bytes:
        bits = np.concatenate([self._pending, np.asarray(bits, dtype=np.uint8)])
        self.nbits += bits.size - self._pending.size
        whole = bits.size - bits.size % 8
        self._pending = bits[whole:]
        return np.packbits(bits[:whole]).tobytes()

    def flush(self) -> bytes:
        out = np.packbits(self._pending).tobytes()
        self._pending = np.zeros(0, dtype=np.uint8)
        return out


def pack_bits(bits) -> bytes:
    return np.packbits(np.asarray(bits, dtype=np.uint8)).tobytes()


def unpack_bits(data: bytes, nbits: int | None = None) -> np.ndarray:
    bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8))
    return bits if nbits is None else bits[:nbits]
