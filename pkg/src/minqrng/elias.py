"""Extended Elias extractor over fixed-length words of an M-ary alphabet.

All members of a word's permutation class (words sharing the same letter
counts) are equally likely when letters are i.i.d., whatever the letter
probabilities are. Numbering the class members lexicographically and
splitting the class size into power-of-two blocks turns each word into a
variable-length string of unbiased bits.

Integer arithmetic only; nothing here touches floating point.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Iterator, Sequence

from .errors import ContractViolation

Word = Sequence[int]


def parse_word(text: str) -> tuple[int, ...]:
    """'ABBB' -> (0, 1, 1, 1). Letters are A=0, B=1, ..."""
    return tuple(ord(ch) - ord("A") for ch in text.upper())


def letter_counts(word: Word, M: int | None = None) -> list[int]:
    if M is None:
        M = max(word, default=-1) + 1
    counts = [0] * M
    for s in word:
        if not 0 <= s < M:
            raise ContractViolation(f"symbol {s} outside alphabet of size {M}")
        counts[s] += 1
    return counts


def multinomial(counts: Sequence[int]) -> int:
    result = factorial(sum(counts))
    for c in counts:
        result //= factorial(c)
    return result


def perm_count(word: Word) -> int:
    """Number of distinct rearrangements of the word's letters."""
    return multinomial(Counter(word).values())


def lex_rank(word: Word) -> int:
    """Rank of ``word`` among the permutations of its multiset, in dictionary order.

    At each position, every smaller letter still available would have
    started a block of ``multinomial(remaining with that letter removed)``
    lexicographically smaller words. That block size equals
    ``multinomial(remaining) * c_a / n``, which keeps the loop to a single
    running multinomial.
    """
    counts = letter_counts(word)
    n = len(word)
    total = multinomial(counts)
    rank = 0
    for s in word:
        smaller = sum(counts[:s])
        rank += total * smaller // n
        total = total * counts[s] // n
        counts[s] -= 1
        n -= 1
    return rank


def unrank(rank: int, counts: Sequence[int]) -> tuple[int, ...]:
    """Inverse of :func:`lex_rank` for a given letter-count vector."""
    counts = list(counts)
    n = sum(counts)
    total = multinomial(counts)
    if not 0 <= rank < total:
        raise ContractViolation(f"rank {rank} outside [0, {total})")
    out = []
    while n:
        for letter, c in enumerate(counts):
            if c == 0:
                continue
            block = total * c // n
            if rank < block:
                out.append(letter)
                total = block
                counts[letter] -= 1
                n -= 1
                break
            rank -= block
    return tuple(out)


def block_sizes(P: int) -> list[int]:
    """Exponents of the set bits of P, largest first (24 -> [4, 3])."""
    return [j for j in range(P.bit_length() - 1, -1, -1) if P >> j & 1]


def elias_assign(P: int, r: int) -> tuple[int, ...]:
    """Bits emitted for rank ``r`` in a class of ``P`` equiprobable words.

    Ranks are covered by consecutive blocks of sizes 2^a1 > 2^a2 > ...
    (the binary expansion of P); the offset inside the block is written
    MSB-first using a_j bits.
    """
    if not 0 <= r < P:
        raise ContractViolation(f"rank {r} outside [0, {P})")
    start = 0
    for a in block_sizes(P):
        size = 1 << a
        if r < start + size:
            offset = r - start
            return tuple((offset >> (a - 1 - i)) & 1 for i in range(a))
        start += size
    raise AssertionError("unreachable: blocks cover [0, P)")


def extract_word(word: Word) -> tuple[int, ...]:
    return elias_assign(perm_count(word), lex_rank(word))


def von_neumann(pair: Word) -> tuple[int, ...]:
    """The classic two-bit debiasing rule, for comparison with M = N = 2."""
    a, b = pair
    if a == b:
        return ()
    return (a,)


@dataclass(frozen=True)
class PatternClass:
    """Sorted (descending) multiplicity vector of a word."""

    multiplicities: tuple[int, ...]

    def __post_init__(self):
        m = tuple(sorted((c for c in self.multiplicities if c > 0), reverse=True))
        object.__setattr__(self, "multiplicities", m)

    @classmethod
    def of(cls, word: Word) -> "PatternClass":
        return cls(tuple(Counter(word).values()))

    @property
    def N(self) -> int:
        return sum(self.multiplicities)

    @property
    def permutation_count(self) -> int:
        return multinomial(self.multiplicities)

    def letter_assignments(self, M: int) -> int:
        """Ways to pick which letters of an M-ary alphabet carry each multiplicity."""
        k = len(self.multiplicities)
        if k > M:
            return 0
        ways = factorial(M) // factorial(M - k)
        for rep in Counter(self.multiplicities).values():
            ways //= factorial(rep)
        return ways


def class_share(pattern: PatternClass, M: int) -> Fraction:
    """Fraction of all M^N words that fall into ``pattern``."""
    words = pattern.permutation_count * pattern.letter_assignments(M)
    return Fraction(words, M ** pattern.N)


def partitions(n: int, max_parts: int, largest: int | None = None) -> Iterator[tuple[int, ...]]:
    """Integer partitions of n into at most ``max_parts`` parts, parts descending."""
    if largest is None:
        largest = n
    if n == 0:
        yield ()
        return
    if max_parts == 0:
        return
    for first in range(min(n, largest), 0, -1):
        for rest in partitions(n - first, max_parts - 1, first):
            yield (first,) + rest


def pattern_classes(M: int, N: int) -> list[PatternClass]:
    return [PatternClass(p) for p in partitions(N, M)]
