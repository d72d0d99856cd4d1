"""Partitions, tableaux, RSK insertion and exact shape counting.

Counts are Python integers throughout, so ``k**N`` never overflows; conversion to
floating point is left to callers at comparison time.
"""

from __future__ import annotations

import csv
import io
import math
import operator
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

from .errors import InputError


@dataclass(frozen=True)
class Partition:
    """Weakly decreasing non-negative parts; trailing zeros are dropped.

    ``k_bound`` records an optional maximum number of parts. It does not take
    part in equality or hashing, so ``Partition((2, 1, 0)) == Partition((2, 1))``.
    """

    parts: tuple[int, ...]
    k_bound: int | None = field(default=None, compare=False)

    def __post_init__(self):
        parts = tuple(int(p) for p in self.parts)
        if any(p < 0 for p in parts):
            raise InputError(f"negative part in {parts}")
        if any(parts[i] < parts[i + 1] for i in range(len(parts) - 1)):
            raise InputError(f"parts not weakly decreasing: {parts}")
        while parts and parts[-1] == 0:
            parts = parts[:-1]
        if self.k_bound is not None and len(parts) > self.k_bound:
            raise InputError(f"{parts} has more than {self.k_bound} parts")
        object.__setattr__(self, "parts", parts)

    @property
    def size(self) -> int:
        return sum(self.parts)

    def __len__(self) -> int:
        return len(self.parts)

    def __iter__(self) -> Iterator[int]:
        return iter(self.parts)

    def __getitem__(self, i: int) -> int:
        # parts past the end are zero
        return self.parts[i] if i < len(self.parts) else 0

    def padded(self, k: int) -> tuple[int, ...]:
        if len(self.parts) > k:
            raise InputError(f"{self.parts} has more than {k} parts")
        return self.parts + (0,) * (k - len(self.parts))

    def conjugate(self) -> Partition:
        if not self.parts:
            return Partition(())
        return Partition(tuple(sum(1 for p in self.parts if p > j) for j in range(self.parts[0])))

    def dotted(self, k: int | None = None) -> str:
        """Dot-separated parts, e.g. ``"3.1.0"`` when padded to three parts."""
        parts = self.padded(k) if k is not None else self.parts
        return ".".join(str(p) for p in parts)

    @classmethod
    def from_dotted(cls, text: str) -> Partition:
        text = text.strip()
        if not text:
            return cls(())
        try:
            return cls(tuple(int(t) for t in text.split(".")))
        except ValueError as exc:
            raise InputError(f"bad shape {text!r}") from exc

    def __repr__(self) -> str:
        return f"Partition({self.parts})"


@dataclass(frozen=True)
class CenteredShape:
    """A shape with the mean part subtracted, stored as integers over ``k``.

    Component ``a`` equals ``numerators[a] / denominator``.
    """

    numerators: tuple[int, ...]
    denominator: int

    def __post_init__(self):
        if sum(self.numerators) != 0:
            raise InputError("centered shape must sum to zero")

    @property
    def k(self) -> int:
        return len(self.numerators)

    def fractions(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(n, self.denominator) for n in self.numerators)

    def floats(self) -> tuple[float, ...]:
        return tuple(n / self.denominator for n in self.numerators)

    def norm2(self) -> Fraction:
        """Exact squared Euclidean norm."""
        return Fraction(sum(n * n for n in self.numerators), self.denominator**2)


@dataclass(frozen=True)
class TableauPair:
    """Insertion tableau ``P`` and recording tableau ``Q`` as tuples of rows."""

    P: tuple[tuple[int, ...], ...]
    Q: tuple[tuple[int, ...], ...]

    @property
    def shape(self) -> Partition:
        return Partition(tuple(len(row) for row in self.P))


@dataclass(frozen=True)
class ExactDist:
    """Exact word counts per shape for words of length ``N`` over ``k`` letters."""

    k: int
    N: int
    counts: dict[Partition, int]

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def probabilities(self) -> dict[Partition, float]:
        denom = self.k**self.N
        return {lam: c / denom for lam, c in self.counts.items()}

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["shape", "count"])
        for lam in sorted(self.counts, key=lambda p: p.padded(self.k), reverse=True):
            writer.writerow([lam.dotted(self.k), str(self.counts[lam])])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, k: int, N: int) -> ExactDist:
        rows = [line for line in text.splitlines() if line and not line.startswith("#")]
        reader = csv.DictReader(rows)
        if reader.fieldnames != ["shape", "count"]:
            raise InputError(f"expected header shape,count, got {reader.fieldnames}")
        return cls(k, N, {Partition.from_dotted(r["shape"]): int(r["count"]) for r in reader})


def _check_word(word: Sequence[int], k: int | None) -> tuple[int, ...]:
    try:
        w = tuple(operator.index(x) for x in word)
    except TypeError as exc:
        raise InputError("letters must be integers") from exc
    for letter in w:
        if letter < 1 or (k is not None and letter > k):
            raise InputError(f"letter {letter!r} outside 1..{k if k is not None else 'k'}")
    return w


def rsk_row_insert(word: Sequence[int], k: int | None = None) -> TableauPair:
    """Row-insert ``word`` left to right and return the tableau pair."""
    w = _check_word(word, k)
    P: list[list[int]] = []
    Q: list[list[int]] = []
    for t, x in enumerate(w, start=1):
        row = 0
        while True:
            if row == len(P):
                P.append([x])
                Q.append([t])
                break
            r = P[row]
            # bump the leftmost entry strictly greater than x
            j = bisect_right(r, x)
            if j == len(r):
                r.append(x)
                Q[row].append(t)
                break
            x, r[j] = r[j], x
            row += 1
    return TableauPair(tuple(map(tuple, P)), tuple(map(tuple, Q)))


def rsk_shape_column(word: Sequence[int], k: int | None = None) -> Partition:
    """Shape produced by column-inserting ``word`` left to right.

    Column insertion bumps the smallest entry not less than the inserted letter,
    which keeps columns strict and rows weak. The resulting shape equals the
    row-insertion shape of the reversed word.
    """
    w = _check_word(word, k)
    cols: list[list[int]] = []
    for x in w:
        c = 0
        while True:
            if c == len(cols):
                cols.append([x])
                break
            col = cols[c]
            j = bisect_left(col, x)
            if j == len(col):
                col.append(x)
                break
            x, col[j] = col[j], x
            c += 1
    return Partition(tuple(len(col) for col in cols)).conjugate()


def longest_weakly_increasing(word: Sequence[int]) -> int:
    """Length of the longest weakly increasing subsequence, by patience sorting."""
    tails: list[int] = []
    for x in word:
        j = bisect_right(tails, x)
        if j == len(tails):
            tails.append(x)
        else:
            tails[j] = x
    return len(tails)


def f_hook(shape: Partition | Sequence[int]) -> int:
    """Number of standard tableaux of ``shape`` via the hook-length formula."""
    lam = shape if isinstance(shape, Partition) else Partition(tuple(shape))
    conj = lam.conjugate()
    hooks = 1
    for i, row in enumerate(lam.parts):
        for j in range(row):
            hooks *= (row - j - 1) + (conj[j] - i - 1) + 1
    return math.factorial(lam.size) // hooks


def d_weyl(shape: Partition | Sequence[int], k: int) -> int:
    """Dimension of the irreducible su(k) representation with highest weight ``shape``.

    Evaluates the product over pairs ``a < b`` of ``(l_a - l_b + b - a) / (b - a)``.
    """
    lam = shape if isinstance(shape, Partition) else Partition(tuple(shape))
    if len(lam) > k:
        raise InputError(f"{lam.parts} has more than {k} parts")
    p = lam.padded(k)
    num = den = 1
    for a in range(k):
        for b in range(a + 1, k):
            num *= p[a] - p[b] + b - a
            den *= b - a
    return num // den


def enumerate_partitions(N: int, max_parts: int) -> list[Partition]:
    """All partitions of ``N`` into at most ``max_parts`` parts, lexicographically descending."""
    if N < 0:
        raise InputError("N must be non-negative")

    def rec(n: int, slots: int, cap: int) -> Iterator[tuple[int, ...]]:
        if slots == 0:
            if n == 0:
                yield ()
            return
        for p in range(min(n, cap), -1, -1):
            if p * slots < n:
                break
            for rest in rec(n - p, slots - 1, p):
                yield (p,) + rest

    if max_parts <= 0:
        return [Partition(())] if N == 0 else []
    return [Partition(parts, k_bound=max_parts) for parts in rec(N, max_parts, N)]


def exact_shape_distribution(k: int, N: int) -> ExactDist:
    """Number of words in ``[k]^N`` with each RSK shape, as ``f_lambda * d_lambda``."""
    if k < 1 or N < 0:
        raise InputError("need k >= 1 and N >= 0")
    return ExactDist(k, N, {lam: f_hook(lam) * d_weyl(lam, k) for lam in enumerate_partitions(N, k)})


def center(shape: Partition | Sequence[int], k: int, N: int) -> CenteredShape:
    lam = shape if isinstance(shape, Partition) else Partition(tuple(shape))
    if lam.size != N:
        raise InputError(f"shape {lam.parts} does not sum to {N}")
    return CenteredShape(tuple(k * p - N for p in lam.padded(k)), k)


def shape_histogram(words: Iterable[Sequence[int]], k: int | None = None) -> dict[Partition, int]:
    """Histogram of row-insertion shapes over ``words``."""
    hist: dict[Partition, int] = {}
    for w in words:
        lam = rsk_row_insert(w, k).shape
        hist[lam] = hist.get(lam, 0) + 1
    return hist
