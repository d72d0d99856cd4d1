"""Lattice walks, the reflection principle and the local-limit residual study.

A word of length N is a walk in Z^k taking unit coordinate steps; its endpoint
lies on the affine sublattice ``sum(coords) == N``. Standard tableaux are walks
that stay inside the cone of partitions, counted by an alternating sum over the
symmetric group (the finite difference operator built below).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from itertools import permutations
from typing import Callable, Sequence

import numpy as np

from .errors import InputError, ResourceError
from .shapes import CenteredShape, Partition, exact_shape_distribution

LatticePoint = tuple[int, ...]

# Enumeration budget for corollary_residual, in number of shapes.
MAX_SHAPES = 250_000


def permutation_sign(perm: Sequence[int]) -> int:
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def staircase(k: int) -> LatticePoint:
    """The partition (k-1, k-2, ..., 1, 0)."""
    return tuple(range(k - 1, -1, -1))


@dataclass(frozen=True)
class DifferenceOperator:
    """A finite sum ``Dp(v) = sum_t c_t p(v + v_t)`` with integer offsets."""

    terms: tuple[tuple[int, LatticePoint], ...]

    @property
    def k(self) -> int:
        return len(self.terms[0][1]) if self.terms else 0

    @classmethod
    def shift(cls, offset: LatticePoint, coef: int = 1) -> DifferenceOperator:
        return cls(((coef, tuple(offset)),))

    @classmethod
    def reflection(cls, k: int) -> DifferenceOperator:
        """Alternating sum over S_k with offsets ``delta - sigma(delta)``."""
        delta = staircase(k)
        terms = []
        for perm in permutations(range(k)):
            moved = tuple(delta[perm[i]] for i in range(k))
            terms.append((permutation_sign(perm), tuple(d - m for d, m in zip(delta, moved))))
        return cls(tuple(terms)).simplified()

    @classmethod
    def root_product(cls, k: int) -> DifferenceOperator:
        """Product over positive roots ``e_a - e_b`` (a < b) of ``p(v) - p(v + alpha)``."""
        zero = (0,) * k
        op = cls(((1, zero),))
        for a in range(k):
            for b in range(a + 1, k):
                alpha = tuple(1 if i == a else -1 if i == b else 0 for i in range(k))
                op = op * cls(((1, zero), (-1, alpha)))
        return op

    def __mul__(self, other: DifferenceOperator) -> DifferenceOperator:
        """Composition; translations commute so this is a convolution of terms."""
        terms = [
            (c1 * c2, tuple(x + y for x, y in zip(o1, o2)))
            for c1, o1 in self.terms
            for c2, o2 in other.terms
        ]
        return DifferenceOperator(tuple(terms)).simplified()

    def simplified(self) -> DifferenceOperator:
        acc: dict[LatticePoint, int] = {}
        for c, o in self.terms:
            acc[o] = acc.get(o, 0) + c
        return DifferenceOperator(tuple(sorted((c, o) for o, c in acc.items() if c != 0)))


def apply_difference(D: DifferenceOperator, f: Callable[[tuple], object], point: Sequence) -> object:
    """Evaluate ``sum_t c_t f(point + v_t)``.

    ``point`` may hold ints, floats or symbolic expressions; ``f`` receives a tuple.
    """
    total = 0
    for c, offset in D.terms:
        total = total + c * f(tuple(p + o for p, o in zip(point, offset)))
    return total


def path_count_m(point: Sequence[int], N: int) -> int:
    """Number of unit-step lattice paths from the origin to ``point`` in N steps."""
    if any(c < 0 for c in point) or sum(point) != N:
        return 0
    count = math.factorial(N)
    for c in point:
        count //= math.factorial(c)
    return count


def f_reflection(shape: Partition | Sequence[int], k: int) -> int:
    """Ballot-sequence count of ``shape`` via the reflection principle."""
    lam = shape if isinstance(shape, Partition) else Partition(tuple(shape))
    point = lam.padded(k)
    N = lam.size
    return apply_difference(DifferenceOperator.reflection(k), lambda v: path_count_m(v, N), point)


@dataclass(frozen=True)
class WalkGaussian:
    """Gaussian approximation to the endpoint law of the uniform unit-step walk.

    One step is ``e_a`` with probability 1/k; after centering it has covariance
    ``(I - J/k) / k``, which is ``I/k`` on the sum-zero hyperplane. The endpoint
    lattice there has covolume ``sqrt(k)``.
    """

    k: int
    N: int

    @property
    def covariance(self) -> np.ndarray:
        k = self.k
        return (np.eye(k) - np.ones((k, k)) / k) / k

    @property
    def lattice_det(self) -> float:
        return math.sqrt(self.k)

    def density(self, centered: Sequence[float]) -> float:
        """Probability mass the Gaussian assigns to the lattice point ``centered``."""
        k, N = self.k, self.N
        r2 = sum(x * x for x in centered)
        norm = self.lattice_det * (k / (2 * math.pi * N)) ** ((k - 1) / 2)
        return norm * math.exp(-k * r2 / (2 * N))


def gaussian_density_q(point: CenteredShape | Sequence[float], k: int, N: int) -> float:
    if isinstance(point, CenteredShape):
        coords = point.floats()
    else:
        coords = tuple(point)
    if abs(sum(coords)) > 1e-9 * max(1.0, N):
        raise InputError("point must lie on the sum-zero hyperplane")
    return WalkGaussian(k, N).density(coords)


@dataclass(frozen=True)
class ResidualRecord:
    """Outcome of the least-squares fit behind ``corollary_residual``.

    ``fitted_C`` is the fitted constant made dimensionless: the coefficient of
    ``prod (x_a - x_b)^2 exp(-sum x_a^2)`` per unit hyperplane area in the scaled
    coordinates ``x = sqrt(k / 2N) * centered_shape``. It converges to the
    normalizing constant of the GUE eigenvalue density on the ordered chamber.
    ``raw_C`` is the coefficient in the unscaled fit itself.
    """

    k: int
    N: int
    fitted_C: float
    scaled_sup_residual: float
    raw_C: float
    shifted_scaled_sup_residual: float
    n_shapes: int


def estimated_shape_count(k: int, N: int) -> float:
    if k <= 1:
        return 1.0
    return (N + 1) ** (k - 1) / (math.factorial(k - 1) * math.factorial(k))


def _fit(ys: np.ndarray, gs: np.ndarray) -> tuple[float, float]:
    gg = float(gs @ gs)
    C = float(ys @ gs) / gg if gg > 0 else float(ys[0])
    return C, float(np.max(np.abs(ys - C * gs)))


def corollary_residual(k: int, N: int, max_shapes: int = MAX_SHAPES) -> ResidualRecord:
    """Fit ``k^-N n_lambda ~ C Delta^2 exp(-k |centered|^2 / 2N)`` over all shapes.

    Returns the fitted constant and ``N^(k/2)`` times the sup residual. The
    shifted variant evaluates the same model at ``lambda + delta`` for comparison.
    """
    if k < 1 or N < 1:
        raise InputError("need k >= 1 and N >= 1")
    if estimated_shape_count(k, N) > max_shapes:
        raise ResourceError(f"about {estimated_shape_count(k, N):.0f} shapes at k={k}, N={N} exceeds {max_shapes}")
    dist = exact_shape_distribution(k, N)
    denom = k**N
    delta = staircase(k)
    ys, gs, gs_shift = [], [], []
    for lam, count in dist.counts.items():
        p = lam.padded(k)
        ys.append(count / denom)
        for shift, out in ((False, gs), (True, gs_shift)):
            q = [p[a] + delta[a] for a in range(k)] if shift else list(p)
            mean = sum(q) / k
            vdm = 1
            for a in range(k):
                for b in range(a + 1, k):
                    vdm *= q[a] - q[b]
            out.append(float(vdm) ** 2 * math.exp(-k * sum((x - mean) ** 2 for x in q) / (2 * N)))
    y = np.array(ys)
    C, sup = _fit(y, np.array(gs))
    _, sup_shift = _fit(y, np.array(gs_shift))
    s = k / (2 * N)
    cell = math.sqrt(k) * s ** ((k - 1) / 2)
    fitted = C / (cell * s ** (k * (k - 1) / 2))
    scale = N ** (k / 2)
    return ResidualRecord(k, N, fitted, sup * scale, C, sup_shift * scale, len(ys))


def residual_report_csv(records: Sequence[ResidualRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["N", "k", "fitted_C", "scaled_sup_residual"])
    for r in records:
        writer.writerow([r.N, r.k, repr(r.fitted_C), repr(r.scaled_sup_residual)])
    return buf.getvalue()

