"""Operators on tensor powers of C^k under the tracial state.

Words in ``[k]^N`` are the standard basis of ``(C^k)^{(x)N}``; the uniform
distribution on words is the normalized trace. Collective operators are sums of
one-site operators over all N sites. They can be held densely or applied
matrix-free, which is what makes N = 12 at k = 2 affordable.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from itertools import combinations, permutations
from typing import Sequence

import numpy as np

from .errors import InputError, ResourceError
from .walks import permutation_sign

DIM_CAP = 4096
# dense matrices beyond this order cost more memory than the sandbox should spend
DENSE_CAP = 2187
_CHUNK = 512


def _dim(k: int, N: int, cap: int) -> int:
    d = k**N
    if d > cap:
        raise ResourceError(f"tensor dimension {k}^{N} = {d} exceeds cap {cap}")
    return d


@dataclass(frozen=True, eq=False)
class OperatorTensor:
    """A linear operator on ``(C^k)^{(x)N}``.

    Either ``matrix`` holds it densely, or ``site`` is a one-site operator and
    the operator is ``scale * sum_t site^(t)``, applied without materializing it.
    """

    k: int
    N: int
    matrix: np.ndarray | None = None
    site: np.ndarray | None = None
    scale: complex = 1.0

    @property
    def dim(self) -> int:
        return self.k**self.N

    @property
    def is_collective(self) -> bool:
        return self.site is not None

    def dense(self) -> np.ndarray:
        if self.matrix is not None:
            return self.matrix if self.scale == 1 else self.scale * self.matrix
        d = _dim(self.k, self.N, DENSE_CAP)
        k, N = self.k, self.N
        out = np.zeros((d, d), dtype=complex)
        for t in range(N):
            out += np.kron(np.kron(np.eye(k**t), self.site), np.eye(k ** (N - t - 1)))
        return self.scale * out

    def apply(self, V: np.ndarray) -> np.ndarray:
        """Return ``X @ V`` for a block of column vectors ``V``."""
        if self.matrix is not None:
            return self.dense() @ V
        k, N = self.k, self.N
        m = V.shape[1]
        T = V.reshape((k,) * N + (m,))
        out = np.zeros_like(T, dtype=complex)
        for t in range(N):
            out += np.moveaxis(np.tensordot(self.site, T, axes=([1], [t])), 0, t)
        return self.scale * out.reshape(self.dim, m)

    def _wrap(self, matrix: np.ndarray) -> OperatorTensor:
        return OperatorTensor(self.k, self.N, matrix=matrix)

    def __matmul__(self, other: OperatorTensor) -> OperatorTensor:
        return self._wrap(self.dense() @ other.dense())

    def __add__(self, other: OperatorTensor) -> OperatorTensor:
        if self.is_collective and other.is_collective and self.scale == other.scale:
            return OperatorTensor(self.k, self.N, site=self.site + other.site, scale=self.scale)
        return self._wrap(self.dense() + other.dense())

    def __sub__(self, other: OperatorTensor) -> OperatorTensor:
        return self + (-1) * other

    def __mul__(self, c: complex) -> OperatorTensor:
        if self.is_collective:
            return OperatorTensor(self.k, self.N, site=self.site, scale=self.scale * c)
        return OperatorTensor(self.k, self.N, matrix=self.matrix, scale=self.scale * c)

    __rmul__ = __mul__

    def adjoint(self) -> OperatorTensor:
        if self.is_collective:
            return OperatorTensor(self.k, self.N, site=self.site.conj().T, scale=np.conj(self.scale))
        return self._wrap(self.dense().conj().T)

    def norm(self) -> float:
        return float(np.linalg.norm(self.dense()))

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        X = self.dense()
        return float(np.linalg.norm(X - X.conj().T)) <= tol * max(float(np.linalg.norm(X)), 1.0)


def commutator(X: OperatorTensor, Y: OperatorTensor) -> OperatorTensor:
    return X @ Y - Y @ X


def elementary(k: int, a: int, b: int) -> np.ndarray:
    """``E_ab`` with letters numbered from 1."""
    E = np.zeros((k, k), dtype=complex)
    E[a - 1, b - 1] = 1.0
    return E


@dataclass(frozen=True)
class SiteOperators:
    E: dict[tuple[int, int], np.ndarray]
    A: dict[tuple[int, int], np.ndarray]
    B: dict[tuple[int, int], np.ndarray]

    def M(self, a: int, b: int) -> np.ndarray:
        return self.A[a, b] + 1j * self.B[a, b]


def build_site_operators(k: int) -> SiteOperators:
    """One-site ``E_ab`` and the Hermitian real and imaginary parts ``A_ab``, ``B_ab``."""
    if k < 2:
        raise InputError("k must be at least 2")
    I = np.eye(k, dtype=complex)
    E, A, B = {}, {}, {}
    for a in range(1, k + 1):
        for b in range(1, k + 1):
            E[a, b] = elementary(k, a, b)
    for a in range(1, k + 1):
        for b in range(1, k + 1):
            if a == b:
                A[a, a] = E[a, a] - I / k
                B[a, a] = np.zeros((k, k), dtype=complex)
            else:
                A[a, b] = (E[a, b] + E[b, a]) / 2
                B[a, b] = 0.5j * (E[b, a] - E[a, b])
    return SiteOperators(E, A, B)


def spin_operators() -> dict[str, np.ndarray]:
    """Spin-1/2 ``Jx, Jy, Jz`` as the k = 2 operators ``A_12, B_12, A_11``."""
    ops = build_site_operators(2)
    return {"Jx": ops.A[1, 2], "Jy": ops.B[1, 2], "Jz": ops.A[1, 1]}


def operator_basis(k: int) -> dict[str, np.ndarray]:
    """Named one-site Hermitian operators: spins for k = 2, else all ``A_ab`` and ``B_ab`` with a <= b."""
    if k == 2:
        return spin_operators()
    ops = build_site_operators(k)
    named = {}
    for a in range(1, k + 1):
        for b in range(a, k + 1):
            named[f"A{a}{b}"] = ops.A[a, b]
            if a != b:
                named[f"B{a}{b}"] = ops.B[a, b]
    return named


def lift_and_sum(op: np.ndarray, N: int) -> OperatorTensor:
    """``sum_t I (x) ... (x) op (x) ... (x) I`` over the N sites."""
    op = np.asarray(op, dtype=complex)
    k = op.shape[0]
    _dim(k, N, DIM_CAP)
    return OperatorTensor(k, N, site=op)


def scale(op: OperatorTensor, c: complex) -> OperatorTensor:
    return op * c


def tracial_expectation(X: OperatorTensor | np.ndarray) -> complex:
    """Normalized trace ``Tr(X) / dim``."""
    if isinstance(X, np.ndarray):
        return complex(np.trace(X) / X.shape[0])
    if X.is_collective:
        return complex(X.scale * X.N * np.trace(X.site) / X.k)
    return complex(np.trace(X.dense()) / X.dim)


def trace_of_product(ops: Sequence[OperatorTensor]) -> complex:
    """Normalized trace of ``ops[0] @ ops[1] @ ...`` without forming the product.

    Columns of the identity are pushed through the factors in chunks; diagonal
    contributions are accumulated with ``math.fsum`` so the result is
    independent of chunking.
    """
    if not ops:
        raise InputError("empty product")
    k, N = ops[0].k, ops[0].N
    d = _dim(k, N, DIM_CAP)
    re_parts, im_parts = [], []
    for start in range(0, d, _CHUNK):
        stop = min(start + _CHUNK, d)
        V = np.zeros((d, stop - start), dtype=complex)
        V[np.arange(start, stop), np.arange(stop - start)] = 1.0
        for X in reversed(ops):
            V = X.apply(V)
        diag = V[np.arange(start, stop), np.arange(stop - start)]
        re_parts.extend(diag.real.tolist())
        im_parts.extend(diag.imag.tolist())
    return complex(math.fsum(re_parts), math.fsum(im_parts)) / d


def symmetrized_product(ops: Sequence[OperatorTensor]) -> OperatorTensor:
    """Average of the ordered products over all orderings of ``ops``."""
    if not ops:
        raise InputError("empty product")
    mats = [X.dense() for X in ops]
    total = np.zeros_like(mats[0], dtype=complex)
    count = 0
    for order in permutations(range(len(mats))):
        P = mats[order[0]]
        for i in order[1:]:
            P = P @ mats[i]
        total += P
        count += 1
    return ops[0]._wrap(total / count)


def tautological_matrix(k: int, N: int) -> dict[tuple[int, int], OperatorTensor]:
    """Collective ``M_ab = A_ab + i B_ab = sum_t (E_ab - delta_ab I / k)^(t)``."""
    ops = build_site_operators(k)
    return {(a, b): lift_and_sum(ops.M(a, b), N) for a in range(1, k + 1) for b in range(1, k + 1)}


def symmetrized_det(M: dict[tuple[int, int], OperatorTensor], k: int) -> OperatorTensor:
    """Determinant of a matrix of operators, each term averaged over factor orderings."""
    total = None
    for perm in permutations(range(k)):
        term = symmetrized_product([M[a + 1, perm[a] + 1] for a in range(k)]) * permutation_sign(perm)
        total = term if total is None else total + term
    return total


def casimir_char_poly(k: int, N: int) -> list[OperatorTensor]:
    """Coefficients of ``C(x) = det(xI - M)`` with symmetrized products.

    Entry ``j`` is the coefficient of ``x^(k-j)``, so entry 0 is the identity.
    """
    d = _dim(k, N, DENSE_CAP)
    M = tautological_matrix(k, N)
    coeffs = [OperatorTensor(k, N, matrix=np.eye(d, dtype=complex))]
    for j in range(1, k + 1):
        acc = np.zeros((d, d), dtype=complex)
        for S in combinations(range(1, k + 1), j):
            for perm in permutations(range(j)):
                sign = permutation_sign(perm)
                factors = [M[S[i], S[perm[i]]] for i in range(j)]
                acc += sign * symmetrized_product(factors).dense()
        coeffs.append(OperatorTensor(k, N, matrix=(-1) ** j * acc))
    return coeffs


@dataclass(frozen=True)
class CovarianceForm:
    """Symmetric positive semidefinite matrix of pairwise second moments."""

    matrix: np.ndarray

    def __post_init__(self):
        K = np.asarray(self.matrix, dtype=float)
        if K.ndim != 2 or K.shape[0] != K.shape[1]:
            raise InputError("covariance must be square")
        if not np.allclose(K, K.T, atol=1e-12):
            raise InputError("covariance must be symmetric")
        if np.linalg.eigvalsh(K).min() < -1e-12:
            raise InputError("covariance must be positive semidefinite")
        object.__setattr__(self, "matrix", K)

    @classmethod
    def from_site_operators(cls, ops: Sequence[np.ndarray]) -> CovarianceForm:
        """``kappa_ab = rho(A_a A_b)`` under the one-site tracial state."""
        K = np.array([[tracial_expectation(a @ b) for b in ops] for a in ops])
        if np.max(np.abs(K - K.T)) > 1e-12:
            raise InputError("tracial covariance is not symmetric")
        if np.max(np.abs(K.imag)) > 1e-12:
            raise InputError("covariance has an imaginary part")
        return cls(K.real)


def perfect_matchings(items: Sequence[int]):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for i in range(len(rest)):
        for m in perfect_matchings(rest[:i] + rest[i + 1 :]):
            yield [(first, rest[i])] + m


def wick_moment(monomial: Sequence[int], kappa: CovarianceForm) -> float:
    """``E[X_a1 ... X_am]`` for centered Gaussians with covariance ``kappa`` (Isserlis)."""
    idx = list(monomial)
    if not idx:
        raise InputError("monomial must be nonempty")
    if len(idx) % 2:
        return 0.0
    K = kappa.matrix
    return float(sum(math.prod(K[idx[i], idx[j]] for i, j in m) for m in perfect_matchings(list(range(len(idx))))))


@dataclass(frozen=True)
class MomentRow:
    monomial: str
    N: int
    exact: complex
    wick: float
    abs_diff: float


def moment_convergence(monomial: Sequence[str | int], k: int, N_list: Sequence[int]) -> list[MomentRow]:
    """Tracial moment of the scaled collective monomial against the Gaussian limit.

    Each factor is ``N^(-1/2) sum_t A^(t)`` for a named one-site operator from
    ``operator_basis(k)``; monomial entries are names or indices into that basis.
    Non-self-adjoint monomials have complex moments; ``abs_diff`` is the modulus.
    """
    basis = operator_basis(k)
    names = list(basis)
    try:
        idx = [names.index(m) if isinstance(m, str) else int(m) for m in monomial]
    except ValueError as exc:
        raise InputError(f"unknown operator in {monomial}; choose from {names}") from exc
    if not idx or any(i < 0 or i >= len(names) for i in idx):
        raise InputError("monomial must be nonempty with valid operator indices")
    kappa = CovarianceForm.from_site_operators([basis[n] for n in names])
    wick = wick_moment(idx, kappa)
    label = "*".join(names[i] for i in idx)
    rows = []
    for N in N_list:
        factors = [scale(lift_and_sum(basis[names[i]], N), 1 / math.sqrt(N)) for i in idx]
        value = trace_of_product(factors)
        rows.append(MomentRow(label, N, value, wick, abs(value - wick)))
    return rows


def moments_csv(rows: Sequence[MomentRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["monomial", "N", "exact", "wick", "abs_diff"])
    for r in rows:
        exact = repr(r.exact.real) if r.exact.imag == 0 else repr(r.exact)
        writer.writerow([r.monomial, r.N, exact, repr(r.wick), repr(r.abs_diff)])
    return buf.getvalue()


def group_eigenvalues(values: np.ndarray, tol: float = 1e-8) -> list[tuple[float, int]]:
    """Cluster sorted real eigenvalues within ``tol`` into (mean, multiplicity) pairs."""
    vals = np.sort(np.asarray(values, dtype=float))
    groups: list[list[float]] = []
    for v in vals:
        if groups and v - groups[-1][-1] <= tol:
            groups[-1].append(v)
        else:
            groups.append([v])
    return [(float(np.mean(g)), len(g)) for g in groups]


def identity_suite(k: int, N: int) -> dict[str, float]:
    """Largest residuals of the operator identities on ``(C^k)^(x)N``.

    ``commutators``: ``[M_ab, M_cd] = delta_bc M_ad - delta_da M_cb``.
    ``casimir_centrality``: every char-poly coefficient commutes with every ``M_ab``.
    For k = 2 also ``det_plus_j2``: symmetrized ``det M + J^2``.
    """
    _dim(k, N, DENSE_CAP)
    M = {key: X.dense() for key, X in tautological_matrix(k, N).items()}
    d = k**N
    zero = np.zeros((d, d), dtype=complex)
    comm = 0.0
    for (a, b), X in M.items():
        for (c, e), Y in M.items():
            want = (M[a, e] if b == c else zero) - (M[c, b] if e == a else zero)
            comm = max(comm, float(np.max(np.abs(X @ Y - Y @ X - want))))
    central = 0.0
    for C in casimir_char_poly(k, N)[1:]:
        Cd = C.dense()
        for X in M.values():
            central = max(central, float(np.max(np.abs(Cd @ X - X @ Cd))))
    out = {"commutators": comm, "casimir_centrality": central}
    if k == 2:
        spins = [lift_and_sum(op, N).dense() for op in spin_operators().values()]
        J2 = sum(S @ S for S in spins)
        det = symmetrized_det(tautological_matrix(2, N), 2).dense()
        out["det_plus_j2"] = float(np.max(np.abs(det + J2)))
    return out
