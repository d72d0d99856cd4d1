"""Traceless GUE sampling, a cyclic Jacobi eigensolver and the GUE eigenvalue density.

Normalization: the joint eigenvalue density on the traceless hyperplane is
proportional to ``prod_{a<b} (l_a - l_b)^2 exp(-sum l_a^2)``. That corresponds
to diagonal entries with variance 1/2 and off-diagonal real and imaginary parts
with variance 1/4, before the trace is projected out.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

from .errors import InputError, NumericError
from .streams import GUE_DOMAIN, run_blocks

MAX_SWEEPS = 100
OFF_TOL = 1e-13
HERMITIAN_TOL = 1e-12


@dataclass(frozen=True)
class Spectrum:
    values: tuple[float, ...]
    trace_residual: float


def sample_traceless_gue(k: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Draw one traceless GUE matrix, or a stack of ``size`` of them."""
    if k < 2:
        raise InputError("k must be at least 2")
    n = 1 if size is None else size
    diag = rng.normal(0.0, math.sqrt(0.5), (n, k))
    re = rng.normal(0.0, 0.5, (n, k, k))
    im = rng.normal(0.0, 0.5, (n, k, k))
    upper = np.triu(re + 1j * im, 1)
    H = upper + np.conj(np.swapaxes(upper, 1, 2))
    idx = np.arange(k)
    H[:, idx, idx] = diag - diag.mean(axis=1, keepdims=True)
    return H[0] if size is None else H


def _offdiag_norm(H: np.ndarray) -> np.ndarray:
    k = H.shape[-1]
    mask = ~np.eye(k, dtype=bool)
    return np.sqrt(np.sum(np.abs(H[:, mask]) ** 2, axis=1))


def jacobi_eigh(H: np.ndarray, vectors: bool = False):
    """Cyclic Jacobi diagonalization of one Hermitian matrix or a stack of them.

    Each rotation first removes the phase of the pivot entry, then applies a real
    rotation. A matrix is converged once its off-diagonal Frobenius norm is at
    most ``1e-13`` times its Frobenius norm. Returns eigenvalues in descending
    order, plus unitary eigenvectors as columns when ``vectors`` is set.
    """
    A = np.array(H, dtype=complex, copy=True)
    single = A.ndim == 2
    if single:
        A = A[None]
    if A.shape[-1] != A.shape[-2]:
        raise InputError("matrix must be square")
    scale = np.sqrt(np.sum(np.abs(A) ** 2, axis=(1, 2)))
    if np.any(np.max(np.abs(A - np.conj(np.swapaxes(A, 1, 2))), axis=(1, 2)) > HERMITIAN_TOL * np.maximum(scale, 1.0)):
        raise InputError("matrix is not Hermitian")
    B, k, _ = A.shape
    V = np.broadcast_to(np.eye(k, dtype=complex), (B, k, k)).copy() if vectors else None
    idx = np.arange(k)
    A[:, idx, idx] = A[:, idx, idx].real

    for _ in range(MAX_SWEEPS):
        active = _offdiag_norm(A) > OFF_TOL * scale
        if not active.any():
            break
        for p in range(k - 1):
            for q in range(p + 1, k):
                b = A[:, p, q]
                absb = np.abs(b)
                rot = active & (absb > 0)
                if not rot.any():
                    continue
                safe = np.where(rot, absb, 1.0)
                e = np.where(rot, b / safe, 1.0)
                tau = (A[:, q, q].real - A[:, p, p].real) / (2.0 * safe)
                t = np.where(tau >= 0, 1.0, -1.0) / (np.abs(tau) + np.sqrt(1.0 + tau * tau))
                t = np.where(rot, t, 0.0)
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                ce = np.conj(e)
                # columns: A <- A G
                colp = A[:, :, p].copy()
                colq = A[:, :, q]
                A[:, :, p] = c[:, None] * colp - (s * ce)[:, None] * colq
                A[:, :, q] = s[:, None] * colp + (c * ce)[:, None] * colq
                # rows: A <- G^* A
                rowp = A[:, p, :].copy()
                rowq = A[:, q, :]
                A[:, p, :] = c[:, None] * rowp - (s * e)[:, None] * rowq
                A[:, q, :] = s[:, None] * rowp + (c * e)[:, None] * rowq
                A[:, p, q] = np.where(rot, 0.0, A[:, p, q])
                A[:, q, p] = np.where(rot, 0.0, A[:, q, p])
                A[:, p, p] = A[:, p, p].real
                A[:, q, q] = A[:, q, q].real
                if vectors:
                    vp = V[:, :, p].copy()
                    vq = V[:, :, q]
                    V[:, :, p] = c[:, None] * vp - (s * ce)[:, None] * vq
                    V[:, :, q] = s[:, None] * vp + (c * ce)[:, None] * vq
    else:
        if (_offdiag_norm(A) > OFF_TOL * scale).any():
            raise NumericError(f"Jacobi did not converge in {MAX_SWEEPS} sweeps")

    w = A[:, idx, idx].real
    order = np.argsort(-w, axis=1, kind="stable")
    w = np.take_along_axis(w, order, axis=1)
    if vectors:
        V = np.take_along_axis(V, order[:, None, :], axis=2)
        return (w[0], V[0]) if single else (w, V)
    return w[0] if single else w


def eigenvalues(H: np.ndarray) -> Spectrum:
    w = jacobi_eigh(H)
    return Spectrum(tuple(float(x) for x in w), float(np.sum(w) - np.trace(H).real))


def spectral_density_unnormalized(lam) -> float | np.ndarray:
    """``prod_{a<b} (l_a - l_b)^2 * exp(-sum l_a^2)``; accepts an array of points on the last axis."""
    lam = np.asarray(lam, dtype=float)
    k = lam.shape[-1]
    vdm = np.ones(lam.shape[:-1])
    for a in range(k):
        for b in range(a + 1, k):
            vdm = vdm * (lam[..., a] - lam[..., b]) ** 2
    out = vdm * np.exp(-np.sum(lam * lam, axis=-1))
    return float(out) if out.ndim == 0 else out


def _k2_density(t: float) -> float:
    return spectral_density_unnormalized((t, -t))


@lru_cache(maxsize=None)
def _k2_norm() -> float:
    return integrate.quad(_k2_density, 0.0, np.inf, epsabs=1e-14, epsrel=1e-13)[0]


def k2_largest_cdf(x) -> np.ndarray:
    """CDF of the largest eigenvalue of 2x2 traceless GUE, by quadrature of the density."""
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty_like(xs)
    for i, v in enumerate(xs):
        out[i] = 0.0 if v <= 0 else integrate.quad(_k2_density, 0.0, v, epsabs=1e-14, epsrel=1e-13)[0] / _k2_norm()
    return np.minimum(out, 1.0)


def k2_largest_moment(p: int) -> float:
    """``E[l_1^p]`` for 2x2 traceless GUE, by quadrature."""
    return integrate.quad(lambda t: t**p * _k2_density(t), 0.0, np.inf, epsabs=1e-14)[0] / _k2_norm()


def k2_largest_mean() -> float:
    return k2_largest_moment(1)


def sample_spectra(k: int, trials: int, seed: int, threads: int = 1) -> np.ndarray:
    """Eigenvalues of ``trials`` traceless GUE draws, shape ``(trials, k)``, rows descending."""

    def block(rng: np.random.Generator, n: int) -> np.ndarray:
        return jacobi_eigh(sample_traceless_gue(k, rng, size=n))

    return np.concatenate(run_blocks(block, trials, seed, threads, domain=GUE_DOMAIN))


def spectra_csv(spectra: np.ndarray) -> str:
    buf = io.StringIO()
    k = spectra.shape[1]
    buf.write("trial," + ",".join(f"l{a + 1}" for a in range(k)) + "\n")
    for i, row in enumerate(spectra):
        buf.write(f"{i}," + ",".join(repr(float(x)) for x in row) + "\n")
    return buf.getvalue()


def spectra_summary(spectra: np.ndarray, seed: int) -> dict:
    l1 = spectra[:, 0]
    return {
        "k": int(spectra.shape[1]),
        "trials": int(spectra.shape[0]),
        "seed": int(seed),
        "mean_l1": float(np.mean(l1)),
        "var_l1": float(np.var(l1)),
    }


def spectra_summary_json(spectra: np.ndarray, seed: int) -> str:
    return json.dumps(spectra_summary(spectra, seed), indent=2, sort_keys=True)
