"""Statistical comparisons between word shapes and GUE spectra.

Every sampled quantity is drawn through ``streams.run_blocks``, so a report is
a pure function of its parameters and seed. KS thresholds live in
``thresholds.json`` next to this module.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Callable, Mapping, Sequence, Union

import numpy as np
from scipy import optimize

from .errors import InputError, ResourceError
from .rmt import k2_largest_cdf, k2_largest_moment, sample_spectra
from .shapes import Partition, exact_shape_distribution
from .streams import default_seed, domain_of, run_blocks
from .walks import MAX_SHAPES, corollary_residual, estimated_shape_count
from .wordgen import BUILTIN_LENGTHS, StochasticMatrix, builtin_chains, markov_lambda1, variance_per_letter

DEFAULT_GUE_TRIALS = 10**6


@dataclass(frozen=True, eq=False)
class EmpiricalDist:
    """Sorted sample values with the seed that produced them."""

    values: np.ndarray
    seed: int | None = None
    label: str = ""

    def __post_init__(self):
        v = np.sort(np.asarray(self.values, dtype=float).ravel())
        if v.size == 0:
            raise InputError("empirical distribution needs at least one value")
        object.__setattr__(self, "values", v)

    @property
    def trials(self) -> int:
        return int(self.values.size)

    def counts(self) -> dict[float, int]:
        xs, cs = np.unique(self.values, return_counts=True)
        return {float(x): int(c) for x, c in zip(xs, cs)}

    def cdf(self, x) -> np.ndarray:
        return np.searchsorted(self.values, np.asarray(x, dtype=float), side="right") / self.trials

    def median(self) -> float:
        return float(np.median(self.values))

    def mean(self) -> float:
        return float(np.mean(self.values))

    def var(self) -> float:
        return float(np.var(self.values))


@dataclass(frozen=True, eq=False)
class LatticeLaw:
    """A finitely supported exact law: sorted distinct atoms and their probabilities."""

    atoms: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        atoms = np.asarray(self.atoms, dtype=float)
        probs = np.asarray(self.probs, dtype=float)
        if atoms.size == 0 or atoms.shape != probs.shape:
            raise InputError("lattice law needs matching non-empty atoms and probabilities")
        order = np.argsort(atoms, kind="stable")
        object.__setattr__(self, "atoms", atoms[order])
        object.__setattr__(self, "probs", probs[order])

    def cdf(self, x) -> np.ndarray:
        cum = np.cumsum(self.probs)
        idx = np.searchsorted(self.atoms, np.asarray(x, dtype=float), side="right")
        return np.where(idx > 0, cum[np.maximum(idx - 1, 0)], 0.0)

    def median(self) -> float:
        return float(self.atoms[np.searchsorted(np.cumsum(self.probs), 0.5)])

    def mean(self) -> float:
        return float(self.atoms @ self.probs)

    def var(self) -> float:
        m = self.mean()
        return float(((self.atoms - m) ** 2) @ self.probs)

    def shifted(self, offset: float) -> LatticeLaw:
        return LatticeLaw(self.atoms + offset, self.probs)


Distribution = Union[EmpiricalDist, LatticeLaw, Callable[[np.ndarray], np.ndarray]]


def _steps(d) -> tuple[np.ndarray, np.ndarray] | None:
    """Jump locations and right-continuous CDF values, or None for a continuous CDF."""
    if isinstance(d, EmpiricalDist):
        xs, cs = np.unique(d.values, return_counts=True)
        return xs, np.cumsum(cs) / d.trials
    if isinstance(d, LatticeLaw):
        return d.atoms, np.cumsum(d.probs)
    if callable(d):
        return None
    raise InputError(f"cannot compare {type(d).__name__}")


def ks_distance(d1: Distribution, d2: Distribution) -> float:
    """Supremum distance between two CDFs.

    Each argument is an ``EmpiricalDist``, a ``LatticeLaw`` or a callable
    continuous CDF. At least one side must be a step function.
    """
    s1, s2 = _steps(d1), _steps(d2)
    if s1 is None and s2 is None:
        raise InputError("at least one distribution must be discrete")
    if s1 is None:
        s1, s2, d1, d2 = s2, s1, d2, d1
    xs, cum = s1
    if s2 is None:
        G = np.asarray(d2(xs), dtype=float)
        before = np.concatenate([[0.0], cum[:-1]])
        return float(max(np.max(np.abs(cum - G)), np.max(np.abs(before - G))))
    ys, cum2 = s2
    grid = np.union1d(xs, ys)

    def at(points, values):
        idx = np.searchsorted(points, grid, side="right")
        return np.where(idx > 0, values[np.maximum(idx - 1, 0)], 0.0)

    return float(np.max(np.abs(at(xs, cum) - at(ys, cum2))))


@dataclass
class ComparisonReport:
    ks: float
    mean_delta: float
    var_delta: float
    medians: dict[str, float]
    metadata: dict
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "ks": self.ks,
            "mean_delta": self.mean_delta,
            "var_delta": self.var_delta,
            "medians": self.medians,
            "metadata": self.metadata,
            "diagnostics": self.diagnostics,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["key", "value"])
        flat = {"ks": self.ks, "mean_delta": self.mean_delta, "var_delta": self.var_delta}
        flat.update({f"median_{k}": v for k, v in self.medians.items()})
        flat.update(self.diagnostics)
        for key in sorted(flat):
            writer.writerow([key, repr(flat[key])])
        return buf.getvalue()


def load_thresholds() -> dict:
    """Pilot-calibrated acceptance thresholds shipped with the package."""
    text = resources.files(__package__).joinpath("thresholds.json").read_text()
    return json.loads(text)


def lambda1_law(k: int, N: int, max_shapes: int = MAX_SHAPES) -> LatticeLaw:
    """Exact law of ``lambda_1 - N/k`` over uniform words, from shape counts."""
    if estimated_shape_count(k, N) > max_shapes:
        raise ResourceError(f"about {estimated_shape_count(k, N):.0f} shapes at k={k}, N={N} exceeds {max_shapes}")
    dist = exact_shape_distribution(k, N)
    by_row: dict[int, int] = {}
    for lam, c in dist.counts.items():
        by_row[lam[0]] = by_row.get(lam[0], 0) + c
    rows = sorted(by_row)
    total = k**N
    # exact integer ratio before rounding to float
    probs = [by_row[r] / total for r in rows]
    return LatticeLaw(np.array(rows, dtype=float) - N / k, np.array(probs))


def _k2_median() -> float:
    return optimize.brentq(lambda x: k2_largest_cdf(x)[0] - 0.5, 0.0, 5.0, xtol=1e-14)


def theorem1_check(
    k: int,
    N: int,
    gue_trials: int = DEFAULT_GUE_TRIALS,
    seed: int | None = None,
    threads: int = 1,
    max_shapes: int = MAX_SHAPES,
) -> ComparisonReport:
    """Compare the exact law of ``sqrt(k/2N) * centered lambda_1`` with GUE ``l_1``.

    For k = 2 the GUE side is the quadrature CDF and ``gue_trials`` is unused.
    Diagnostics carry the same distance after adding the staircase offset
    ``(k-1)/2`` to the centered row, and the lattice floor: half the largest
    atom, below which no step law can approach a continuous one.
    """
    if k < 2 or N < 1:
        raise InputError("need k >= 2 and N >= 1")
    seed = default_seed() if seed is None else seed
    scale = math.sqrt(k / (2 * N))
    raw = lambda1_law(k, N, max_shapes)
    law = LatticeLaw(raw.atoms * scale, raw.probs)
    shifted = raw.shifted((k - 1) / 2)
    shifted = LatticeLaw(shifted.atoms * scale, shifted.probs)
    meta = {"experiment": "theorem1", "k": k, "N": N, "seed": seed}
    if k == 2:
        gue: Distribution = k2_largest_cdf
        g_mean = k2_largest_moment(1)
        g_var = k2_largest_moment(2) - g_mean**2
        g_median = _k2_median()
        meta["gue"] = "quadrature"
    else:
        sample = EmpiricalDist(sample_spectra(k, gue_trials, seed, threads)[:, 0], seed, "GUE")
        gue = sample
        g_mean, g_var, g_median = sample.mean(), sample.var(), sample.median()
        meta["gue"] = "monte_carlo"
        meta["gue_trials"] = gue_trials
    return ComparisonReport(
        ks=ks_distance(law, gue),
        mean_delta=law.mean() - g_mean,
        var_delta=law.var() - g_var,
        medians={"words": law.median(), "gue": g_median},
        metadata=meta,
        diagnostics={
            "ks_rho_shifted": ks_distance(shifted, gue),
            "lattice_floor": float(np.max(law.probs)) / 2,
        },
    )


def chain_lambda1(
    M: StochasticMatrix, N: int, trials: int, seed: int, threads: int = 1, label: str | None = None
) -> np.ndarray:
    """``lambda_1`` for ``trials`` Markov words; the stream depends on the chain itself."""
    tag = label if label is not None else M.to_json()
    parts = run_blocks(
        lambda rng, n: markov_lambda1(M, N, n, rng), trials, seed, threads, domain=domain_of("chain:" + tag)
    )
    return np.concatenate(parts)


def fig2_run(
    trials: int,
    seed: int | None = None,
    threads: int = 1,
    lengths: Mapping[str, int] | None = None,
) -> dict[str, EmpiricalDist]:
    """Centered first-row laws ``lambda_1 - N/3`` for the chains A, F, C+ and C-."""
    if trials < 1:
        raise InputError("trials must be at least 1")
    seed = default_seed() if seed is None else seed
    lengths = dict(BUILTIN_LENGTHS if lengths is None else lengths)
    chains = builtin_chains()
    out = {}
    for name, N in lengths.items():
        if name not in chains:
            raise InputError(f"unknown chain {name!r}")
        M = chains[name]
        l1 = chain_lambda1(M, N, trials, seed, threads, label=name)
        out[name] = EmpiricalDist(l1 - N / M.k, seed, name)
    return out


def tail_crossing(low: EmpiricalDist, ref: EmpiricalDist) -> float | None:
    """First value above the reference median where ``low``'s upper tail reaches ``ref``'s.

    Returns None when the tails never cross within the sampled range.
    """
    grid = np.union1d(low.values, ref.values)
    grid = grid[grid >= ref.median()]
    s_low = 1 - low.cdf(grid)
    s_ref = 1 - ref.cdf(grid)
    hit = np.nonzero((s_low >= s_ref) & (s_low > 0))[0]
    return float(grid[hit[0]]) if hit.size else None


@dataclass
class Fig2Report:
    medians: dict[str, float]
    ks: dict[str, float]
    tail_crossing: float | None
    metadata: dict

    def to_dict(self) -> dict:
        return {"medians": self.medians, "ks": self.ks, "tail_crossing": self.tail_crossing, "metadata": self.metadata}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["key", "value"])
        for name in sorted(self.medians):
            writer.writerow([f"median_{name}", repr(self.medians[name])])
        for pair in sorted(self.ks):
            writer.writerow([f"ks_{pair}", repr(self.ks[pair])])
        writer.writerow(["tail_crossing", "" if self.tail_crossing is None else repr(self.tail_crossing)])
        return buf.getvalue()


def fig2_report(dists: Mapping[str, EmpiricalDist], reference: str = "F") -> Fig2Report:
    ref = dists[reference]
    ks = {f"{name},{reference}": ks_distance(d, ref) for name, d in dists.items() if name != reference}
    if "C+" in dists and "C-" in dists:
        ks["C+,C-"] = ks_distance(dists["C+"], dists["C-"])
    crossing = tail_crossing(dists["A"], ref) if "A" in dists else None
    seeds = {d.seed for d in dists.values()}
    meta = {
        "experiment": "fig2",
        "trials": {name: d.trials for name, d in dists.items()},
        "seed": seeds.pop() if len(seeds) == 1 else sorted(s for s in seeds if s is not None),
    }
    return Fig2Report({name: d.median() for name, d in dists.items()}, ks, crossing, meta)


def cyclic_conjecture_test(
    M: StochasticMatrix,
    N: int,
    trials: int,
    seed: int | None = None,
    gue_trials: int | None = None,
    threads: int = 1,
) -> ComparisonReport:
    """Variance-adjusted first-row law of a circulant chain against GUE ``l_1``.

    Samples ``x = sqrt(k / (2 N v)) * (lambda_1 - N/k)`` where ``v`` is the
    chain's variance per letter. With ``v = 1`` this is the uniform scaling.
    """
    if not isinstance(M, StochasticMatrix):
        raise InputError("M must be a StochasticMatrix")
    if not M.is_circulant():
        raise InputError("cyclic test needs a circulant matrix: M[a][b] == M[a+1][b+1] mod k")
    if N < 1:
        raise InputError("N must be at least 1")
    seed = default_seed() if seed is None else seed
    k = M.k
    v = variance_per_letter(M)
    scale = math.sqrt(k / (2 * N * v))
    words = EmpiricalDist((chain_lambda1(M, N, trials, seed, threads) - N / k) * scale, seed, "words")
    meta = {"experiment": "cyclic", "k": k, "N": N, "trials": trials, "seed": seed, "chain": M.to_json(), "v": v}
    if k == 2:
        gue: Distribution = k2_largest_cdf
        g_mean = k2_largest_moment(1)
        g_var = k2_largest_moment(2) - g_mean**2
        g_median = _k2_median()
    else:
        gt = trials if gue_trials is None else gue_trials
        sample = EmpiricalDist(sample_spectra(k, gt, seed, threads)[:, 0], seed, "GUE")
        gue = sample
        g_mean, g_var, g_median = sample.mean(), sample.var(), sample.median()
        meta["gue_trials"] = gt
    return ComparisonReport(
        ks=ks_distance(words, gue),
        mean_delta=words.mean() - g_mean,
        var_delta=words.var() - g_var,
        medians={"words": words.median(), "gue": g_median},
        metadata=meta,
        diagnostics={"scale": scale},
    )


def isotypic_dims_su2(spin_rep_dim: int, N: int) -> dict[Partition, int]:
    """Dimensions of the isotypic pieces of ``V^(tensor N)`` for the su(2) irrep of dimension ``spin_rep_dim``.

    Works in doubled spins: tensoring spin ``J`` with spin ``j`` gives spins
    ``|J - j| .. J + j``. Spin ``J`` in the N-th power is keyed by the two-row
    shape with ``l1 + l2 = (d - 1) N`` and ``l1 - l2 = 2J``; the value is its
    multiplicity times ``2J + 1``.
    """
    if spin_rep_dim < 2:
        raise InputError("spin_rep_dim must be at least 2")
    if N < 0:
        raise InputError("N must be non-negative")
    two_j = spin_rep_dim - 1
    mult = {0: 1}
    for _ in range(N):
        nxt: dict[int, int] = {}
        for J, m in mult.items():
            for J2 in range(abs(J - two_j), J + two_j + 1, 2):
                nxt[J2] = nxt.get(J2, 0) + m
        mult = nxt
    total = two_j * N
    return {Partition(((total + J) // 2, (total - J) // 2)): m * (J + 1) for J, m in sorted(mult.items(), reverse=True)}


_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def histogram_svg(dists: Mapping[str, EmpiricalDist], bins: int = 60, width: int = 640, height: int = 360) -> str:
    """Overlaid frequency histograms as a standalone SVG document."""
    if not dists:
        raise InputError("nothing to plot")
    lo = min(float(d.values[0]) for d in dists.values())
    hi = max(float(d.values[-1]) for d in dists.values())
    if hi == lo:
        hi = lo + 1.0
    edges = np.linspace(lo, hi, bins + 1)
    freqs = {name: np.histogram(d.values, edges)[0] / d.trials for name, d in dists.items()}
    top = max(float(f.max()) for f in freqs.values()) or 1.0
    pad = 40
    pw, ph = width - 2 * pad, height - 2 * pad

    def px(x: float) -> float:
        return pad + (x - lo) / (hi - lo) * pw

    def py(y: float) -> float:
        return height - pad - y / top * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
        f'<text x="{pad}" y="{height - 10}" font-size="11">{lo:.4g}</text>',
        f'<text x="{width - pad}" y="{height - 10}" font-size="11" text-anchor="end">{hi:.4g}</text>',
        f'<text x="{pad - 4}" y="{pad}" font-size="11" text-anchor="end">{top:.3g}</text>',
    ]
    for i, (name, f) in enumerate(freqs.items()):
        color = _PALETTE[i % len(_PALETTE)]
        pts = [f"{px(edges[0]):.2f},{py(0):.2f}"]
        for j, y in enumerate(f):
            pts.append(f"{px(edges[j]):.2f},{py(y):.2f}")
            pts.append(f"{px(edges[j + 1]):.2f},{py(y):.2f}")
        pts.append(f"{px(edges[-1]):.2f},{py(0):.2f}")
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{" ".join(pts)}"/>')
        out.append(f'<text x="{width - pad}" y="{pad + 14 * i}" font-size="12" fill="{color}" text-anchor="end">{name}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def residual_sweep(k: int, N_list: Sequence[int], max_shapes: int = MAX_SHAPES):
    """``corollary_residual`` at each N in order."""
    return [corollary_residual(k, N, max_shapes) for N in N_list]

