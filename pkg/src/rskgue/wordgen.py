"""Random word sources and the statistics attached to them.

Markov matrices use the column convention ``M[a][b] = P[next = a | current = b]``
with letters 1..k mapped to indices 0..k-1. Only doubly stochastic matrices are
accepted, so the uniform letter law is stationary.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Sequence

import numpy as np

from .errors import InputError, NumericError
from .shapes import Partition, rsk_row_insert

MAX_SERIES_TERMS = 10_000
SERIES_TOL = 1e-13


@dataclass(frozen=True)
class StochasticMatrix:
    k: int
    entries: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(Fraction(x) for x in row) for row in self.entries)
        k = self.k
        if len(rows) != k or any(len(r) != k for r in rows):
            raise InputError(f"expected a {k}x{k} matrix")
        if any(x < 0 or x > 1 for r in rows for x in r):
            raise InputError("entries must lie in [0, 1]")
        col_ok = all(sum(rows[a][b] for a in range(k)) == 1 for b in range(k))
        row_ok = all(sum(r) == 1 for r in rows)
        if not col_ok and row_ok:
            raise InputError(
                "rows sum to 1 but columns do not; matrices are column-stochastic "
                "(M[a][b] = P[next=a | current=b]), transpose the input"
            )
        if not (col_ok and row_ok):
            raise InputError("matrix is not doubly stochastic")
        object.__setattr__(self, "entries", rows)

    def as_array(self) -> np.ndarray:
        return np.array([[float(x) for x in row] for row in self.entries])

    def is_circulant(self) -> bool:
        k = self.k
        return all(self.entries[a][b] == self.entries[(a + 1) % k][(b + 1) % k] for a in range(k) for b in range(k))

    def to_json(self) -> str:
        flat = [[x.numerator, x.denominator] for row in self.entries for x in row]
        return json.dumps({"k": self.k, "entries": flat})

    @classmethod
    def from_json(cls, text: str) -> StochasticMatrix:
        try:
            data = json.loads(text)
            k = int(data["k"])
            raw = data["entries"]
        except (ValueError, KeyError, TypeError) as exc:
            raise InputError(f"bad chain JSON: {exc}") from exc
        # accept a flat row-major list of [num, den] pairs or a list of rows
        if len(raw) == k and all(isinstance(r, list) and len(r) == k and isinstance(r[0], list) for r in raw):
            raw = [x for row in raw for x in row]
        if len(raw) != k * k:
            raise InputError(f"expected {k * k} entries, got {len(raw)}")
        try:
            vals = [Fraction(int(n), int(d)) for n, d in raw]
        except (ValueError, TypeError, ZeroDivisionError) as exc:
            raise InputError(f"bad rational entry: {exc}") from exc
        return cls(k, tuple(tuple(vals[a * k : (a + 1) * k]) for a in range(k)))


def _quarters(rows: Sequence[Sequence[int]]) -> tuple[tuple[Fraction, ...], ...]:
    return tuple(tuple(Fraction(x, 4) for x in row) for row in rows)


BUILTIN_LENGTHS = {"A": 1620, "F": 3420, "C+": 1140, "C-": 1140}
_ALIASES = {"C_plus": "C+", "C_minus": "C-", "Cplus": "C+", "Cminus": "C-"}


def builtin_chains() -> dict[str, StochasticMatrix]:
    """The four 3-letter chains compared in the Markov word experiments.

    Paired word lengths live in ``BUILTIN_LENGTHS``.
    """
    third = Fraction(1, 3)
    return {
        "A": StochasticMatrix(3, _quarters([[1, 2, 1], [3, 1, 0], [0, 1, 3]])),
        "F": StochasticMatrix(3, ((third,) * 3,) * 3),
        "C+": StochasticMatrix(3, _quarters([[3, 0, 1], [1, 3, 0], [0, 1, 3]])),
        "C-": StochasticMatrix(3, _quarters([[3, 1, 0], [0, 3, 1], [1, 0, 3]])),
    }


def chain(name: str) -> StochasticMatrix:
    name = _ALIASES.get(name, name)
    chains = builtin_chains()
    if name not in chains:
        raise InputError(f"unknown chain {name!r}; choose from {sorted(chains)}")
    return chains[name]


def uniform_chain(k: int) -> StochasticMatrix:
    return StochasticMatrix(k, ((Fraction(1, k),) * k,) * k)


def sample_uniform_word(k: int, N: int, rng: np.random.Generator) -> np.ndarray:
    if k < 1 or N < 1:
        raise InputError("need k >= 1 and N >= 1")
    return rng.integers(1, k + 1, size=N)


def _column_cdf(M: StochasticMatrix) -> np.ndarray:
    # cdf[a, b] = P[next <= a | current = b], computed exactly then rounded
    k = M.k
    return np.array([[float(sum(M.entries[c][b] for c in range(a + 1))) for b in range(k)] for a in range(k - 1)])


def _markov_step(cdf: np.ndarray, current: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Next letter index for every walker given uniforms ``u``."""
    nxt = np.zeros_like(current)
    for row in cdf:
        nxt += u >= row[current]
    return nxt


def sample_markov_word(M: StochasticMatrix, N: int, rng: np.random.Generator) -> np.ndarray:
    """One word of length ``N``: uniform first letter, then transitions from ``M``."""
    if not isinstance(M, StochasticMatrix):
        raise InputError("M must be a StochasticMatrix")
    if N < 1:
        raise InputError("N must be at least 1")
    cdf = _column_cdf(M)
    word = np.empty(N, dtype=np.int64)
    cur = rng.integers(0, M.k, size=1)
    word[0] = cur[0]
    u = rng.random(N - 1)
    for t in range(1, N):
        cur = _markov_step(cdf, cur, u[t - 1 : t])
        word[t] = cur[0]
    return word + 1


def markov_lambda1(M: StochasticMatrix, N: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """First row length of the RSK shape for ``n`` independent Markov words.

    Words are streamed one letter at a time across all walkers; only the running
    longest weakly increasing subsequence per bound is kept, so memory is O(n k).
    """
    k = M.k
    cdf = _column_cdf(M)
    # best[a] = longest weakly increasing subsequence whose last letter index <= a
    best = np.zeros((k, n), dtype=np.int64)
    cur = rng.integers(0, k, size=n)
    rows = np.arange(n)
    for t in range(N):
        if t:
            cur = _markov_step(cdf, cur, rng.random(n))
        _lwis_update(best, cur, rows)
    return best[k - 1].copy()


def uniform_lambda1(k: int, N: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """First row length of the RSK shape for ``n`` i.i.d. uniform words."""
    best = np.zeros((k, n), dtype=np.int64)
    rows = np.arange(n)
    for _ in range(N):
        _lwis_update(best, rng.integers(0, k, size=n), rows)
    return best[k - 1].copy()


def _lwis_update(best: np.ndarray, letter: np.ndarray, rows: np.ndarray) -> None:
    extended = best[letter, rows] + 1
    for a in range(best.shape[0]):
        mask = letter <= a
        best[a] = np.where(mask, np.maximum(best[a], extended), best[a])


def _check_indecomposable(M: StochasticMatrix) -> np.ndarray:
    mu = np.linalg.eigvals(M.as_array())
    order = np.argsort(-np.abs(mu - 1.0))
    nontrivial = mu[order][:-1]
    if np.any(np.abs(nontrivial) >= 1 - 1e-12):
        raise NumericError(
            "variance series does not converge: non-trivial eigenvalues "
            + ", ".join(f"{z:.6g}" for z in nontrivial)
            + " include one on the unit circle"
        )
    return nontrivial


def variance_per_letter(M: StochasticMatrix, method: str = "auto") -> float:
    """Per-letter variance ``sum_t (k P[w_0 = w_t] - 1) / (k - 1)`` of the stationary chain.

    ``P[w_0 = w_t] = Tr(M^|t|) / k``, so the two-sided sum is
    ``1 + 2 sum_{t>=1} (Tr(M^t) - 1) / (k - 1)``. ``"closed"`` sums the geometric
    series per eigenvalue and needs distinct eigenvalues; ``"series"`` accumulates
    exact rational traces until a term drops below 1e-13. ``"auto"`` picks closed
    form when it applies.
    """
    k = M.k
    if k < 2:
        raise InputError("variance per letter needs k >= 2")
    nontrivial = _check_indecomposable(M)
    all_mu = np.concatenate([[1.0], nontrivial])
    distinct = all(abs(all_mu[i] - all_mu[j]) > 1e-9 for i in range(k) for j in range(i + 1, k))
    if method == "auto":
        method = "closed" if distinct else "series"
    if method == "closed":
        if not distinct:
            raise InputError("closed form needs distinct eigenvalues")
        s = np.sum(nontrivial / (1 - nontrivial))
        return float(1 + 2 * s.real / (k - 1))
    if method != "series":
        raise InputError(f"unknown method {method!r}")
    power = [list(row) for row in M.entries]
    total = Fraction(0)
    for _ in range(MAX_SERIES_TERMS):
        term = sum(power[a][a] for a in range(k)) - 1
        total += term
        if abs(term) < SERIES_TOL:
            return float(1 + 2 * total / (k - 1))
        power = [[sum(power[a][c] * M.entries[c][b] for c in range(k)) for b in range(k)] for a in range(k)]
    raise NumericError(f"variance series did not reach {SERIES_TOL} in {MAX_SERIES_TERMS} terms")


@dataclass(frozen=True)
class SyllabicAlphabet:
    k: int
    syllable_length: int
    syllables: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if len(set(self.syllables)) != len(self.syllables):
            raise InputError("syllables must be distinct")
        if any(len(s) != self.syllable_length for s in self.syllables):
            raise InputError("all syllables must have the same length")

    def expand(self, word: Sequence[int]) -> tuple[int, ...]:
        """Spell a word over syllable indices 0..|S|-1 as letters in [k]."""
        out: list[int] = []
        for i in word:
            out.extend(self.syllables[i])
        return tuple(out)


def syllabic_alphabet(k: int, mu: Partition | Sequence[int], Q_W: Sequence[Sequence[int]]) -> SyllabicAlphabet:
    """All words in ``[k]^l`` whose RSK recording tableau is ``Q_W``."""
    lam = mu if isinstance(mu, Partition) else Partition(tuple(mu))
    Q = tuple(tuple(row) for row in Q_W)
    if Partition(tuple(len(r) for r in Q)) != lam:
        raise InputError("Q_W does not have shape mu")
    ell = lam.size
    if sorted(x for row in Q for x in row) != list(range(1, ell + 1)):
        raise InputError("Q_W must contain 1..l exactly once")
    syllables = tuple(w for w in product(range(1, k + 1), repeat=ell) if rsk_row_insert(w, k).Q == Q)
    return SyllabicAlphabet(k, ell, syllables)


# '(' is letter 2 and ')' is letter 1: an opening 2 followed later by a closing 1
# is a strictly decreasing pair, which is what pushes boxes into the second row.
PAREN_OF_LETTER = {1: ")", 2: "("}
LETTER_OF_PAREN = {")": 1, "(": 2}
BRA_KET = {"<": "((", "|": ")(", ">": "))"}


def paren_alphabet() -> SyllabicAlphabet:
    """The adjoint su(2) alphabet written as parenthesis pairs ``((``, ``)(``, ``))``."""
    return SyllabicAlphabet(2, 2, tuple(tuple(LETTER_OF_PAREN[c] for c in BRA_KET[s]) for s in "<|>"))


def to_parens(word: Sequence[int]) -> str:
    try:
        return "".join(PAREN_OF_LETTER[int(x)] for x in word)
    except KeyError as exc:
        raise InputError(f"two-letter words only, got letter {exc.args[0]}") from exc


def paren_unmatched(word: str | Sequence[int]) -> int:
    """Number of parentheses left unmatched by the usual stack matching."""
    text = word if isinstance(word, str) else to_parens(word)
    depth = unmatched = 0
    for c in text:
        if c == "(":
            depth += 1
        elif c == ")":
            if depth:
                depth -= 1
            else:
                unmatched += 1
        else:
            raise InputError(f"unexpected character {c!r}")
    return unmatched + depth


def bra_ket_fragments(word: str) -> int:
    """Fragment count of a word over ``<``, ``|``, ``>``: half the unmatched parentheses of its expansion."""
    try:
        expanded = "".join(BRA_KET[c] for c in word)
    except KeyError as exc:
        raise InputError(f"unexpected syllable {exc.args[0]!r}") from exc
    return paren_unmatched(expanded) // 2


def syllabic_shape_distribution(alphabet: SyllabicAlphabet, N: int) -> dict[Partition, int]:
    """Exhaustive shape counts over all ``N``-syllable words, spelled out in letters."""
    if N < 0:
        raise InputError("N must be non-negative")
    hist: dict[Partition, int] = {}
    for word in product(range(len(alphabet.syllables)), repeat=N):
        lam = rsk_row_insert(alphabet.expand(word), alphabet.k).shape
        hist[lam] = hist.get(lam, 0) + 1
    return hist
