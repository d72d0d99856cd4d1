"""Reproducible per-block random streams.

Trials are split into fixed-size blocks. Block ``b`` of a run seeded with
``seed`` always draws from ``Philox`` keyed by ``SeedSequence([seed, domain, b])``,
so results depend only on ``(seed, trials)`` and never on how many threads run
the blocks. ``domain`` separates independent sources that share a seed, e.g.
GUE draws and the words they are compared against.
"""

from __future__ import annotations

import os
import zlib
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, TypeVar

import numpy as np

from .errors import InputError

BLOCK_SIZE = 16384
DEFAULT_SEED = 20010501

T = TypeVar("T")


def default_seed() -> int:
    """The documented default seed, overridable through ``YG_SEED``."""
    env = os.environ.get("YG_SEED")
    if env is None or env == "":
        return DEFAULT_SEED
    try:
        return int(env)
    except ValueError as exc:
        raise InputError(f"YG_SEED must be an integer, got {env!r}") from exc


GUE_DOMAIN = 1
WORD_DOMAIN = 2


def domain_of(label: str) -> int:
    """Stable stream domain for a named source."""
    return zlib.crc32(label.encode()) + 16


def block_rng(seed: int, block: int, domain: int = 0) -> np.random.Generator:
    if seed < 0:
        raise InputError("seed must be non-negative")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, domain, block])))


def block_sizes(trials: int, block_size: int = BLOCK_SIZE) -> list[int]:
    full, rest = divmod(trials, block_size)
    return [block_size] * full + ([rest] if rest else [])


def run_blocks(
    fn: Callable[[np.random.Generator, int], T],
    trials: int,
    seed: int,
    threads: int = 1,
    domain: int = 0,
    block_size: int = BLOCK_SIZE,
) -> list[T]:
    """Call ``fn(rng, n)`` once per block and return the results in block order."""
    if trials < 1:
        raise InputError("trials must be at least 1")
    jobs = list(enumerate(block_sizes(trials, block_size)))

    def run(job: tuple[int, int]) -> T:
        b, n = job
        return fn(block_rng(seed, b, domain), n)

    if threads <= 1 or len(jobs) == 1:
        return [run(job) for job in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(run, jobs))
