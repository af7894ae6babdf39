"""Monte Carlo helpers: binomial intervals and seed-stable chunked execution."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import RngSeed, as_seed

Z95 = 1.959963984540054
# trials per substream; fixed so results do not depend on the worker count
CHUNK = 4096


def wilson_interval(p_hat, n, z=Z95):
    """Wilson score interval for a binomial proportion."""
    if n <= 0:
        return 0.0, 1.0
    p_hat = min(max(float(p_hat), 0.0), 1.0)
    denom = 1.0 + z * z / n
    centre = (p_hat + z * z / (2 * n)) / denom
    half = z * math.sqrt(p_hat * (1 - p_hat) / n + z * z / (4 * n * n)) / denom
    return max(centre - half, 0.0), min(centre + half, 1.0)


def wilson_half_width(p_hat, n, z=Z95):
    lo, hi = wilson_interval(p_hat, n, z)
    return 0.5 * (hi - lo)


@dataclass(frozen=True)
class ProbabilityEstimate:
    p: float
    ci_95: tuple
    successes: int
    trials: int
    seed: RngSeed

    @property
    def half_width(self):
        return 0.5 * (self.ci_95[1] - self.ci_95[0])

    def to_dict(self):
        return {
            "p": self.p,
            "ci_95": list(self.ci_95),
            "successes": self.successes,
            "trials": self.trials,
            "seed": [self.seed.seed, self.seed.stream],
        }


def chunk_bounds(total, chunk=CHUNK):
    return [(s, min(s + chunk, total)) for s in range(0, total, chunk)]


def map_chunks(func, total, seed, workers=1, chunk=CHUNK):
    """Call ``func(start, stop, rng)`` for each chunk of ``range(total)``.

    Chunk c always draws from substream c of ``seed``, so the returned list
    is identical for any ``workers``.
    """
    seed = as_seed(seed)
    jobs = [(a, b, seed.substream(c)) for c, (a, b) in enumerate(chunk_bounds(total, chunk))]

    def run(job):
        a, b, s = job
        return func(a, b, s.generator())

    if workers is None or workers <= 1 or len(jobs) <= 1:
        return [run(j) for j in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, jobs))


def sample_categorical(cdf, rng, size=None):
    """Draw indices from the last axis of a cumulative table.

    ``cdf`` has shape (..., K); returns integers of shape ``cdf.shape[:-1]``
    (or ``size + cdf.shape[:-1]``).
    """
    shape = cdf.shape[:-1] if size is None else tuple(np.atleast_1d(size)) + cdf.shape[:-1]
    u = rng.random(shape)
    idx = (u[..., None] >= cdf).sum(axis=-1)
    return np.minimum(idx, cdf.shape[-1] - 1)
