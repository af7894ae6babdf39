"""k-nearest-neighbour mutual information estimators.

All three estimators work in the joint space with the max-norm:

* ``ksg1`` counts marginal neighbours strictly inside the k-th joint
  distance;
* ``ksg2`` counts marginal neighbours within the projected marginal radius
  of the k nearest joint neighbours;
* ``mixed_ksg`` tolerates discrete atoms: where the k-th distance is zero,
  k becomes the number of coincident points.

Neighbour search uses a KD-tree (exact); :func:`count_within_maxnorm` is
the brute-force primitive the tree results are tested against.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .core import LN2, MIEstimate, PairedSamples, RngSeed, as_seed
from .errors import DegenerateData, DimensionMismatch, TooFewSamples, TooManySamples, ValidationError
from .infotheory import digamma

MAX_SAMPLES = 50_000
DEFAULT_K = 3
JITTER = 1e-10

KNN_ESTIMATORS = ("ksg1", "ksg2", "mixed_ksg")
AGGREGATIONS = ("joint", "per_dimension_sum")


@dataclass(frozen=True)
class EstimatorConfig:
    estimator_id: str = "mixed_ksg"
    k: int = DEFAULT_K
    aggregation: str = "joint"
    seed: int = 0

    def __post_init__(self):
        if self.estimator_id not in KNN_ESTIMATORS:
            raise ValidationError(f"unknown estimator {self.estimator_id!r}")
        if self.aggregation not in AGGREGATIONS:
            raise ValidationError(f"unknown aggregation {self.aggregation!r}")
        if int(self.k) < 1:
            raise ValidationError("k must be at least 1")


@dataclass(frozen=True)
class NeighborCounts:
    n_x: np.ndarray
    n_y: np.ndarray
    kth_distance: np.ndarray


def count_within_maxnorm(points, center_index, radius, strict=False) -> int:
    """Number of points other than ``center_index`` within ``radius``.

    Max-norm distance; ``strict`` selects ``<`` instead of ``<=``.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if radius < 0:
        raise ValidationError("radius must be non-negative")
    d = np.max(np.abs(pts - pts[center_index]), axis=1)
    inside = d < radius if strict else d <= radius
    inside[center_index] = False
    return int(inside.sum())


def _strict(r):
    # cKDTree balls are closed; the largest float below r makes them open
    return np.nextafter(r, 0.0)


def _ball_counts(tree, pts, radius, workers=1):
    # the centre itself is always inside a closed ball of radius >= 0
    radius = np.maximum(radius, 0.0)
    return tree.query_ball_point(pts, radius, p=np.inf, return_length=True, workers=workers) - 1


def _check(samples: PairedSamples, k: int):
    n = samples.n_samples
    k = int(k)
    if k < 1:
        raise ValidationError("k must be at least 1")
    if n < k + 1:
        raise TooFewSamples(f"need more than k={k} samples, got {n}")
    if n > MAX_SAMPLES:
        raise TooManySamples(f"{n} samples exceeds the per-call guard of {MAX_SAMPLES}")
    return n, k


def _dejitter(block, rng):
    """Break coordinate ties with a tiny deterministic perturbation."""
    out = block.copy()
    for c in range(out.shape[1]):
        col = out[:, c]
        if np.unique(col).size < col.size:
            scale = np.std(col) or np.max(np.abs(col)) or 1.0
            out[:, c] = col + JITTER * scale * rng.standard_normal(col.size)
    return out


def _prepare_continuous(samples, seed):
    x, y = samples.x, samples.y
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise DegenerateData("a marginal has all points identical")
    rng = as_seed(seed).generator()
    return _dejitter(x, rng), _dejitter(y, rng)


def neighbor_counts(x, y, k, rule, workers=1) -> NeighborCounts:
    """Marginal neighbour counts for the ksg1/ksg2 rules."""
    z = np.hstack([x, y])
    dist, idx = cKDTree(z).query(z, k=k + 1, p=np.inf, workers=workers)
    eps = dist[:, k]
    tx, ty = cKDTree(x), cKDTree(y)
    if rule == "ksg1":
        nx = _ball_counts(tx, x, _strict(eps), workers)
        ny = _ball_counts(ty, y, _strict(eps), workers)
    elif rule == "ksg2":
        nbrs = idx[:, 1:]
        ex = np.max(np.abs(x[nbrs] - x[:, None, :]), axis=(1, 2))
        ey = np.max(np.abs(y[nbrs] - y[:, None, :]), axis=(1, 2))
        nx = _ball_counts(tx, x, ex, workers)
        ny = _ball_counts(ty, y, ey, workers)
    else:
        raise ValidationError(f"unknown counting rule {rule!r}")
    return NeighborCounts(nx, ny, eps)


def ksg1(samples: PairedSamples, k: int = DEFAULT_K, seed=0, workers=1) -> MIEstimate:
    """Kraskov-Stoegbauer-Grassberger estimator, first variant."""
    n, k = _check(samples, k)
    x, y = _prepare_continuous(samples, seed)
    c = neighbor_counts(x, y, k, "ksg1", workers)
    nats = digamma(k) + digamma(n) - np.mean(digamma(c.n_x + 1.0) + digamma(c.n_y + 1.0))
    return MIEstimate.from_raw(nats / LN2, "ksg1", k, n)


def ksg2(samples: PairedSamples, k: int = DEFAULT_K, seed=0, workers=1) -> MIEstimate:
    """Kraskov-Stoegbauer-Grassberger estimator, second variant."""
    n, k = _check(samples, k)
    x, y = _prepare_continuous(samples, seed)
    c = neighbor_counts(x, y, k, "ksg2", workers)
    nats = (
        digamma(k)
        - 1.0 / k
        + digamma(n)
        - np.mean(digamma(np.maximum(c.n_x, 1)) + digamma(np.maximum(c.n_y, 1)))
    )
    return MIEstimate.from_raw(nats / LN2, "ksg2", k, n)


def mixed_ksg(samples: PairedSamples, k: int = DEFAULT_K, workers=1) -> MIEstimate:
    """Fixed-k estimator for mixtures of discrete atoms and continuous parts."""
    n, k = _check(samples, k)
    x, y = samples.x, samples.y
    z = np.hstack([x, y])
    tz, tx, ty = cKDTree(z), cKDTree(x), cKDTree(y)
    dist, _ = tz.query(z, k=k + 1, p=np.inf, workers=workers)
    rho = dist[:, k]
    atom = rho == 0.0

    kk = np.full(n, float(k))
    radius = _strict(rho)
    # at an atom, k is the number of coincident points and the marginal
    # balls close to radius zero
    if np.any(atom):
        kk[atom] = _ball_counts(tz, z[atom], np.zeros(atom.sum()), workers)
        radius = np.where(atom, 0.0, radius)
    nx = _ball_counts(tx, x, radius, workers)
    ny = _ball_counts(ty, y, radius, workers)
    nats = np.mean(digamma(kk) + digamma(n) - digamma(nx + 1.0) - digamma(ny + 1.0))
    return MIEstimate.from_raw(nats / LN2, "mixed_ksg", k, n)


def _run(estimator_id, samples, k, seed, workers):
    if estimator_id == "ksg1":
        return ksg1(samples, k, seed=seed, workers=workers)
    if estimator_id == "ksg2":
        return ksg2(samples, k, seed=seed, workers=workers)
    if estimator_id == "mixed_ksg":
        return mixed_ksg(samples, k, workers=workers)
    raise ValidationError(f"unknown estimator {estimator_id!r}")


def estimate_dtmi(samples: PairedSamples, config: EstimatorConfig = EstimatorConfig(), workers=1) -> MIEstimate:
    """Mutual information between the feature block and the embedding block.

    ``aggregation="joint"`` estimates in the full joint space;
    ``"per_dimension_sum"`` pairs column i of x with column i of y and adds
    the per-pair estimates, which is exact only when the dimensions are
    mutually independent.
    """
    n, _ = _check(samples, config.k)
    if config.aggregation == "joint" or (samples.dx == 1 and samples.dy == 1):
        return _run(config.estimator_id, samples, config.k, config.seed, workers)
    if samples.dx != samples.dy:
        raise DimensionMismatch(
            f"per-dimension pairing needs equal widths, got {samples.dx} and {samples.dy}"
        )
    seed = as_seed(config.seed)
    raw = 0.0
    for i in range(samples.dx):
        part = PairedSamples(samples.x[:, i], samples.y[:, i])
        est = _run(config.estimator_id, part, config.k, seed.substream(i), workers)
        raw += est.raw_bits
    return MIEstimate.from_raw(raw, config.estimator_id, config.k, n)
