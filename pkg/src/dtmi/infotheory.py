"""Exact information measures on finite distributions, in bits."""

from __future__ import annotations

import math

import numpy as np

from .core import PROB_TOL, MIEstimate, check_probability_vector
from .errors import DegenerateCorrelation, InvalidDistribution, NonPositiveArgument, OutOfRange

EULER_GAMMA = 0.57721566490153286061

# B_{2k} / (2k) for k = 1..6
_ASYMPTOTIC = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
)


def _plogp(p):
    p = np.asarray(p, dtype=float)
    out = np.zeros_like(p)
    nz = p > 0
    out[nz] = p[nz] * np.log2(p[nz])
    return out


def entropy(dist) -> float:
    """Shannon entropy of a probability vector, with 0 log 0 = 0."""
    p = check_probability_vector(np.ravel(dist))
    return float(max(-_plogp(p).sum(), 0.0))


def binary_entropy(p: float) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise OutOfRange(f"probability {p!r} outside [0, 1]")
    if p == 0.0 or p == 1.0:
        return 0.0
    return float(-p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p))


def check_joint(joint) -> np.ndarray:
    """Validate a 2-D joint probability table and renormalise it."""
    j = np.asarray(joint, dtype=float)
    if j.ndim != 2 or j.size == 0:
        raise InvalidDistribution("joint table must be a non-empty matrix")
    if not np.all(np.isfinite(j)) or np.any(j < 0) or np.any(j > 1):
        raise InvalidDistribution("joint table entries must lie in [0, 1]")
    total = j.sum()
    if abs(total - 1.0) > PROB_TOL:
        raise InvalidDistribution(f"joint table sums to {total!r}")
    return j / total


def _joint_entropies(j):
    hxy = -_plogp(j).sum()
    hx = -_plogp(j.sum(axis=1)).sum()
    hy = -_plogp(j.sum(axis=0)).sum()
    return hx, hy, hxy


def joint_entropies(joint):
    """Return ``(H(X), H(Y), H(X,Y))`` of a joint table."""
    return tuple(float(v) for v in _joint_entropies(check_joint(joint)))


def plugin_mi(joint) -> MIEstimate:
    """Exact I(X;Y) = H(X) + H(Y) - H(X,Y) of a joint table."""
    j = check_joint(joint)
    hx, hy, hxy = _joint_entropies(j)
    raw = hx + hy - hxy
    # exact value is never negative; clamp only round-off
    return MIEstimate.from_raw(raw, "plugin", None, 0)


def conditional_entropy(joint) -> float:
    """H(X|Y) for a table indexed ``[x, y]``."""
    j = check_joint(joint)
    _, hy, hxy = _joint_entropies(j)
    return float(max(hxy - hy, 0.0))


def empirical_joint(a, b, size_a=None, size_b=None) -> np.ndarray:
    """Normalised contingency table of two integer-coded sequences."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    if size_a is None:
        a = np.unique(a, return_inverse=True)[1]
        size_a = int(a.max()) + 1
    if size_b is None:
        b = np.unique(b, return_inverse=True)[1]
        size_b = int(b.max()) + 1
    counts = np.zeros((size_a, size_b))
    np.add.at(counts, (a, b), 1.0)
    return counts / counts.sum()


def digamma(x):
    """Digamma function for positive real arguments.

    Upward recurrence to x >= 6, then the asymptotic expansion through
    x**-12.  Accepts scalars or arrays.
    """
    scalar = np.ndim(x) == 0
    x = np.array(x, dtype=float, ndmin=1)
    if np.any(~np.isfinite(x)) or np.any(x <= 0):
        raise NonPositiveArgument("digamma needs finite positive arguments")
    shift = np.zeros_like(x)
    x = x.copy()
    small = x < 6.0
    while np.any(small):
        shift[small] += 1.0 / x[small]
        x[small] += 1.0
        small = x < 6.0
    inv2 = 1.0 / (x * x)
    series = np.zeros_like(x)
    for coef in reversed(_ASYMPTOTIC):
        series = (series + coef) * inv2
    out = np.log(x) - 0.5 / x - series - shift
    return float(out[0]) if scalar else out


def gaussian_mi_oracle(rho: float) -> float:
    """I(X;Y) of a unit bivariate Gaussian with correlation ``rho``."""
    rho = float(rho)
    if not abs(rho) < 1.0:
        raise DegenerateCorrelation(f"|rho| must be < 1, got {rho!r}")
    return 0.0 - 0.5 * math.log2(1.0 - rho * rho)  # no -0.0 at rho = 0


def bsc_joint(crossover: float, p_one: float = 0.5) -> np.ndarray:
    """Joint table of a binary symmetric channel with input P(X=1)=p_one."""
    px = np.array([1.0 - p_one, p_one])
    ch = np.array([[1.0 - crossover, crossover], [crossover, 1.0 - crossover]])
    return px[:, None] * ch
