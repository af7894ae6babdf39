"""Error bounds and decision criteria driven by task mutual information.

Lower bound (Fano): any decoder's expected error P satisfies

    P * log2(m) + H(P) >= H(W) - I(X^n; Y^n).

Upper bound (joint typicality decoder):

    P <= eps + sum_k p(w_k) sum_{j != k} 2 ** (3 n eps - S[j, k])

where ``S[j, k]`` is the summed per-dimension mutual information of the
candidate/true state pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import BoundReport, PairedSamples, StateSpace
from .errors import DimensionMismatch, Infeasible, InvalidArguments, NonPositiveEpsilon
from .infotheory import binary_entropy

DEFAULT_EPSILON = 0.05
BISECT_TOL = 1e-10
# combined estimator tolerance for calling two features indistinguishable
TIE_TOLERANCE = 0.02


def _check_args(h_w_bits, dtmi_bits, m):
    if not (np.isfinite(h_w_bits) and np.isfinite(dtmi_bits)):
        raise InvalidArguments("entropy and mutual information must be finite")
    if h_w_bits < 0 or dtmi_bits < 0:
        raise InvalidArguments("entropy and mutual information must be non-negative")
    if int(m) != m or m < 2:
        raise InvalidArguments(f"state count must be an integer >= 2, got {m!r}")
    return float(h_w_bits), float(dtmi_bits), int(m)


def fano_lower_relaxed(h_w_bits, dtmi_bits, m) -> float:
    """Fano bound with the binary entropy term replaced by its maximum, 1."""
    h, i, m = _check_args(h_w_bits, dtmi_bits, m)
    return float(min(max((h - i - 1.0) / math.log2(m), 0.0), 1.0))


def fano_lhs(p, m) -> float:
    """P * log2(m) + H(P)."""
    return p * math.log2(m) + binary_entropy(p)


def fano_lower_tight(h_w_bits, dtmi_bits, m) -> float:
    """Smallest P with P * log2(m) + H(P) >= H(W) - DTMI.

    The left side increases strictly on [0, m/(m+1)], where it climbs from 0
    to log2(m+1), so the feasible set there is an interval whose left end is
    found by bisection.
    """
    h, i, m = _check_args(h_w_bits, dtmi_bits, m)
    target = h - i
    if target <= 0.0:
        return 0.0
    hi = m / (m + 1.0)
    if target > math.log2(m + 1):
        raise Infeasible(
            f"H(W) - I = {target!r} exceeds the largest attainable value log2(m+1)"
        )
    lo = 0.0
    while hi - lo > BISECT_TOL:
        mid = 0.5 * (lo + hi)
        if fano_lhs(mid, m) >= target:
            hi = mid
        else:
            lo = mid
    return float(hi)


def log2_sum_exp2(exponents) -> float:
    """log2(sum(2 ** e)) without overflow."""
    e = np.asarray(exponents, dtype=float).ravel()
    if e.size == 0:
        return -math.inf
    top = np.max(e)
    if not np.isfinite(top):
        return float(top)
    return float(top + np.log2(np.sum(np.exp2(e - top))))


def typicality_upper_bound(cross_mi, prior, n, epsilon=DEFAULT_EPSILON):
    """Return ``(upper_raw, upper_clamped)``.

    ``cross_mi[j][k]`` holds the summed mutual-information exponent of
    candidate state j against true state k; the diagonal is ignored.
    ``prior`` is a :class:`StateSpace` or a bare probability vector.
    """
    s = np.asarray(cross_mi, dtype=float)
    p = np.asarray(prior.prior if isinstance(prior, StateSpace) else prior, dtype=float)
    m = p.size
    if s.ndim != 2 or s.shape != (m, m):
        raise DimensionMismatch(f"cross-MI matrix shape {s.shape} does not match m={m}")
    if m < 2:
        raise DimensionMismatch("need at least two states")
    if not epsilon > 0:
        raise NonPositiveEpsilon(f"epsilon must be positive, got {epsilon!r}")
    if int(n) < 1:
        raise InvalidArguments("n must be at least 1")
    off = ~np.eye(m, dtype=bool)
    if np.any(np.isnan(s[off])) or np.any(s[off] < 0):
        raise InvalidArguments("off-diagonal cross-MI terms must be non-negative")
    # term (j, k) carries weight p(w_k): column k
    with np.errstate(divide="ignore"):
        log_w = np.broadcast_to(np.log2(p)[None, :], (m, m))
    expo = log_w + 3.0 * n * epsilon - s
    keep = off & np.isfinite(expo)
    tail = log2_sum_exp2(expo[keep]) if np.any(keep) else -math.inf
    raw = float(epsilon + (2.0 ** tail if tail < 1024 else math.inf))
    return raw, float(min(raw, 1.0))


@dataclass(frozen=True)
class LosslessReport:
    rate_bits: float
    threshold_bits: float
    satisfied: bool
    margin_bits: float

    def to_dict(self):
        return dict(self.__dict__)


def lossless_condition(m, n, averaged_cross_mi, epsilon=DEFAULT_EPSILON) -> LosslessReport:
    """Sufficient condition for vanishing error: log2(m)/n < min MI - 3 eps.

    ``averaged_cross_mi`` is the m x m matrix of per-dimension averaged
    mutual information; its diagonal is ignored.
    """
    a = np.asarray(averaged_cross_mi, dtype=float)
    m, n = int(m), int(n)
    if a.shape != (m, m) or m < 2:
        raise DimensionMismatch(f"matrix shape {a.shape} does not match m={m}")
    if n < 1:
        raise InvalidArguments("n must be at least 1")
    if epsilon < 0:
        raise InvalidArguments("epsilon must be non-negative")
    rate = math.log2(m) / n
    threshold = float(np.min(a[~np.eye(m, dtype=bool)])) - 3.0 * epsilon
    margin = threshold - rate
    return LosslessReport(rate, threshold, bool(margin > 0), margin)


def sensing_rate(m, n) -> float:
    return math.log2(int(m)) / int(n)


def preprocessing_check(h_w_bits, i_x_d_bits) -> str:
    """``"lossless_impossible"`` when H(W) - I(X^n; D^l) > 1, else ``"inconclusive"``.

    No amount of preprocessing downstream of D can then bring the Fano
    bound to zero.
    """
    if not (np.isfinite(h_w_bits) and np.isfinite(i_x_d_bits)):
        raise InvalidArguments("arguments must be finite")
    if h_w_bits < 0 or i_x_d_bits < 0:
        raise InvalidArguments("arguments must be non-negative")
    return "lossless_impossible" if h_w_bits - i_x_d_bits > 1.0 else "inconclusive"


def bound_report(h_w_bits, dtmi_bits, m, cross_mi, prior, n, epsilon=DEFAULT_EPSILON) -> BoundReport:
    """Both bounds in one record."""
    upper_raw, upper_clamped = typicality_upper_bound(cross_mi, prior, n, epsilon)
    return BoundReport(
        lower_relaxed=fano_lower_relaxed(h_w_bits, dtmi_bits, m),
        lower_tight=fano_lower_tight(h_w_bits, dtmi_bits, m),
        upper_raw=upper_raw,
        upper_clamped=upper_clamped,
        epsilon=float(epsilon),
        n=int(n),
        m=int(m),
        h_w_bits=float(h_w_bits),
        dtmi_bits=float(dtmi_bits),
    )


@dataclass(frozen=True)
class ComparisonReport:
    dtmi_a: object
    dtmi_b: object
    fano_a: float
    fano_b: float
    preferred: str  # "a", "b" or "indistinguishable"

    def to_dict(self):
        return {
            "dtmi_a": self.dtmi_a.to_dict(),
            "dtmi_b": self.dtmi_b.to_dict(),
            "fano_a": self.fano_a,
            "fano_b": self.fano_b,
            "preferred": self.preferred,
        }


def compare_features(samples_a: PairedSamples, samples_b: PairedSamples, config, state_entropy_bits, m,
                     tolerance=TIE_TOLERANCE) -> ComparisonReport:
    """Rank two candidate features by their estimated task mutual information."""
    from .knn_mi import estimate_dtmi

    ea = estimate_dtmi(samples_a, config)
    eb = estimate_dtmi(samples_b, config)
    fa = fano_lower_tight(state_entropy_bits, ea.bits, m)
    fb = fano_lower_tight(state_entropy_bits, eb.bits, m)
    if abs(ea.bits - eb.bits) <= tolerance:
        preferred = "indistinguishable"
    else:
        preferred = "a" if ea.bits > eb.bits else "b"
    return ComparisonReport(ea, eb, fa, fb, preferred)
