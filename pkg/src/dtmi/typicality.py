"""Jointly matching (entropy-typical) sets over finite alphabets.

A pair of length-n sequences belongs to the matching set of a reference
joint when each of the three empirical log-probability rates

    -1/n log2 p(x^n),  -1/n log2 p(y^n),  -1/n log2 p(x^n, y^n)

lies strictly within ``epsilon`` of the matching average entropy.  Symbols
with zero reference probability give an infinite rate and simply fail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DecodeAmbiguous, DecodeEmpty, DimensionMismatch, ValidationError
from .infotheory import check_joint, joint_entropies
from .stats import ProbabilityEstimate, map_chunks, sample_categorical, wilson_interval
from .core import as_seed

DECODE_EMPTY = -1
DECODE_AMBIGUOUS = -2


def _log2(p):
    with np.errstate(divide="ignore"):
        return np.log2(p)


@dataclass(frozen=True)
class ReferenceJoint:
    """Per-dimension joint tables p(x_i, y_i), shape (n, |X|, |Y|)."""

    tables: np.ndarray
    h_x: np.ndarray = field(init=False, repr=False)
    h_y: np.ndarray = field(init=False, repr=False)
    h_xy: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        t = np.asarray(self.tables, dtype=float)
        if t.ndim == 2:
            t = t[None]
        if t.ndim != 3 or t.shape[0] < 1:
            raise ValidationError("reference tables must have shape (n, |X|, |Y|)")
        t = np.stack([check_joint(tab) for tab in t])
        ent = np.array([joint_entropies(tab) for tab in t])
        for name, val in (("tables", t), ("h_x", ent[:, 0]), ("h_y", ent[:, 1]), ("h_xy", ent[:, 2])):
            val = np.ascontiguousarray(val)
            val.setflags(write=False)
            object.__setattr__(self, name, val)

    @classmethod
    def iid(cls, table, n) -> "ReferenceJoint":
        return cls(np.broadcast_to(np.asarray(table, dtype=float), (int(n),) + np.shape(table)))

    @property
    def n(self) -> int:
        return self.tables.shape[0]

    @property
    def x_size(self) -> int:
        return self.tables.shape[1]

    @property
    def y_size(self) -> int:
        return self.tables.shape[2]

    @property
    def mi_bits(self) -> np.ndarray:
        """Per-dimension I(X_i; Y_i)."""
        return np.maximum(self.h_x + self.h_y - self.h_xy, 0.0)

    def with_length(self, n) -> "ReferenceJoint":
        if n == self.n:
            return self
        if not np.all(self.tables == self.tables[0]):
            raise DimensionMismatch(
                f"reference has {self.n} distinct dimensions; cannot resize to {n}"
            )
        return ReferenceJoint.iid(self.tables[0], n)

    def log_tables(self):
        lx = _log2(self.tables.sum(axis=2))
        ly = _log2(self.tables.sum(axis=1))
        lxy = _log2(self.tables)
        return lx, ly, lxy


def _rates(xs, ys, ref):
    """Empirical -1/n log2 rates for batches of sequences, shape (T,)."""
    lx, ly, lxy = ref.log_tables()
    n = ref.n
    dims = np.arange(n)
    rx = -lx[dims, xs].sum(axis=-1) / n
    ry = -ly[dims, ys].sum(axis=-1) / n
    rxy = -lxy[dims, xs, ys].sum(axis=-1) / n
    return rx, ry, rxy


def _check_sequences(xs, ys, ref):
    xs = np.asarray(xs, dtype=np.int64)
    ys = np.asarray(ys, dtype=np.int64)
    if xs.shape[-1] != ref.n or ys.shape[-1] != ref.n:
        raise DimensionMismatch(
            f"sequence lengths {xs.shape[-1]}, {ys.shape[-1]} do not match reference n={ref.n}"
        )
    if np.any(xs < 0) or np.any(xs >= ref.x_size) or np.any(ys < 0) or np.any(ys >= ref.y_size):
        raise ValidationError("symbol outside the reference alphabet")
    return xs, ys


def membership_batch(xs, ys, ref: ReferenceJoint, epsilon) -> np.ndarray:
    """Vectorised :func:`matching_membership` over leading axes."""
    xs, ys = _check_sequences(xs, ys, ref)
    rx, ry, rxy = _rates(xs, ys, ref)
    n = ref.n
    with np.errstate(invalid="ignore"):
        return (
            (np.abs(rx - ref.h_x.sum() / n) < epsilon)
            & (np.abs(ry - ref.h_y.sum() / n) < epsilon)
            & (np.abs(rxy - ref.h_xy.sum() / n) < epsilon)
        )


def matching_membership(x_seq, y_seq, ref: ReferenceJoint, epsilon) -> bool:
    x_seq = np.asarray(x_seq)
    y_seq = np.asarray(y_seq)
    if x_seq.ndim != 1 or y_seq.ndim != 1:
        raise DimensionMismatch("expected one pair of sequences")
    return bool(membership_batch(x_seq, y_seq, ref, epsilon))


def matching_set_log_size_bound(ref: ReferenceJoint, n=None, epsilon=0.05) -> float:
    """log2 of the cardinality bound n*eps + sum_i H(X_i, Y_i)."""
    ref = ref if n is None else ref.with_length(n)
    return float(ref.n * epsilon + ref.h_xy.sum())


def independent_match_bound(ref: ReferenceJoint, epsilon) -> float:
    """2 ** (3 n eps - sum_i I(X_i; Y_i)): chance an independent pair matches."""
    expo = 3.0 * ref.n * epsilon - ref.mi_bits.sum()
    return 2.0 ** expo if expo < 1024 else math.inf


def draw_pairs(ref: ReferenceJoint, trials, rng, mode="joint_draw"):
    """Sample ``trials`` sequence pairs from the reference (or its marginals)."""
    n, a, b = ref.tables.shape
    if mode == "joint_draw":
        cdf = np.cumsum(ref.tables.reshape(n, a * b), axis=1)
        flat = sample_categorical(cdf, rng, size=trials)
        return flat // b, flat % b
    if mode == "product_draw":
        cx = np.cumsum(ref.tables.sum(axis=2), axis=1)
        cy = np.cumsum(ref.tables.sum(axis=1), axis=1)
        return sample_categorical(cx, rng, size=trials), sample_categorical(cy, rng, size=trials)
    raise ValidationError(f"unknown draw mode {mode!r}")


def typicality_probability(ref: ReferenceJoint, n=None, epsilon=0.05, mode="joint_draw",
                           trials=10_000, seed=0, workers=1) -> ProbabilityEstimate:
    """Monte Carlo probability that a drawn pair lands in the matching set.

    ``joint_draw`` samples p(x_i, y_i); ``product_draw`` samples x and y
    independently from the same marginals.
    """
    if trials < 100:
        raise ValidationError("need at least 100 trials")
    ref = ref if n is None else ref.with_length(n)
    seed = as_seed(seed)

    def chunk(a, b, rng):
        xs, ys = draw_pairs(ref, b - a, rng, mode)
        return int(membership_batch(xs, ys, ref, epsilon).sum())

    hits = sum(map_chunks(chunk, trials, seed, workers))
    p = hits / trials
    return ProbabilityEstimate(p, wilson_interval(p, trials), hits, trials, seed)


def _check_codebook(codebook, ref_models):
    cb = np.asarray(codebook, dtype=np.int64)
    if cb.ndim != 2:
        raise ValidationError("codebook must be an m x n symbol matrix")
    if len(ref_models) != cb.shape[0]:
        raise DimensionMismatch(
            f"{len(ref_models)} reference models for {cb.shape[0]} codewords"
        )
    return cb


def typicality_decode_batch(ys, codebook, ref_models, epsilon) -> np.ndarray:
    """Decode each row of ``ys``.

    Returns state indices, with :data:`DECODE_EMPTY` when no codeword
    matches and :data:`DECODE_AMBIGUOUS` when more than one does.
    """
    cb = _check_codebook(codebook, ref_models)
    ys = np.atleast_2d(np.asarray(ys, dtype=np.int64))
    hits = np.stack(
        [membership_batch(np.broadcast_to(cb[j], ys.shape), ys, ref_models[j], epsilon)
         for j in range(cb.shape[0])],
        axis=-1,
    )
    count = hits.sum(axis=-1)
    out = np.argmax(hits, axis=-1)
    out = np.where(count == 0, DECODE_EMPTY, out)
    return np.where(count > 1, DECODE_AMBIGUOUS, out)


def typicality_decode(y_seq, codebook, ref_models, epsilon) -> int:
    """Index of the unique state whose codeword matches ``y_seq``.

    Raises :class:`DecodeAmbiguous` or :class:`DecodeEmpty` otherwise; both
    count as sensing errors.
    """
    y_seq = np.asarray(y_seq)
    if y_seq.ndim != 1:
        raise DimensionMismatch("expected a single embedding sequence")
    out = int(typicality_decode_batch(y_seq[None], codebook, ref_models, epsilon)[0])
    if out == DECODE_EMPTY:
        raise DecodeEmpty("no codeword forms a matching pair")
    if out == DECODE_AMBIGUOUS:
        raise DecodeAmbiguous("several codewords form matching pairs")
    return out
