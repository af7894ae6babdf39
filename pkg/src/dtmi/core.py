"""Domain types shared by the whole package.

All information quantities leaving this package are in bits.  Probability
vectors are accepted when they sum to one within :data:`PROB_TOL`; they are
then renormalised exactly, never silently otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Optional, Sequence

import numpy as np

from .errors import (
    DuplicateLabel,
    InvalidDistribution,
    NonFiniteData,
    PriorNotNormalized,
    RowCountMismatch,
    TooFewStates,
    TooManySamples,
    UnknownLabel,
    ValidationError,
)

PROB_TOL = 1e-9
MAX_ROWS = 1_000_000
LN2 = np.log(2.0)

ESTIMATORS = ("plugin", "ksg1", "ksg2", "mixed_ksg")

_MASK64 = (1 << 64) - 1


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def check_probability_vector(p, name="distribution"):
    """Validate and renormalise a probability vector.

    Raises :class:`InvalidDistribution` when an entry leaves [0, 1] or the
    total differs from 1 by more than ``PROB_TOL``.
    """
    p = np.asarray(p, dtype=float)
    if p.ndim == 0 or p.size == 0:
        raise InvalidDistribution(f"{name} is empty")
    if not np.all(np.isfinite(p)):
        raise InvalidDistribution(f"{name} has non-finite entries")
    if np.any(p < 0) or np.any(p > 1):
        raise InvalidDistribution(f"{name} has entries outside [0, 1]")
    total = p.sum()
    if abs(total - 1.0) > PROB_TOL:
        raise InvalidDistribution(f"{name} sums to {total!r}, not 1")
    return p / total


@dataclass(frozen=True)
class StateSpace:
    """The m sensing states and their prior probabilities."""

    labels: tuple
    prior: np.ndarray

    @property
    def m(self) -> int:
        return len(self.labels)

    def index(self, label) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise UnknownLabel(f"label {label!r} not in state space") from None

    def entropy_bits(self) -> float:
        from .infotheory import entropy

        return entropy(self.prior)

    @classmethod
    def uniform(cls, labels) -> "StateSpace":
        labels = list(labels)
        return validate_state_space(labels, np.full(len(labels), 1.0 / max(len(labels), 1)))


def validate_state_space(labels: Sequence[Hashable], prior) -> StateSpace:
    labels = tuple(labels)
    if len(set(labels)) != len(labels):
        raise DuplicateLabel(f"state labels are not distinct: {labels!r}")
    if len(labels) < 2:
        raise TooFewStates(f"need at least two states, got {len(labels)}")
    prior = np.asarray(prior, dtype=float)
    if prior.shape != (len(labels),):
        raise ValidationError(
            f"prior has shape {prior.shape}, expected ({len(labels)},)"
        )
    if not np.all(np.isfinite(prior)) or np.any(prior < 0) or np.any(prior > 1):
        raise PriorNotNormalized("prior entries must lie in [0, 1]")
    total = prior.sum()
    if abs(total - 1.0) > PROB_TOL:
        raise PriorNotNormalized(f"prior sums to {total!r}")
    return StateSpace(labels, _frozen(prior / total))


def _as_matrix(a, name):
    a = np.asarray(a, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2:
        raise ValidationError(f"{name} must be 1-D or 2-D, got {a.ndim}-D")
    return a


@dataclass(frozen=True)
class PairedSamples:
    """N aligned observations of a feature block ``x`` and an embedding ``y``.

    One-dimensional inputs are promoted to single-column matrices.
    """

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = _as_matrix(self.x, "x")
        y = _as_matrix(self.y, "y")
        if x.shape[0] != y.shape[0]:
            raise RowCountMismatch(f"x has {x.shape[0]} rows, y has {y.shape[0]}")
        if x.shape[0] < 1:
            raise ValidationError("samples are empty")
        if x.shape[0] > MAX_ROWS:
            raise TooManySamples(f"{x.shape[0]} rows exceeds the {MAX_ROWS} guard")
        if x.shape[1] < 1 or y.shape[1] < 1:
            raise ValidationError("x and y need at least one column")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise NonFiniteData("samples contain non-finite entries")
        object.__setattr__(self, "x", _frozen(x))
        object.__setattr__(self, "y", _frozen(y))

    @property
    def n_samples(self) -> int:
        return self.x.shape[0]

    @property
    def dx(self) -> int:
        return self.x.shape[1]

    @property
    def dy(self) -> int:
        return self.y.shape[1]


@dataclass(frozen=True)
class LabeledDataset:
    """Feature rows tagged with state labels.

    ``labels`` holds the original identifiers; ``codes`` their index in
    ``states``.  When ``states`` is omitted it is taken from the labels in
    order of first appearance.
    """

    labels: tuple
    features: np.ndarray
    states: Optional[tuple] = None
    codes: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        labels = tuple(self.labels)
        feats = _as_matrix(self.features, "features")
        if feats.shape[0] != len(labels):
            raise RowCountMismatch(
                f"{len(labels)} labels but {feats.shape[0]} feature rows"
            )
        if not np.all(np.isfinite(feats)):
            raise NonFiniteData("features contain non-finite entries")
        states = self.states
        if states is None:
            states = tuple(dict.fromkeys(labels))
        states = tuple(states)
        lookup = {s: i for i, s in enumerate(states)}
        try:
            codes = np.array([lookup[lab] for lab in labels], dtype=np.int64)
        except KeyError as exc:
            raise UnknownLabel(f"label {exc.args[0]!r} not in state set") from None
        codes.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "features", _frozen(feats))
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "codes", codes)

    def __len__(self):
        return len(self.labels)

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def m(self) -> int:
        return len(self.states)

    def subset(self, rows) -> "LabeledDataset":
        rows = np.asarray(rows, dtype=np.int64)
        return LabeledDataset(
            tuple(self.labels[i] for i in rows), self.features[rows], self.states
        )

    def with_labels(self, labels) -> "LabeledDataset":
        return LabeledDataset(tuple(labels), self.features, self.states)


@dataclass(frozen=True)
class MIEstimate:
    """A mutual-information value in bits.

    ``bits`` is ``raw_bits`` clamped at zero; ``clamped`` records whether the
    clamp fired.
    """

    bits: float
    raw_bits: float
    estimator_id: str
    k: Optional[int]
    n_samples: int
    clamped: bool

    @classmethod
    def from_raw(cls, raw_bits, estimator_id, k, n_samples) -> "MIEstimate":
        if estimator_id not in ESTIMATORS:
            raise ValidationError(f"unknown estimator {estimator_id!r}")
        raw = float(raw_bits)
        return cls(max(raw, 0.0), raw, estimator_id, k, int(n_samples), raw < 0.0)

    def to_dict(self):
        return {
            "bits": self.bits,
            "raw_bits": self.raw_bits,
            "estimator_id": self.estimator_id,
            "k": self.k,
            "n_samples": self.n_samples,
            "clamped": self.clamped,
        }


@dataclass(frozen=True)
class BoundReport:
    lower_relaxed: float
    lower_tight: float
    upper_raw: float
    upper_clamped: float
    epsilon: float
    n: int
    m: int
    h_w_bits: float
    dtmi_bits: float

    def to_dict(self):
        return dict(self.__dict__)


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


@dataclass(frozen=True)
class RngSeed:
    """A (seed, stream) pair naming one reproducible random stream."""

    seed: int
    stream: int = 0

    def __post_init__(self):
        for name in ("seed", "stream"):
            v = getattr(self, name)
            if isinstance(v, (bool, np.bool_)) or not isinstance(v, (int, np.integer)):
                raise ValidationError(f"{name} must be an integer, got {v!r}")
            if not 0 <= int(v) <= _MASK64:
                raise ValidationError(f"{name} must fit in 64 unsigned bits")
            object.__setattr__(self, name, int(v))

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream,))
        return np.random.default_rng(ss)

    def substream(self, index: int) -> "RngSeed":
        return derive_substream(self, index)


def as_seed(seed) -> RngSeed:
    if isinstance(seed, RngSeed):
        return seed
    return RngSeed(int(seed))


def derive_substream(seed: RngSeed, index: int) -> RngSeed:
    """Child stream ``index`` of ``seed``.

    The map index -> stream is a composition of 64-bit bijections, so it is
    injective in ``index`` for a fixed parent.
    """
    seed = as_seed(seed)
    index = int(index)
    if not 0 <= index <= _MASK64:
        raise ValidationError("substream index must fit in 64 unsigned bits")
    return RngSeed(seed.seed, _splitmix64(_splitmix64(index) ^ seed.stream))
