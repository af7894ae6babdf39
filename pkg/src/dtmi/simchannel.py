"""Simulated sensing chain W -> X^n -> Y^n -> W_hat.

Encoders map each state to a length-n feature sequence, either a fixed
codeword or a per-dimension distribution.  Channels act dimension-wise:
a discrete memoryless channel (:class:`DMCModel`) or additive Gaussian
noise (:class:`GaussianChannel`).  Monte Carlo runs are stratified by the
prior so that the expected error is exactly the prior-weighted sum of the
per-state error rates.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import logsumexp

from .bounds import DEFAULT_EPSILON
from .core import PROB_TOL, RngSeed, StateSpace, as_seed
from .errors import AlphabetMismatch, InstanceTooLarge, InvalidDistribution, ValidationError
from .infotheory import empirical_joint, plugin_mi
from .stats import map_chunks, sample_categorical, wilson_interval
from .typicality import ReferenceJoint, typicality_decode_batch

MAX_ENUMERATION = 2 ** 20
DECODERS = ("ml", "typicality", "nearest_centroid")


def _check_rows(t, what):
    t = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(t)) or np.any(t < 0) or np.any(t > 1):
        raise InvalidDistribution(f"{what} entries must lie in [0, 1]")
    if np.any(np.abs(t.sum(axis=-1) - 1.0) > PROB_TOL):
        raise InvalidDistribution(f"{what} rows must sum to 1")
    return t / t.sum(axis=-1, keepdims=True)


# -- encoders and channels -------------------------------------------------

@dataclass(frozen=True)
class FeatureEncoder:
    """Per-state, per-dimension feature distributions, shape (m, n, |X|).

    ``levels`` gives the real value of each input symbol, used by the
    Gaussian channel and the nearest-centroid decoder.
    """

    probs: np.ndarray
    levels: Optional[np.ndarray] = None

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 3 or min(p.shape) < 1:
            raise ValidationError("encoder probabilities must have shape (m, n, |X|)")
        p = _check_rows(p, "encoder")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)
        lv = np.arange(p.shape[2], dtype=float) if self.levels is None else np.asarray(self.levels, dtype=float)
        if lv.shape != (p.shape[2],):
            raise AlphabetMismatch(f"{lv.size} levels for an alphabet of {p.shape[2]}")
        lv.setflags(write=False)
        object.__setattr__(self, "levels", lv)

    @classmethod
    def from_codewords(cls, codewords, alphabet_size=None, levels=None) -> "FeatureEncoder":
        cw = np.asarray(codewords, dtype=np.int64)
        if cw.ndim != 2:
            raise ValidationError("codewords must be an m x n symbol matrix")
        if np.any(cw < 0):
            raise AlphabetMismatch("negative symbol in codebook")
        size = int(cw.max()) + 1 if alphabet_size is None else int(alphabet_size)
        if np.any(cw >= size):
            raise AlphabetMismatch("codeword symbol outside the alphabet")
        return cls(np.eye(size)[cw], levels)

    @property
    def m(self) -> int:
        return self.probs.shape[0]

    @property
    def n(self) -> int:
        return self.probs.shape[1]

    @property
    def alphabet_size(self) -> int:
        return self.probs.shape[2]

    @property
    def deterministic(self) -> bool:
        return bool(np.all((self.probs == 0) | (self.probs == 1)))

    @property
    def codewords(self) -> np.ndarray:
        if not self.deterministic:
            raise ValidationError("a stochastic encoder has no fixed codewords")
        return np.argmax(self.probs, axis=2)

    def centroids(self) -> np.ndarray:
        """Expected feature level per state and dimension, shape (m, n)."""
        return self.probs @ self.levels

    def append(self, other: "FeatureEncoder") -> "FeatureEncoder":
        """Concatenate the dimensions of two encoders over the same states."""
        if other.m != self.m:
            raise ValidationError("encoders describe different state counts")
        size = max(self.alphabet_size, other.alphabet_size)
        pad = lambda e: np.pad(e.probs, ((0, 0), (0, 0), (0, size - e.alphabet_size)))
        return FeatureEncoder(np.concatenate([pad(self), pad(other)], axis=1))


def build_repetition_encoder(base_codewords, repeat_factor, alphabet_size=None) -> FeatureEncoder:
    """Tile every base codeword ``repeat_factor`` times."""
    if int(repeat_factor) < 1:
        raise ValidationError("repeat_factor must be at least 1")
    base = np.asarray(base_codewords, dtype=np.int64)
    if base.ndim == 1:
        base = base[:, None]
    return FeatureEncoder.from_codewords(np.tile(base, (1, int(repeat_factor))), alphabet_size)


@dataclass(frozen=True)
class DMCModel:
    """Discrete memoryless channel; ``table`` is (|X|, |Y|) or (n, |X|, |Y|)."""

    table: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.table, dtype=float)
        if t.ndim not in (2, 3):
            raise ValidationError("channel table must be (|X|, |Y|) or (n, |X|, |Y|)")
        t = _check_rows(t, "channel")
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    @classmethod
    def bsc(cls, crossover) -> "DMCModel":
        p = float(crossover)
        return cls([[1 - p, p], [p, 1 - p]])

    @classmethod
    def symmetric(cls, q, error) -> "DMCModel":
        """q-ary symmetric channel: error mass spread evenly on the other symbols."""
        t = np.full((q, q), error / (q - 1))
        np.fill_diagonal(t, 1.0 - error)
        return cls(t)

    @classmethod
    def identity(cls, q) -> "DMCModel":
        return cls(np.eye(q))

    @property
    def input_size(self) -> int:
        return self.table.shape[-2]

    @property
    def output_size(self) -> int:
        return self.table.shape[-1]

    def tables(self, n) -> np.ndarray:
        if self.table.ndim == 2:
            return np.broadcast_to(self.table, (n,) + self.table.shape)
        if self.table.shape[0] != n:
            raise AlphabetMismatch(f"channel has {self.table.shape[0]} dimensions, encoder {n}")
        return self.table


@dataclass(frozen=True)
class GaussianChannel:
    """Additive white Gaussian noise with per-dimension standard deviation."""

    sigma: object

    def __post_init__(self):
        s = np.atleast_1d(np.asarray(self.sigma, dtype=float))
        if not np.all(np.isfinite(s)) or np.any(s <= 0):
            raise ValidationError("noise standard deviation must be finite and positive")
        s.setflags(write=False)
        object.__setattr__(self, "sigma", s)

    def sigmas(self, n) -> np.ndarray:
        if self.sigma.size == 1:
            return np.full(n, self.sigma[0])
        if self.sigma.size != n:
            raise AlphabetMismatch(f"{self.sigma.size} noise levels for {n} dimensions")
        return self.sigma


def _check_pair(encoder, channel):
    if isinstance(channel, DMCModel):
        if channel.input_size != encoder.alphabet_size:
            raise AlphabetMismatch(
                f"encoder alphabet {encoder.alphabet_size} != channel input {channel.input_size}"
            )
        channel.tables(encoder.n)
    elif isinstance(channel, GaussianChannel):
        channel.sigmas(encoder.n)
    else:
        raise ValidationError(f"unsupported channel {type(channel).__name__}")


# -- sampling --------------------------------------------------------------

def sample_batch(states, encoder: FeatureEncoder, channel, rng):
    """Draw one episode per entry of ``states``; returns ``(xs, ys)``."""
    _check_pair(encoder, channel)
    states = np.asarray(states, dtype=np.int64)
    if np.any(states < 0) or np.any(states >= encoder.m):
        raise ValidationError("state index out of range")
    n = encoder.n
    xcdf = np.cumsum(encoder.probs, axis=2)[states]
    xs = sample_categorical(xcdf, rng)
    if isinstance(channel, DMCModel):
        ycdf = np.cumsum(channel.tables(n), axis=2)
        ys = sample_categorical(ycdf[np.arange(n), xs], rng)
    else:
        ys = encoder.levels[xs] + channel.sigmas(n) * rng.standard_normal(xs.shape)
    return xs, ys


def sample_episode(state, encoder, channel, rng):
    xs, ys = sample_batch([state], encoder, channel, rng)
    return xs[0], ys[0]


# -- decoders --------------------------------------------------------------

@dataclass(frozen=True)
class Decoder:
    """Decoding rule.

    ``kind`` is ``"ml"``, ``"typicality"`` or ``"nearest_centroid"``.  For
    the typicality rule, ``reference`` picks the joint defining each state's
    matching set: ``"induced"`` (the prior-averaged per-dimension joint, the
    default) or ``"conditional"`` (the candidate state's own joint).
    """

    kind: str = "ml"
    epsilon: float = DEFAULT_EPSILON
    reference: str = "induced"

    def __post_init__(self):
        if self.kind not in DECODERS:
            raise ValidationError(f"unknown decoder {self.kind!r}")
        if self.reference not in ("induced", "conditional"):
            raise ValidationError(f"unknown reference {self.reference!r}")


def _prior_vector(prior, m):
    p = np.asarray(prior.prior if isinstance(prior, StateSpace) else prior, dtype=float)
    if p.shape != (m,):
        raise ValidationError(f"prior of length {p.size} for {m} states")
    return p


def state_loglik(ys, encoder, channel) -> np.ndarray:
    """log p(y^n | w) for every row of ``ys`` and every state, shape (T, m)."""
    n = encoder.n
    if isinstance(channel, DMCModel):
        eff = np.einsum("win,inj->wij", encoder.probs, channel.tables(n))
        with np.errstate(divide="ignore"):
            leff = np.log(eff)
        ys = np.asarray(ys, dtype=np.int64)
        return leff[:, np.arange(n), ys].sum(axis=-1).T
    sig = channel.sigmas(n)
    ys = np.asarray(ys, dtype=float)
    # (T, 1, n, 1) - (1, 1, 1, A)
    z = (ys[:, None, :, None] - encoder.levels[None, None, None, :]) / sig[None, None, :, None]
    lg = -0.5 * z * z - np.log(sig)[None, None, :, None] - 0.5 * np.log(2 * np.pi)
    with np.errstate(divide="ignore"):
        lp = np.log(encoder.probs)[None]
    return logsumexp(lg + lp, axis=-1).sum(axis=-1)


def _argmax_first(scores):
    # near-equal scores count as ties so floating summation order cannot flip them
    best = np.max(scores, axis=-1, keepdims=True)
    tol = 1e-9 * np.maximum(1.0, np.abs(np.where(np.isfinite(best), best, 0.0)))
    return np.argmax(scores >= best - tol, axis=-1)


def ml_decode_batch(ys, encoder, channel, prior) -> np.ndarray:
    p = _prior_vector(prior, encoder.m)
    with np.errstate(divide="ignore"):
        scores = np.log(p)[None] + state_loglik(ys, encoder, channel)
    return _argmax_first(scores)


def ml_decode(y_seq, encoder, channel, prior) -> int:
    """argmax_w p(w) p(y^n | w); ties go to the smallest state index."""
    return int(ml_decode_batch(np.asarray(y_seq)[None], encoder, channel, prior)[0])


def nearest_centroid_batch(ys, encoder) -> np.ndarray:
    c = encoder.centroids()
    d = ((np.asarray(ys, dtype=float)[:, None, :] - c[None]) ** 2).sum(axis=-1)
    return _argmax_first(-d)


def induced_joint_tables(encoder, channel, prior) -> np.ndarray:
    """p(x_i, y_i) = sum_w p(w) p(x_i | w) p(y_i | x_i), shape (n, |X|, |Y|)."""
    if not isinstance(channel, DMCModel):
        raise ValidationError("exact joints need a discrete channel")
    _check_pair(encoder, channel)
    p = _prior_vector(prior, encoder.m)
    px = np.einsum("w,win->in", p, encoder.probs)
    return px[:, :, None] * channel.tables(encoder.n)


def reference_models(encoder, channel, prior, reference="induced"):
    """Per-state reference joints for the typicality decoder."""
    if reference == "induced":
        ref = ReferenceJoint(induced_joint_tables(encoder, channel, prior))
        return [ref] * encoder.m
    tabs = channel.tables(encoder.n)
    return [ReferenceJoint(encoder.probs[w][:, :, None] * tabs) for w in range(encoder.m)]


def decode_batch(ys, encoder, channel, prior, decoder: Decoder, refs=None) -> np.ndarray:
    if decoder.kind == "ml":
        return ml_decode_batch(ys, encoder, channel, prior)
    if decoder.kind == "nearest_centroid":
        return nearest_centroid_batch(ys, encoder)
    if not isinstance(channel, DMCModel):
        raise ValidationError("typicality decoding needs a discrete channel")
    if refs is None:
        refs = reference_models(encoder, channel, prior, decoder.reference)
    return typicality_decode_batch(ys, encoder.codewords, refs, decoder.epsilon)


# -- Monte Carlo -----------------------------------------------------------

def stratified_counts(prior, trials) -> np.ndarray:
    """Largest-remainder allocation of ``trials`` over the prior, at least 1 each."""
    p = np.asarray(prior, dtype=float)
    raw = p * trials
    counts = np.floor(raw).astype(np.int64)
    short = int(trials - counts.sum())
    if short > 0:
        order = np.argsort(-(raw - counts), kind="stable")
        counts[order[:short]] += 1
    return np.maximum(counts, 1)


@dataclass(frozen=True)
class MonteCarloResult:
    p_e: float
    xi: np.ndarray
    ci_95: tuple
    trials: int
    seed: RngSeed
    errors: np.ndarray
    per_state: np.ndarray

    @property
    def half_width(self) -> float:
        return 0.5 * (self.ci_95[1] - self.ci_95[0])

    def to_dict(self):
        return {
            "p_e": self.p_e,
            "xi": self.xi.tolist(),
            "ci_95": list(self.ci_95),
            "trials": self.trials,
            "seed": [self.seed.seed, self.seed.stream],
            "errors": self.errors.tolist(),
            "per_state": self.per_state.tolist(),
        }


def _simulate(space, encoder, channel, decoder, trials, seed, workers, keep=False):
    if space.m != encoder.m:
        raise ValidationError(f"state space has {space.m} states, encoder {encoder.m}")
    _check_pair(encoder, channel)
    if decoder.kind == "typicality" and not encoder.deterministic:
        raise ValidationError("typicality decoding needs a deterministic codebook")
    counts = stratified_counts(space.prior, trials)
    states = np.repeat(np.arange(space.m), counts)
    refs = None
    if decoder.kind == "typicality":
        refs = reference_models(encoder, channel, space.prior, decoder.reference)

    def chunk(a, b, rng):
        xs, ys = sample_batch(states[a:b], encoder, channel, rng)
        dec = decode_batch(ys, encoder, channel, space.prior, decoder, refs)
        return (xs, ys, dec) if keep else dec

    parts = map_chunks(chunk, states.size, seed, workers)
    return counts, states, parts


def run_monte_carlo(space: StateSpace, encoder, channel, decoder=Decoder(), trials=10_000, seed=0,
                    workers=1) -> MonteCarloResult:
    """Estimate the per-state and expected error of a decoder by simulation."""
    if isinstance(decoder, str):
        decoder = Decoder(decoder)
    seed = as_seed(seed)
    counts, states, parts = _simulate(space, encoder, channel, decoder, trials, seed, workers)
    dec = np.concatenate(parts)
    wrong = dec != states
    errors = np.bincount(states, weights=wrong, minlength=space.m).astype(np.int64)
    xi = errors / counts
    p_e = float(np.dot(space.prior, xi))
    total = int(counts.sum())
    return MonteCarloResult(p_e, xi, wilson_interval(p_e, total), total, seed, errors, counts)


@dataclass(frozen=True)
class ExactError:
    p_e: float
    xi: np.ndarray

    def to_dict(self):
        return {"p_e": self.p_e, "xi": self.xi.tolist()}


def _all_sequences(alphabet, n):
    if alphabet ** n > MAX_ENUMERATION:
        raise InstanceTooLarge(f"{alphabet}^{n} sequences exceeds {MAX_ENUMERATION}")
    return np.array(list(itertools.product(range(alphabet), repeat=n)), dtype=np.int64).reshape(-1, n)


def exact_error_small(space: StateSpace, encoder, channel, decoder=Decoder()) -> ExactError:
    """Exact per-state and expected error by enumerating every output sequence."""
    if isinstance(decoder, str):
        decoder = Decoder(decoder)
    if not isinstance(channel, DMCModel):
        raise ValidationError("exact enumeration needs a discrete channel")
    _check_pair(encoder, channel)
    ys = _all_sequences(channel.output_size, encoder.n)
    lik = np.exp(state_loglik(ys, encoder, channel))  # (Y^n, m)
    dec = decode_batch(ys, encoder, channel, space.prior, decoder)
    wrong = dec[:, None] != np.arange(encoder.m)[None, :]
    xi = (lik * wrong).sum(axis=0)
    xi = np.clip(xi, 0.0, 1.0)
    return ExactError(float(np.dot(space.prior, xi)), xi)


# -- exact information quantities ------------------------------------------

@dataclass(frozen=True)
class ChannelMI:
    per_dimension: np.ndarray
    total: float
    joints: np.ndarray
    w_y_bits: Optional[float] = None

    def to_dict(self):
        return {
            "per_dimension": self.per_dimension.tolist(),
            "total": self.total,
            "w_y_bits": self.w_y_bits,
        }


def exact_w_y_mi(encoder, channel, prior) -> float:
    """I(W; Y^n) by enumerating all output sequences."""
    p = _prior_vector(prior, encoder.m)
    ys = _all_sequences(channel.output_size, encoder.n)
    joint = np.exp(state_loglik(ys, encoder, channel)).T * p[:, None]
    return plugin_mi(joint / joint.sum()).bits


def exact_channel_mi(encoder, channel, prior, with_w_y=False) -> ChannelMI:
    """Per-dimension I(X_i; Y_i) under the prior-induced joint, and their sum."""
    joints = induced_joint_tables(encoder, channel, prior)
    per = np.array([plugin_mi(j).bits for j in joints])
    total = 0.0
    for v in per:
        total += v
    wy = exact_w_y_mi(encoder, channel, prior) if with_w_y else None
    return ChannelMI(per, float(total), joints, wy)


CROSS_STRATEGIES = ("reference_joint", "pairwise")


def cross_mi_exact(encoder, channel, prior=None, strategy="reference_joint") -> np.ndarray:
    """Matrix of summed per-dimension MI exponents for the upper bound.

    ``reference_joint``: every off-diagonal entry is the total MI of the
    prior-induced per-dimension joint, the distribution whose marginals an
    independent candidate pair shares.  ``pairwise``: entry (j, k) uses the
    joint induced by states j and k alone, weighted by their renormalised
    prior.  The diagonal is zero and unused.
    """
    m = encoder.m
    p = np.full(m, 1.0 / m) if prior is None else _prior_vector(prior, m)
    out = np.zeros((m, m))
    if strategy == "reference_joint":
        total = exact_channel_mi(encoder, channel, p).total
        out[~np.eye(m, dtype=bool)] = total
        return out
    if strategy == "pairwise":
        for j in range(m):
            for k in range(j + 1, m):
                w = np.zeros(m)
                pair = p[[j, k]]
                w[[j, k]] = pair / pair.sum() if pair.sum() > 0 else 0.5
                out[j, k] = out[k, j] = exact_channel_mi(encoder, channel, w).total
        return out
    raise ValidationError(f"unknown strategy {strategy!r}")


@dataclass(frozen=True)
class ChainMI:
    w_what: float
    w_y: float
    x_y: float
    trials: int

    def to_dict(self):
        return dict(self.__dict__)


def _row_codes(a):
    a = np.asarray(a)
    if a.ndim == 1:
        a = a[:, None]
    return np.unique(a, axis=0, return_inverse=True)[1].ravel()


def estimate_chain_mi(space, encoder, channel, decoder=Decoder(), trials=100_000, seed=0, workers=1) -> ChainMI:
    """Plug-in estimates of I(W; W_hat), I(W; Y^n) and I(X^n; Y^n) from simulation."""
    if isinstance(decoder, str):
        decoder = Decoder(decoder)
    if not isinstance(channel, DMCModel):
        raise ValidationError("plug-in chain estimates need a discrete channel")
    counts, states, parts = _simulate(space, encoder, channel, decoder, trials, seed, workers, keep=True)
    xs = np.concatenate([p[0] for p in parts])
    ys = np.concatenate([p[1] for p in parts])
    dec = np.concatenate([p[2] for p in parts])
    # decode failures form their own output symbol
    dec = np.where(dec < 0, encoder.m - dec - 1, dec)
    ycode = _row_codes(ys)
    xcode = _row_codes(xs)
    return ChainMI(
        plugin_mi(empirical_joint(states, dec)).bits,
        plugin_mi(empirical_joint(states, ycode)).bits,
        plugin_mi(empirical_joint(xcode, ycode)).bits,
        int(states.size),
    )
