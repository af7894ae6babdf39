"""Threshold detectors for binary presence/door tasks, plus synthetic signals.

WiFi presence: per subcarrier, the coefficient of variation (std / mean)
of the current window is divided by that of the previous window; the mean
absolute ratio ``y`` inside [0.935, 1.065] reads as an empty room.

RFID door: each tag's RSSI is differenced against its baseline; a mean
absolute differential above 2.5 reads as an open door.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import PairedSamples, as_seed
from ..errors import DimensionMismatch, NoTags, ValidationError, WindowTooShort, ZeroMeanSubcarrier
from ..knn_mi import EstimatorConfig, estimate_dtmi


@dataclass(frozen=True)
class DetectorConfig:
    window_len: int = 100
    threshold_low: float = 0.935
    threshold_high: float = 1.065
    rssi_threshold: float = 2.5

    def __post_init__(self):
        if int(self.window_len) < 2:
            raise WindowTooShort("window length must be at least 2")
        if not self.threshold_low < self.threshold_high:
            raise ValidationError("threshold_low must be below threshold_high")


@dataclass(frozen=True)
class CoVDecision:
    present: bool
    y: float

    @property
    def state(self) -> str:
        return "present" if self.present else "absent"


def coefficient_of_variation(window) -> np.ndarray:
    """Per-row std / mean of a (subcarriers, samples) window."""
    w = np.asarray(window, dtype=float)
    mu = w.mean(axis=1)
    if np.any(mu == 0):
        raise ZeroMeanSubcarrier(f"subcarrier(s) {np.flatnonzero(mu == 0).tolist()} have zero mean")
    return w.std(axis=1) / mu


def cov_embedding(samples, window_len) -> float:
    """Mean |CoV(current) / CoV(previous)| over subcarriers (last two windows)."""
    x = np.asarray(samples, dtype=float)
    if x.ndim == 1:
        x = x[None]
    if int(window_len) < 2:
        raise WindowTooShort("window length must be at least 2")
    if x.shape[1] < 2 * window_len:
        raise WindowTooShort(f"need {2 * window_len} samples for two windows, got {x.shape[1]}")
    prev = coefficient_of_variation(x[:, -2 * window_len : -window_len])
    cur = coefficient_of_variation(x[:, -window_len:])
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.abs(cur / prev)
    # a flat window followed by a flat window has not changed
    ratio = np.where((cur == 0) & (prev == 0), 1.0, ratio)
    return float(np.mean(ratio))


def cov_detect(windowed_samples, config: DetectorConfig = DetectorConfig()) -> CoVDecision:
    y = cov_embedding(windowed_samples, config.window_len)
    absent = config.threshold_low <= y <= config.threshold_high
    return CoVDecision(not absent, y)


@dataclass(frozen=True)
class RSSIDecision:
    open: bool
    mean_differential: float

    @property
    def state(self) -> str:
        return "open" if self.open else "closed"


def rssi_detect(tag_rssi, baseline, config: DetectorConfig = DetectorConfig()) -> RSSIDecision:
    """Door state from tag RSSI (tags x time; the time average is the reading)."""
    r = np.asarray(tag_rssi, dtype=float)
    if r.ndim == 1:
        r = r[:, None]
    if r.shape[0] < 1 or r.shape[1] < 1:
        raise NoTags("no tag readings")
    base = np.atleast_1d(np.asarray(baseline, dtype=float))
    if base.shape != (r.shape[0],):
        raise DimensionMismatch(f"{base.size} baselines for {r.shape[0]} tags")
    diff = float(np.mean(np.abs(r.mean(axis=1) - base)))
    return RSSIDecision(diff > config.rssi_threshold, diff)


# -- synthetic signal models ------------------------------------------------

def simulate_csi(present, n_subcarriers=30, window_len=100, mean=20.0, quiet_std=0.5, active_std=1.5,
                 seed=0) -> np.ndarray:
    """Two consecutive CSI amplitude windows for each entry of ``present``.

    The previous window is always quiet; the current one fluctuates with
    ``active_std`` when a person is present.  Returns (trials, subcarriers,
    2 * window_len).
    """
    rng = as_seed(seed).generator()
    present = np.asarray(present, dtype=bool)
    t = present.size
    gain = mean * (1.0 + 0.2 * rng.random((t, n_subcarriers, 1)))
    prev = gain + quiet_std * rng.standard_normal((t, n_subcarriers, window_len))
    std = np.where(present, active_std, quiet_std)[:, None, None]
    cur = gain + std * rng.standard_normal((t, n_subcarriers, window_len))
    return np.concatenate([prev, cur], axis=2)


def simulate_rfid(n_tags, trials, shift_db=4.0, noise_db=2.5, seed=0):
    """Door states and per-tag RSSI differentials.

    An open door shifts every tag's RSSI by ``shift_db``; each reading adds
    independent Gaussian multipath noise.  Returns ``(open, differentials)``
    with shapes (trials,) and (trials, n_tags).
    """
    if int(n_tags) < 1:
        raise NoTags("need at least one tag")
    rng = as_seed(seed).generator()
    state = rng.integers(0, 2, size=trials).astype(bool)
    diff = state[:, None] * shift_db + noise_db * rng.standard_normal((trials, int(n_tags)))
    return state, diff


@dataclass(frozen=True)
class TagSweepPoint:
    n_tags: int
    accuracy: float
    dtmi_bits: float

    def to_dict(self):
        return dict(self.__dict__)


def rfid_tag_sweep(tag_counts=(1, 2, 3), trials=2000, config: DetectorConfig = DetectorConfig(),
                   estimator_config=EstimatorConfig("mixed_ksg"), seed=0, **model):
    """Detection accuracy and I(W; Y^n) as tags are added."""
    seed = as_seed(seed)
    out = []
    for i, n_tags in enumerate(tag_counts):
        state, diff = simulate_rfid(n_tags, trials, seed=seed.substream(i), **model)
        decided = np.mean(np.abs(diff), axis=1) > config.rssi_threshold
        acc = float(np.mean(decided == state))
        mi = estimate_dtmi(PairedSamples(state.astype(float), diff), estimator_config).bits
        out.append(TagSweepPoint(int(n_tags), acc, mi))
    return out
