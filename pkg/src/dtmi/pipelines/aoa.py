"""Direction-of-arrival classification with MUSIC on a uniform linear array.

The target is a far-field point source; its snapshots are

    x_t = g * a(theta) * s_t + noise_t,   g = (1 m / distance) ** (ple / 2)

with unit-power random-phase ``s_t`` and circular complex Gaussian noise of
power ``10 ** (-snr_db / 10)``, so ``snr_db`` is the per-snapshot SNR at 1 m.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..bounds import fano_lower_tight
from ..core import PairedSamples, as_seed
from ..errors import OutOfRange, RankDeficient, ValidationError
from ..knn_mi import EstimatorConfig, estimate_dtmi

SPEED_OF_LIGHT = 299_792_458.0
CARRIER_HZ = 5.0e9
# half a wavelength at 5 GHz, i.e. 0.03 m to the nearest centimetre
DEFAULT_SPACING_M = SPEED_OF_LIGHT / CARRIER_HZ / 2.0
DEFAULT_GRID_STEP = math.radians(0.5)
HALF_PLANE = (-math.pi / 2, math.pi / 2)
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class ArrayGeometry:
    q: int = 3
    spacing_m: float = DEFAULT_SPACING_M
    wavelength_m: float = SPEED_OF_LIGHT / CARRIER_HZ

    def __post_init__(self):
        if int(self.q) < 2:
            raise ValidationError("an array needs at least two antennas")
        if self.spacing_m <= 0 or self.wavelength_m <= 0:
            raise ValidationError("spacing and wavelength must be positive")
        if self.spacing_m > self.wavelength_m / 2 * (1 + 1e-12):
            warnings.warn(
                f"antenna spacing {self.spacing_m} m exceeds half a wavelength "
                f"({self.wavelength_m / 2:.5f} m); directions near endfire alias",
                stacklevel=2,
            )


@dataclass(frozen=True)
class AoAScenario:
    geometry: ArrayGeometry = field(default_factory=ArrayGeometry)
    snr_db: float = 20.0
    snapshots: int = 16
    m_classes: int = 9
    angle_range: tuple = HALF_PLANE
    target_distance_m: float = 1.0
    pathloss_exponent: float = 2.0

    def __post_init__(self):
        if self.m_classes < 2:
            raise ValidationError("need at least two direction classes")
        if self.snapshots < self.geometry.q:
            raise RankDeficient("need at least as many snapshots as antennas")
        lo, hi = self.angle_range
        if not (-math.pi / 2 <= lo < hi <= math.pi / 2):
            raise ValidationError("angle range must lie inside [-pi/2, pi/2]")
        if self.target_distance_m <= 0:
            raise ValidationError("target distance must be positive")

    @property
    def amplitude(self) -> float:
        if self.snr_db == -math.inf:
            return 0.0
        return (1.0 / self.target_distance_m) ** (self.pathloss_exponent / 2.0)

    @property
    def noise_power(self) -> float:
        if self.snr_db == math.inf:
            return 0.0
        if self.snr_db == -math.inf:
            return 1.0
        return 10.0 ** (-self.snr_db / 10.0)


def steering_vector(geometry: ArrayGeometry, theta):
    """Array response exp(-j 2 pi p d sin(theta) / lambda), p = 0..q-1.

    Scalar ``theta`` gives a (q,) vector; an array of angles gives (q, len).
    """
    th = np.asarray(theta, dtype=float)
    if np.any(np.abs(th) > math.pi / 2 + 1e-12):
        raise OutOfRange("steering angle outside [-pi/2, pi/2]")
    p = np.arange(geometry.q, dtype=float)
    phase = -2.0 * np.pi * geometry.spacing_m / geometry.wavelength_m * np.multiply.outer(p, np.sin(th))
    return np.exp(1j * phase)


def simulate_snapshot_batch(scenario: AoAScenario, thetas, rng) -> np.ndarray:
    """Snapshots for each true angle in ``thetas``; shape (B, q, T)."""
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    q, t = scenario.geometry.q, scenario.snapshots
    a = steering_vector(scenario.geometry, thetas).T  # (B, q)
    s = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, size=(thetas.size, t)))
    x = scenario.amplitude * a[:, :, None] * s[:, None, :]
    if scenario.noise_power > 0:
        scale = math.sqrt(scenario.noise_power / 2.0)
        x = x + scale * (rng.standard_normal((thetas.size, q, t)) + 1j * rng.standard_normal((thetas.size, q, t)))
    return x


def simulate_snapshots(scenario: AoAScenario, theta_true, seed=0) -> np.ndarray:
    """q x snapshots complex matrix for one source at ``theta_true``."""
    return simulate_snapshot_batch(scenario, [theta_true], as_seed(seed).generator())[0]


def angle_grid(step=DEFAULT_GRID_STEP, angle_range=HALF_PLANE):
    lo, hi = angle_range
    count = int(round((hi - lo) / step)) + 1
    return np.linspace(lo, hi, count)


def _noise_subspace(snapshots, n_sources):
    x = np.asarray(snapshots)
    q, t = x.shape[-2:]
    if t < q:
        raise RankDeficient(f"{t} snapshots for {q} antennas")
    if not 1 <= n_sources < q:
        raise ValidationError(f"n_sources must be in [1, {q - 1}]")
    r = x @ np.conj(np.swapaxes(x, -1, -2)) / t
    _, vecs = np.linalg.eigh(r)  # ascending eigenvalues
    return vecs[..., :, : q - n_sources]


def _den_grid(noise, geometry, grid):
    """||E_n^H a(theta)||^2 on a shared grid; noise (B, q, r) -> (B, G)."""
    proj = np.conj(np.swapaxes(noise, -1, -2)) @ steering_vector(geometry, grid)
    return np.sum(np.abs(proj) ** 2, axis=-2)


def _den_each(noise, geometry, thetas):
    """Same quantity at one angle per subspace; (B, q, r), (B,) -> (B,)."""
    proj = np.einsum("bqk,qb->bk", np.conj(noise), steering_vector(geometry, thetas))
    return np.sum(np.abs(proj) ** 2, axis=-1)


def music_spectrum(snapshots, geometry: ArrayGeometry, n_sources=1, grid_step_rad=DEFAULT_GRID_STEP,
                   angle_range=HALF_PLANE):
    """MUSIC pseudospectrum 1 / (a^H E_n E_n^H a) over a uniform angle grid."""
    noise = _noise_subspace(np.asarray(snapshots)[None], n_sources)
    angles = angle_grid(grid_step_rad, angle_range)
    with np.errstate(divide="ignore"):
        spec = 1.0 / _den_grid(noise, geometry, angles)[0]
    return angles, spec


def estimate_angles(snapshots, geometry: ArrayGeometry, grid_step_rad=DEFAULT_GRID_STEP,
                    angle_range=HALF_PLANE, refine=True) -> np.ndarray:
    """Single-source direction estimate per snapshot matrix, shape (B,).

    The grid peak is polished by golden-section search on the MUSIC
    denominator within one grid step either side.
    """
    x = np.asarray(snapshots)
    if x.ndim == 2:
        x = x[None]
    noise = _noise_subspace(x, 1)
    grid = angle_grid(grid_step_rad, angle_range)
    den = _den_grid(noise, geometry, grid)
    best = grid[np.argmin(den, axis=-1)]
    if not refine:
        return best
    lo = np.maximum(best - grid_step_rad, angle_range[0])
    hi = np.minimum(best + grid_step_rad, angle_range[1])
    c = hi - _GOLDEN * (hi - lo)
    d = lo + _GOLDEN * (hi - lo)
    fc = _den_each(noise, geometry, c)
    fd = _den_each(noise, geometry, d)
    for _ in range(48):
        left = fc < fd
        hi = np.where(left, d, hi)
        lo = np.where(left, lo, c)
        c_new = np.where(left, hi - _GOLDEN * (hi - lo), d)
        d_new = np.where(left, c, lo + _GOLDEN * (hi - lo))
        fc, fd = (
            np.where(left, _den_each(noise, geometry, c_new), fd),
            np.where(left, fc, _den_each(noise, geometry, d_new)),
        )
        c, d = c_new, d_new
    return 0.5 * (lo + hi)


def angle_to_class(theta, m_classes, angle_range=HALF_PLANE):
    """Uniform bin index; bins are left-closed, the last one closed on both sides."""
    lo, hi = angle_range
    th = np.asarray(theta, dtype=float)
    if np.any(th < lo) or np.any(th > hi):
        raise OutOfRange(f"angle outside [{lo}, {hi}]")
    idx = np.floor((th - lo) / (hi - lo) * m_classes).astype(np.int64)
    idx = np.minimum(idx, m_classes - 1)
    return int(idx) if idx.ndim == 0 else idx


@dataclass(frozen=True)
class AoASweepPoint:
    value: float
    accuracy: float
    dtmi_bits: float
    fano_lower: float
    trials: int

    def to_dict(self):
        return dict(self.__dict__)


def _aoa_point(scenario, trials, config, rng):
    m = scenario.m_classes
    lo, hi = scenario.angle_range
    width = (hi - lo) / m
    classes = rng.integers(0, m, size=trials)
    thetas = lo + (classes + rng.random(trials)) * width
    snaps = simulate_snapshot_batch(scenario, thetas, rng)
    est = estimate_angles(snaps, scenario.geometry, angle_range=scenario.angle_range)
    pred = angle_to_class(np.clip(est, lo, hi), m, scenario.angle_range)
    accuracy = float(np.mean(pred == classes))
    dtmi = estimate_dtmi(PairedSamples(classes.astype(float), est), config).bits
    return accuracy, dtmi, fano_lower_tight(math.log2(m), dtmi, m)


def aoa_sweep(scenarios, trials_per_point=2000, estimator_config=EstimatorConfig("mixed_ksg"), seed=0,
              values=None, workers=1):
    """Accuracy, task MI and Fano bound across a list of scenarios.

    True classes are uniform over the m direction bins, true angles uniform
    within their bin.  ``values`` labels the sweep axis (default: SNR).
    Point i draws from substream i of ``seed``, so the series does not
    depend on ``workers``.
    """
    scenarios = list(scenarios)
    if len(scenarios) < 4:
        raise ValidationError("a sweep needs at least four points")
    if values is None:
        values = [s.snr_db for s in scenarios]
    if len(values) != len(scenarios):
        raise ValidationError(f"{len(values)} sweep values for {len(scenarios)} scenarios")
    seed = as_seed(seed)
    trials = int(trials_per_point)

    def point(i):
        return _aoa_point(scenarios[i], trials, estimator_config, seed.substream(i).generator())

    with ThreadPoolExecutor(max_workers=max(1, int(workers))) as pool:
        stats = list(pool.map(point, range(len(scenarios))))
    return [AoASweepPoint(float(v), acc, dtmi, fano, trials) for v, (acc, dtmi, fano) in zip(values, stats)]
