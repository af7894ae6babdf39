"""End-to-end acceptance checks.

Each test prints one PASS/FAIL line and attaches it to the run so the
terminal summary lists all of them together.  Thresholds are the stated
targets; nothing here is tuned to make a check pass.
"""

import itertools
import math
import time

import numpy as np
import pytest
from scipy.optimize import brentq

from dtmi.bounds import fano_lower_tight, fano_lower_relaxed, lossless_condition, typicality_upper_bound
from dtmi.core import PairedSamples, StateSpace
from dtmi.infotheory import bsc_joint, gaussian_mi_oracle, plugin_mi
from dtmi.knn_mi import ksg1, ksg2, mixed_ksg
from dtmi.pipelines.aoa import (
    DEFAULT_GRID_STEP,
    AoAScenario,
    ArrayGeometry,
    aoa_sweep,
    music_spectrum,
    simulate_snapshots,
)
from dtmi.pipelines.classify import cross_validate, make_blobs
from dtmi.pipelines.detectors import cov_detect, rfid_tag_sweep, rssi_detect
from dtmi.report import pearson
from dtmi.simchannel import (
    Decoder,
    DMCModel,
    FeatureEncoder,
    build_repetition_encoder,
    cross_mi_exact,
    estimate_chain_mi,
    exact_channel_mi,
    run_monte_carlo,
)
from dtmi.typicality import (
    ReferenceJoint,
    independent_match_bound,
    matching_set_log_size_bound,
    membership_batch,
    typicality_probability,
)

from cli_inputs import commands, invoke, make_inputs
from fuzz import random_system


@pytest.fixture
def verdict(record_property):
    def record(order, name, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'}  [{order:2d}] {name}: {detail}"
        print(line)
        record_property("acceptance", (order, line))
        assert ok, line

    return record


def gaussian_pairs(rho, n, seed):
    r = np.random.default_rng(seed)
    x = r.standard_normal((n, 1))
    return PairedSamples(x, rho * x + math.sqrt(1 - rho**2) * r.standard_normal((n, 1)))


def test_estimator_accuracy(verdict):
    start = time.perf_counter()
    worst = []
    ok = True
    for rho in (0.0, 0.3, 0.6, 0.9):
        truth = gaussian_mi_oracle(rho)
        tol = 0.07 if rho == 0.9 else 0.05
        errs = {"ksg1": [], "ksg2": [], "mixed_ksg": []}
        for s in range(20):
            data = gaussian_pairs(rho, 10_000, 1000 + s)
            errs["ksg1"].append(abs(ksg1(data, 3, seed=s).bits - truth))
            errs["ksg2"].append(abs(ksg2(data, 3, seed=s).bits - truth))
            errs["mixed_ksg"].append(abs(mixed_ksg(data, 3).bits - truth))
        for name, e in errs.items():
            med = float(np.median(e))
            worst.append((med, name, rho))
            ok &= med <= tol
    elapsed = time.perf_counter() - start
    med, name, rho = max(worst)
    verdict(1, "kNN estimators on Gaussian pairs", ok and elapsed < 60,
            f"worst median error {med:.4f} bits ({name}, rho={rho}), {elapsed:.1f} s")


def test_plugin_bsc(verdict):
    got = plugin_mi(bsc_joint(0.1)).bits
    truth = 1 + 0.1 * math.log2(0.1) + 0.9 * math.log2(0.9)
    verdict(2, "plug-in MI on BSC(0.1)", abs(got - truth) <= 1e-9 and abs(truth - 0.53100) < 5e-6,
            f"{got:.12f} vs {truth:.12f}")


def test_fano_tight(verdict):
    def h(p):
        return -p * math.log2(p) - (1 - p) * math.log2(1 - p)

    root = brentq(lambda p: p + h(p) - 1.0, 1e-12, 0.5, xtol=1e-15)
    got = fano_lower_tight(1.0, 0.0, 2)
    m = 9
    axis = np.linspace(0, math.log2(m), 100)
    grid = np.array([[fano_lower_tight(a, d, m) for d in axis] for a in axis])
    relaxed = np.array([[fano_lower_relaxed(a, d, m) for d in axis] for a in axis])
    props = (np.all(np.diff(grid, axis=1) <= 1e-12) and np.all(np.diff(grid, axis=0) >= -1e-12)
             and np.all(grid >= relaxed - 1e-12) and np.all((grid >= 0) & (grid <= 1)))
    verdict(3, "tight Fano bound", abs(got - root) <= 1e-8 and props,
            f"{got:.12f} vs oracle {root:.12f}; 100x100 grid properties {'hold' if props else 'fail'}")


def test_lower_sandwich(verdict):
    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    slack = []
    for i in range(50):
        space, enc, ch = random_system(rng, m=int(rng.integers(2, 5)), n=int(rng.integers(1, 9)))
        mi = exact_channel_mi(enc, ch, space.prior).total
        lower = fano_lower_tight(space.entropy_bits(), min(mi, space.entropy_bits()), space.m)
        mc = run_monte_carlo(space, enc, ch, "ml", 100_000, seed=i)
        slack.append(mc.p_e - (lower - 3 * mc.half_width))
    elapsed = time.perf_counter() - start
    verdict(4, "Fano lower bound under Monte Carlo ML error", min(slack) >= 0 and elapsed < 300,
            f"50 channels, min slack {min(slack):.4f}, {elapsed:.1f} s")


def test_upper_sandwich(verdict):
    bad = []
    for p, n in itertools.product((0.02, 0.05, 0.1), (100, 200, 400)):
        enc = build_repetition_encoder([[0], [1]], n, 2)
        ch = DMCModel.bsc(p)
        prior = np.array([0.5, 0.5])
        _, upper = typicality_upper_bound(cross_mi_exact(enc, ch, prior), prior, n, 0.1)
        mc = run_monte_carlo(StateSpace.uniform(["a", "b"]), enc, ch, Decoder("typicality", 0.1), 20_000,
                             seed=int(1000 * p) + n)
        if mc.p_e > upper + 3 * mc.half_width:
            bad.append(f"p={p} n={n}: {mc.p_e:.3f} > {upper:.3f}")
    verdict(5, "typicality upper bound under Monte Carlo error", not bad,
            f"{9 - len(bad)}/9 cells hold" + (f"; violations {'; '.join(bad)}" if bad else ""))


def test_matching_set_properties(verdict):
    eps = 0.1
    table = bsc_joint(0.1)
    big = typicality_probability(ReferenceJoint.iid(table, 500), epsilon=eps, trials=10_000, seed=1)
    trend = [typicality_probability(ReferenceJoint.iid(table, n), epsilon=eps, trials=10_000, seed=2).p
             for n in (50, 200, 800)]
    ref = ReferenceJoint.iid(table, 50)
    prod = typicality_probability(ref, epsilon=eps, mode="product_draw", trials=10_000, seed=3)
    indep_ok = prod.p <= independent_match_bound(ref, eps) + 3 * prod.half_width
    small = ReferenceJoint.iid(bsc_joint(0.1, 0.3), 8)
    seqs = np.array(list(itertools.product((0, 1), repeat=8)))
    xs, ys = np.repeat(seqs, len(seqs), axis=0), np.tile(seqs, (len(seqs), 1))
    size_ok = all(
        int(membership_batch(xs, ys, small, e).sum()) <= 2 ** matching_set_log_size_bound(small, epsilon=e)
        for e in (0.05, 0.1, 0.2, 0.5)
    )
    ok = big.p >= 0.95 and bool(np.all(np.diff(trend) >= 0)) and indep_ok and size_ok
    verdict(6, "matching-set probabilities and size", ok,
            f"joint n=500 {big.p:.4f}; trend {[round(t, 4) for t in trend]}; "
            f"product {prod.p:.2e} vs {independent_match_bound(ref, eps):.2e}; "
            f"n=8 size bound {'holds' if size_ok else 'fails'}")


def test_rate_trend(verdict):
    eps = 0.05
    pattern = np.random.default_rng(0).integers(0, 2, 30)
    base = np.stack([pattern, 1 - pattern])
    ch = DMCModel.bsc(0.1)
    space = StateSpace.uniform(["a", "b"])
    medians, lossless = [], True
    for factor in (5, 10, 20, 40):
        enc = build_repetition_encoder(base, factor, 2)
        per_dim = cross_mi_exact(enc, ch, space.prior) / enc.n
        lossless &= lossless_condition(2, enc.n, per_dim, eps).satisfied
        errs = [run_monte_carlo(space, enc, ch, Decoder("typicality", eps), 2000, seed=s).p_e for s in range(5)]
        medians.append(float(np.median(errs)))
    ok = lossless and bool(np.all(np.diff(medians) < 0)) and medians[-1] < 2 * eps
    verdict(7, "typicality error falls with n below the rate threshold", ok,
            f"n=150..1200 median error {[round(v, 4) for v in medians]}")


def test_data_processing(verdict):
    rng = np.random.default_rng(99)
    gaps = []
    for i in range(20):
        space, enc, ch = random_system(rng, n=int(rng.integers(1, 5)))
        c = estimate_chain_mi(space, enc, ch, "ml", 100_000, seed=i)
        gaps.append(c.w_what - c.x_y)
    verdict(8, "I(W;W_hat) <= I(X;Y) + 0.02", max(gaps) <= 0.02,
            f"20 channels, max I(W;W_hat) - I(X;Y) = {max(gaps):.4f} bits")


def test_multimodal_monotone(verdict):
    rng = np.random.default_rng(7)
    worst = math.inf
    for i in range(100):
        space, enc, ch = random_system(rng, stochastic=bool(i % 2))
        extra = FeatureEncoder(rng.dirichlet(np.ones(enc.alphabet_size), size=(enc.m, 1)))
        before = exact_channel_mi(enc, ch, space.prior).total
        after = exact_channel_mi(enc.append(extra), ch, space.prior).total
        worst = min(worst, after - before)
    verdict(9, "appending a dimension never lowers exact MI", worst >= 0, f"min increase {worst:.3e} bits")


def test_music(verdict):
    rng = np.random.default_rng(5)
    worst = 0.0
    for q in (3, 4, 8):
        g = ArrayGeometry(q)
        sc = AoAScenario(g, snr_db=math.inf)
        for i, th in enumerate(rng.uniform(-math.pi / 2, math.pi / 2, 50)):
            angles, spec = music_spectrum(simulate_snapshots(sc, th, seed=i), g)
            worst = max(worst, abs(angles[np.nanargmax(spec)] - th))
    g = ArrayGeometry()
    noise = AoAScenario(g, snr_db=-math.inf, snapshots=64)
    ratios = []
    for s in range(20):
        _, spec = music_spectrum(simulate_snapshots(noise, 0.0, s), g)
        ratios.append(spec.max() / spec.min())
    ok = worst <= DEFAULT_GRID_STEP + 1e-12 and np.median(ratios) < 10
    verdict(10, "MUSIC peak and noise-only flatness", ok,
            f"max grid-peak error {math.degrees(worst):.3f} deg; median noise max/min {np.median(ratios):.2f}")


def test_aoa_correlation(verdict):
    start = time.perf_counter()
    snrs = [-10, -5, 0, 5, 10, 15, 20]
    r_mi, r_fano = [], []
    for s in range(5):
        pts = aoa_sweep([AoAScenario(ArrayGeometry(), snr_db=v, m_classes=9) for v in snrs], 2000, seed=s)
        acc = [p.accuracy for p in pts]
        r_mi.append(pearson(acc, [p.dtmi_bits for p in pts]).r)
        r_fano.append(pearson(acc, [1 - p.fano_lower for p in pts]).r)
    elapsed = time.perf_counter() - start
    a, b = float(np.median(r_mi)), float(np.median(r_fano))
    verdict(11, "AoA accuracy tracks DTMI over SNR", a >= 0.8 and b >= 0.8 and elapsed < 600,
            f"median Pearson vs DTMI {a:.4f}, vs 1-Fano {b:.4f}, {elapsed:.1f} s")


def test_classification(verdict):
    ds = make_blobs(m=9, n_features=30, seed=11)
    rep = cross_validate(ds, folds=5, seed=0)
    perm = np.random.default_rng(1).permutation(len(ds))
    null = cross_validate(ds.with_labels([ds.labels[i] for i in perm]), folds=5, seed=0)
    sigma = math.sqrt((1 / 9) * (8 / 9) / len(ds))
    ok = (rep.mean_accuracy >= 0.99 and abs(rep.rate_bits - 0.10566) < 5e-6 and rep.lossless.satisfied
          and abs(null.mean_accuracy - 1 / 9) <= 3 * sigma and null.mean_dtmi_bits <= 0.1)
    verdict(12, "KNN classification pipeline", ok,
            f"accuracy {rep.mean_accuracy:.4f}, R {rep.rate_bits:.5f}, lossless {rep.lossless.satisfied}; "
            f"shuffled accuracy {null.mean_accuracy:.4f}, DTMI {null.mean_dtmi_bits:.4f}")


def test_detectors(verdict):
    rng = np.random.default_rng(0)
    w = rng.standard_normal((5, 100))
    w -= w.mean(axis=1, keepdims=True)
    same = cov_detect(np.hstack([10 + w, 10 + w]))
    quad = cov_detect(np.hstack([10 + w, 10 + 2 * w]))
    door = rssi_detect([0.0, 0.0, 9.0], [0.0, 0.0, 0.0])
    units = (abs(same.y - 1) < 1e-12 and same.state == "absent" and abs(quad.y - 2) < 1e-12
             and quad.state == "present" and door.state == "open")
    runs = [rfid_tag_sweep((1, 2, 3), 2000, seed=s) for s in range(20)]
    acc = np.median([[p.accuracy for p in r] for r in runs], axis=0)
    mi = np.median([[p.dtmi_bits for p in r] for r in runs], axis=0)
    ok = units and bool(np.all(np.diff(acc) >= 0) and np.all(np.diff(mi) >= 0))
    verdict(13, "presence and door detectors", ok,
            f"unit examples {'exact' if units else 'wrong'}; tags 1..3 accuracy {np.round(acc, 4).tolist()}, "
            f"DTMI {np.round(mi, 4).tolist()}")


def test_cli_determinism(verdict, tmp_path):
    files = make_inputs(tmp_path)
    differing = []
    for name, argv in commands(files).items():
        outs = []
        for run_id, workers in enumerate((4, 4, 1)):
            out = tmp_path / f"{name}-{run_id}"
            extra = ["--seed", 21, "--workers", workers, "--out", f"{out}.json"]
            if name in ("aoa-sweep", "correlate"):
                extra += ["--plot", f"{out}.svg"]
            code, _ = invoke(*argv, *extra)
            outs.append((code, [p.read_bytes() for p in sorted(tmp_path.glob(f"{name}-{run_id}.*"))]))
        if outs[0][0] != 0 or not outs[0] == outs[1] == outs[2]:
            differing.append(name)
    verdict(14, "CLI reruns are byte-identical", not differing,
            f"{len(commands(files)) - len(differing)}/8 subcommands identical"
            + (f"; differing {differing}" if differing else ""))
