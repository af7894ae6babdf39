import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dtmi.bounds import fano_lower_tight
from dtmi.core import StateSpace
from dtmi.errors import AlphabetMismatch, InstanceTooLarge, ValidationError
from dtmi.infotheory import binary_entropy, bsc_joint, plugin_mi
from dtmi.simchannel import (
    Decoder,
    DMCModel,
    FeatureEncoder,
    GaussianChannel,
    build_repetition_encoder,
    cross_mi_exact,
    estimate_chain_mi,
    exact_channel_mi,
    exact_error_small,
    ml_decode,
    run_monte_carlo,
    sample_batch,
    sample_episode,
    stratified_counts,
)

from fuzz import random_system

BSC_MI = 1 - binary_entropy(0.1)
BINARY = StateSpace.uniform(["a", "b"])


def rep(n):
    return build_repetition_encoder([[0], [1]], n, 2)


class TestEncoders:
    def test_repetition(self):
        assert np.array_equal(rep(5).codewords, [[0] * 5, [1] * 5])
        base = [[0, 1, 1], [1, 0, 0]]
        assert np.array_equal(build_repetition_encoder(base, 1).codewords, base)

    def test_alphabet_mismatch(self):
        with pytest.raises(AlphabetMismatch):
            sample_batch([0], FeatureEncoder.from_codewords([[0, 2]]), DMCModel.bsc(0.1), np.random.default_rng())

    def test_append_dimensions(self):
        e = rep(2).append(rep(3))
        assert e.n == 5


class TestSampling:
    def test_identity(self, rng):
        enc = FeatureEncoder.from_codewords([[0, 1, 2], [2, 2, 1]])
        x, y = sample_episode(1, enc, DMCModel.identity(3), rng)
        assert np.array_equal(x, y)

    def test_bsc_zero(self, rng):
        xs, ys = sample_batch(np.zeros(100, int), rep(10), DMCModel.bsc(0.0), rng)
        assert np.array_equal(xs, ys)

    def test_flip_rate(self):
        xs, ys = sample_batch([0], build_repetition_encoder([[0]], 100_000, 2), DMCModel.bsc(0.1),
                              np.random.default_rng(0))
        assert abs(np.mean(xs != ys) - 0.1) <= 0.003

    def test_gaussian(self, rng):
        enc = FeatureEncoder(rep(4).probs, levels=[-1.0, 1.0])
        _, ys = sample_batch(np.ones(20_000, int), enc, GaussianChannel(0.5), rng)
        assert abs(ys.mean() - 1.0) < 0.02 and abs(ys.std() - 0.5) < 0.02


class TestML:
    def test_noiseless(self):
        enc = FeatureEncoder.from_codewords([[0, 1], [1, 0], [1, 1]])
        for w in range(3):
            assert ml_decode(enc.codewords[w], enc, DMCModel.identity(2), np.full(3, 1 / 3)) == w

    def test_tie(self):
        # y at Hamming distance 1 from both codewords
        assert ml_decode([0, 1], rep(2), DMCModel.bsc(0.2), [0.5, 0.5]) == 0

    def test_majority(self, rng):
        ys = rng.integers(0, 2, size=(200, 11))
        for y in ys:
            assert ml_decode(y, rep(11), DMCModel.bsc(0.1), [0.5, 0.5]) == int(y.sum() > 5)


class TestMonteCarlo:
    def test_noiseless(self):
        r = run_monte_carlo(BINARY, rep(3), DMCModel.identity(2), "ml", 2000)
        assert r.p_e == 0.0

    @pytest.mark.parametrize("kind", ["ml", "nearest_centroid"])
    def test_useless_channel(self, kind):
        r = run_monte_carlo(BINARY, rep(3), DMCModel.bsc(0.5), kind, 20_000, seed=1)
        assert abs(r.p_e - 0.5) <= 3 * r.half_width

    def test_matches_exact(self):
        exact = exact_error_small(BINARY, rep(15), DMCModel.bsc(0.1))
        mc = run_monte_carlo(BINARY, rep(15), DMCModel.bsc(0.1), "ml", 100_000, seed=2)
        assert abs(mc.p_e - exact.p_e) <= 3 * mc.half_width

    def test_stratified_identity(self):
        space = StateSpace(("a", "b", "c"), np.array([0.2, 0.3, 0.5]))
        enc = FeatureEncoder.from_codewords([[0, 0], [0, 1], [1, 1]])
        r = run_monte_carlo(space, enc, DMCModel.bsc(0.2), "ml", 10_001, seed=3)
        assert r.p_e == pytest.approx(float(np.dot(space.prior, r.xi)), abs=1e-12)
        assert r.per_state.sum() == 10_001

    @given(st.lists(st.floats(0.0, 1.0), min_size=2, max_size=6).filter(lambda v: sum(v) > 0), st.integers(6, 5000))
    def test_stratified_counts(self, w, trials):
        p = np.array(w) / sum(w)
        c = stratified_counts(p, trials)
        assert np.all(c >= 1)
        assert np.all(np.abs(c - p * trials) < 1 + 1e-9 + (c == 1))

    def test_worker_independent(self):
        a = run_monte_carlo(BINARY, rep(7), DMCModel.bsc(0.2), "ml", 30_000, seed=9, workers=1)
        b = run_monte_carlo(BINARY, rep(7), DMCModel.bsc(0.2), "ml", 30_000, seed=9, workers=6)
        assert a.to_dict() == b.to_dict()

    def test_typicality_counts_failures(self):
        d = Decoder("typicality", epsilon=0.001)
        r = run_monte_carlo(BINARY, rep(20), DMCModel.bsc(0.1), d, 2000, seed=4)
        assert r.p_e > 0.5  # tiny eps: almost every decode is empty

    def test_typicality_requires_codebook(self):
        enc = FeatureEncoder(np.full((2, 3, 2), 0.5))
        with pytest.raises(ValidationError):
            run_monte_carlo(BINARY, enc, DMCModel.bsc(0.1), Decoder("typicality"), 100)


class TestExact:
    def test_majority_three(self):
        assert exact_error_small(BINARY, rep(3), DMCModel.bsc(0.1)).p_e == pytest.approx(
            3 * 0.01 * 0.9 + 0.001, abs=1e-12
        )

    def test_noiseless(self):
        assert exact_error_small(BINARY, rep(3), DMCModel.identity(2)).p_e == 0.0

    def test_too_large(self):
        with pytest.raises(InstanceTooLarge):
            exact_error_small(BINARY, rep(21), DMCModel.bsc(0.1))

    def test_fuzzed_monte_carlo(self):
        rng = np.random.default_rng(77)
        for _ in range(8):
            space, enc, ch = random_system(rng, n=int(rng.integers(1, 6)))
            ex = exact_error_small(space, enc, ch)
            mc = run_monte_carlo(space, enc, ch, "ml", 100_000, seed=int(rng.integers(1 << 30)))
            assert abs(mc.p_e - ex.p_e) <= 3 * max(mc.half_width, 1e-4)


class TestChannelMI:
    def test_bsc(self):
        mi = exact_channel_mi(FeatureEncoder.from_codewords([[0], [1]]), DMCModel.bsc(0.1), [0.5, 0.5])
        assert mi.total == pytest.approx(0.53100, abs=5e-6)
        assert mi.total == pytest.approx(plugin_mi(bsc_joint(0.1)).bits, abs=1e-12)

    def test_useless(self):
        assert exact_channel_mi(rep(4), DMCModel.bsc(0.5), [0.5, 0.5]).total == pytest.approx(0.0, abs=1e-12)

    def test_additive(self):
        assert exact_channel_mi(rep(7), DMCModel.bsc(0.1), [0.5, 0.5]).total == pytest.approx(7 * BSC_MI)

    def test_w_y_below_total(self):
        mi = exact_channel_mi(rep(4), DMCModel.bsc(0.1), [0.5, 0.5], with_w_y=True)
        assert mi.w_y_bits <= 1.0 + 1e-12

    def test_cross_mi(self):
        c = cross_mi_exact(rep(10), DMCModel.bsc(0.1))
        assert c[0, 1] == pytest.approx(5.3100, abs=5e-5) and c[1, 0] == c[0, 1]
        assert np.allclose(cross_mi_exact(rep(10), DMCModel.bsc(0.5)), 0.0)
        assert np.allclose(cross_mi_exact(rep(10), DMCModel.bsc(0.1), strategy="pairwise"), c)

    @settings(max_examples=100)
    @given(st.integers(0, 2**32 - 1))
    def test_appending_never_decreases(self, seed):
        rng = np.random.default_rng(seed)
        space, enc, ch = random_system(rng, stochastic=bool(seed % 2))
        extra = FeatureEncoder(rng.dirichlet(np.ones(enc.alphabet_size), size=(enc.m, 1)))
        before = exact_channel_mi(enc, ch, space.prior).total
        after = exact_channel_mi(enc.append(extra), ch, space.prior).total
        assert after >= before


class TestChain:
    def test_noiseless(self):
        c = estimate_chain_mi(BINARY, rep(3), DMCModel.identity(2), "ml", 20_000, seed=1)
        assert c.w_what == pytest.approx(1.0, abs=1e-3)
        assert c.x_y == pytest.approx(1.0, abs=1e-3)

    def test_useless(self):
        c = estimate_chain_mi(BINARY, rep(2), DMCModel.bsc(0.5), "ml", 100_000, seed=2)
        assert max(c.w_what, c.w_y) < 0.01

    def test_dpi(self):
        c = estimate_chain_mi(BINARY, rep(5), DMCModel.bsc(0.1), "ml", 100_000, seed=3)
        assert c.w_what <= c.w_y + 0.02 <= c.x_y + 0.04


class TestSandwichLower:
    def test_fano_below_ml_error(self):
        mi = exact_channel_mi(rep(5), DMCModel.bsc(0.3), [0.5, 0.5]).total
        r = run_monte_carlo(BINARY, rep(5), DMCModel.bsc(0.3), "ml", 20_000, seed=5)
        assert fano_lower_tight(1.0, min(mi, 1.0), 2) <= r.p_e + 3 * r.half_width
