import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dtmi.core import LabeledDataset
from dtmi.errors import ClassTooSmall, EmptyTrainSet, ValidationError
from dtmi.pipelines.classify import cross_validate, knn_classify, make_blobs, stratified_folds


class TestKNN:
    def test_exact_match(self, rng):
        train = LabeledDataset(tuple("abcab"), rng.standard_normal((5, 3)))
        assert knn_classify(train, train.features[2], k=1)[0] == train.codes[2]

    def test_separated_clusters(self, rng):
        a = rng.standard_normal((50, 4))
        b = rng.standard_normal((50, 4)) + 10
        train = LabeledDataset(("a",) * 50 + ("b",) * 50, np.vstack([a, b]))
        test = np.vstack([rng.standard_normal((30, 4)), rng.standard_normal((30, 4)) + 10])
        assert np.array_equal(knn_classify(train, test, 5), [0] * 30 + [1] * 30)

    def test_single_label(self, rng):
        train = LabeledDataset(("z",) * 10, rng.standard_normal((10, 2)))
        assert np.all(knn_classify(train, rng.standard_normal((20, 2)), 3) == 0)

    def test_vote_tie_goes_to_smaller_index(self):
        train = LabeledDataset(("a", "b"), np.array([[-1.0], [1.0]]))
        assert knn_classify(train, [[0.0]], 2)[0] == 0

    def test_distance_tie_goes_to_smaller_row(self):
        train = LabeledDataset(("b", "a"), np.array([[-1.0], [1.0]]), states=("a", "b"))
        assert knn_classify(train, [[0.0]], 1)[0] == 1  # row 0 carries "b"

    def test_empty(self):
        with pytest.raises(EmptyTrainSet):
            knn_classify(LabeledDataset((), np.zeros((0, 2))), [[0, 0]], 1)


class TestFolds:
    @settings(max_examples=50)
    @given(st.lists(st.integers(0, 4), min_size=10, max_size=200), st.integers(2, 5), st.integers(0, 1000))
    def test_partition(self, codes, folds, seed):
        codes = np.array(codes)
        f = stratified_folds(codes, folds, np.random.default_rng(seed))
        assert f.shape == codes.shape and set(np.unique(f)) <= set(range(folds))
        for c in np.unique(codes):
            sizes = np.bincount(f[codes == c], minlength=folds)
            assert sizes.max() - sizes.min() <= 1


class TestCrossValidate:
    def test_separable(self):
        rep = cross_validate(make_blobs(seed=1), folds=5)
        assert rep.mean_accuracy >= 0.99
        assert rep.rate_bits == pytest.approx(math.log2(9) / 30)
        assert rep.lossless.satisfied
        assert len(rep.folds) == 5

    def test_shuffled_control(self):
        ds = make_blobs(seed=2)
        perm = np.random.default_rng(0).permutation(len(ds))
        rep = cross_validate(ds.with_labels([ds.labels[i] for i in perm]), folds=5)
        sigma = math.sqrt((1 / 9) * (8 / 9) / len(ds))
        assert abs(rep.mean_accuracy - 1 / 9) <= 3 * sigma
        assert rep.mean_dtmi_bits <= 0.1

    def test_deterministic(self):
        ds = make_blobs(m=3, per_class=20, n_features=4, seed=3)
        assert cross_validate(ds, seed=5).to_dict() == cross_validate(ds, seed=5).to_dict()

    def test_class_too_small(self):
        ds = LabeledDataset(("a",) * 10 + ("b",) * 3, np.arange(13.0)[:, None])
        with pytest.raises(ClassTooSmall):
            cross_validate(ds, folds=5)

    def test_needs_two_classes(self):
        with pytest.raises(ValidationError):
            cross_validate(LabeledDataset(("a",) * 10, np.zeros((10, 1))), folds=2)
