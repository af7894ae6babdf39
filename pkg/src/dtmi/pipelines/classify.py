"""KNN classification with stratified k-fold cross-validation.

Per fold, the task MI is estimated by pairing training rows (as X) with
test rows (as Y) of the same class, index-aligned in post-shuffle order and
truncated to the shorter of the two.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..bounds import DEFAULT_EPSILON, LosslessReport, lossless_condition
from ..core import LabeledDataset, PairedSamples, as_seed
from ..errors import ClassTooSmall, DimensionMismatch, EmptyTrainSet, ValidationError
from ..knn_mi import EstimatorConfig, estimate_dtmi


def knn_classify(train: LabeledDataset, test_features, k=5, chunk=2048) -> np.ndarray:
    """Majority vote of the k Euclidean nearest training rows.

    Returns indices into ``train.states``.  Vote ties go to the smaller
    state index; distance ties to the smaller training row.
    """
    if len(train) == 0:
        raise EmptyTrainSet("training set is empty")
    k = int(k)
    if not 1 <= k <= len(train):
        raise ValidationError(f"k={k} outside [1, {len(train)}]")
    test = np.asarray(test_features, dtype=float)
    if test.ndim == 1:
        test = test[None]
    if test.shape[1] != train.n_features:
        raise DimensionMismatch(f"test rows have {test.shape[1]} features, train {train.n_features}")
    feats = train.features
    sq = np.einsum("ij,ij->i", feats, feats)
    out = np.empty(test.shape[0], dtype=np.int64)
    for a in range(0, test.shape[0], chunk):
        block = test[a : a + chunk]
        d = sq[None, :] - 2.0 * block @ feats.T + np.einsum("ij,ij->i", block, block)[:, None]
        nearest = np.argsort(d, axis=1, kind="stable")[:, :k]
        votes = train.codes[nearest]
        tally = np.zeros((block.shape[0], train.m), dtype=np.int64)
        np.add.at(tally, (np.arange(block.shape[0])[:, None], votes), 1)
        out[a : a + chunk] = np.argmax(tally, axis=1)
    return out


def stratified_folds(codes, folds, rng) -> np.ndarray:
    """Fold id per row; class sizes per fold differ by at most one."""
    codes = np.asarray(codes)
    assignment = np.empty(codes.size, dtype=np.int64)
    offset = 0
    for c in np.unique(codes):
        rows = np.flatnonzero(codes == c)
        rng.shuffle(rows)
        assignment[rows] = (np.arange(rows.size) + offset) % folds
        offset = (offset + rows.size) % folds
    return assignment


@dataclass(frozen=True)
class FoldResult:
    accuracy: float
    dtmi_bits: float
    per_dim_mi_bits: float
    n_test: int
    n_pairs: int

    def to_dict(self):
        return dict(self.__dict__)


@dataclass(frozen=True)
class CVReport:
    folds: tuple
    mean_accuracy: float
    mean_dtmi_bits: float
    mean_per_dim_mi_bits: float
    lossless: LosslessReport
    m: int
    n: int

    @property
    def rate_bits(self) -> float:
        return self.lossless.rate_bits

    def to_dict(self):
        return {
            "folds": [f.to_dict() for f in self.folds],
            "mean_accuracy": self.mean_accuracy,
            "mean_dtmi_bits": self.mean_dtmi_bits,
            "mean_per_dim_mi_bits": self.mean_per_dim_mi_bits,
            "lossless": self.lossless.to_dict(),
            "m": self.m,
            "n": self.n,
        }


def paired_train_test(train_rows, test_rows, codes, features):
    """Class-wise index-aligned (train, test) feature pairs."""
    xs, ys = [], []
    for c in np.unique(codes):
        tr = train_rows[codes[train_rows] == c]
        te = test_rows[codes[test_rows] == c]
        n = min(tr.size, te.size)
        xs.append(features[tr[:n]])
        ys.append(features[te[:n]])
    return np.vstack(xs), np.vstack(ys)


def cross_validate(dataset: LabeledDataset, folds=5, k=5, estimator_config=EstimatorConfig("mixed_ksg"),
                   seed=0, epsilon=DEFAULT_EPSILON) -> CVReport:
    """Stratified k-fold KNN accuracy, per-fold task MI and the rate test.

    ``dtmi_bits`` follows ``estimator_config``.  ``per_dim_mi_bits`` is the
    per-dimension average (1/n) sum_i I(X_i; Y_i); its fold mean fills the
    off-diagonal of the averaged cross-MI matrix for the lossless test with
    m = class count and n = feature dimension.
    """
    folds = int(folds)
    if folds < 2:
        raise ValidationError("need at least two folds")
    sizes = np.bincount(dataset.codes, minlength=dataset.m)
    present = sizes[sizes > 0]
    if present.size < 2:
        raise ValidationError("need at least two classes")
    if np.any(present < folds):
        raise ClassTooSmall(f"smallest class has {present.min()} rows, fewer than {folds} folds")
    rng = as_seed(seed).generator()
    assign = stratified_folds(dataset.codes, folds, rng)
    # per-row order after the seeded shuffle drives the MI pairing
    order = rng.permutation(len(dataset))
    n_feat = dataset.n_features
    per_dim_cfg = EstimatorConfig(estimator_config.estimator_id, estimator_config.k, "per_dimension_sum",
                                  estimator_config.seed)
    results = []
    for f in range(folds):
        test_rows = order[assign[order] == f]
        train_rows = order[assign[order] != f]
        train = dataset.subset(train_rows)
        pred = knn_classify(train, dataset.features[test_rows], min(k, len(train)))
        acc = float(np.mean(pred == dataset.codes[test_rows]))
        x, y = paired_train_test(train_rows, test_rows, dataset.codes, dataset.features)
        pairs = PairedSamples(x, y)
        dtmi = estimate_dtmi(pairs, estimator_config).bits
        per_dim = estimate_dtmi(pairs, per_dim_cfg).bits / n_feat
        results.append(FoldResult(acc, dtmi, per_dim, int(test_rows.size), int(x.shape[0])))
    m = int(present.size)
    mean_pd = float(np.mean([r.per_dim_mi_bits for r in results]))
    matrix = np.full((m, m), mean_pd)
    lossless = lossless_condition(m, n_feat, matrix, epsilon)
    return CVReport(
        tuple(results),
        float(np.mean([r.accuracy for r in results])),
        float(np.mean([r.dtmi_bits for r in results])),
        mean_pd,
        lossless,
        m,
        n_feat,
    )


def make_blobs(m=9, per_class=60, n_features=30, separation=10.0, noise=1.0, seed=0) -> LabeledDataset:
    """Gaussian clusters with random per-class means of spread ``separation``."""
    rng = as_seed(seed).generator()
    means = separation * rng.standard_normal((m, n_features))
    codes = np.repeat(np.arange(m), per_class)
    feats = means[codes] + noise * rng.standard_normal((codes.size, n_features))
    states = tuple(f"c{i}" for i in range(m))
    return LabeledDataset(tuple(states[c] for c in codes), feats, states)
