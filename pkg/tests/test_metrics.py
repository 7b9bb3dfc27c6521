"""Metric oracles: rank-statistic AUC, closed-form RMSE, entropy limits."""

import math

import numpy as np
import pytest

from qipf.metrics import calibration_rmse, dominance_entropy, roc_auc


def midrank_auc(scores, labels):
    """Mann-Whitney AUC via midranks; handles ties, independent of the
    threshold-sweep construction under test."""
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    order = np.argsort(s)
    ranks = np.empty_like(s)
    i = 0
    s_sorted = s[order]
    while i < s.size:
        j = i
        while j + 1 < s.size and s_sorted[j + 1] == s_sorted[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    pos = y.sum()
    neg = y.size - pos
    u = ranks[y == 1].sum() - pos * (pos + 1) / 2.0
    return u / (pos * neg)


def test_auc_matches_rank_statistic_with_ties():
    rng = np.random.default_rng(0)
    for trial in range(20):
        n = int(rng.integers(10, 80))
        # quantize so duplicate scores appear often
        scores = np.round(rng.normal(size=n), 1)
        labels = rng.integers(0, 2, size=n)
        if labels.sum() in (0, n):
            labels[0] = 1 - labels[0]
        curve = roc_auc(scores, labels)
        assert curve.auc == pytest.approx(midrank_auc(scores, labels),
                                          abs=1e-12)


def test_auc_hand_cases():
    assert roc_auc([0.9, 0.8, 0.2, 0.1], [1, 1, 0, 0]).auc == 1.0
    assert roc_auc([0.1, 0.2, 0.8, 0.9], [1, 1, 0, 0]).auc == 0.0
    assert roc_auc([0.5, 0.5, 0.5, 0.5], [1, 0, 1, 0]).auc == 0.5


def test_roc_curve_endpoints_and_monotonicity():
    rng = np.random.default_rng(1)
    scores = rng.normal(size=50)
    labels = (rng.uniform(size=50) < 0.4).astype(int)
    curve = roc_auc(scores, labels)
    assert curve.fpr[0] == 0.0 and curve.tpr[0] == 0.0
    assert curve.fpr[-1] == 1.0 and curve.tpr[-1] == 1.0
    assert np.all(np.diff(curve.fpr) >= 0)
    assert np.all(np.diff(curve.tpr) >= 0)


def test_auc_validation():
    with pytest.raises(ValueError):
        roc_auc([], [])
    with pytest.raises(ValueError):
        roc_auc([0.1, 0.2], [0, 0, 1])
    with pytest.raises(ValueError):
        roc_auc([0.1, 0.2], [0, 2])
    with pytest.raises(ValueError, match="both classes"):
        roc_auc([0.1, 0.2], [1, 1])


def test_calibration_rmse_closed_forms():
    assert calibration_rmse([1.0, 2.0, 3.0], [2.0, 4.0, 6.0]) == 0.0
    assert calibration_rmse([0.0, 1.0], [1.0, 0.0]) == pytest.approx(1.0)
    assert calibration_rmse([0.0, 0.0], [0.0, 0.0]) == 0.0
    # one max-scaled side against an all-zero side
    assert calibration_rmse([0.0, 3.0], [0.0, 0.0]) == pytest.approx(
        math.sqrt(0.5))


def test_calibration_rmse_validation():
    with pytest.raises(ValueError):
        calibration_rmse([], [])
    with pytest.raises(ValueError):
        calibration_rmse([1.0], [1.0, 2.0])
    with pytest.raises(ValueError):
        calibration_rmse([-1.0, 1.0], [0.0, 1.0])
    with pytest.raises(ValueError):
        calibration_rmse([1.0, 1.0], [0.0, -2.0])


def test_dominance_entropy_limits():
    assert dominance_entropy([5, 5, 5, 5]) == pytest.approx(math.log(4),
                                                            rel=1e-12)
    assert dominance_entropy([0, 12, 0]) == 0.0
    h = dominance_entropy([3, 1, 0, 2])
    assert dominance_entropy([30, 10, 0, 20]) == pytest.approx(h, rel=1e-12)
    want = -(0.5 * math.log(0.5) + 0.25 * math.log(0.25) * 2)
    assert dominance_entropy([2, 1, 1]) == pytest.approx(want, rel=1e-12)


def test_dominance_entropy_validation():
    with pytest.raises(ValueError):
        dominance_entropy([])
    with pytest.raises(ValueError):
        dominance_entropy([1, -1])
    with pytest.raises(ValueError, match="sum to zero"):
        dominance_entropy([0, 0, 0])
