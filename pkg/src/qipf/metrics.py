"""Uncertainty-quality metrics: calibration RMSE, ROC/AUC, dominance entropy."""

from dataclasses import dataclass

import numpy as np


@dataclass
class RocCurve:
    """Operating points swept over score thresholds, high to low."""

    fpr: np.ndarray
    tpr: np.ndarray
    auc: float


def calibration_rmse(uncertainty, abs_errors) -> float:
    """RMSE between max-scaled uncertainty and max-scaled absolute error.

    Each series is divided by its own maximum (when positive) so the
    result lands in [0, 1]; an all-zero side is compared unscaled.
    """
    u = np.asarray(uncertainty, dtype=np.float64).ravel()
    e = np.asarray(abs_errors, dtype=np.float64).ravel()
    if u.size != e.size or u.size == 0:
        raise ValueError("series must share a positive length")
    if np.any(u < 0) or np.any(e < 0):
        raise ValueError("series must be non-negative")
    umax = u.max()
    emax = e.max()
    if umax > 0:
        u = u / umax
    if emax > 0:
        e = e / emax
    return float(np.sqrt(np.mean((u - e) ** 2)))


def roc_auc(scores, labels) -> RocCurve:
    """ROC over all thresholds with tied scores grouped; trapezoid AUC.

    labels are binary with both classes present; higher scores should
    indicate the positive class.
    """
    s = np.asarray(scores, dtype=np.float64).ravel()
    y = np.asarray(labels).ravel().astype(np.int64)
    if s.size != y.size or s.size == 0:
        raise ValueError("scores and labels must share a positive length")
    if not np.all((y == 0) | (y == 1)):
        raise ValueError("labels must be binary (0/1)")
    pos = int(y.sum())
    neg = y.size - pos
    if pos == 0 or neg == 0:
        raise ValueError("both classes must be present")
    order = np.argsort(-s, kind="stable")
    s_sorted = s[order]
    y_sorted = y[order]
    # threshold group ends: last index of each run of equal scores
    ends = np.nonzero(np.diff(s_sorted) != 0)[0]
    ends = np.append(ends, s_sorted.size - 1)
    tp = np.cumsum(y_sorted)[ends]
    fp = (ends + 1) - tp
    tpr = np.concatenate([[0.0], tp / pos])
    fpr = np.concatenate([[0.0], fp / neg])
    auc = float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1]) * 0.5))
    return RocCurve(fpr, tpr, auc)


def dominance_entropy(counts) -> float:
    """Shannon entropy (natural log) of a normalized dominance histogram."""
    c = np.asarray(counts, dtype=np.float64).ravel()
    if c.size == 0 or np.any(c < 0):
        raise ValueError("counts must be non-negative and non-empty")
    total = c.sum()
    if total == 0:
        raise ValueError("counts sum to zero")
    p = c / total
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))
