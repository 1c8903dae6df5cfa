"""ROC curves and AUC."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata


@dataclass(frozen=True)
class RocReport:
    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray
    auc: float
    auc_trapezoid: float


def _binary(scores, labels):
    scores = np.asarray(scores, dtype=float).ravel()
    labels = np.asarray(labels).ravel()
    if scores.shape != labels.shape:
        raise ValueError(f"{scores.size} scores for {labels.size} labels")
    if labels.dtype.kind in "US":
        labels = labels == "attack"
    labels = labels.astype(bool)
    n_pos = int(labels.sum())
    if n_pos == 0 or n_pos == labels.size:
        raise ValueError("ROC needs both classes in labels")
    return scores, labels


def rank_auc(scores, labels) -> float:
    """P(score_pos > score_neg) + 0.5 P(equal), via the Mann-Whitney rank sum."""
    scores, labels = _binary(scores, labels)
    n_pos = labels.sum()
    n_neg = labels.size - n_pos
    ranks = rankdata(scores)
    u = ranks[labels].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def roc_curve(scores, labels):
    """ROC points from a sweep over every distinct score, highest first."""
    scores, labels = _binary(scores, labels)
    order = np.argsort(-scores, kind="mergesort")
    s = scores[order]
    y = labels[order]
    # last index of each run of equal scores
    ends = np.r_[np.flatnonzero(np.diff(s)), s.size - 1]
    tp = np.cumsum(y)[ends]
    fp = (ends + 1) - tp
    tpr = np.r_[0.0, tp / labels.sum()]
    fpr = np.r_[0.0, fp / (~labels).sum()]
    thresholds = np.r_[np.inf, s[ends]]
    return fpr, tpr, thresholds


def roc_auc(scores, labels) -> RocReport:
    fpr, tpr, thresholds = roc_curve(scores, labels)
    trap = float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1]) / 2.0))
    return RocReport(fpr, tpr, thresholds, rank_auc(scores, labels), trap)
