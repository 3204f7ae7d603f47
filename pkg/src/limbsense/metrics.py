"""ROC curves, AUC, and Pearson correlation.

The production AUC comes from trapezoidal integration of the tie-collapsed
ROC curve; :func:`pairwise_auc` is the independent probabilistic estimator
kept for verification.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConstantInputError, SingleClassLabelsError


@dataclass(frozen=True)
class RocCurve:
    """Tie-collapsed ROC points, their thresholds, and the trapezoidal AUC.

    Points run from (0, 0) at threshold +inf to (1, 1) at the lowest score;
    thresholds[i] is the smallest score still classified positive at point i.
    """

    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray
    auc: float

    def __post_init__(self) -> None:
        for a in (self.fpr, self.tpr, self.thresholds):
            a.setflags(write=False)


def _validate_scores_labels(scores, labels) -> tuple[np.ndarray, np.ndarray]:
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise ValueError("scores and labels must be 1-D and equally long")
    if not np.all(np.isfinite(scores)):
        raise ValueError("scores must be finite")
    n_pos = int(np.sum(labels == 1))
    n_neg = int(np.sum(labels == 0))
    if n_pos == 0 or n_neg == 0:
        raise SingleClassLabelsError(
            f"need both classes, got {n_pos} positive / {n_neg} negative"
        )
    return scores, labels


def roc_curve(scores, labels) -> RocCurve:
    """ROC curve with thresholds swept over distinct scores, descending."""
    scores, labels = _validate_scores_labels(scores, labels)
    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    sorted_labels = labels[order]
    # Last index of each run of tied scores: one ROC point per distinct score.
    distinct = np.nonzero(np.diff(sorted_scores))[0]
    boundaries = np.append(distinct, len(sorted_scores) - 1)
    tps = np.cumsum(sorted_labels)[boundaries]
    fps = 1 + boundaries - tps
    tpr = np.concatenate([[0.0], tps / tps[-1]])
    fpr = np.concatenate([[0.0], fps / fps[-1]])
    thresholds = np.concatenate([[np.inf], sorted_scores[boundaries]])
    auc = float(np.trapezoid(tpr, fpr))
    return RocCurve(fpr=fpr, tpr=tpr, thresholds=thresholds, auc=auc)


def pairwise_auc(scores, labels) -> float:
    """P(score_pos > score_neg) + 0.5 P(tie) over all positive/negative pairs."""
    scores, labels = _validate_scores_labels(scores, labels)
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    wins = (pos[:, None] > neg[None, :]).sum()
    ties = (pos[:, None] == neg[None, :]).sum()
    return float((wins + 0.5 * ties) / (len(pos) * len(neg)))


def pearson(x, y) -> float:
    """Sample Pearson correlation of two equally long, non-constant sequences."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1 or len(x) < 2:
        raise ValueError("need two 1-D sequences of equal length >= 2")
    dx = x - x.mean()
    dy = y - y.mean()
    sx = float(np.sqrt(np.sum(dx**2)))
    sy = float(np.sqrt(np.sum(dy**2)))
    if sx == 0.0 or sy == 0.0:
        raise ConstantInputError("pearson undefined for a constant sequence")
    return float(np.dot(dx, dy) / (sx * sy))
