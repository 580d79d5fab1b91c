"""
Classification Metrics - ROC AUC, confusion-based metrics and prompt robustness

Zero-denominator convention: the metric is reported as 0.0 and its name is
added to the result's `undefined` set.
"""

from dataclasses import dataclass, field
from typing import FrozenSet

import numpy as np

from src.numeric.vector_ops import as_array
from src.utils.errors import LabError, ShapeError


def _binary_inputs(scores, labels):
    scores = as_array(scores).ravel()
    labels = np.asarray(labels).ravel()
    if scores.shape != labels.shape:
        raise ShapeError(f"{scores.shape[0]} scores but {labels.shape[0]} labels")
    if not np.all((labels == 0) | (labels == 1)):
        raise LabError("Labels must be 0 or 1")
    return scores, labels.astype(np.int64)


def roc_auc(scores, labels):
    """
    Area under the ROC curve as the Mann-Whitney statistic.

    (#concordant pairs + 0.5 * #tied pairs) / (#pos * #neg), with pairs
    counted by binary search over the sorted negative scores.

    Raises:
        LabError: If only one class is present
    """
    scores, labels = _binary_inputs(scores, labels)
    positives = scores[labels == 1]
    negatives = np.sort(scores[labels == 0])
    if positives.size == 0 or negatives.size == 0:
        raise LabError("AUC is undefined when only one class is present")

    below = np.searchsorted(negatives, positives, side="left")
    below_or_equal = np.searchsorted(negatives, positives, side="right")
    concordant = int(np.sum(below))
    ties = int(np.sum(below_or_equal - below))
    return (concordant + 0.5 * ties) / (positives.size * negatives.size)


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self):
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class ConfusionMetrics:
    counts: ConfusionCounts
    acc: float
    f1: float
    prec: float
    spec: float
    sens: float
    undefined: FrozenSet[str] = field(default_factory=frozenset)

    def values(self):
        return {"acc": self.acc, "f1": self.f1, "prec": self.prec, "spec": self.spec, "sens": self.sens}


def _ratio(numerator, denominator, name, undefined):
    if denominator == 0:
        undefined.add(name)
        return 0.0
    return numerator / denominator


def metrics_from_counts(counts):
    """
    Balanced accuracy, precision, specificity, sensitivity and the
    support-weighted F1 of the positive and negative classes.
    """
    tp, fp, tn, fn = counts.tp, counts.fp, counts.tn, counts.fn
    undefined = set()
    sens = _ratio(tp, tp + fn, "sens", undefined)
    spec = _ratio(tn, tn + fp, "spec", undefined)
    prec = _ratio(tp, tp + fp, "prec", undefined)
    acc = (sens + spec) / 2.0
    if {"sens", "spec"} & undefined:
        undefined.add("acc")

    positive_f1 = _ratio(2 * tp, 2 * tp + fp + fn, "f1_positive", undefined)
    negative_f1 = _ratio(2 * tn, 2 * tn + fn + fp, "f1_negative", undefined)
    f1 = _ratio((tp + fn) * positive_f1 + (tn + fp) * negative_f1, counts.total, "f1", undefined)
    if {"f1_positive", "f1_negative"} & undefined:
        undefined.add("f1")
    undefined -= {"f1_positive", "f1_negative"}

    return ConfusionMetrics(counts, acc, f1, prec, spec, sens, frozenset(undefined))


def confusion_metrics(scores, labels, threshold=0.0):
    """
    Threshold scores (positive iff score > threshold) and compute metrics.

    Returns:
        ConfusionMetrics
    """
    scores, labels = _binary_inputs(scores, labels)
    predicted = scores > threshold
    actual = labels == 1
    counts = ConfusionCounts(
        tp=int(np.sum(predicted & actual)),
        fp=int(np.sum(predicted & ~actual)),
        tn=int(np.sum(~predicted & ~actual)),
        fn=int(np.sum(~predicted & actual)),
    )
    return metrics_from_counts(counts)


def prompt_robustness(per_template):
    """
    Mean and population standard deviation of each metric across templates.

    Args:
        per_template (list): One {metric: value} mapping per template

    Returns:
        dict: metric -> (mean, std)

    Raises:
        LabError: If fewer than two templates are given
    """
    if len(per_template) < 2:
        raise LabError("Prompt robustness needs at least two templates")
    names = sorted(per_template[0].keys())
    summary = {}
    for name in names:
        values = np.array([entry[name] for entry in per_template], dtype=np.float64)
        summary[name] = (float(np.mean(values)), float(np.std(values)))
    return summary
