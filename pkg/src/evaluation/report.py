"""
Metrics Report - zero-shot evaluation of a checkpoint on a cohort

Every (anatomy class, template) pair gets the full metric suite. Aggregates
are computed in two orders:
    classes_first    macro-average over classes per template, then mean/std across templates
    templates_first  mean/std across templates per class, then average over classes
Undefined entries (zero denominators, single-class AUC) are left out of
both aggregates.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Set

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from config import DEFAULT_POOLING, HISTOGRAM_BINS, METRIC_NAMES, SCORE_THRESHOLD
from src.evaluation.embeddings import embed_cohort
from src.evaluation.metrics import confusion_metrics, roc_auc
from src.evaluation.zero_shot import encode_prompts, zero_shot_scores
from src.utils.errors import LabError

logger = logging.getLogger(__name__)


class EvalConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    threshold: float = SCORE_THRESHOLD
    histogram_bins: int = Field(default=HISTOGRAM_BINS, ge=1)


@dataclass
class ClassTemplateMetrics:
    anatomy_id: int
    template: int
    values: Dict[str, float]
    undefined: Set[str] = field(default_factory=set)

    def defined(self, metric):
        return metric not in self.undefined


def _mean_std(values):
    if not values:
        return {"mean": None, "std": None}
    array = np.array(values, dtype=np.float64)
    return {"mean": float(np.mean(array)), "std": float(np.std(array))}


@dataclass
class MetricsReport:
    entries: List[ClassTemplateMetrics]
    threshold: float = SCORE_THRESHOLD

    @property
    def classes(self):
        return sorted({entry.anatomy_id for entry in self.entries})

    @property
    def templates(self):
        return sorted({entry.template for entry in self.entries})

    def entry(self, anatomy_id, template):
        for item in self.entries:
            if item.anatomy_id == anatomy_id and item.template == template:
                return item
        raise KeyError((anatomy_id, template))

    def per_class(self):
        nested = {}
        for item in self.entries:
            cell = dict(item.values)
            cell["undefined"] = sorted(item.undefined)
            nested.setdefault(str(item.anatomy_id), {})[str(item.template)] = cell
        return nested

    def template_means(self, metric):
        """Class-macro-averaged value of one metric per template (None when no class is defined)."""
        means = []
        for template in self.templates:
            values = [
                item.values[metric] for item in self.entries if item.template == template and item.defined(metric)
            ]
            means.append(float(np.mean(values)) if values else None)
        return means

    def classes_first(self):
        return {
            metric: _mean_std([value for value in self.template_means(metric) if value is not None])
            for metric in METRIC_NAMES
        }

    def templates_first(self):
        summary = {}
        for metric in METRIC_NAMES:
            per_class = []
            for anatomy in self.classes:
                values = [
                    item.values[metric] for item in self.entries if item.anatomy_id == anatomy and item.defined(metric)
                ]
                if values:
                    per_class.append(_mean_std(values))
            if per_class:
                summary[metric] = {
                    "mean": float(np.mean([c["mean"] for c in per_class])),
                    "std": float(np.mean([c["std"] for c in per_class])),
                }
            else:
                summary[metric] = {"mean": None, "std": None}
        return summary

    def aggregate(self):
        return self.classes_first()

    def to_dict(self):
        return {
            "threshold": self.threshold,
            "per_class": self.per_class(),
            "aggregate": self.classes_first(),
            "aggregate_templates_first": self.templates_first(),
        }

    def to_frame(self):
        """Long table: class, template, metric, value, undefined."""
        rows = []
        for item in sorted(self.entries, key=lambda e: (e.anatomy_id, e.template)):
            for metric in METRIC_NAMES:
                rows.append({
                    "class": item.anatomy_id,
                    "template": item.template,
                    "metric": metric,
                    "value": item.values[metric],
                    "undefined": not item.defined(metric),
                })
        return pd.DataFrame(rows, columns=["class", "template", "metric", "value", "undefined"])


def scores_frame(scores_by_template):
    """Per-record scores of every template as one table."""
    rows = [
        {"template": t, "patient_id": s.patient_id, "anatomy_id": s.anatomy_id, "score": s.score, "label": s.label}
        for t, scores in sorted(scores_by_template.items())
        for s in scores
    ]
    return pd.DataFrame(rows, columns=["template", "patient_id", "anatomy_id", "score", "label"])


def evaluate(params, cohort, pooling=DEFAULT_POOLING, threshold=SCORE_THRESHOLD):
    """
    Zero-shot evaluation over every template of the cohort's prompt bank.

    Returns:
        tuple: (MetricsReport, {template: [EvalScore]})
    """
    logger.info(f"🎯 Evaluating {cohort.n_patients} patients over {cohort.n_templates} templates")
    visual = embed_cohort(params, cohort, include_text=False)
    prompts = encode_prompts(params, cohort, pooling)

    entries = []
    scores_by_template = {}
    for template in range(cohort.n_templates):
        scores = zero_shot_scores(params, cohort, prompts, template, visual_cache=visual)
        scores_by_template[template] = scores
        for anatomy in range(cohort.n_anatomies):
            values = np.array([s.score for s in scores if s.anatomy_id == anatomy])
            labels = np.array([s.label for s in scores if s.anatomy_id == anatomy])
            if values.size == 0:
                logger.warning(f"⚠️ Anatomy {anatomy} has no records; skipped")
                continue
            confusion = confusion_metrics(values, labels, threshold)
            metrics = {"auc": 0.0, **confusion.values()}
            undefined = set(confusion.undefined)
            try:
                metrics["auc"] = roc_auc(values, labels)
            except LabError:
                undefined.add("auc")
            entries.append(ClassTemplateMetrics(anatomy, template, metrics, undefined))

    report = MetricsReport(entries, threshold)
    auc = report.classes_first()["auc"]
    if auc["mean"] is not None:
        logger.info(f"✅ AUC {auc['mean']:.4f} ± {auc['std']:.4f} across templates")
    return report, scores_by_template
