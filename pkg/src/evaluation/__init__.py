"""
Evaluation Module
Zero-shot abnormality scoring, the metric suite and prompt-robustness statistics.
"""
from src.evaluation.embeddings import CohortEmbeddings, check_compatible, embed_cohort
from src.evaluation.metrics import (
    ConfusionCounts,
    ConfusionMetrics,
    confusion_metrics,
    metrics_from_counts,
    prompt_robustness,
    roc_auc,
)
from src.evaluation.zero_shot import EvalScore, PromptEmbedding, encode_prompts, zero_shot_scores
from src.evaluation.report import ClassTemplateMetrics, EvalConfig, MetricsReport, evaluate, scores_frame

__all__ = [
    'CohortEmbeddings',
    'check_compatible',
    'embed_cohort',
    'ConfusionCounts',
    'ConfusionMetrics',
    'confusion_metrics',
    'metrics_from_counts',
    'prompt_robustness',
    'roc_auc',
    'EvalScore',
    'PromptEmbedding',
    'encode_prompts',
    'zero_shot_scores',
    'ClassTemplateMetrics',
    'EvalConfig',
    'MetricsReport',
    'evaluate',
    'scores_frame',
]
