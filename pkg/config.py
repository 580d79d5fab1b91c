"""
Anatomy Contrastive Lab - Configuration Settings

Defaults for the synthetic cohort, the training objective, evaluation and
the command-line runner. Typed config models in src/ read their defaults from here.
"""

# App Settings
APP_NAME = "anatomy-contrastive-lab"
APP_VERSION = "1.0.0"

# Numeric Settings
DEGENERATE_NORM_EPS = 1e-12  # Norms at or below this raise instead of returning 0
FD_STEP = 1e-5  # Central finite-difference step
FD_REL_ERROR_FLOOR = 1e-8
GRADCHECK_TOLERANCE = 1e-4

# Model Settings
POSITIONAL_GAMMA = 0.8  # Sentence weight decay for positional pooling
DEFAULT_POOLING = "positional"
POOLING_MODES = ("mean", "positional")
INITIAL_TEMPERATURE = 0.07
PROJECTION_INIT_NOISE = 0.01
CHECKPOINT_FORMAT = "anatomy-lab-checkpoint"
CHECKPOINT_VERSION = 1

# Augmentation Settings
KEEP_MIN_FRACTION = 1 / 3
GLOBAL_TEXT_SOURCES = ("augmented", "raw")

# Objective Settings
GLOBAL_LOSS_WEIGHT = 0.1  # lambda in the total objective

# Synthetic Cohort Defaults (desk scale)
COHORT_DEFAULTS = {
    "n_anatomies": 4,
    "embed_dim": 32,
    "n_patients": 256,
    "tokens_per_anatomy": 8,
    "sentences_normal": 6,
    "sentences_abnormal": 2,
    "sentences_per_report": 3,
    "abnormal_rate": 0.3,
    "missing_rate": 0.5,
    "text_separation_deg": 5.0,
    "vis_separation_deg": 60.0,
    "pathology_offset_scale": 0.3,
    "noise_scale": 0.1,
    "sentence_noise_ratio": 0.1,  # Sentence-bank noise as a fraction of noise_scale
    "n_templates": 5,
    "template_noise_scale": 0.4,
    "visual_shift_scale": 0.0,
    "seed": 1,
}
COHORT_FORMAT = "anatomy-lab-cohort"
COHORT_VERSION = 1

# Training Defaults
TRAIN_DEFAULTS = {
    "epochs": 20,
    "batch_size": 16,
    "learning_rate": 1e-3,
    "beta1": 0.9,
    "beta2": 0.999,
    "adam_eps": 1e-8,
    "clip_norm": 5.0,
    "snapshot_patients": 64,
    "seed": 1,
}

# Evaluation Settings
SCORE_THRESHOLD = 0.0
HISTOGRAM_BINS = 40
COLLAPSE_SIMILARITY_CUTOFF = 0.9
METRIC_NAMES = ("auc", "acc", "f1", "prec", "spec", "sens")

# PCA Settings
POWER_ITERATION_TOL = 1e-10
POWER_ITERATION_MAX_ITER = 10000

# Output File Names
COHORT_FILENAME = "cohort.jsonl"
CHECKPOINT_FILENAME = "checkpoint.json"
TRACE_FILENAME = "trace.jsonl"
MANIFEST_FILENAME = "manifest.json"
METRICS_JSON_FILENAME = "metrics.json"
METRICS_CSV_FILENAME = "metrics.csv"
SCORES_CSV_FILENAME = "scores.csv"
ABLATION_CSV_FILENAME = "ablation.csv"
GRADCHECK_FILENAME = "gradcheck.json"
DIAGNOSTICS_SUMMARY_FILENAME = "diagnostics.json"
PROJECTION_CSV_FILENAME = "projection.csv"
SNAPSHOTS_FILENAME = "snapshots.json"
HISTOGRAM_CSV_TEMPLATE = "histogram_{name}.csv"
DEFAULT_OUTPUT_DIR = "runs/latest"

# Gradient Check Defaults
GRADCHECK_CONFIGS = 10
GRADCHECK_MAX_BATCH = 6
GRADCHECK_MAX_ANATOMIES = 3
GRADCHECK_MAX_DIM = 8
GRADCHECK_TOKENS = 2  # visual tokens per anatomy
GRADCHECK_SENTENCES = 2

# Exit Codes
EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_NUMERICAL_ABORT = 3

# Ablation rows: (label, augment, global loss). The report-parsing row is not reproduced.
ABLATION_CONFIGS = [
    ("LCA", False, False),
    ("LCA+GCA", False, True),
    ("LCA+CTA", True, False),
    ("LCA+CTA+GCA", True, True),
]
