"""
Command-Line Runner - reproducible synth / train / eval / diagnose / gradcheck / ablation runs

Every command resolves one effective configuration (config file + flags),
echoes it as TOML on stdout, writes its outputs into the --out directory and
finishes with manifest.json. --dry-run stops after validation and writes nothing.

Exit codes:
    0  success
    1  check failure (gradcheck)
    2  usage, configuration or input error
    3  numerical abort during training
"""

import json
import logging
import os
import time
from functools import wraps

import click
import coloredlogs
from pydantic import ValidationError

from config import (
    ABLATION_CSV_FILENAME,
    APP_VERSION,
    CHECKPOINT_FILENAME,
    COHORT_FILENAME,
    DIAGNOSTICS_SUMMARY_FILENAME,
    EXIT_CHECK_FAILED,
    EXIT_NUMERICAL_ABORT,
    EXIT_USAGE,
    GRADCHECK_CONFIGS,
    GRADCHECK_FILENAME,
    GRADCHECK_MAX_ANATOMIES,
    GRADCHECK_MAX_BATCH,
    GRADCHECK_MAX_DIM,
    HISTOGRAM_CSV_TEMPLATE,
    METRICS_CSV_FILENAME,
    METRICS_JSON_FILENAME,
    POOLING_MODES,
    PROJECTION_CSV_FILENAME,
    SCORES_CSV_FILENAME,
    SNAPSHOTS_FILENAME,
    TRACE_FILENAME,
)
from src.cli.manifest import RunManifest, write_manifest
from src.cli.run_config import resolve_run_config
from src.cohort.cohort_io import read_cohort, write_cohort
from src.cohort.generator import check_generatable, generate_cohort
from src.diagnostics.report import diagnose
from src.evaluation.embeddings import check_compatible
from src.evaluation.report import evaluate, scores_frame
from src.experiments.ablation import ablation_csv, run_ablation
from src.experiments.gradient_check import run_gradcheck
from src.model.params import read_checkpoint, write_checkpoint
from src.training.trainer import train
from src.utils.errors import LabError, NumericalAbortError
from src.utils.file_utils import atomic_write_text, ensure_directory_exists, write_json

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(message)s"


def setup_logging(verbose=False):
    """Install colored console logging once per process."""
    coloredlogs.install(level=logging.DEBUG if verbose else logging.INFO, fmt=LOG_FORMAT)


def fail(message, code=EXIT_USAGE):
    click.echo(f"❌ {message}", err=True)
    click.get_current_context().exit(code)


def guarded(command):
    """Map library exceptions onto exit codes instead of tracebacks."""

    @wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except NumericalAbortError as e:
            click.echo(json.dumps({"error": str(e), **e.payload()}, sort_keys=True))
            fail(str(e), EXIT_NUMERICAL_ABORT)
        except ValidationError as e:
            fail(f"Invalid configuration:\n{e}")
        except (LabError, OSError) as e:
            fail(str(e))

    return wrapper


def frame_csv(frame):
    return frame.to_csv(index=False, float_format="%.17g", lineterminator="\n")


def load_cohort(path):
    """
    Returns:
        tuple: (Cohort, None) on success or (None, error message)
    """
    try:
        return read_cohort(path), None
    except (LabError, OSError) as e:
        return None, f"{path}: {e}"


def load_checkpoint(path, cohort):
    """
    Read a checkpoint and check it against the cohort dimensions.

    Returns:
        tuple: ((ModelParams, pooling), None) on success or (None, error message)
    """
    try:
        params, pooling = read_checkpoint(path)
        check_compatible(params, cohort)
        return (params, pooling), None
    except (LabError, OSError) as e:
        return None, f"{path}: {e}"


class Run:
    """Effective config, output directory and manifest of one command."""

    def __init__(self, ctx, command, train_overrides=None, eval_overrides=None):
        options = ctx.obj
        self.dry_run = options["dry_run"]
        self.config = resolve_run_config(
            options["config_path"], options["seed"], options["out"], train_overrides, eval_overrides
        )
        self.out_dir = self.config.out
        self.manifest = RunManifest(command=command, config=self.config.to_dict())
        self.started = time.perf_counter()
        click.echo(f"# {command} effective configuration (v{APP_VERSION})")
        click.echo(self.config.to_toml())

    def add_input(self, path):
        self.manifest.add_input(path)

    def stop_if_dry(self):
        if self.dry_run:
            logger.info("⚠️ Dry run: configuration and inputs are valid, nothing written")
            return True
        ensure_directory_exists(self.out_dir)
        return False

    def path(self, filename):
        full = os.path.join(self.out_dir, filename)
        self.manifest.add_output(full)
        return full

    def write_text(self, filename, text):
        atomic_write_text(self.path(filename), text)

    def write_json(self, filename, payload):
        write_json(self.path(filename), payload)

    def finish(self):
        self.manifest.duration_seconds = time.perf_counter() - self.started
        path = write_manifest(self.out_dir, self.manifest)
        logger.info(f"✅ Outputs written to {self.out_dir} (manifest: {path})")


def train_options(command):
    """Schedule flags shared by `train` and `ablation`."""
    options = [
        click.option("--epochs", type=click.IntRange(min=0), help="Training epochs"),
        click.option("--max-steps", type=click.IntRange(min=1), help="Cap on optimizer steps"),
        click.option("--batch-size", type=click.IntRange(min=1), help="Patients per mini-batch"),
        click.option("--lr", "learning_rate", type=click.FloatRange(min=0.0), help="Adam learning rate"),
        click.option("--lambda", "lam", type=click.FloatRange(min=0.0), help="Global loss weight"),
        click.option("--pooling", type=click.Choice(POOLING_MODES), help="Report sentence pooling"),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def schedule_overrides(epochs, max_steps, batch_size, learning_rate, lam, pooling):
    return {
        "epochs": epochs,
        "max_steps": max_steps,
        "batch_size": batch_size,
        "learning_rate": learning_rate,
        "lambda": lam,
        "pooling": pooling,
    }


@click.group()
@click.version_option(APP_VERSION)
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), help="TOML run configuration")
@click.option("--seed", type=click.IntRange(min=0), help="Seed for both the cohort and training")
@click.option("--out", type=click.Path(file_okay=False), help="Output directory")
@click.option("--dry-run", is_flag=True, help="Validate configuration and inputs, write nothing")
@click.option("--verbose", "-v", is_flag=True, help="Debug logging")
@click.pass_context
def cli(ctx, config_path, seed, out, dry_run, verbose):
    """Anatomy contrastive lab: synthetic cohorts, training, zero-shot evaluation and collapse diagnostics."""
    setup_logging(verbose)
    ctx.obj = {"config_path": config_path, "seed": seed, "out": out, "dry_run": dry_run}


@cli.command()
@click.pass_context
@guarded
def synth(ctx):
    """Generate a synthetic cohort file."""
    run = Run(ctx, "synth")
    check_generatable(run.config.cohort)
    if run.stop_if_dry():
        return
    cohort = generate_cohort(run.config.cohort)
    write_cohort(cohort, run.path(COHORT_FILENAME))
    run.finish()


@cli.command(name="train")
@click.argument("cohort_path", type=click.Path(exists=True, dir_okay=False))
@train_options
@click.option("--no-global", is_flag=True, help="Disable the cross-anatomy global loss")
@click.option("--no-augment", is_flag=True, help="Disable report augmentation")
@click.pass_context
@guarded
def train_command(ctx, cohort_path, epochs, max_steps, batch_size, learning_rate, lam, pooling, no_global, no_augment):
    """Train a checkpoint on COHORT_PATH."""
    overrides = schedule_overrides(epochs, max_steps, batch_size, learning_rate, lam, pooling)
    if no_global:
        overrides["enable_global_loss"] = False
    if no_augment:
        overrides["enable_augment"] = False
    run = Run(ctx, "train", overrides)

    cohort, error = load_cohort(cohort_path)
    if error:
        fail(error)
    run.add_input(cohort_path)
    if run.stop_if_dry():
        return

    cfg = run.config.train
    params, trace = train(cohort, cfg)
    write_checkpoint(params, run.path(CHECKPOINT_FILENAME), cfg.pooling)
    run.write_text(TRACE_FILENAME, trace.to_jsonl())
    run.write_json(SNAPSHOTS_FILENAME, {"clip_events": trace.clip_events, "snapshots": trace.snapshots})
    run.finish()


@cli.command(name="eval")
@click.argument("cohort_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("checkpoint_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--threshold", type=float, help="Abnormality score threshold")
@click.pass_context
@guarded
def eval_command(ctx, cohort_path, checkpoint_path, threshold):
    """Zero-shot evaluation of CHECKPOINT_PATH on COHORT_PATH."""
    run = Run(ctx, "eval", eval_overrides={"threshold": threshold})
    cohort, error = load_cohort(cohort_path)
    if error:
        fail(error)
    loaded, error = load_checkpoint(checkpoint_path, cohort)
    if error:
        fail(error)
    params, pooling = loaded
    run.add_input(cohort_path)
    run.add_input(checkpoint_path)
    if run.stop_if_dry():
        return

    report, scores = evaluate(params, cohort, pooling, run.config.eval.threshold)
    run.write_json(METRICS_JSON_FILENAME, report.to_dict())
    run.write_text(METRICS_CSV_FILENAME, frame_csv(report.to_frame()))
    run.write_text(SCORES_CSV_FILENAME, frame_csv(scores_frame(scores)))
    run.finish()


@cli.command(name="diagnose")
@click.argument("cohort_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("checkpoint_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--patients", "patient_limit", type=click.IntRange(min=1), help="Use only the first N patients")
@click.pass_context
@guarded
def diagnose_command(ctx, cohort_path, checkpoint_path, patient_limit):
    """Similarity histograms, collapse indices and PCA projection."""
    run = Run(ctx, "diagnose")
    cohort, error = load_cohort(cohort_path)
    if error:
        fail(error)
    loaded, error = load_checkpoint(checkpoint_path, cohort)
    if error:
        fail(error)
    params, pooling = loaded
    run.add_input(cohort_path)
    run.add_input(checkpoint_path)
    if run.stop_if_dry():
        return

    report = diagnose(params, cohort, pooling, run.config.eval.histogram_bins, patient_limit)
    run.write_json(DIAGNOSTICS_SUMMARY_FILENAME, report.summary())
    for name, histogram in sorted(report.histograms.items()):
        run.write_text(HISTOGRAM_CSV_TEMPLATE.format(name=name), frame_csv(histogram.to_frame()))
    run.write_text(PROJECTION_CSV_FILENAME, frame_csv(report.projection.to_frame()))
    run.finish()


@cli.command()
@click.option("--configs", "n_configs", type=click.IntRange(min=1), default=GRADCHECK_CONFIGS, show_default=True)
@click.option("--max-batch", type=click.IntRange(min=1), default=GRADCHECK_MAX_BATCH, show_default=True)
@click.option("--max-anatomies", type=click.IntRange(min=1), default=GRADCHECK_MAX_ANATOMIES, show_default=True)
@click.option("--max-dim", type=click.IntRange(min=1), default=GRADCHECK_MAX_DIM, show_default=True)
@click.pass_context
@guarded
def gradcheck(ctx, n_configs, max_batch, max_anatomies, max_dim):
    """Finite-difference check of the full objective's gradients."""
    run = Run(ctx, "gradcheck")
    if run.stop_if_dry():
        return

    result = run_gradcheck(run.config.train.seed, n_configs, max_batch, max_anatomies, max_dim)
    run.write_json(GRADCHECK_FILENAME, result.to_dict())
    run.finish()

    worst = result.worst()
    if not result.passed:
        fail(
            f"Gradient check failed: case {worst.case}, parameter {worst.worst_parameter}, "
            f"index {list(worst.worst_index or ())}, relative error {worst.max_relative_error:.3e}",
            EXIT_CHECK_FAILED,
        )
    click.echo(f"✅ Gradient check passed (max relative error {worst.max_relative_error:.3e})")


@cli.command()
@click.argument("cohort_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--eval-cohort", "eval_cohort_path", type=click.Path(exists=True, dir_okay=False),
              help="Evaluate on a different cohort (e.g. a domain-shifted one)")
@train_options
@click.pass_context
@guarded
def ablation(ctx, cohort_path, eval_cohort_path, epochs, max_steps, batch_size, learning_rate, lam, pooling):
    """Train and evaluate the four component combinations."""
    run = Run(ctx, "ablation", schedule_overrides(epochs, max_steps, batch_size, learning_rate, lam, pooling))
    cohort, error = load_cohort(cohort_path)
    if error:
        fail(error)
    run.add_input(cohort_path)
    eval_cohort = None
    if eval_cohort_path:
        eval_cohort, error = load_cohort(eval_cohort_path)
        if error:
            fail(error)
        run.add_input(eval_cohort_path)
    if run.stop_if_dry():
        return

    table = None
    for update in run_ablation(cohort, run.config.train, eval_cohort, run.config.eval.threshold):
        if isinstance(update, tuple):
            progress, message = update
            logger.info(f"[{progress:.0%}] {message}")
        else:
            table = update
    run.write_text(ABLATION_CSV_FILENAME, ablation_csv(table))
    run.finish()
