"""
Synthetic Cohort Generator

GEOMETRY:
Anatomy prototypes are unit vectors with a prescribed pairwise angle. They are
built from an orthonormal basis (Gram-Schmidt on random Gaussian vectors) and
the Cholesky factor of the target Gram matrix (1 on the diagonal, cos(angle)
elsewhere). Visual prototypes, text prototypes, visual pathology offsets and
text pathology offsets each take their own block of M basis vectors while the
embedding dimension allows (D >= 4M gives four disjoint blocks); later blocks
fall back to sharing the visual block (prototypes) or to random unit vectors
(offsets).

RANDOM STREAMS (all derived from cfg.seed):
    (0,)          basis and fallback offsets
    (1,)          sentence banks
    (2, patient)  labels, visual tokens and report of one patient
    (3,)          prompt templates
    (4,)          missing anatomies
    (5,)          external-site visual shift
"""

import logging
import math

import numpy as np

from src.augment.rng import Rng
from src.cohort.models import POLARITIES, AnatomyRecord, Cohort, CohortConfig, PatientRecord
from src.numeric.vector_ops import l2_normalize
from src.utils.errors import ConfigError

logger = logging.getLogger(__name__)

GEOMETRY_STREAM = 0
BANK_STREAM = 1
PATIENT_STREAM = 2
TEMPLATE_STREAM = 3
MISSING_STREAM = 4
SHIFT_STREAM = 5


def _cos_deg(angle_deg):
    # cos(90 deg) in floating point is 6e-17, not 0
    return 0.0 if angle_deg == 90.0 else math.cos(math.radians(angle_deg))


def orthonormal_basis(rng, dim, count):
    """
    Gram-Schmidt on Gaussian vectors.

    Returns:
        np.ndarray: (count, dim) matrix with orthonormal rows
    """
    if count > dim:
        raise ConfigError(f"Cannot build {count} orthonormal vectors in dimension {dim}")
    rows = []
    while len(rows) < count:
        candidate = rng.normal_array((dim,))
        for row in rows:
            candidate = candidate - np.dot(candidate, row) * row
        norm = np.linalg.norm(candidate)
        if norm < 1e-6:
            continue
        rows.append(candidate / norm)
    return np.array(rows).reshape(count, dim)


def prototypes_at_angle(basis, angle_deg):
    """
    Unit vectors with pairwise cosine cos(angle_deg), embedded in span(basis).

    Args:
        basis (np.ndarray): (M, D) orthonormal rows
        angle_deg (float): Pairwise angle in (0, 90]

    Returns:
        np.ndarray: (M, D) prototypes
    """
    count = basis.shape[0]
    c = _cos_deg(angle_deg)
    gram = np.full((count, count), c)
    np.fill_diagonal(gram, 1.0)
    factor = np.linalg.cholesky(gram)
    return factor @ basis


def _noise(rng, shape, scale, dim):
    return rng.normal_array(shape, scale / math.sqrt(dim))


def _random_unit_rows(rng, count, dim):
    return l2_normalize(rng.normal_array((count, dim)), axis=1)


def build_geometry(cfg):
    """Visual/text prototypes and pathology offsets for a cohort config."""
    m, d = cfg.n_anatomies, cfg.embed_dim
    rng = Rng(cfg.seed, stream=(GEOMETRY_STREAM,))
    n_blocks = min(4, d // m)
    basis = orthonormal_basis(rng, d, n_blocks * m)
    blocks = [basis[b * m:(b + 1) * m] for b in range(n_blocks)]

    visual_prototypes = prototypes_at_angle(blocks[0], cfg.vis_separation_deg)
    text_block = blocks[1] if n_blocks > 1 else blocks[0]
    text_prototypes = prototypes_at_angle(text_block, cfg.text_separation_deg)
    visual_dirs = blocks[2] if n_blocks > 2 else _random_unit_rows(rng, m, d)
    text_dirs = blocks[3] if n_blocks > 3 else _random_unit_rows(rng, m, d)
    if n_blocks < 4:
        logger.warning(f"⚠️ embed_dim={d} < 4 x n_anatomies: modality subspaces overlap")

    return (
        visual_prototypes,
        text_prototypes,
        cfg.pathology_offset_scale * visual_dirs,
        cfg.pathology_offset_scale * text_dirs,
    )


def build_sentence_banks(cfg, text_prototypes, text_offsets):
    """Per-anatomy normal and finding sentence banks, shape (M, n, D) each."""
    rng = Rng(cfg.seed, stream=(BANK_STREAM,))
    d = cfg.embed_dim
    scale = cfg.sentence_noise_ratio * cfg.noise_scale
    normal, finding = [], []
    for j in range(cfg.n_anatomies):
        normal.append(text_prototypes[j] + _noise(rng, (cfg.sentences_normal, d), scale, d))
        finding.append(
            text_prototypes[j] + text_offsets[j] + _noise(rng, (cfg.sentences_abnormal, d), scale, d)
        )
    return np.array(normal), np.array(finding)


def _pick(rng, bank_size, count):
    """count bank indices, without replacement when the bank is large enough."""
    if count <= bank_size:
        indices = list(range(bank_size))
        rng.shuffle(indices)
        return indices[:count]
    return [rng.randbelow(bank_size) for _ in range(count)]


def _report(rng, cfg, normal_bank, finding_bank, abnormal):
    n_sentences = cfg.sentences_per_report
    if not abnormal:
        return normal_bank[_pick(rng, normal_bank.shape[0], n_sentences)]
    finding_position = rng.randbelow(n_sentences)
    finding = finding_bank[rng.randbelow(finding_bank.shape[0])]
    others = normal_bank[_pick(rng, normal_bank.shape[0], n_sentences - 1)] if n_sentences > 1 else []
    rows = list(others)
    rows.insert(finding_position, finding)
    return np.array(rows)


def build_templates(cfg, text_prototypes, text_offsets):
    """One single-sentence prompt per (anatomy, polarity, template index)."""
    rng = Rng(cfg.seed, stream=(TEMPLATE_STREAM,))
    d = cfg.embed_dim
    templates = {}
    for j in range(cfg.n_anatomies):
        for polarity in POLARITIES:
            base = text_prototypes[j] + (text_offsets[j] if polarity == "abnormal" else 0.0)
            for t in range(cfg.n_templates):
                templates[(j, polarity, t)] = (base + _noise(rng, (d,), cfg.template_noise_scale, d)).reshape(1, d)
    return templates


def check_generatable(cfg):
    """Raise ConfigError when the config cannot place its anatomy prototypes."""
    if cfg.embed_dim < cfg.n_anatomies:
        raise ConfigError(f"embed_dim ({cfg.embed_dim}) must be >= n_anatomies ({cfg.n_anatomies})")


def generate_cohort(cfg: CohortConfig) -> Cohort:
    """
    Generate a synthetic cohort.

    Visual tokens are the anatomy's visual prototype, plus the pathology
    offset for abnormal anatomies, plus the site shift, plus Gaussian noise.
    Reports draw sentences_per_report sentences from the anatomy's bank;
    abnormal reports carry one finding sentence at a random position.
    Bank sentences carry noise at sentence_noise_ratio x noise_scale.

    Args:
        cfg (CohortConfig): Generator settings

    Returns:
        Cohort

    Raises:
        ConfigError: If embed_dim < n_anatomies
    """
    check_generatable(cfg)
    m, d, t = cfg.n_anatomies, cfg.embed_dim, cfg.tokens_per_anatomy

    logger.info(f"🎯 Generating cohort: {cfg.n_patients} patients x {m} anatomies, D={d}, seed={cfg.seed}")
    visual_prototypes, text_prototypes, visual_offsets, text_offsets = build_geometry(cfg)
    normal_banks, finding_banks = build_sentence_banks(cfg, text_prototypes, text_offsets)

    shift = np.zeros(d)
    if cfg.visual_shift_scale > 0:
        shift = cfg.visual_shift_scale * _random_unit_rows(Rng(cfg.seed, stream=(SHIFT_STREAM,)), 1, d)[0]

    missing_rng = Rng(cfg.seed, stream=(MISSING_STREAM,))
    patients = []
    for i in range(cfg.n_patients):
        rng = Rng(cfg.seed, stream=(PATIENT_STREAM, i))
        anatomies = []
        for j in range(m):
            label = int(rng.bernoulli(cfg.abnormal_rate))
            tokens = visual_prototypes[j] + label * visual_offsets[j] + shift + _noise(rng, (t, d), cfg.noise_scale, d)
            sentences = _report(rng, cfg, normal_banks[j], finding_banks[j], label == 1)
            missing = missing_rng.bernoulli(cfg.missing_rate)
            anatomies.append(None if missing else AnatomyRecord(j, tokens, sentences, label))
        patients.append(PatientRecord(i, anatomies))

    cohort = Cohort(
        config=cfg,
        patients=patients,
        visual_prototypes=visual_prototypes,
        text_prototypes=text_prototypes,
        visual_offsets=visual_offsets,
        text_offsets=text_offsets,
        templates=build_templates(cfg, text_prototypes, text_offsets),
    )
    logger.info(f"✅ Cohort ready ({sum(len(cohort.records(j)) for j in range(m))} anatomy records)")
    return cohort
