"""
Batch Assembly - encode one mini-batch of patients into anatomy tokens
"""

from src.augment.rng import Rng
from src.augment.text_augmenter import augment_report
from src.model.encoders import aggregate_visual, encode_report
from src.objective.batch import AnatomyBatch

AUGMENT_STREAM = 2


def _augmented_features(record, patient_id, epoch, cfg):
    if not cfg.enable_augment:
        return record.sentences
    rng = Rng(cfg.seed, stream=(AUGMENT_STREAM, epoch, patient_id, record.anatomy_id))
    kept = augment_report(list(range(record.sentences.shape[0])), cfg.augment, rng)
    return record.sentences[kept]


def encode_batch(params, cohort, patient_indices, cfg, epoch):
    """
    Encode the visual and text branches of a mini-batch.

    Each present (patient, anatomy) report is augmented once with its own
    stream (seed, 2, epoch, patient id, anatomy id) before encoding.

    Returns:
        tuple: (AnatomyBatch for the losses, AnatomyBatch for the global
        tokens or None when they use the same reports)
    """
    raw_needed = cfg.enable_augment and cfg.enable_global_loss and cfg.global_text_source == "raw"
    visual, reports, raw_reports = [], [], []
    for index in patient_indices:
        patient = cohort.patients[index]
        visual_row, report_row, raw_row = [], [], []
        for j, record in enumerate(patient.anatomies):
            if record is None:
                visual_row.append(None)
                report_row.append(None)
                raw_row.append(None)
                continue
            visual_row.append(aggregate_visual(params, j, record.visual_tokens))
            features = _augmented_features(record, patient.patient_id, epoch, cfg)
            report_row.append(encode_report(params, features, cfg.pooling))
            raw_row.append(encode_report(params, record.sentences, cfg.pooling) if raw_needed else None)
        visual.append(visual_row)
        reports.append(report_row)
        raw_reports.append(raw_row)

    patient_ids = [cohort.patients[i].patient_id for i in patient_indices]
    batch = AnatomyBatch(visual, reports, patient_ids)
    global_batch = AnatomyBatch(visual, raw_reports, list(patient_ids)) if raw_needed else None
    return batch, global_batch
