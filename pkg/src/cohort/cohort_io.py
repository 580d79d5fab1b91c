"""
Cohort Files - JSON Lines reader and writer

FILE LAYOUT:
    line 1       header  {"format", "version", "config", "n_patients", "checksum"}
    lines 2..N+1 patient {"patient_id", "anatomies": [{"anatomy_id", "visual_tokens", "sentences", "label"}]}
    line N+2     bank    {"bank": {"visual_prototypes", "text_prototypes", "visual_offsets",
                                   "text_offsets", "templates": [{"anatomy_id", "polarity",
                                   "template", "sentences"}]}}

Missing anatomies are left out of a patient's "anatomies" list. The header
checksum is the SHA-256 of every line after the header (newline-terminated),
so truncated or edited files are rejected. Floats use Python's shortest
round-trip repr; reading a written cohort gives back identical bits.
"""

import hashlib
import io
import json
import logging

import jsonschema
import numpy as np
from pydantic import ValidationError

from config import COHORT_FORMAT, COHORT_VERSION
from src.cohort.models import POLARITIES, AnatomyRecord, Cohort, CohortConfig, PatientRecord
from src.utils.errors import CohortFormatError
from src.utils.file_utils import atomic_write_text

logger = logging.getLogger(__name__)

_MATRIX = {"type": "array", "minItems": 1, "items": {"type": "array", "minItems": 1, "items": {"type": "number"}}}

HEADER_SCHEMA = {
    "type": "object",
    "required": ["format", "version", "config", "n_patients", "checksum"],
    "properties": {
        "format": {"type": "string"},
        "version": {"type": "integer"},
        "config": {"type": "object"},
        "n_patients": {"type": "integer", "minimum": 1},
        "checksum": {"type": "string", "pattern": "^[0-9a-f]{64}$"},
    },
}

PATIENT_SCHEMA = {
    "type": "object",
    "required": ["patient_id", "anatomies"],
    "additionalProperties": False,
    "properties": {
        "patient_id": {"type": "integer", "minimum": 0},
        "anatomies": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["anatomy_id", "visual_tokens", "sentences", "label"],
                "additionalProperties": False,
                "properties": {
                    "anatomy_id": {"type": "integer", "minimum": 0},
                    "visual_tokens": _MATRIX,
                    "sentences": _MATRIX,
                    "label": {"enum": [0, 1]},
                },
            },
        },
    },
}

BANK_SCHEMA = {
    "type": "object",
    "required": ["bank"],
    "additionalProperties": False,
    "properties": {
        "bank": {
            "type": "object",
            "required": ["visual_prototypes", "text_prototypes", "visual_offsets", "text_offsets", "templates"],
            "properties": {
                "visual_prototypes": _MATRIX,
                "text_prototypes": _MATRIX,
                "visual_offsets": _MATRIX,
                "text_offsets": _MATRIX,
                "templates": {
                    "type": "array",
                    "minItems": 1,
                    "items": {
                        "type": "object",
                        "required": ["anatomy_id", "polarity", "template", "sentences"],
                        "properties": {
                            "anatomy_id": {"type": "integer", "minimum": 0},
                            "polarity": {"enum": list(POLARITIES)},
                            "template": {"type": "integer", "minimum": 0},
                            "sentences": _MATRIX,
                        },
                    },
                },
            },
        },
    },
}


def _dump(payload):
    return json.dumps(payload, separators=(",", ":"))


def _body_lines(cohort):
    lines = []
    for patient in cohort.patients:
        lines.append(_dump({
            "patient_id": patient.patient_id,
            "anatomies": [
                {
                    "anatomy_id": record.anatomy_id,
                    "visual_tokens": record.visual_tokens.tolist(),
                    "sentences": record.sentences.tolist(),
                    "label": record.label,
                }
                for record in patient.anatomies
                if record is not None
            ],
        }))
    lines.append(_dump({
        "bank": {
            "visual_prototypes": cohort.visual_prototypes.tolist(),
            "text_prototypes": cohort.text_prototypes.tolist(),
            "visual_offsets": cohort.visual_offsets.tolist(),
            "text_offsets": cohort.text_offsets.tolist(),
            "templates": [
                {"anatomy_id": j, "polarity": polarity, "template": t, "sentences": value.tolist()}
                for (j, polarity, t), value in sorted(cohort.templates.items(), key=lambda item: item[0])
            ],
        }
    }))
    return lines


def _checksum(body_lines):
    digest = hashlib.sha256()
    for line in body_lines:
        digest.update((line + "\n").encode("utf-8"))
    return digest.hexdigest()


def cohort_to_text(cohort):
    """Serialized cohort file content."""
    body = _body_lines(cohort)
    header = _dump({
        "format": COHORT_FORMAT,
        "version": COHORT_VERSION,
        "config": cohort.config.model_dump(),
        "n_patients": cohort.n_patients,
        "checksum": _checksum(body),
    })
    return "\n".join([header] + body) + "\n"


def write_cohort(cohort, path):
    """Write a cohort file atomically."""
    atomic_write_text(path, cohort_to_text(cohort))
    logger.info(f"✅ Wrote cohort with {cohort.n_patients} patients to {path}")


def _parse_line(line, line_number, schema):
    try:
        payload = json.loads(line)
    except json.JSONDecodeError as e:
        raise CohortFormatError(f"invalid JSON ({e.msg})", line_number)
    try:
        jsonschema.validate(payload, schema)
    except jsonschema.ValidationError as e:
        location = "/".join(str(part) for part in e.absolute_path) or "<root>"
        raise CohortFormatError(f"{location}: {e.message}", line_number)
    return payload


def _array(values, what, line_number):
    try:
        return np.array(values, dtype=np.float64)
    except ValueError:
        raise CohortFormatError(f"{what} is a ragged matrix", line_number)


def _matrix(values, shape, what, line_number):
    array = _array(values, what, line_number)
    if array.shape != shape:
        raise CohortFormatError(f"{what} has shape {array.shape}, expected {shape}", line_number)
    return array


def parse_cohort(text):
    """
    Parse cohort file content.

    Raises:
        CohortFormatError: With the 1-based line number of the first problem
    """
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise CohortFormatError("empty cohort file", 1)

    header = _parse_line(lines[0], 1, HEADER_SCHEMA)
    if header["format"] != COHORT_FORMAT:
        raise CohortFormatError(f"not a cohort file (format '{header['format']}')", 1)
    if header["version"] != COHORT_VERSION:
        raise CohortFormatError(
            f"cohort version {header['version']} is not supported (expected {COHORT_VERSION})", 1
        )
    try:
        cfg = CohortConfig(**header["config"])
    except ValidationError as e:
        raise CohortFormatError(f"invalid generator config ({e.error_count()} errors)", 1)

    n_patients = header["n_patients"]
    expected_lines = n_patients + 2
    if len(lines) < expected_lines:
        raise CohortFormatError(f"truncated file: expected {expected_lines} lines, found {len(lines)}", len(lines))
    if len(lines) > expected_lines:
        raise CohortFormatError("unexpected content after the template bank", expected_lines + 1)

    m, d, t = cfg.n_anatomies, cfg.embed_dim, cfg.tokens_per_anatomy
    patients = []
    for offset, line in enumerate(lines[1:n_patients + 1]):
        line_number = offset + 2
        payload = _parse_line(line, line_number, PATIENT_SCHEMA)
        anatomies = [None] * m
        for entry in payload["anatomies"]:
            j = entry["anatomy_id"]
            if j >= m or anatomies[j] is not None:
                raise CohortFormatError(f"bad or repeated anatomy_id {j}", line_number)
            tokens = _matrix(entry["visual_tokens"], (t, d), "visual_tokens", line_number)
            sentences = _array(entry["sentences"], "sentences", line_number)
            if sentences.ndim != 2 or sentences.shape[1] != d:
                raise CohortFormatError(f"sentences must be (L, {d}), got {sentences.shape}", line_number)
            anatomies[j] = AnatomyRecord(j, tokens, sentences, int(entry["label"]))
        patients.append(PatientRecord(payload["patient_id"], anatomies))

    bank_line = n_patients + 2
    bank = _parse_line(lines[-1], bank_line, BANK_SCHEMA)["bank"]
    templates = {}
    for entry in bank["templates"]:
        key = (entry["anatomy_id"], entry["polarity"], entry["template"])
        values = _array(entry["sentences"], "template sentences", bank_line)
        if values.ndim != 2 or values.shape[1] != d:
            raise CohortFormatError(f"template {key} must be (L, {d}), got {values.shape}", bank_line)
        templates[key] = values

    if _checksum(lines[1:]) != header["checksum"]:
        raise CohortFormatError("checksum mismatch: file body was modified", 1)

    return Cohort(
        config=cfg,
        patients=patients,
        visual_prototypes=_matrix(bank["visual_prototypes"], (m, d), "visual_prototypes", bank_line),
        text_prototypes=_matrix(bank["text_prototypes"], (m, d), "text_prototypes", bank_line),
        visual_offsets=_matrix(bank["visual_offsets"], (m, d), "visual_offsets", bank_line),
        text_offsets=_matrix(bank["text_offsets"], (m, d), "text_offsets", bank_line),
        templates=templates,
    )


def read_cohort(path):
    """
    Read a cohort file.

    Returns:
        Cohort

    Raises:
        CohortFormatError: On malformed content (no partial cohort is returned)
    """
    with open(path, "rb") as handle:
        raw = handle.read()
    try:
        text = io.StringIO(raw.decode("utf-8"), newline=None).read()
    except UnicodeDecodeError as e:
        raise CohortFormatError(f"not UTF-8 text (byte {e.start})", raw[:e.start].count(b"\n") + 1)
    cohort = parse_cohort(text)
    logger.debug(f"Read cohort {path}: {cohort.n_patients} patients")
    return cohort
