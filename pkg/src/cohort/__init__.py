"""
Cohort Module
Synthetic anatomy cohorts and their JSON Lines files.
"""
from src.cohort.models import POLARITIES, AnatomyRecord, Cohort, CohortConfig, PatientRecord
from src.cohort.generator import generate_cohort, orthonormal_basis, prototypes_at_angle
from src.cohort.cohort_io import cohort_to_text, parse_cohort, read_cohort, write_cohort

__all__ = [
    'POLARITIES',
    'AnatomyRecord',
    'Cohort',
    'CohortConfig',
    'PatientRecord',
    'generate_cohort',
    'orthonormal_basis',
    'prototypes_at_angle',
    'cohort_to_text',
    'parse_cohort',
    'read_cohort',
    'write_cohort',
]
