"""
Clinical-Aware Text Augmentation

A report is a list of sentences. Augmentation simulates two habits of
report writers: findings can be described in any order, and normal
structures are often left out. Each call therefore keeps a random,
non-empty subset of the sentences and (optionally) shuffles them.

PINNED PROCEDURE (golden tests depend on it):
1. Draw the kept size L' uniformly from {max(1, ceil(keep_min_fraction * L)), ..., L}
2. Fisher-Yates shuffle of the sentence positions
3. Keep the first L' positions; when shuffling is disabled, restore original order
"""

import math
import re
from fractions import Fraction
from typing import List, Sequence, TypeVar

from pydantic import BaseModel, ConfigDict, Field

from config import KEEP_MIN_FRACTION

T = TypeVar("T")

_SENTENCE_BOUNDARY = re.compile(r"[.!?]+(?=\s|$)")


class AugmentConfig(BaseModel):
    """Switches and bounds for report augmentation."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    keep_min_fraction: float = Field(default=KEEP_MIN_FRACTION, gt=0.0, le=1.0)
    shuffle_enabled: bool = True
    subset_enabled: bool = True


def kept_size_bounds(n_sentences, cfg):
    """Smallest and largest number of sentences a report of this length can keep."""
    if not cfg.subset_enabled:
        return n_sentences, n_sentences
    # Exact product of the decimal fraction, so 0.07 * 100 is 7 and not 7.000000000000001
    low = max(1, math.ceil(Fraction(str(cfg.keep_min_fraction)) * n_sentences))
    return min(low, n_sentences), n_sentences


def augment_report(sentences: Sequence[T], cfg: AugmentConfig, rng) -> List[T]:
    """
    Produce an augmented copy of a report.

    Args:
        sentences: Ordered sentence items (strings, feature rows or indices)
        cfg (AugmentConfig): Augmentation switches
        rng (Rng): Generator owned by this (patient, anatomy, step)

    Returns:
        list: Non-empty list of the original items (never mutated or copied)

    Raises:
        ValueError: If the report is empty
    """
    items = list(sentences)
    if not items:
        raise ValueError("Cannot augment an empty report")
    if len(items) == 1 or not (cfg.shuffle_enabled or cfg.subset_enabled):
        return items

    low, high = kept_size_bounds(len(items), cfg)
    keep = rng.randint(low, high) if cfg.subset_enabled else high

    positions = list(range(len(items)))
    rng.shuffle(positions)
    kept = positions[:keep]
    if not cfg.shuffle_enabled:
        kept.sort()
    return [items[i] for i in kept]


def split_sentences(raw_report):
    """
    Split raw report text into sentences.

    Sentences end at '.', '!' or '?' followed by whitespace or the end of the
    text. Terminal punctuation and surrounding whitespace are dropped, as are
    empty fragments.

    Args:
        raw_report (str): Report text

    Returns:
        list: Sentence strings in reading order
    """
    if not raw_report:
        return []
    fragments = _SENTENCE_BOUNDARY.split(raw_report)
    return [fragment.strip() for fragment in fragments if fragment.strip()]


def join_sentences(sentences):
    """Inverse of split_sentences up to punctuation normalization."""
    if not sentences:
        return ""
    return ". ".join(sentences) + "."
