"""
Column featurization.

Layout of a width-m vector:

* slots ``[0, m-8)``: counts of character 1-, 2- and 3-grams of the column
  text (cells joined with the 0x1F unit separator), bucketed by
  ``fnv1a_64(gram) % (m - 8)`` and L2-normalized;
* slots ``[m-8, m)``: log1p(mean cell length), numeric-cell fraction, digit
  character fraction, letter character fraction, distinct-cell fraction,
  empty-cell fraction, log1p(mean whitespace tokens per cell),
  log1p(cell count).
"""

from __future__ import annotations

from collections.abc import Sequence
from functools import lru_cache

import numpy as np

from ..exceptions import InvalidInputError
from ..hashing import fnv1a_64

SEPARATOR = "\x1f"
NGRAM_SIZES = (1, 2, 3)
RESERVED_SLOTS = 8
MIN_WIDTH = 16


@lru_cache(maxsize=200_000)
def _gram_hash(gram: str) -> int:
    return fnv1a_64(gram)


def _is_numeric(cell: str) -> bool:
    text = cell.strip().replace(",", "")
    if not text:
        return False
    try:
        float(text)
    except ValueError:
        return False
    return True


def _statistics(values: Sequence[str]) -> np.ndarray:
    n = len(values)
    chars = "".join(values)
    total_chars = max(len(chars), 1)
    return np.array([
        np.log1p(sum(len(v) for v in values) / n),
        sum(_is_numeric(v) for v in values) / n,
        sum(ch.isdigit() for ch in chars) / total_chars,
        sum(ch.isalpha() for ch in chars) / total_chars,
        len(set(values)) / n,
        sum(not v.strip() for v in values) / n,
        np.log1p(sum(len(v.split()) for v in values) / n),
        np.log1p(n),
    ])


@lru_cache(maxsize=50_000)
def _featurize_cached(values: tuple[str, ...], width: int) -> np.ndarray:
    features = np.zeros(width)
    if values:
        buckets = width - RESERVED_SLOTS
        text = SEPARATOR.join(values)
        for n in NGRAM_SIZES:
            for start in range(len(text) - n + 1):
                features[_gram_hash(text[start : start + n]) % buckets] += 1.0
        norm = np.linalg.norm(features[:buckets])
        if norm > 0:
            features[:buckets] /= norm
        features[buckets:] = _statistics(values)
    features.setflags(write=False)
    return features


def featurize(values: Sequence[str], width: int = 1024) -> np.ndarray:
    """Deterministic feature vector ψ of one column; all zeros for an empty column."""
    if width < MIN_WIDTH:
        raise InvalidInputError(
            f"Feature width must be at least {MIN_WIDTH}",
            details={"width": width},
        )
    return _featurize_cached(tuple(values), width)
