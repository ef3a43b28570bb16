"""VQA3+ accuracy: ``min(#humans that gave the answer / 3, 1)``.

The averaged form is what the official evaluation tool reports: the raw
score recomputed on every leave-one-annotator-out subset, then averaged.
"""

from __future__ import annotations

from fractions import Fraction

from masses.errors import DegeneratePatternError


def _raw(f) -> Fraction:
    return min(Fraction(f, 3), Fraction(1))


def vqa3plus_raw(pattern, predicted: str) -> float:
    return float(_raw(pattern.frequency(predicted)))


def vqa3plus_averaged(pattern, predicted: str) -> float:
    """Mean of the raw score over the ``n`` subsets missing one annotator.

    Dropping one of the ``f`` matching annotators leaves ``f - 1`` matches,
    dropping any of the other ``n - f`` leaves ``f``. Exact rational
    arithmetic keeps the result correctly rounded.
    """
    n = pattern.total
    if n < 2:
        raise DegeneratePatternError(f"leave-one-out averaging needs n >= 2, got n={n}")
    f = pattern.frequency(predicted)
    if f == 0:
        return 0.0
    return float((f * _raw(f - 1) + (n - f) * _raw(f)) / n)
