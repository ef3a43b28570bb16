"""Majority, Subjectivity and their compositions.

Every function here accepts either an :class:`~masses.answers.AnswerPattern`
or a :class:`~masses.grouping.GroupedPattern`; both expose ``total``,
``max_frequency`` and ``frequency(answer)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Optional

from masses.errors import DegeneratePatternError


def compute_ma(pattern, predicted: str) -> float:
    """Frequency of the predicted answer relative to the modal frequency.

    For grouped patterns the frequency is that of the cluster holding an
    exact member match. Unmatched predictions score 0.
    """
    return pattern.frequency(predicted) / pattern.max_frequency


def compute_s(pattern) -> float:
    """Reliability of an answer pattern, 1 at full consensus and 0 when flat.

    Reaching consensus from a pattern of ``n`` annotations takes at least
    ``n - f_max`` relabelings (the transport cost to a point mass under the
    0/1 ground metric). That cost peaks at ``n - 1`` for an all-distinct
    pattern, so the normalized score is ``1 - (n - f_max) / (n - 1)``.
    """
    n = pattern.total
    if n < 2:
        raise DegeneratePatternError(f"subjectivity is undefined for n={n}")
    return (pattern.max_frequency - 1) / (n - 1)


def compute_mas(ma: float, s: float) -> float:
    return ma * s


@dataclass(frozen=True)
class MassesScore:
    ses: float
    ma_updated: float
    masses: float


def compute_masses(pattern, grouped, predicted: str) -> MassesScore:
    """SeS, updated Ma and their product for one grouping of ``pattern``."""
    if grouped.total != pattern.total:
        raise ValueError("grouped pattern does not come from this pattern")
    ses = compute_s(grouped)
    ma_updated = compute_ma(grouped, predicted)
    return MassesScore(ses=ses, ma_updated=ma_updated, masses=ma_updated * ses)


def threshold_key(t: float) -> str:
    """Stable label for a threshold, e.g. ``0.9`` -> ``"0.9"``."""
    return f"{t:g}"


@dataclass
class SampleScore:
    """Per-question scores. ``s`` and the per-threshold entries are ``None``
    for degenerate (single-annotation) samples."""

    question_id: object
    n: int
    unique_answers: int
    vqa3plus: Optional[float] = None
    ma: Optional[float] = None
    s: Optional[float] = None
    mas: Optional[float] = None
    per_threshold: Dict[float, Optional[MassesScore]] = field(default_factory=dict)
    coverage: Optional[float] = None
    wups_acm: Optional[float] = None
    wups_mcm: Optional[float] = None
    prediction: Optional[str] = None
    degenerate: bool = False

    def to_record(self) -> dict:
        """Flat JSON-ready mapping (``ses_0.9``, ``masses_0.9`` and so on)."""
        rec = {
            "question_id": self.question_id,
            "n": self.n,
            "unique_answers": self.unique_answers,
            "degenerate": self.degenerate,
        }
        if self.prediction is not None:
            rec["prediction"] = self.prediction
            rec["vqa3plus"] = self.vqa3plus
            rec["ma"] = self.ma
        rec["s"] = self.s
        if self.prediction is not None:
            rec["mas"] = self.mas
        for t in sorted(self.per_threshold):
            k = threshold_key(t)
            sc = self.per_threshold[t]
            rec[f"ses_{k}"] = None if sc is None else sc.ses
            if self.prediction is not None:
                rec[f"ma_updated_{k}"] = None if sc is None else sc.ma_updated
                rec[f"masses_{k}"] = None if sc is None else sc.masses
        rec["coverage"] = self.coverage
        if self.wups_acm is not None:
            rec["wups_acm"] = self.wups_acm
        if self.wups_mcm is not None:
            rec["wups_mcm"] = self.wups_mcm
        return rec

    def check(self) -> None:
        """Raise ``ValueError`` if any stored score leaves [0, 1] or a
        MaSSeS value differs from its factors' product."""
        values = [self.vqa3plus, self.ma, self.s, self.mas, self.coverage, self.wups_acm, self.wups_mcm]
        for sc in self.per_threshold.values():
            if sc is not None:
                values += [sc.ses, sc.ma_updated, sc.masses]
                if sc.masses != sc.ma_updated * sc.ses:
                    raise ValueError(f"{self.question_id!r}: masses != ma_updated * ses")
        for v in values:
            if v is not None and not 0.0 <= v <= 1.0:
                raise ValueError(f"{self.question_id!r}: score {v!r} outside [0, 1]")
