"""Semantic regrouping of answer patterns.

Each unique answer is embedded as the mean of its token vectors, the
pattern centroid is the unweighted mean of those answer vectors, and every
answer whose (clamped) cosine to the centroid reaches the threshold joins a
single merged cluster. All other answers stay on their own.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Dict, Mapping, Optional, Tuple

import numpy as np

from masses.answers import AnswerPattern
from masses.errors import InputError, InvariantViolation
from masses.io import EmbeddingTable

# absorbs float round-off so collinear vectors still pass t = 1
SIM_TOLERANCE = 1e-12


@dataclass(frozen=True)
class Cluster:
    members: Tuple[str, ...]
    frequency: int


@dataclass(frozen=True)
class GroupedPattern:
    clusters: Tuple[Cluster, ...]
    threshold: Optional[float] = None
    coverage: float = 1.0

    def __post_init__(self):
        clusters = tuple(
            sorted(
                (Cluster(tuple(sorted(c.members)), c.frequency) for c in self.clusters),
                key=lambda c: (-c.frequency, c.members),
            )
        )
        if not clusters:
            raise ValueError("grouped pattern needs at least one cluster")
        lookup = {}
        for c in clusters:
            if not c.members:
                raise ValueError("empty cluster")
            for m in c.members:
                if m in lookup:
                    raise ValueError(f"answer {m!r} appears in two clusters")
                lookup[m] = c
        object.__setattr__(self, "clusters", clusters)
        object.__setattr__(self, "_lookup", lookup)

    @classmethod
    def from_partition(cls, pattern: AnswerPattern, blocks, threshold=None, coverage=1.0) -> "GroupedPattern":
        """Group ``pattern`` by an explicit partition of its answers."""
        covered = [a for block in blocks for a in block]
        if sorted(covered) != sorted(pattern.answers):
            raise ValueError("blocks must partition the pattern's answers")
        clusters = tuple(Cluster(tuple(b), sum(pattern.frequency(a) for a in b)) for b in blocks if b)
        return cls(clusters, threshold, coverage)

    @property
    def total(self) -> int:
        return sum(c.frequency for c in self.clusters)

    @property
    def max_frequency(self) -> int:
        return self.clusters[0].frequency

    @property
    def merged(self) -> Optional[Cluster]:
        big = [c for c in self.clusters if len(c.members) > 1]
        return big[0] if big else None

    def cluster_of(self, answer: str) -> Optional[Cluster]:
        return self._lookup.get(answer)

    def frequency(self, answer: str) -> int:
        c = self._lookup.get(answer)
        return 0 if c is None else c.frequency


class SimilarityBackend:
    """Maps a normalized answer to a vector, or ``None`` when it cannot.

    Backends may also pin the grouping outright by returning a label map
    from :meth:`cluster_labels`.
    """

    def vector(self, answer: str) -> Optional[np.ndarray]:
        raise NotImplementedError

    def cluster_labels(self) -> Optional[Mapping[str, str]]:
        return None


class EmbeddingBackend(SimilarityBackend):
    def __init__(self, table: EmbeddingTable):
        self.table = table

    def vector(self, answer):
        return vectorize_answer(answer, self.table)


class FixtureBackend(SimilarityBackend):
    """Explicit answer vectors, or answer -> cluster label overrides."""

    def __init__(self, vectors: Optional[Mapping[str, object]] = None, labels: Optional[Mapping[str, str]] = None):
        if (vectors is None) == (labels is None):
            raise ValueError("give exactly one of vectors or labels")
        self.labels = dict(labels) if labels is not None else None
        self.vectors = None
        if vectors is not None:
            self.vectors = {a: np.asarray(v, dtype=np.float64) for a, v in vectors.items()}
            dims = {v.shape for v in self.vectors.values()}
            if len(dims) > 1 or any(len(d) != 1 for d in dims):
                raise ValueError("fixture vectors must be 1-D and share one dimension")

    @classmethod
    def from_file(cls, path) -> "FixtureBackend":
        """Load a JSON object mapping answers to vectors or to string labels."""
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as exc:
            raise InputError(f"cannot read fixture backend: {exc.strerror or exc}", path=path) from exc
        except json.JSONDecodeError as exc:
            raise InputError(f"invalid JSON: {exc.msg}", path=path, offset=exc.pos) from exc
        if not isinstance(data, dict) or not data:
            raise InputError("fixture backend must be a non-empty JSON object", path=path)
        kinds = {isinstance(v, str) for v in data.values()}
        if kinds == {True}:
            return cls(labels=data)
        if kinds == {False} and all(isinstance(v, list) for v in data.values()):
            try:
                return cls(vectors=data)
            except ValueError as exc:
                raise InputError(str(exc), path=path) from exc
        raise InputError("fixture values must be all vectors or all string labels", path=path)

    def vector(self, answer):
        if self.vectors is None:
            return None
        return self.vectors.get(answer)

    def cluster_labels(self):
        return self.labels


def vectorize_answer(answer: str, table: EmbeddingTable) -> Optional[np.ndarray]:
    """Mean vector of the whitespace tokens found in ``table``; OOV tokens
    are skipped and a fully OOV answer gives ``None``."""
    rows = [table.index[tok] for tok in answer.split() if tok in table.index]
    if not rows:
        return None
    return table.matrix[rows].mean(axis=0)


def pattern_centroid(pattern: AnswerPattern, backend: SimilarityBackend) -> Optional[np.ndarray]:
    vecs = [v for v in (backend.vector(a) for a in pattern.answers) if v is not None]
    if not vecs:
        return None
    return np.mean(vecs, axis=0)


def _cosine(u: np.ndarray, v: np.ndarray) -> float:
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.dot(u, v)) / (nu * nv)


def centroid_similarities(pattern: AnswerPattern, backend: SimilarityBackend) -> Dict[str, float]:
    """Clamped cosine to the centroid for each vectorizable unique answer."""
    vecs = {a: backend.vector(a) for a in pattern.answers}
    vecs = {a: v for a, v in vecs.items() if v is not None}
    if not vecs:
        return {}
    centroid = np.mean(list(vecs.values()), axis=0)
    return {a: min(1.0, max(0.0, _cosine(v, centroid))) for a, v in vecs.items()}


def _group_by_labels(pattern, labels, t) -> GroupedPattern:
    by_label: Dict[str, list] = {}
    singles = []
    for a in pattern.answers:
        lab = labels.get(a)
        if lab is None:
            singles.append([a])
        else:
            by_label.setdefault(lab, []).append(a)
    blocks = list(by_label.values()) + singles
    if sum(1 for b in blocks if len(b) > 1) > 1:
        raise InvariantViolation(f"label override yields more than one merged cluster for pattern {pattern.as_dict()}")
    coverage = sum(1 for a in pattern.answers if a in labels) / pattern.unique_count
    return GroupedPattern.from_partition(pattern, blocks, threshold=t, coverage=coverage)


def group_pattern(pattern: AnswerPattern, backend: SimilarityBackend, t: float) -> GroupedPattern:
    """Merge every answer with centroid similarity ``>= t`` into one cluster.

    A backend that supplies cluster labels bypasses the embedding step and
    ``t`` is only recorded.
    """
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"threshold must lie in [0, 1], got {t}")
    labels = backend.cluster_labels()
    if labels is not None:
        return _group_by_labels(pattern, labels, t)
    sims = centroid_similarities(pattern, backend)
    merged = [a for a in pattern.answers if a in sims and sims[a] >= t - SIM_TOLERANCE]
    rest = [[a] for a in pattern.answers if a not in merged]
    blocks = ([merged] if merged else []) + rest
    return GroupedPattern.from_partition(pattern, blocks, threshold=t, coverage=len(sims) / pattern.unique_count)


def locate_prediction(grouped: GroupedPattern, predicted: str) -> Optional[Cluster]:
    return grouped.cluster_of(predicted)
