"""MaSSeS evaluation for open-ended visual question answering.

Majority (Ma), Subjectivity (S), semantic-similarity-aware subjectivity
(SeS) and their products, next to the VQA3+ and WUPS baselines.
"""

from masses.answers import (
    AnswerPattern,
    NormalizationConfig,
    Prediction,
    RawAnnotation,
    build_pattern,
    normalize_answer,
)
from masses.baseline import vqa3plus_averaged, vqa3plus_raw
from masses.grouping import (
    EmbeddingBackend,
    FixtureBackend,
    GroupedPattern,
    group_pattern,
    locate_prediction,
    pattern_centroid,
    vectorize_answer,
)
from masses.io import EmbeddingTable, Taxonomy, load_annotations, load_embeddings, load_predictions, load_taxonomy
from masses.metrics import SampleScore, compute_ma, compute_mas, compute_masses, compute_s
from masses.wups import wu_palmer, wups_consensus, wups_phrase

__version__ = "0.1.0"

__all__ = [
    "AnswerPattern", "NormalizationConfig", "Prediction", "RawAnnotation", "build_pattern",
    "normalize_answer", "vqa3plus_averaged", "vqa3plus_raw", "EmbeddingBackend", "FixtureBackend",
    "GroupedPattern", "group_pattern", "locate_prediction", "pattern_centroid", "vectorize_answer",
    "EmbeddingTable", "Taxonomy", "load_annotations", "load_embeddings", "load_predictions",
    "load_taxonomy", "SampleScore", "compute_ma", "compute_mas", "compute_masses", "compute_s",
    "wu_palmer", "wups_consensus", "wups_phrase",
]
