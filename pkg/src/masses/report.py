"""Dataset-level evaluation, analysis and run comparison.

Samples are scored independently (optionally in worker processes) and then
reduced sequentially in question_id order, so outputs do not depend on the
worker count.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

from masses.answers import DEFAULT_NORMALIZATION, NormalizationConfig, RawAnnotation, build_pattern, normalize_answer
from masses.baseline import vqa3plus_averaged, vqa3plus_raw
from masses.errors import IdResolutionError, InputError, InvariantViolation
from masses.grouping import EmbeddingBackend, FixtureBackend, SimilarityBackend, group_pattern
from masses.io import Taxonomy, load_annotations, load_embeddings, load_predictions, load_taxonomy
from masses.metrics import MassesScore, SampleScore, compute_ma, compute_mas, compute_masses, compute_s, threshold_key
from masses.wups import wups_consensus

log = logging.getLogger(__name__)

DEFAULT_THRESHOLDS = (0.7, 0.9)
BIN_EPSILON = 1e-9


def qid_sort_key(qid):
    """Integers (numerically) before strings (lexicographically)."""
    return (0, qid, "") if isinstance(qid, int) else (1, 0, str(qid))


def normalize_thresholds(values) -> Tuple[float, ...]:
    ts = sorted({float(v) for v in values})
    for t in ts:
        if not 0.0 <= t <= 1.0:
            raise ValueError(f"threshold {t} outside [0, 1]")
    return tuple(ts)


@dataclass
class RunConfig:
    annotations: str
    annotation_format: str = "vqa-json"
    predictions: Optional[str] = None
    embeddings: Optional[str] = None
    fixture_backend: Optional[str] = None
    taxonomy: Optional[str] = None
    ses_thresholds: Sequence[float] = DEFAULT_THRESHOLDS
    wups_threshold: float = 0.9
    wups_modes: Sequence[str] = ("acm", "mcm")
    wups_hard_cut: bool = False
    normalization: NormalizationConfig = DEFAULT_NORMALIZATION
    out_dir: Optional[str] = None
    workers: int = 1
    bins: int = 10
    unmatched_tolerance: float = 0.0
    include_degenerate: bool = False
    histogram_csv: bool = False

    def __post_init__(self):
        self.ses_thresholds = normalize_thresholds(self.ses_thresholds)
        if self.embeddings and self.fixture_backend:
            raise ValueError("use either embeddings or a fixture backend, not both")
        if self.bins < 1:
            raise ValueError("bins must be positive")
        if not 0.0 <= self.unmatched_tolerance <= 1.0:
            raise ValueError("unmatched tolerance must lie in [0, 1]")


@dataclass(frozen=True)
class ScoringContext:
    """Everything a worker needs to score one sample; immutable."""

    thresholds: Tuple[float, ...] = DEFAULT_THRESHOLDS
    backend: Optional[SimilarityBackend] = None
    taxonomy: Optional[Taxonomy] = None
    normalization: NormalizationConfig = DEFAULT_NORMALIZATION
    wups_threshold: float = 0.9
    wups_modes: Tuple[str, ...] = ("acm", "mcm")
    wups_hard_cut: bool = False
    include_degenerate: bool = False


def score_sample(ann: RawAnnotation, predicted: Optional[str], ctx: ScoringContext) -> SampleScore:
    """Score one annotation, with or without a prediction."""
    pattern = build_pattern(ann, ctx.normalization)
    degenerate = pattern.total < 2
    score = SampleScore(
        question_id=ann.question_id,
        n=pattern.total,
        unique_answers=pattern.unique_count,
        degenerate=degenerate,
    )
    pred = None
    if predicted is not None:
        pred = normalize_answer(predicted, ctx.normalization)
        score.prediction = pred
        score.vqa3plus = vqa3plus_raw(pattern, pred) if degenerate else vqa3plus_averaged(pattern, pred)
        score.ma = compute_ma(pattern, pred)

    # a lone annotation trivially agrees with itself
    use_s = not degenerate or ctx.include_degenerate
    if use_s:
        score.s = 1.0 if degenerate else compute_s(pattern)
        if pred is not None:
            score.mas = compute_mas(score.ma, score.s)

    if ctx.backend is not None:
        for t in ctx.thresholds:
            grouped = group_pattern(pattern, ctx.backend, t)
            score.coverage = grouped.coverage
            if not use_s:
                score.per_threshold[t] = None
            elif degenerate:
                ma_u = compute_ma(grouped, pred) if pred is not None else 0.0
                score.per_threshold[t] = MassesScore(ses=1.0, ma_updated=ma_u, masses=ma_u)
            else:
                score.per_threshold[t] = compute_masses(pattern, grouped, pred if pred is not None else "")

    if ctx.taxonomy is not None and pred is not None:
        if "acm" in ctx.wups_modes:
            score.wups_acm = wups_consensus(pattern, pred, ctx.taxonomy, ctx.wups_threshold, "acm", ctx.wups_hard_cut)
        if "mcm" in ctx.wups_modes:
            score.wups_mcm = wups_consensus(pattern, pred, ctx.taxonomy, ctx.wups_threshold, "mcm", ctx.wups_hard_cut)

    try:
        score.check()
    except ValueError as exc:
        raise InvariantViolation(str(exc)) from exc
    return score


_WORKER_CTX: Optional[ScoringContext] = None


def _init_worker(ctx):
    global _WORKER_CTX
    _WORKER_CTX = ctx


def _score_item(item):
    ann, pred = item
    return score_sample(ann, pred, _WORKER_CTX).to_record()


def score_all(items, ctx: ScoringContext, workers: int = 1) -> List[dict]:
    """Score ``(annotation, prediction-or-None)`` pairs; records come back
    sorted by question_id."""
    items = list(items)
    if workers <= 1 or len(items) < 2:
        records = [score_sample(a, p, ctx).to_record() for a, p in items]
    else:
        chunk = max(1, len(items) // (workers * 4))
        with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker, initargs=(ctx,)) as ex:
            records = list(ex.map(_score_item, items, chunksize=chunk))
    records.sort(key=lambda r: qid_sort_key(r["question_id"]))
    return records


def resolve_predictions(annotations, predictions, tolerance: float = 0.0):
    """Pair annotations with predictions by question_id.

    Returns ``(pairs, unmatched_prediction_ids, missing_annotation_ids)``;
    raises :class:`IdResolutionError` when the unresolved share of the
    annotation set exceeds ``tolerance``.
    """
    if not annotations:
        raise InputError("annotation set is empty")
    by_id = {p.question_id: p for p in predictions}
    ann_ids = {a.question_id for a in annotations}
    unmatched = sorted((q for q in by_id if q not in ann_ids), key=qid_sort_key)
    missing = sorted((a.question_id for a in annotations if a.question_id not in by_id), key=qid_sort_key)
    unresolved = len(unmatched) + len(missing)
    if unresolved / len(annotations) > tolerance:
        raise IdResolutionError(
            f"{len(unmatched)} prediction(s) without annotation, {len(missing)} annotation(s) without prediction",
            unmatched + missing,
        )
    pairs = [(a, by_id[a.question_id].answer) for a in annotations if a.question_id in by_id]
    return pairs, unmatched, missing


def score_bin(x: float, bins: int) -> int:
    """Bin index of a score in ``[0, 1]`` split into ``bins`` equal bins.

    Bins are half-open except the last; values sitting on an edge up to
    float round-off (0.3 with 10 bins) go to the upper bin.
    """
    return min(int(math.floor(x * bins + BIN_EPSILON)), bins - 1)


def histogram(values, bins: int) -> dict:
    counts = [0] * bins
    for v in values:
        counts[score_bin(v, bins)] += 1
    return {"edges": [i / bins for i in range(bins + 1)], "counts": counts}


def _mean(values) -> Optional[float]:
    values = list(values)
    return math.fsum(values) / len(values) if values else None


def _metric_keys(records) -> List[str]:
    skip = {"question_id", "n", "unique_answers", "degenerate", "prediction", "coverage"}
    keys: List[str] = []
    for r in records:
        for k in r:
            if k not in skip and k not in keys:
                keys.append(k)
    return keys


def _values(records, key):
    return [r[key] for r in records if r.get(key) is not None]


def ses_bins(records, threshold_label: str, bins: int) -> Optional[dict]:
    """Mean VQA3+ of the samples falling in each SeS bin."""
    key = f"ses_{threshold_label}"
    rows = [(r[key], r["vqa3plus"]) for r in records if r.get(key) is not None and r.get("vqa3plus") is not None]
    if not any(key in r for r in records):
        return None
    groups: List[List[float]] = [[] for _ in range(bins)]
    for ses, acc in rows:
        groups[score_bin(ses, bins)].append(acc)
    return {
        "edges": [i / bins for i in range(bins + 1)],
        "counts": [len(g) for g in groups],
        "mean_vqa3plus": [_mean(g) for g in groups],
    }


def aggregate(records: List[dict], thresholds: Sequence[float], bins: int = 10, counts: Optional[dict] = None) -> dict:
    """Build the dataset summary from per-sample records (already sorted)."""
    keys = _metric_keys(records)
    summary_counts = {
        "samples": len(records),
        "degenerate": sum(1 for r in records if r["degenerate"]),
    }
    summary_counts.update(counts or {})
    means = {k: _mean(_values(records, k)) for k in keys}
    metric_counts = {k: len(_values(records, k)) for k in keys}
    unique = {}
    for r in records:
        unique[r["unique_answers"]] = unique.get(r["unique_answers"], 0) + 1
    hists = {k: histogram(_values(records, k), bins) for k in keys}
    coverage = _values(records, "coverage")
    summary = {
        "counts": summary_counts,
        "means": means,
        "metric_counts": metric_counts,
        "histograms": {
            "unique_answers": [{"unique_answers": k, "count": unique[k]} for k in sorted(unique)],
            "scores": hists,
        },
        "coverage": {
            "mean": _mean(coverage),
            "min": min(coverage) if coverage else None,
            "full_fraction": (sum(1 for c in coverage if c == 1.0) / len(coverage)) if coverage else None,
        },
    }
    if any("vqa3plus" in r for r in records):
        summary["ses_bins"] = {}
        for t in thresholds:
            b = ses_bins(records, threshold_key(t), bins)
            if b is not None:
                summary["ses_bins"][threshold_key(t)] = b
    return summary


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False, ensure_ascii=False) + "\n"


def write_jsonl(records, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for r in records:
            fh.write(json.dumps(r, allow_nan=False, ensure_ascii=False) + "\n")


def read_jsonl(path) -> List[dict]:
    out = []
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read file: {exc.strerror or exc}", path=path) from exc
    with fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise InputError(f"invalid JSON: {exc.msg}", path=path, offset=lineno) from exc
            if not isinstance(rec, dict) or "question_id" not in rec:
                raise InputError("record lacks question_id", path=path, offset=lineno)
            out.append(rec)
    return out


def write_histogram_csvs(summary, out_dir) -> List[str]:
    written = []
    for name, h in summary["histograms"]["scores"].items():
        path = os.path.join(out_dir, f"hist_{name}.csv")
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["bin_lo", "bin_hi", "count"])
            for lo, hi, c in zip(h["edges"], h["edges"][1:], h["counts"]):
                w.writerow([repr(lo), repr(hi), c])
        written.append(path)
    path = os.path.join(out_dir, "hist_unique_answers.csv")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["unique_answers", "count"])
        for row in summary["histograms"]["unique_answers"]:
            w.writerow([row["unique_answers"], row["count"]])
    written.append(path)
    return written


@dataclass
class RunResult:
    records: List[dict]
    summary: dict
    files: List[str] = field(default_factory=list)


def load_backend(config: RunConfig) -> Optional[SimilarityBackend]:
    if config.embeddings:
        return EmbeddingBackend(load_embeddings(config.embeddings))
    if config.fixture_backend:
        return FixtureBackend.from_file(config.fixture_backend)
    return None


def _context(config: RunConfig) -> ScoringContext:
    backend = load_backend(config)
    if backend is None:
        log.warning("no embeddings or fixture backend given; SeS and MaSSeS are skipped")
    taxonomy = load_taxonomy(config.taxonomy) if config.taxonomy else None
    return ScoringContext(
        thresholds=tuple(config.ses_thresholds),
        backend=backend,
        taxonomy=taxonomy,
        normalization=config.normalization,
        wups_threshold=config.wups_threshold,
        wups_modes=tuple(config.wups_modes),
        wups_hard_cut=config.wups_hard_cut,
        include_degenerate=config.include_degenerate,
    )


def _settings(config: RunConfig, with_predictions: bool) -> dict:
    s = {
        "ses_thresholds": list(config.ses_thresholds),
        "similarity": "embeddings" if config.embeddings else ("fixture" if config.fixture_backend else None),
        "bins": config.bins,
        "include_degenerate": config.include_degenerate,
        "normalization": config.normalization.describe(),
    }
    if with_predictions and config.taxonomy:
        s["wups"] = {
            "threshold": config.wups_threshold,
            "modes": list(config.wups_modes),
            "hard_cut": config.wups_hard_cut,
        }
    return s


def _emit(config: RunConfig, records, summary) -> List[str]:
    if not config.out_dir:
        return []
    os.makedirs(config.out_dir, exist_ok=True)
    samples = os.path.join(config.out_dir, "samples.jsonl")
    write_jsonl(records, samples)
    summary_path = os.path.join(config.out_dir, "summary.json")
    with open(summary_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(_dump_json(summary))
    files = [samples, summary_path]
    if config.histogram_csv:
        files += write_histogram_csvs(summary, config.out_dir)
    return files


def evaluate(config: RunConfig) -> RunResult:
    """Score predictions against annotations and write the run outputs."""
    if not config.predictions:
        raise InputError("evaluate needs a predictions file")
    annotations = load_annotations(config.annotations, config.annotation_format)
    predictions = load_predictions(config.predictions)
    pairs, unmatched, missing = resolve_predictions(annotations, predictions, config.unmatched_tolerance)
    ctx = _context(config)
    records = score_all(pairs, ctx, config.workers)
    counts = {
        "annotations": len(annotations),
        "predictions": len(predictions),
        "predictions_unmatched": len(unmatched),
        "predictions_missing": len(missing),
        "degenerate_excluded": 0 if config.include_degenerate else sum(1 for r in records if r["degenerate"]),
    }
    summary = aggregate(records, config.ses_thresholds, config.bins, counts)
    summary["settings"] = _settings(config, True)
    return RunResult(records, summary, _emit(config, records, summary))


def analyze(config: RunConfig) -> RunResult:
    """Prediction-free dataset analysis (S, SeS, unique-answer counts)."""
    annotations = load_annotations(config.annotations, config.annotation_format)
    if not annotations:
        raise InputError("annotation set is empty", path=config.annotations)
    ctx = _context(config)
    records = score_all([(a, None) for a in annotations], ctx, config.workers)
    counts = {
        "annotations": len(annotations),
        "degenerate_excluded": 0 if config.include_degenerate else sum(1 for r in records if r["degenerate"]),
    }
    summary = aggregate(records, config.ses_thresholds, config.bins, counts)
    summary["settings"] = _settings(config, False)
    return RunResult(records, summary, _emit(config, records, summary))


def compare_records(
    left: List[dict],
    right: List[dict],
    left_metric: str,
    right_metric: str,
    bins: int = 10,
    ses_threshold: float = 0.9,
) -> dict:
    """Per-sample ``left_metric - right_metric`` deltas and side-by-side
    histograms. Deltas are listed by decreasing magnitude."""
    lids = {r["question_id"] for r in left}
    rids = {r["question_id"] for r in right}
    if lids != rids:
        diff = sorted(lids ^ rids, key=qid_sort_key)
        raise IdResolutionError("runs cover different question_ids", diff)
    rmap = {r["question_id"]: r for r in right}
    for metric, recs in ((left_metric, left), (right_metric, right)):
        if not any(metric in r for r in recs):
            raise InputError(f"metric {metric!r} not present in records")
    deltas = []
    skipped = 0
    for r in sorted(left, key=lambda r: qid_sort_key(r["question_id"])):
        a, b = r.get(left_metric), rmap[r["question_id"]].get(right_metric)
        if a is None or b is None:
            skipped += 1
            continue
        deltas.append({"question_id": r["question_id"], "left": a, "right": b, "delta": a - b})
    deltas.sort(key=lambda d: (-abs(d["delta"]), qid_sort_key(d["question_id"])))
    out = {
        "left_metric": left_metric,
        "right_metric": right_metric,
        "samples": len(left),
        "compared": len(deltas),
        "skipped": skipped,
        "mean_delta": _mean(d["delta"] for d in deltas),
        "mean_abs_delta": _mean(abs(d["delta"]) for d in deltas),
        "deltas": deltas,
        "histograms": {
            "edges": [i / bins for i in range(bins + 1)],
            "left": histogram([d["left"] for d in deltas], bins)["counts"],
            "right": histogram([d["right"] for d in deltas], bins)["counts"],
        },
    }
    sb = ses_bins(left, threshold_key(ses_threshold), bins)
    if sb is not None:
        out["ses_bins"] = {threshold_key(ses_threshold): sb}
    return out


def write_compare(result: dict, out_dir) -> List[str]:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "compare.json")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(_dump_json(result))
    deltas = os.path.join(out_dir, "compare_deltas.csv")
    with open(deltas, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["question_id", result["left_metric"], result["right_metric"], "delta"])
        for d in result["deltas"]:
            w.writerow([d["question_id"], repr(d["left"]), repr(d["right"]), repr(d["delta"])])
    hist = os.path.join(out_dir, "compare_histograms.csv")
    with open(hist, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        h = result["histograms"]
        w.writerow(["bin_lo", "bin_hi", result["left_metric"], result["right_metric"]])
        for lo, hi, a, b in zip(h["edges"], h["edges"][1:], h["left"], h["right"]):
            w.writerow([repr(lo), repr(hi), a, b])
    return [path, deltas, hist]
