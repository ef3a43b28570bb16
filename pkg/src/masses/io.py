"""Readers (and one writer) for the external file formats.

Annotations come as ``vqa-json`` (the public VQA annotation schema) or
``simple-jsonl``; predictions as a JSON array of ``{question_id, answer}``;
embeddings in word-vector text format; taxonomies as a tab-separated edge
list with optional ``word<TAB>#<TAB>node`` lines.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional

import numpy as np

from masses.answers import Prediction, RawAnnotation
from masses.errors import DuplicateIdError, InputError

log = logging.getLogger(__name__)

ANNOTATION_FORMATS = ("vqa-json", "simple-jsonl")


def _read_text(path) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"cannot read file: {exc.strerror or exc}", path=path) from exc
    except UnicodeDecodeError as exc:
        raise InputError(f"file is not valid UTF-8: {exc}", path=path) from exc


def _load_json(path):
    text = _read_text(path)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON: {exc.msg}", path=path, offset=exc.pos) from exc


def _check_qid(qid, path, offset):
    if isinstance(qid, bool) or not isinstance(qid, (str, int)):
        raise InputError("question_id must be a string or integer", path=path, offset=offset)
    return qid


def _vqa_json_record(rec, path, offset) -> RawAnnotation:
    if not isinstance(rec, dict) or "question_id" not in rec:
        raise InputError("annotation record lacks question_id", path=path, offset=offset)
    qid = _check_qid(rec["question_id"], path, offset)
    answers = rec.get("answers")
    if not isinstance(answers, list) or not answers:
        raise InputError("annotation needs a non-empty 'answers' array", path=path, offset=offset, question_id=qid)
    texts = []
    for item in answers:
        if not isinstance(item, dict) or not isinstance(item.get("answer"), str):
            raise InputError("each answer must be an object with a string 'answer'", path=path, offset=offset, question_id=qid)
        texts.append(item["answer"])
    return RawAnnotation(
        question_id=qid,
        answers=tuple(texts),
        question_text=rec.get("question"),
        answer_type=rec.get("answer_type"),
    )


def _simple_record(rec, path, offset) -> RawAnnotation:
    if not isinstance(rec, dict) or "question_id" not in rec:
        raise InputError("annotation record lacks question_id", path=path, offset=offset)
    qid = _check_qid(rec["question_id"], path, offset)
    answers = rec.get("answers")
    if not isinstance(answers, list) or not answers or not all(isinstance(a, str) for a in answers):
        raise InputError("'answers' must be a non-empty array of strings", path=path, offset=offset, question_id=qid)
    return RawAnnotation(
        question_id=qid,
        answers=tuple(answers),
        question_text=rec.get("question"),
        answer_type=rec.get("answer_type"),
    )


def load_annotations(path, format: str = "vqa-json") -> List[RawAnnotation]:
    """Parse an annotation file into :class:`RawAnnotation` records.

    Offsets in errors are the record index for ``vqa-json`` and the 1-based
    line number for ``simple-jsonl``.
    """
    out: List[RawAnnotation] = []
    if format == "vqa-json":
        data = _load_json(path)
        if not isinstance(data, dict) or not isinstance(data.get("annotations"), list):
            raise InputError("expected a top-level object with an 'annotations' array", path=path)
        for i, rec in enumerate(data["annotations"]):
            out.append(_vqa_json_record(rec, path, i))
    elif format == "simple-jsonl":
        for lineno, line in enumerate(_read_text(path).splitlines(), start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise InputError(f"invalid JSON: {exc.msg}", path=path, offset=lineno) from exc
            out.append(_simple_record(rec, path, lineno))
    else:
        raise InputError(f"unknown annotation format {format!r}; expected one of {ANNOTATION_FORMATS}", path=path)

    seen = set()
    for ann in out:
        if ann.question_id in seen:
            raise DuplicateIdError("duplicate question_id", path=path, question_id=ann.question_id)
        seen.add(ann.question_id)
    return out


def write_annotations_jsonl(annotations, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for ann in annotations:
            rec = {"question_id": ann.question_id, "answers": list(ann.answers)}
            if ann.question_text is not None:
                rec["question"] = ann.question_text
            if ann.answer_type is not None:
                rec["answer_type"] = ann.answer_type
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


def load_predictions(path) -> List[Prediction]:
    data = _load_json(path)
    if not isinstance(data, list):
        raise InputError("predictions must be a JSON array", path=path)
    out = []
    seen = set()
    for i, rec in enumerate(data):
        if not isinstance(rec, dict) or "question_id" not in rec:
            raise InputError("prediction record lacks question_id", path=path, offset=i)
        qid = _check_qid(rec["question_id"], path, i)
        if not isinstance(rec.get("answer"), str):
            raise InputError("prediction record needs a string 'answer'", path=path, offset=i, question_id=qid)
        if qid in seen:
            raise DuplicateIdError("duplicate prediction question_id", path=path, offset=i, question_id=qid)
        seen.add(qid)
        out.append(Prediction(qid, rec["answer"]))
    return out


@dataclass(frozen=True)
class EmbeddingTable:
    """Exact-token lookup into a dense ``(V, d)`` matrix."""

    index: Dict[str, int]
    matrix: np.ndarray

    @property
    def dimension(self) -> int:
        return int(self.matrix.shape[1])

    @property
    def vocabulary_size(self) -> int:
        return len(self.index)

    def __contains__(self, token) -> bool:
        return token in self.index

    def get(self, token: str) -> Optional[np.ndarray]:
        row = self.index.get(token)
        return None if row is None else self.matrix[row]

    @classmethod
    def from_dict(cls, vectors) -> "EmbeddingTable":
        tokens = list(vectors)
        if not tokens:
            raise ValueError("empty embedding table")
        matrix = np.asarray([vectors[t] for t in tokens], dtype=np.float64)
        if matrix.ndim != 2 or not np.all(np.isfinite(matrix)):
            raise ValueError("vectors must share one dimension and be finite")
        return cls({t: i for i, t in enumerate(tokens)}, matrix)


def _is_header(fields) -> bool:
    return len(fields) == 2 and all(f.isdigit() for f in fields)


def load_embeddings(path) -> EmbeddingTable:
    """Read a word-vector text file (optional ``V d`` header line).

    Duplicate tokens keep the last row and log a warning.
    """
    index: Dict[str, int] = {}
    rows: List[List[float]] = []
    dim = None
    header = None
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read file: {exc.strerror or exc}", path=path) from exc
    with fh:
        for lineno, line in enumerate(fh, start=1):
            fields = line.rstrip("\n").split()
            if not fields:
                continue
            if lineno == 1 and _is_header(fields):
                header = (int(fields[0]), int(fields[1]))
                continue
            token, comps = fields[0], fields[1:]
            if dim is None:
                dim = len(comps)
                if dim == 0:
                    raise InputError("vector line has no components", path=path, offset=lineno)
                if header and header[1] != dim:
                    raise InputError(f"header declares d={header[1]} but first vector has {dim}", path=path, offset=lineno)
            if len(comps) != dim:
                raise InputError(f"dimension mismatch: expected {dim}, got {len(comps)}", path=path, offset=lineno)
            try:
                vec = [float(c) for c in comps]
            except ValueError as exc:
                raise InputError(f"non-numeric component: {exc}", path=path, offset=lineno) from exc
            if not all(math.isfinite(v) for v in vec):
                raise InputError("NaN or infinite component", path=path, offset=lineno)
            if token in index:
                log.warning("%s:%d: duplicate token %r, keeping last occurrence", path, lineno, token)
                rows[index[token]] = vec
            else:
                index[token] = len(rows)
                rows.append(vec)
    if not rows:
        raise InputError("embedding file contains no vectors", path=path)
    if header and header[0] != len(rows):
        log.warning("%s: header declares %d tokens, read %d", path, header[0], len(rows))
    return EmbeddingTable(index, np.asarray(rows, dtype=np.float64))


@dataclass
class Taxonomy:
    """Rooted DAG of concepts with surface-word mappings.

    Every node name also counts as a surface word for itself.
    """

    parents: Dict[str, FrozenSet[str]]
    word_to_nodes: Dict[str, FrozenSet[str]]
    root: str
    depth: Dict[str, int] = field(init=False)
    _ancestors: Dict[str, FrozenSet[str]] = field(init=False, repr=False, default_factory=dict)

    def __post_init__(self):
        self.depth = _depths(self.parents, self.root)

    @property
    def nodes(self) -> FrozenSet[str]:
        return frozenset(self.parents)

    def nodes_for(self, word: str) -> FrozenSet[str]:
        found = self.word_to_nodes.get(word, frozenset())
        if word in self.parents:
            found = found | {word}
        return found

    def ancestors(self, node: str) -> FrozenSet[str]:
        """All ancestors of ``node``, itself included."""
        cached = self._ancestors.get(node)
        if cached is not None:
            return cached
        seen = {node}
        stack = [node]
        while stack:
            for p in self.parents[stack.pop()]:
                if p not in seen:
                    seen.add(p)
                    stack.append(p)
        result = frozenset(seen)
        self._ancestors[node] = result
        return result

    @classmethod
    def from_edges(cls, edges, words=()) -> "Taxonomy":
        """Build from ``(child, parent)`` pairs and ``(word, node)`` pairs."""
        parents: Dict[str, set] = {}
        for child, parent in edges:
            parents.setdefault(child, set()).add(parent)
            parents.setdefault(parent, set())
        word_map: Dict[str, set] = {}
        for word, node in words:
            parents.setdefault(node, set())
            word_map.setdefault(word, set()).add(node)
        return _validated(parents, word_map, path=None)


def _validated(parents, word_map, path) -> Taxonomy:
    roots = sorted(n for n, ps in parents.items() if not ps)
    cycle_node = _find_cycle(parents)
    if cycle_node is not None:
        raise InputError(f"cycle detected through node {cycle_node!r}", path=path)
    if len(roots) != 1:
        raise InputError(f"taxonomy must have exactly one root, found {len(roots)}: {roots[:10]}", path=path)
    return Taxonomy(
        parents={n: frozenset(ps) for n, ps in parents.items()},
        word_to_nodes={w: frozenset(ns) for w, ns in word_map.items()},
        root=roots[0],
    )


def _find_cycle(parents) -> Optional[str]:
    white, grey, black = 0, 1, 2
    color = {n: white for n in parents}
    for start in sorted(parents):
        if color[start] != white:
            continue
        color[start] = grey
        stack = [(start, iter(sorted(parents[start])))]
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                color[node] = black
                stack.pop()
            elif color[nxt] == grey:
                return nxt
            elif color[nxt] == white:
                color[nxt] = grey
                stack.append((nxt, iter(sorted(parents[nxt]))))
    return None


def _depths(parents, root) -> Dict[str, int]:
    # depth = 1 + min parent depth, i.e. BFS distance from the root + 1
    children: Dict[str, List[str]] = {n: [] for n in parents}
    for child, ps in parents.items():
        for p in ps:
            children[p].append(child)
    depth = {root: 1}
    frontier = [root]
    while frontier:
        nxt = []
        for node in frontier:
            for c in children[node]:
                if c not in depth:
                    depth[c] = depth[node] + 1
                    nxt.append(c)
        frontier = nxt
    return depth


def load_taxonomy(path) -> Taxonomy:
    parents: Dict[str, set] = {}
    word_map: Dict[str, set] = {}
    for lineno, line in enumerate(_read_text(path).splitlines(), start=1):
        if not line.strip():
            continue
        fields = [f.strip() for f in line.split("\t")]
        if len(fields) == 3 and fields[1] == "#":
            word, node = fields[0], fields[2]
            if not word or not node:
                raise InputError("empty word or node in mapping line", path=path, offset=lineno)
            word_map.setdefault(word, set()).add(node)
            parents.setdefault(node, set())
        elif len(fields) == 2:
            child, parent = fields
            if not child or not parent:
                raise InputError("empty node name in edge line", path=path, offset=lineno)
            parents.setdefault(child, set()).add(parent)
            parents.setdefault(parent, set())
        else:
            raise InputError("expected 'child<TAB>parent' or 'word<TAB>#<TAB>node'", path=path, offset=lineno)
    if not parents:
        raise InputError("taxonomy file is empty", path=path)
    return _validated(parents, word_map, path)
