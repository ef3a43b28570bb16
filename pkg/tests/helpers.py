"""Shared fixtures data: the eight golden worked rows and synthetic
dataset generators."""

import json
import random

# (id, pattern, prediction, printed scores at t=0.9)
GOLDEN = [
    ("vqa1-1", {"yellow": 5, "orange": 4, "light orange": 1}, "yellow",
     dict(vqa3plus=1.0, ma=1.0, s=0.44, ses=1.0, masses=1.0)),
    ("vqa1-2", {"refrigerator": 6, "fridge": 4}, "refrigerator",
     dict(vqa3plus=1.0, ma=1.0, s=0.55, ses=1.0, masses=1.0)),
    ("vqa1-3", {"tennis rackets": 4, "tennis racket": 2, "tennis racquet": 1, "racket": 2, "racquets": 1},
     "tennis rackets", dict(vqa3plus=1.0, ma=1.0, s=0.33, ses=0.67, masses=0.67)),
    ("vqa1-4", {"hot dogs": 5, "hot dog": 2, "hot dogs and fries": 1, "hot dog fries": 1,
                "hot dog and onion rings": 1},
     "hot dog", dict(vqa3plus=0.60, ma=0.4, s=0.44, ses=1.0, masses=1.0)),
    ("vizwiz-1", {"christmas tree": 6, "tree": 1, "chritmas tree shaped santaclauses": 1,
                  "christmas tree santas": 1, "santas": 1},
     "christmas tree", dict(vqa3plus=1.0, ma=1.0, s=0.55, ses=0.89, masses=0.89)),
    ("vizwiz-2", {"white": 6, "green": 2, "light green": 1, "very light green": 1}, "white",
     dict(vqa3plus=1.0, ma=1.0, s=0.55, ses=0.55, masses=0.55)),
    ("vizwiz-3", {"ginger peach": 5, "ginger peach tea": 2, "ginger peach herbal tea": 1, "unanswerable": 2},
     "unanswerable", dict(vqa3plus=0.60, ma=0.4, s=0.44, ses=0.77, masses=0.19)),
    ("vizwiz-4", {"beef": 5, "beef flavored broth": 2, "beef flavored": 1, "beef flavor": 1,
                  "this beef flavor": 1},
     "unanswerable", dict(vqa3plus=0.0, ma=0.0, s=0.44, ses=1.0, masses=0.0)),
]

DICED = {"diced": 4, "cubed": 2, "squares": 2, "with knife": 1, "into cubes": 1}


def expand(pattern):
    """Pattern dict -> flat list of raw answers."""
    return [a for a, f in pattern.items() for _ in range(f)]


def write_golden(tmp_path):
    ann = tmp_path / "golden.jsonl"
    with open(ann, "w") as fh:
        for qid, pattern, _, _ in GOLDEN:
            fh.write(json.dumps({"question_id": qid, "answers": expand(pattern)}) + "\n")
    preds = tmp_path / "golden_preds.json"
    preds.write_text(json.dumps([{"question_id": qid, "answer": p} for qid, _, p, _ in GOLDEN]))
    return ann, preds


def synthetic_dataset(n_samples, seed, vocab=30, dim=6, oov_rate=0.1, degenerate_rate=0.05):
    """Random annotations, predictions and an embedding table.

    Answers are one or two tokens drawn from ``tok0..tokV``; a share of the
    tokens gets no vector. Returns ``(annotations, predictions, vectors)``
    where annotations are simple-jsonl dicts.
    """
    rng = random.Random(seed)
    tokens = [f"tok{i}" for i in range(vocab)]
    vectors = {
        t: [rng.gauss(0.0, 1.0) for _ in range(dim)]
        for t in tokens
        if rng.random() >= oov_rate
    }
    annotations, predictions = [], []
    for i in range(n_samples):
        if rng.random() < degenerate_rate:
            n = 1
        else:
            n = rng.randint(2, 12)
        k = rng.randint(1, min(n, 6))
        answers_pool = set()
        while len(answers_pool) < k:
            answers_pool.add(" ".join(rng.sample(tokens, rng.choice([1, 1, 2]))))
        pool = sorted(answers_pool)
        weights = [rng.random() ** 2 + 0.05 for _ in pool]
        answers = [rng.choices(pool, weights)[0] for _ in range(n)]
        roll = rng.random()
        if roll < 0.6:
            pred = rng.choice(answers)
        elif roll < 0.8:
            pred = max(set(answers), key=lambda a: (answers.count(a), a))
        else:
            pred = rng.choice(tokens) + " extra"
        qid = i if i % 3 else f"q{i:05d}"
        annotations.append({"question_id": qid, "answers": answers})
        predictions.append({"question_id": qid, "answer": pred})
    return annotations, predictions, vectors


def write_synthetic(tmp_path, n_samples, seed, **kw):
    annotations, predictions, vectors = synthetic_dataset(n_samples, seed, **kw)
    ann = tmp_path / "synth.jsonl"
    with open(ann, "w") as fh:
        for rec in annotations:
            fh.write(json.dumps(rec) + "\n")
    preds = tmp_path / "synth_preds.json"
    preds.write_text(json.dumps(predictions))
    emb = tmp_path / "synth_vectors.txt"
    with open(emb, "w") as fh:
        dim = len(next(iter(vectors.values())))
        fh.write(f"{len(vectors)} {dim}\n")
        for tok, vec in vectors.items():
            fh.write(tok + " " + " ".join(repr(x) for x in vec) + "\n")
    return ann, preds, emb, (annotations, predictions, vectors)
