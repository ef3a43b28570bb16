"""Wu-Palmer similarity and the WUPS consensus scores built on it."""

from __future__ import annotations

import math

from masses.io import Taxonomy

DOWN_WEIGHT = 0.1
WUPS_MODES = ("acm", "mcm")


def _node_wup(taxonomy: Taxonomy, na: str, nb: str) -> float:
    common = taxonomy.ancestors(na) & taxonomy.ancestors(nb)
    if not common:
        return 0.0
    lcs_depth = max(taxonomy.depth[c] for c in common)
    return 2.0 * lcs_depth / (taxonomy.depth[na] + taxonomy.depth[nb])


def wu_palmer(a: str, b: str, taxonomy: Taxonomy) -> float:
    """Best Wu-Palmer score over all concept pairs the two words map to.

    Identical strings score 1; a word with no concept scores 0.
    """
    if a == b:
        return 1.0
    nodes_a = taxonomy.nodes_for(a)
    nodes_b = taxonomy.nodes_for(b)
    if not nodes_a or not nodes_b:
        return 0.0
    return max(_node_wup(taxonomy, x, y) for x in nodes_a for y in nodes_b)


def _thresholded(s: float, t: float, hard_cut: bool) -> float:
    if s >= t:
        return s
    return 0.0 if hard_cut else DOWN_WEIGHT * s


def wups_phrase(pred: str, gt: str, taxonomy: Taxonomy, t: float, hard_cut: bool = False) -> float:
    """Set-based WUPS between two answers.

    Token scores below ``t`` are scaled by 0.1 (or zeroed with
    ``hard_cut``). The score is the smaller of the two directed products
    of best-match token scores.
    """
    if pred == gt:
        return 1.0
    ptoks, gtoks = pred.split(), gt.split()
    if not ptoks or not gtoks:
        return 0.0
    sim = {
        (p, g): _thresholded(wu_palmer(p, g, taxonomy), t, hard_cut)
        for p in set(ptoks)
        for g in set(gtoks)
    }
    forward = 1.0
    for p in ptoks:
        forward *= max(sim[p, g] for g in gtoks)
    backward = 1.0
    for g in gtoks:
        backward *= max(sim[p, g] for p in ptoks)
    return min(forward, backward)


def wups_consensus(pattern, pred: str, taxonomy: Taxonomy, t: float, mode: str = "acm", hard_cut: bool = False) -> float:
    """Score a prediction against all ``n`` annotations of ``pattern``.

    ``acm`` averages over annotations (each unique answer weighted by its
    frequency); ``mcm`` keeps the best-matching annotation.
    """
    if mode not in WUPS_MODES:
        raise ValueError(f"unknown WUPS mode {mode!r}")
    scores = [(wups_phrase(pred, ans, taxonomy, t, hard_cut), f) for ans, f in pattern.entries]
    best = max(s for s, _ in scores)
    if mode == "mcm":
        return best
    # a mean never exceeds the max; keep round-off from saying otherwise
    return min(best, math.fsum(s * f for s, f in scores) / pattern.total)
