import json
import math
import os
import pathlib

import pytest

from masses.errors import IdResolutionError, InputError
from masses.report import RunConfig, aggregate, analyze, compare_records, evaluate, histogram, read_jsonl, score_bin

from helpers import GOLDEN, expand, write_golden

DATA = pathlib.Path(__file__).parent / "data"
LABELS = str(DATA / "golden_labels.json")
TAX = str(DATA / "taxonomy_small.tsv")


@pytest.fixture
def golden_run(tmp_path):
    ann, preds = write_golden(tmp_path)
    cfg = RunConfig(annotations=str(ann), annotation_format="simple-jsonl", predictions=str(preds),
                    fixture_backend=LABELS, out_dir=str(tmp_path / "out"), histogram_csv=True)
    return cfg, evaluate(cfg)


def test_golden_exact_fractions(golden_run):
    _, result = golden_run
    by_id = {r["question_id"]: r for r in result.records}
    r = by_id["vizwiz-3"]
    assert r["vqa3plus"] == 0.6 and r["ma"] == 0.4 and r["s"] == 4 / 9
    assert r["ses_0.9"] == 7 / 9 and r["ma_updated_0.9"] == 0.25 and r["masses_0.9"] == 0.25 * (7 / 9)
    r = by_id["vqa1-4"]
    assert r["ma"] == 0.4 and r["ses_0.9"] == 1.0 and r["masses_0.9"] == 1.0
    assert r["mas"] == 0.4 * (4 / 9)


def test_outputs_written_and_means_recomputable(golden_run):
    cfg, result = golden_run
    records = read_jsonl(f"{cfg.out_dir}/samples.jsonl")
    assert [r["question_id"] for r in records] == sorted(qid for qid, *_ in GOLDEN)
    summary = json.loads(open(f"{cfg.out_dir}/summary.json").read())
    for key in ("vqa3plus", "ma", "s", "mas", "ses_0.7", "masses_0.9"):
        vals = [r[key] for r in records]
        assert summary["means"][key] == math.fsum(vals) / len(vals)
    for name, h in summary["histograms"]["scores"].items():
        assert sum(h["counts"]) == summary["metric_counts"][name]
    assert os.path.exists(f"{cfg.out_dir}/hist_masses_0.9.csv")
    assert os.path.exists(f"{cfg.out_dir}/hist_unique_answers.csv")


def test_modal_predictions_give_mean_ma_one(tmp_path):
    ann = tmp_path / "a.jsonl"
    preds = []
    with open(ann, "w") as fh:
        for qid, pattern, _, _ in GOLDEN:
            fh.write(json.dumps({"question_id": qid, "answers": expand(pattern)}) + "\n")
            preds.append({"question_id": qid, "answer": max(pattern, key=pattern.get)})
    pp = tmp_path / "p.json"
    pp.write_text(json.dumps(preds))
    res = evaluate(RunConfig(annotations=str(ann), annotation_format="simple-jsonl", predictions=str(pp)))
    assert res.summary["means"]["ma"] == 1.0
    assert "ses_0.9" not in res.summary["means"]


def test_empty_predictions_abort_listing_ids(tmp_path):
    ann, _ = write_golden(tmp_path)
    pp = tmp_path / "p.json"
    pp.write_text("[]")
    with pytest.raises(IdResolutionError) as err:
        evaluate(RunConfig(annotations=str(ann), annotation_format="simple-jsonl", predictions=str(pp)))
    assert sorted(err.value.ids) == sorted(qid for qid, *_ in GOLDEN)
    assert err.value.exit_code == 3


def test_unmatched_prediction_within_tolerance(tmp_path):
    ann, _ = write_golden(tmp_path)
    preds = [{"question_id": qid, "answer": p} for qid, _, p, _ in GOLDEN[:7]] + [{"question_id": "ghost", "answer": "x"}]
    pp = tmp_path / "p.json"
    pp.write_text(json.dumps(preds))
    cfg = dict(annotations=str(ann), annotation_format="simple-jsonl", predictions=str(pp))
    with pytest.raises(IdResolutionError) as err:
        evaluate(RunConfig(**cfg))
    assert set(err.value.ids) == {"ghost", GOLDEN[7][0]}
    res = evaluate(RunConfig(**cfg, unmatched_tolerance=0.25))
    c = res.summary["counts"]
    assert c["predictions_unmatched"] == 1 and c["predictions_missing"] == 1 and c["samples"] == 7


def test_degenerate_policy(tmp_path):
    ann = tmp_path / "a.jsonl"
    ann.write_text('{"question_id": 1, "answers": ["yes"]}\n{"question_id": 2, "answers": ["yes", "no"]}\n')
    pp = tmp_path / "p.json"
    pp.write_text('[{"question_id": 1, "answer": "yes"}, {"question_id": 2, "answer": "yes"}]')
    base = dict(annotations=str(ann), annotation_format="simple-jsonl", predictions=str(pp), fixture_backend=LABELS)
    res = evaluate(RunConfig(**base))
    assert res.summary["counts"]["degenerate"] == 1
    assert res.summary["counts"]["degenerate_excluded"] == 1
    assert res.summary["means"]["s"] == 0.0
    assert res.summary["means"]["ma"] == 1.0
    assert res.records[0]["s"] is None and res.records[0]["vqa3plus"] == pytest.approx(1 / 3, abs=0)
    res = evaluate(RunConfig(**base, include_degenerate=True))
    assert res.summary["means"]["s"] == 0.5
    assert res.summary["counts"]["degenerate_excluded"] == 0


def test_wups_in_evaluate(tmp_path):
    ann = tmp_path / "a.jsonl"
    ann.write_text('{"question_id": 1, "answers": ' + json.dumps(["dog"] * 9 + ["cat"]) + "}\n")
    pp = tmp_path / "p.json"
    pp.write_text('[{"question_id": 1, "answer": "Dog"}]')
    res = evaluate(RunConfig(annotations=str(ann), annotation_format="simple-jsonl", predictions=str(pp),
                             taxonomy=TAX, wups_threshold=0.0))
    assert res.records[0]["wups_acm"] == pytest.approx(29 / 30, abs=1e-12)
    assert res.records[0]["wups_mcm"] == 1.0


def test_analyze_consensus(tmp_path):
    ann = tmp_path / "a.jsonl"
    ann.write_text("".join(json.dumps({"question_id": i, "answers": ["x"] * 10}) + "\n" for i in range(5)))
    res = analyze(RunConfig(annotations=str(ann), annotation_format="simple-jsonl", fixture_backend=LABELS))
    assert res.summary["histograms"]["unique_answers"] == [{"unique_answers": 1, "count": 5}]
    assert res.summary["means"]["s"] == 1.0
    assert "vqa3plus" not in res.records[0]


def test_analyze_golden_mean_s(tmp_path):
    ann, _ = write_golden(tmp_path)
    res = analyze(RunConfig(annotations=str(ann), annotation_format="simple-jsonl", fixture_backend=LABELS))
    # four rows at 4/9, three at 5/9, one at 1/3
    assert res.summary["means"]["s"] == pytest.approx((4 * 4 / 9 + 3 * 5 / 9 + 1 / 3) / 8, abs=1e-15)
    assert sum(res.summary["histograms"]["scores"]["s"]["counts"]) == 8


def test_analyze_matches_evaluate_data_fields(golden_run):
    cfg, result = golden_run
    res = analyze(RunConfig(annotations=cfg.annotations, annotation_format="simple-jsonl", fixture_backend=LABELS))
    for a, e in zip(res.records, result.records):
        for key in a:
            assert a[key] == e[key]


def test_score_bin_edges():
    assert score_bin(0.0, 10) == 0
    assert score_bin(0.3, 10) == 3
    assert score_bin(0.29999, 10) == 2
    assert score_bin(1.0, 10) == 9
    assert histogram([0.0, 0.5, 1.0, 0.3], 10)["counts"] == [1, 0, 0, 1, 0, 1, 0, 0, 0, 1]


def test_compare_self_and_vizwiz(golden_run):
    _, result = golden_run
    same = compare_records(result.records, result.records, "masses_0.9", "masses_0.9")
    assert all(d["delta"] == 0 for d in same["deltas"])
    within = compare_records(result.records, result.records, "vqa3plus", "masses_0.9")
    d = {x["question_id"]: x["delta"] for x in within["deltas"]}
    assert d["vizwiz-3"] == pytest.approx(0.6 - 0.25 * 7 / 9, abs=1e-15)
    mags = [abs(x["delta"]) for x in within["deltas"]]
    assert mags == sorted(mags, reverse=True)
    assert sum(within["histograms"]["left"]) == sum(within["histograms"]["right"]) == 8
    assert "0.9" in within["ses_bins"]


def test_compare_id_mismatch(golden_run):
    _, result = golden_run
    with pytest.raises(IdResolutionError) as err:
        compare_records(result.records, result.records[1:], "ma", "ma")
    assert err.value.ids == [result.records[0]["question_id"]]
    with pytest.raises(InputError):
        compare_records(result.records, result.records, "nope", "ma")


def test_aggregate_is_order_stable():
    recs = [{"question_id": i, "n": 2, "unique_answers": 1, "degenerate": False, "s": v}
            for i, v in enumerate([0.1, 0.7, 0.2])]
    assert aggregate(recs, (0.9,))["means"]["s"] == math.fsum([0.1, 0.7, 0.2]) / 3
