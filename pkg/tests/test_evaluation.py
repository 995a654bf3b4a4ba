import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from etdmeta.corpus import FIELDS, MetadataRecord
from etdmeta.evaluation import EvalReport, FieldScore, compare_models, evaluate, similarity, token_scores

from .oracles import dp_edit_distance, dp_lcs

THERMO_PRED = "thermo- fluid dynamics of separated two - phase flow"
THERMO_GOLD = "thermo-fluid dynamics of separated two-phase flow"


def full_record(suffix=""):
    return MetadataRecord(
        title="a study" + suffix, author="jane doe", degree="doctor of philosophy", program="physics",
        institution="mit", year="1972", advisor="john roe",
    )


def test_similarity_examples():
    assert similarity(THERMO_PRED, THERMO_GOLD) >= 0.95
    assert similarity("Some Title", "some   title ") == 1.0
    assert similarity("abcd", "wxyz") == 0.0
    assert similarity("abcd", "wxyz", method="max") == 0.0
    assert similarity("", "") == 1.0
    with pytest.raises(ValueError):
        similarity("a", "b", method="cosine")


def test_similarity_against_oracles():
    a, b = "kitten", "sitting"
    assert similarity(a, b) == pytest.approx(1 - (len(a) + len(b) - 2 * dp_lcs(a, b)) / (len(a) + len(b)))
    assert similarity(a, b, "max") == pytest.approx(1 - dp_edit_distance(a, b) / 7)


@settings(max_examples=200)
@given(st.text(alphabet="ab C", max_size=15), st.text(alphabet="ab C", max_size=15))
def test_similarity_properties(a, b):
    for method in ("ratio", "max"):
        s = similarity(a, b, method)
        assert 0.0 <= s <= 1.0
        assert s == similarity(b, a, method)
        norm = lambda x: " ".join(x.lower().split())  # noqa: E731
        assert (s == 1.0) == (norm(a) == norm(b))


def test_perfect_predictions():
    gold = [full_record(str(i)) for i in range(4)]
    report = evaluate(gold, gold)
    assert all(s.f1 == 1.0 for s in report.fields.values())
    assert report.macro_f1 == 1.0


def test_absent_prediction_is_fn_only():
    report = evaluate([MetadataRecord()], [MetadataRecord(title="x")])
    assert (report.fields["title"].tp, report.fields["title"].fp, report.fields["title"].fn) == (0, 0, 1)


def test_threshold_counts():
    # ratios 0.96 and 0.90 (two deletions from 26- and 11-letter strings)
    long, short = "abcdefghijklmnopqrstuvwxyz", "abcdefghijk"
    assert similarity(long[:-2], long) == pytest.approx(0.96)
    assert similarity(short[:-2], short) == pytest.approx(0.90)
    report = evaluate(
        [MetadataRecord(title=long[:-2]), MetadataRecord(title=short[:-2])],
        [MetadataRecord(title=long), MetadataRecord(title=short)],
        threshold=0.95,
    )
    s = report.fields["title"]
    assert (s.tp, s.fp, s.fn) == (1, 1, 1)
    assert (s.precision, s.recall, s.f1) == (0.5, 0.5, 0.5)


def test_hyphen_spacing_pair_is_true_positive():
    s = evaluate([MetadataRecord(title=THERMO_PRED)], [MetadataRecord(title=THERMO_GOLD)], 0.95).fields["title"]
    assert (s.tp, s.fp, s.fn) == (1, 0, 0)


def test_errors():
    with pytest.raises(ValueError):
        evaluate([MetadataRecord()], [])
    with pytest.raises(ValueError):
        evaluate([MetadataRecord()], [MetadataRecord()], threshold=0)


records = st.builds(
    MetadataRecord,
    **{f: st.one_of(st.none(), st.text(alphabet="abc ", min_size=1, max_size=6)) for f in FIELDS if f != "year"},
)


@settings(max_examples=100)
@given(st.lists(st.tuples(records, records), min_size=1, max_size=6))
def test_report_invariants(pairs):
    preds, gold = [p for p, _ in pairs], [g for _, g in pairs]
    previous_tp = None
    for threshold in (0.3, 0.6, 0.95, 1.0):
        report = evaluate(preds, gold, threshold)
        tp = {name: s.tp for name, s in report.fields.items()}
        for name, s in report.fields.items():
            assert s.tp + s.fn == s.support == sum(g.get(name) is not None for g in gold)
            if s.precision + s.recall:
                assert s.f1 == pytest.approx(2 * s.precision * s.recall / (s.precision + s.recall))
            else:
                assert s.f1 == 0.0
            if previous_tp is not None:
                assert tp[name] <= previous_tp[name]
        previous_tp = tp


def test_report_json_round_trip():
    report = evaluate([full_record()], [full_record()])
    report.tokens = token_scores([["B-title", "O"]], [["B-title", "B-year"]])
    data = json.loads(report.to_json())
    assert data["schema"] == "etdmeta-eval-report/1"
    assert set(data["fields"]) == set(FIELDS)
    again = EvalReport.from_dict(data)
    assert again.to_json() == report.to_json()
    assert "macro" in report.table()


def test_token_scores():
    scores = token_scores([["B-title", "I-title", "O", "O"]], [["B-title", "O", "B-year", "O"]])
    assert scores["B-title"].tp == 1 and scores["B-title"].f1 == 1.0
    assert scores["I-title"].fn == 1 and scores["I-title"].f1 == 0.0
    assert scores["B-year"].fp == 1 and scores["B-year"].support == 0


def test_compare_identical_reports():
    report = evaluate([full_record()], [full_record()])
    comp = compare_models({"crf-text": report, "crf-visual": report})
    assert all(v == 0 for v in comp.deltas.values())
    header = comp.table().splitlines()[0].split()
    assert header == ["field", "crf-text", "crf-visual", "delta"]
    data = json.loads(comp.to_json())
    assert data["f1"]["title"] == {"crf-text": 1.0, "crf-visual": 1.0}


def test_compare_deltas_and_shape():
    good = evaluate([full_record()], [full_record()])
    bad = evaluate([MetadataRecord(author="jane doe")], [full_record()])
    comp = compare_models({"heuristic": bad, "crf-text": bad, "crf-visual": good})
    assert comp.deltas["title"] == 1.0 and comp.deltas["author"] == 0.0
    two = compare_models({"a": good, "b": bad})
    assert two.delta_pair is None
    assert two.table().splitlines()[0].split() == ["field", "a", "b"]


def test_macro_skips_empty_fields():
    report = evaluate([MetadataRecord(title="x")], [MetadataRecord(title="x")])
    assert report.macro_f1 == 1.0
    assert report.fields["author"] == FieldScore()
