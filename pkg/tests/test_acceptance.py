"""Acceptance gate: one PASS/FAIL line per criterion.

Run alone with ``pytest tests/test_acceptance.py -v``. The desk-scale
experiment trains four CRFs on a 240-page synthetic corpus and takes a few
minutes on one core.
"""

import json
import random
import time

import numpy as np
import pytest

from etdmeta.align import align, edit_distance
from etdmeta.bio import decode, encode
from etdmeta.cli import run
from etdmeta.corpus import FIELDS, MetadataRecord
from etdmeta.crf import CrfModel, LabeledSequence, gradient, sequence_log_likelihood, viterbi
from etdmeta.evaluation import evaluate, similarity

from .oracles import brute_best, brute_log_z, dp_edit_distance, emissions, score, script_cost
from .test_bio import random_layout

DESK_PAGES = 240
DESK_SEED = 0


@pytest.fixture
def verdict(capsys):
    def emit(name: str, ok: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
        assert ok, detail

    return emit


def _random_crf(rng, n_labels):
    labels = ("O", "B-x", "I-x", "B-y")[:n_labels]
    feats = [f"f{k}={v}" for k in range(3) for v in "ab"]
    model = CrfModel.zeros(labels, feats)
    model.emission[:] = rng.normal(0, 1, model.emission.shape)
    model.transition[:] = rng.normal(0, 1, model.transition.shape)
    return model


def _random_maps(rng, n):
    return [{f"f{k}": str(rng.choice(["a", "b"])) for k in range(3) if rng.random() < 0.8} for _ in range(n)]


def test_crf_math(verdict):
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    worst_vit = worst_ll = 0.0
    for _ in range(300):
        model = _random_crf(rng, int(rng.integers(2, 5)))
        maps = _random_maps(rng, int(rng.integers(1, 7)))
        E = emissions(model, maps)
        path = [model.label_index[p] for p in viterbi(model, maps)]
        worst_vit = max(worst_vit, abs(score(E, model.transition, path) - brute_best(E, model.transition)))
        labels = tuple(model.labels[int(i)] for i in rng.integers(0, len(model.labels), len(maps)))
        if labels[0].startswith("I-") or any(
            b.startswith("I-") and a not in ("B-" + b[2:], b) for a, b in zip(labels, labels[1:])
        ):
            labels = ("O",) * len(maps)
        seq = LabeledSequence(tuple(maps), labels)
        y = [model.label_index[lab] for lab in labels]
        expected = score(E, model.transition, y) - brute_log_z(E, model.transition)
        worst_ll = max(worst_ll, abs(sequence_log_likelihood(model, seq) - expected))

    checked, worst_rel, eps = 0, 0.0, 1e-5
    while checked < 240:
        model = _random_crf(rng, 4)
        maps = _random_maps(rng, 6)
        seq = LabeledSequence(tuple(maps), ("B-x", "I-x", "O", "B-y", "O", "B-x"))
        g = gradient(model, seq)
        for which, grad in (("emission", g.emission), ("transition", g.transition)):
            W = getattr(model, which)
            for idx in np.ndindex(W.shape):
                old = W[idx]
                W[idx] = old + eps
                up = sequence_log_likelihood(model, seq)
                W[idx] = old - eps
                down = sequence_log_likelihood(model, seq)
                W[idx] = old
                fd = (up - down) / (2 * eps)
                # relative error, with a 1e-3 floor on the scale for near-zero entries
                worst_rel = max(worst_rel, abs(grad[idx] - fd) / max(abs(fd), 1e-3))
                checked += 1
    elapsed = time.perf_counter() - start
    ok = worst_vit <= 1e-9 and worst_ll <= 1e-9 and worst_rel <= 1e-4 and elapsed < 60
    verdict(
        "CRF math",
        ok,
        f"viterbi gap {worst_vit:.1e}, log-lik gap {worst_ll:.1e}, "
        f"grad rel err {worst_rel:.1e} over {checked} coords, {elapsed:.1f}s",
    )


def test_alignment(verdict):
    rng = random.Random(99)
    start = time.perf_counter()
    bad = 0
    for _ in range(1000):
        a = "".join(rng.choice("acgt") for _ in range(rng.randint(0, 12)))
        b = "".join(rng.choice("acgt") for _ in range(rng.randint(0, 12)))
        d = dp_edit_distance(a, b)
        amap = align(a, b)
        pairs = amap.pairs
        monotone = all(p[0] < q[0] and p[1] < q[1] for p, q in zip(pairs, pairs[1:]))
        if edit_distance(a, b) != d or amap.distance != d or not monotone or script_cost(a, b, pairs) != d:
            bad += 1
    elapsed = time.perf_counter() - start
    verdict("alignment", bad == 0 and elapsed < 30, f"{bad}/1000 pairs wrong, {elapsed:.2f}s")


def test_fuzzy_match(verdict):
    pred = "thermo- fluid dynamics of separated two - phase flow"
    gold = "thermo-fluid dynamics of separated two-phase flow"
    s = similarity(pred, gold)
    title = evaluate([MetadataRecord(title=pred)], [MetadataRecord(title=gold)], 0.95).fields["title"]
    ok = s >= 0.95 and (title.tp, title.fp, title.fn) == (1, 0, 0)
    verdict("fuzzy match", ok, f"similarity {s:.4f}, tp={title.tp} fp={title.fp} fn={title.fn}")


def test_bio_round_trip(verdict):
    rng = random.Random(500)
    start = time.perf_counter()
    bad = fields = 0
    for _ in range(500):
        toks, anns, expected = random_layout(rng)
        rec = decode(toks, encode(toks, anns))
        fields += len(expected)
        bad += sum(rec.get(name) != text for name, text in expected.items())
    elapsed = time.perf_counter() - start
    verdict("BIO round trip", bad == 0 and elapsed < 10, f"{bad}/{fields} fields differ, {elapsed:.2f}s")


@pytest.fixture(scope="module")
def desk_runs(tmp_path_factory):
    """Two complete runs (generate, split, train, tag, score) with one seed."""
    runs = []
    for k in range(2):
        root = tmp_path_factory.mktemp(f"desk{k}")
        start = time.perf_counter()
        assert run(["synth", str(root / "corpus"), "-n", str(DESK_PAGES), "--seed", str(DESK_SEED)]) == 0
        assert run(["experiment", str(root / "corpus"), "--seed", str(DESK_SEED), "-o", str(root / "out")]) == 0
        elapsed = time.perf_counter() - start
        files = {p.name: p.read_bytes() for p in sorted((root / "out").iterdir())}
        runs.append((files, elapsed))
    return runs


def test_desk_scale_ordering(desk_runs, verdict):
    files, elapsed = desk_runs[0]
    macro = {name: json.loads(files[f"{name}.json"])["macro"]["f1"] for name in ("heuristic", "crf-text", "crf-visual")}
    h, t, v = macro["heuristic"], macro["crf-text"], macro["crf-visual"]
    ok = t >= 0.80 and v > t and t > h and v > h and elapsed < 600
    verdict(
        "desk-scale ordering",
        ok,
        f"{DESK_PAGES} pages seed {DESK_SEED}: heuristic {h:.3f}, crf-text {t:.3f}, crf-visual {v:.3f}, {elapsed:.0f}s",
    )


def test_determinism(desk_runs, verdict):
    (a, _), (b, _) = desk_runs
    same = sorted(name for name in a if a[name] == b.get(name))
    verdict("determinism", a == b, f"{len(same)}/{len(a)} report files byte-identical")


def test_public_corpus_eval_path(tmp_path, verdict):
    # A corpus in the documented on-disk layout, as an external release would
    # provide it: no ocr.txt (rebuilt from hOCR), gold records in gt.json.
    corpus = tmp_path / "external"
    assert run(["synth", str(corpus), "-n", "10", "--seed", "11"]) == 0
    for doc in corpus.iterdir():
        (doc / "ocr.txt").unlink()
    model, preds, report = tmp_path / "m.json", tmp_path / "pred", tmp_path / "report.json"
    steps = [
        ["train", str(corpus), "--split", "train", "--epochs", "5", "--visual", "-o", str(model)],
        ["tag", str(corpus), "--split", "test", "-m", str(model), "-o", str(preds)],
        ["eval", str(preds), str(corpus), "--report", str(report)],
    ]
    codes = [run(step) for step in steps]
    fields = json.loads(report.read_text())["fields"] if report.exists() else {}
    ok = codes == [0, 0, 0] and set(fields) == set(FIELDS) and all("f1" in f for f in fields.values())
    verdict("external-corpus eval path", ok, f"exit codes {codes}, F1 for {len(fields)}/7 fields")
