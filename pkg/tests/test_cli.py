import json

import pytest

from etdmeta.cli import run
from etdmeta.corpus import FIELDS
from etdmeta.crf import LABELS


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("synth")
    assert run(["synth", str(root), "-n", "12", "--seed", "3"]) == 0
    return root


def test_train_tag_eval(corpus, tmp_path):
    model, preds, report = tmp_path / "m.json", tmp_path / "pred", tmp_path / "r.json"
    assert run(["train", str(corpus), "--split", "train", "--epochs", "3", "--visual", "-o", str(model)]) == 0
    assert json.loads(model.read_text())["meta"]["visual"] is True
    assert run(["tag", str(corpus), "--split", "test", "-m", str(model), "-o", str(preds)]) == 0
    assert len(list(preds.glob("*.json"))) == 4
    assert run(["eval", str(preds), str(corpus), "--report", str(report)]) == 0
    data = json.loads(report.read_text())
    assert data["schema"] == "etdmeta-eval-report/1"
    assert set(data["fields"]) == set(FIELDS)
    assert data["documents"] == 4 and "config_hash" in data["meta"]


def test_eval_identical_threshold_one(corpus, tmp_path, capsys):
    report = tmp_path / "r.json"
    assert run(["eval", str(corpus), str(corpus), "--threshold", "1.0", "--report", str(report)]) == 0
    data = json.loads(report.read_text())
    assert all(f["f1"] == 1.0 for f in data["fields"].values() if f["support"])
    assert "macro" in capsys.readouterr().out


def test_same_seed_same_bytes(corpus, tmp_path):
    outs = []
    for k in range(2):
        out = tmp_path / f"run{k}"
        assert run(["experiment", str(corpus), "--epochs", "2", "--seed", "5", "-o", str(out)]) == 0
        outs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
    assert outs[0] == outs[1]
    assert set(outs[0]) == {"heuristic.json", "crf-text.json", "crf-visual.json", "comparison.json"}


def test_baseline_compare(corpus, tmp_path, capsys):
    preds = tmp_path / "b"
    assert run(["baseline", str(corpus), "-o", str(preds)]) == 0
    assert run(["eval", str(preds), str(corpus), "--report", str(tmp_path / "h.json")]) == 0
    assert run(["compare", f"heuristic={tmp_path / 'h.json'}", str(tmp_path / "h.json"), "-o", str(tmp_path / "c.json")]) == 0
    assert json.loads((tmp_path / "c.json").read_text())["models"] == ["heuristic", "h"]


def test_ingest_align_featurize(corpus, tmp_path, capsys):
    assert run(["ingest", str(corpus), "-o", str(tmp_path / "ocr")]) == 0
    assert (tmp_path / "ocr" / "synth0000.txt").read_text() == (corpus / "synth0000" / "ocr.txt").read_text()
    assert run(["align", str(corpus), "-o", str(tmp_path / "al")]) == 0
    sidecar = json.loads((tmp_path / "al" / "synth0000.json").read_text())
    clean = (corpus / "synth0000" / "clean.txt").read_text()
    assert all(clean[t["start"]:t["end"]] == t["text"] for t in sidecar["tokens"])
    capsys.readouterr()
    assert run(["featurize", str(corpus), "--visual"]) == 0
    blocks = capsys.readouterr().out.split("\n\n")
    assert len(blocks) == 12
    row = blocks[0].splitlines()[0].split("\t")
    assert row[1] in LABELS and len(row) == 2 + 13
    assert run(["featurize", str(corpus), "-o", str(tmp_path / "f")]) == 0
    assert len((tmp_path / "f" / "synth0000.tsv").read_text().splitlines()[0].split("\t")) == 12


def test_config_file_and_override(corpus, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"epochs": 1, "l2": 2.0}))
    model = tmp_path / "m.json"
    assert run(["train", str(corpus), "--config", str(cfg), "--l2", "0.5", "-o", str(model)]) == 0
    params = json.loads(model.read_text())["params"]
    assert params["epochs"] == 1 and params["l2"] == 0.5
    cfg.write_text(json.dumps({"bogus": 1}))
    assert run(["train", str(corpus), "--config", str(cfg), "-o", str(model)]) == 1


def test_errors(tmp_path, capsys):
    assert run(["train", "--bogus"]) == 2
    assert run(["eval", str(tmp_path / "nope"), str(tmp_path)]) == 1
    assert "directory not found" in capsys.readouterr().err
    assert run(["tag", str(tmp_path), "-m", str(tmp_path / "missing.json"), "-o", str(tmp_path / "o")]) == 1
    assert run([]) == 2
