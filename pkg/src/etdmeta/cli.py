"""Command-line entry point: ``etdmeta <subcommand> ...``.

Every subcommand reads the same optional JSON config (``--config``); flags
given on the command line override it. The config hash is stamped into
model files and evaluation reports.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .corpus import CorpusError, MetadataRecord, load_corpus
from .crf import load_model, save_model
from .evaluation import EvalReport, compare_models, evaluate
from .features import feature_strings
from .heuristic import extract_heuristic
from .hocr import parse_hocr
from .pipeline import Config, prepare, run_experiment, select, tag, train_model
from .synth import generate_corpus

log = logging.getLogger("etdmeta")


class CliError(Exception):
    pass


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _config(args) -> Config:
    overrides = {
        "seed": args.seed,
        "l2": getattr(args, "l2", None),
        "epochs": getattr(args, "epochs", None),
        "threshold": getattr(args, "threshold", None),
        "train_fraction": getattr(args, "train_fraction", None),
        "constrained": True if getattr(args, "constrained", False) else None,
    }
    return Config.load(args.config, **overrides)


def _docs(args, config: Config):
    docs, errors = load_corpus(args.corpus)
    for err in errors:
        log.warning("skipping %s", err)
    split = getattr(args, "split", "all")
    docs = select(docs, split, config)
    if not docs:
        raise CliError(f"no usable documents in {args.corpus}")
    return docs


def _records(directory: Path) -> dict[str, MetadataRecord]:
    """Prediction directory (``<id>.json``) or corpus directory (``<id>/gt.json``)."""
    if not directory.is_dir():
        raise CliError(f"directory not found: {directory}")
    out = {}
    for path in sorted(directory.glob("*.json")):
        out[path.stem] = MetadataRecord.from_dict(json.loads(path.read_text(encoding="utf-8")))
    for path in sorted(directory.glob("*/gt.json")):
        out[path.parent.name] = MetadataRecord.from_dict(json.loads(path.read_text(encoding="utf-8")))
    return out


def _write_records(out: Path, records: dict[str, MetadataRecord]) -> None:
    out.mkdir(parents=True, exist_ok=True)
    for doc_id, rec in records.items():
        _write(out / f"{doc_id}.json", _dump(rec.to_dict()))


def cmd_ingest(args) -> None:
    docs, errors = load_corpus(args.corpus)
    for err in errors:
        log.warning("skipping %s", err)
    for doc in docs:
        page = parse_hocr(doc.hocr())
        for w in page.warnings:
            log.warning("%s: %s", doc.doc_id, w)
        _write(args.out / f"{doc.doc_id}.txt", page.text)
    print(f"ingested {len(docs)} documents into {args.out}")


def cmd_align(args) -> None:
    config = _config(args)
    for doc in _docs(args, config):
        prep = prepare(doc)
        tokens = [
            {"text": t.text, "start": t.char_start, "end": t.char_end, "line": t.line_index,
             "bbox": [t.bbox.x1, t.bbox.y1, t.bbox.x2, t.bbox.y2]}
            for t in prep.tokens
        ]
        sidecar = {"doc_id": doc.doc_id, "width": prep.page.width, "height": prep.page.height, "tokens": tokens}
        _write(args.out / f"{doc.doc_id}.json", _dump(sidecar))


def _conll(prep, visual: bool) -> str:
    rows = []
    for tok, label, fm in zip(prep.tokens, prep.labels, prep.features(visual)):
        label = label if prep.doc.annotations else "_"
        rows.append("\t".join([tok.text, label, *feature_strings(fm)]))
    return "\n".join(rows) + "\n"


def cmd_featurize(args) -> None:
    config = _config(args)
    blocks = []
    for doc in _docs(args, config):
        block = _conll(prepare(doc), args.visual)
        if args.out:
            _write(args.out / f"{doc.doc_id}.tsv", block)
        else:
            blocks.append(block)
    if blocks:
        sys.stdout.write("\n".join(blocks))


def cmd_train(args) -> None:
    config = _config(args)
    prepared = [prepare(d) for d in _docs(args, config)]
    progress = (lambda msg: log.info(msg)) if args.verbose else None
    model = train_model(prepared, config, args.visual, log=progress)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    save_model(model, args.out)
    print(f"trained on {len(prepared)} documents; config {config.hash}; model {args.out}")


def cmd_tag(args) -> None:
    config = _config(args)
    model = load_model(args.model)
    records = {}
    for doc in _docs(args, config):
        rec, _ = tag(model, prepare(doc), config.constrained)
        records[doc.doc_id] = rec
    _write_records(args.out, records)
    print(f"tagged {len(records)} documents into {args.out}")


def cmd_baseline(args) -> None:
    config = _config(args)
    records = {d.doc_id: extract_heuristic(d.clean_text) for d in _docs(args, config)}
    _write_records(args.out, records)
    print(f"baseline predictions for {len(records)} documents in {args.out}")


def cmd_eval(args) -> None:
    config = _config(args)
    preds, gold = _records(args.pred), _records(args.gold)
    if not preds:
        raise CliError(f"no predictions in {args.pred}")
    missing = sorted(set(preds) - set(gold))
    if missing:
        raise CliError(f"no gold record for {', '.join(missing[:5])}")
    ids = sorted(preds)
    report = evaluate([preds[i] for i in ids], [gold[i] for i in ids], config.threshold, config.similarity)
    report.meta = {"config_hash": config.hash}
    print(report.table())
    if args.report:
        _write(args.report, report.to_json())


def cmd_compare(args) -> None:
    reports = {}
    for spec in args.reports:
        name, sep, path = spec.partition("=")
        if not sep:
            name, path = Path(spec).stem, spec
        reports[name] = EvalReport.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
    comparison = compare_models(reports)
    print(comparison.table())
    if args.out:
        _write(args.out, comparison.to_json())


def cmd_synth(args) -> None:
    ids = generate_corpus(args.out, n=args.n, seed=_config(args).seed, noise=args.noise)
    print(f"wrote {len(ids)} synthetic documents to {args.out}")


def cmd_experiment(args) -> None:
    config = _config(args)
    docs, errors = load_corpus(args.corpus)
    for err in errors:
        log.warning("skipping %s", err)
    reports = run_experiment(docs, config)
    for name, report in reports.items():
        _write(args.out / f"{name}.json", report.to_json())
    comparison = compare_models(reports)
    _write(args.out / "comparison.json", comparison.to_json())
    print(comparison.table())


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON config file; flags override its values")
    common.add_argument("--seed", type=int, help="seed for every random choice (default 0)")
    common.add_argument("-v", "--verbose", action="store_true")

    corpus = argparse.ArgumentParser(add_help=False)
    corpus.add_argument("corpus", type=Path, help="corpus directory")
    corpus.add_argument("--split", choices=("all", "train", "test"), default="all")
    corpus.add_argument("--train-fraction", type=float)

    parser = argparse.ArgumentParser(prog="etdmeta", description="ETD cover-page metadata extraction")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, func, help, parents=(common,)):
        p = sub.add_parser(name, parents=list(parents), help=help)
        p.set_defaults(func=func)
        return p

    p = add("ingest", cmd_ingest, "reconstruct OCR text from hOCR")
    p.add_argument("corpus", type=Path)
    p.add_argument("-o", "--out", type=Path, required=True, help="directory for <id>.txt")

    p = add("align", cmd_align, "project OCR boxes onto clean tokens", (common, corpus))
    p.add_argument("-o", "--out", type=Path, required=True, help="directory for <id>.json sidecars")

    p = add("featurize", cmd_featurize, "write CoNLL-style feature rows", (common, corpus))
    p.add_argument("--visual", action="store_true", help="add the three layout features")
    p.add_argument("-o", "--out", type=Path, help="directory for <id>.tsv (default: stdout)")

    p = add("train", cmd_train, "fit a CRF", (common, corpus))
    p.add_argument("--visual", action="store_true")
    p.add_argument("--l2", type=float)
    p.add_argument("--epochs", type=int)
    p.add_argument("-o", "--out", type=Path, required=True, help="model file")

    p = add("tag", cmd_tag, "predict records with a trained CRF", (common, corpus))
    p.add_argument("-m", "--model", type=Path, required=True)
    p.add_argument("--constrained", action="store_true", help="forbid invalid BIO transitions")
    p.add_argument("-o", "--out", type=Path, required=True, help="directory for <id>.json records")

    p = add("baseline", cmd_baseline, "predict records with the rule-based extractor", (common, corpus))
    p.add_argument("-o", "--out", type=Path, required=True)

    p = add("eval", cmd_eval, "score predictions against gold records")
    p.add_argument("pred", type=Path, help="directory of <id>.json predictions")
    p.add_argument("gold", type=Path, help="corpus directory or directory of <id>.json")
    p.add_argument("--threshold", type=float, help="fuzzy-match threshold (default 0.95)")
    p.add_argument("--report", type=Path, help="write the JSON report here")

    p = add("compare", cmd_compare, "side-by-side F1 of several reports", ())
    p.add_argument("reports", nargs="+", metavar="[NAME=]REPORT")
    p.add_argument("-o", "--out", type=Path)
    p.add_argument("-v", "--verbose", action="store_true")

    p = add("synth", cmd_synth, "generate the synthetic cover-page corpus")
    p.add_argument("out", type=Path)
    p.add_argument("-n", type=int, default=240)
    p.add_argument("--noise", type=float, default=0.08)

    p = add("experiment", cmd_experiment, "baseline, CRF-text and CRF-visual on one split", (common,))
    p.add_argument("corpus", type=Path)
    p.add_argument("--train-fraction", type=float)
    p.add_argument("--l2", type=float)
    p.add_argument("--epochs", type=int)
    p.add_argument("--threshold", type=float)
    p.add_argument("--constrained", action="store_true")
    p.add_argument("-o", "--out", type=Path, required=True)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        args.func(args)
    except (CliError, CorpusError, OSError, ValueError, KeyError) as exc:
        print(f"etdmeta {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())
