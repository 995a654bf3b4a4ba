"""End-to-end glue: document -> projected tokens -> features -> CRF -> record."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Sequence

from .align import align, project_tokens
from .bio import decode, encode
from .corpus import Document, MetadataRecord, split_corpus
from .crf import CrfModel, CrfParams, LabeledSequence, config_hash, train, viterbi
from .evaluation import DEFAULT_THRESHOLD, EvalReport, evaluate, token_scores
from .features import FeatureMap, sequence_features
from .heuristic import extract_heuristic
from .hocr import Page, Token, parse_hocr


@dataclass(frozen=True)
class Config:
    seed: int = 0
    train_fraction: float = 0.7
    threshold: float = DEFAULT_THRESHOLD
    similarity: str = "ratio"
    constrained: bool = False
    l2: float = 0.1
    epochs: int = 50
    batch_size: int = 8
    learning_rate: float = 0.1
    decay: float = 0.1

    @classmethod
    def load(cls, path=None, **overrides) -> "Config":
        data = {}
        if path is not None:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
            unknown = set(data) - set(cls.__dataclass_fields__)
            if unknown:
                raise ValueError(f"unknown config keys: {sorted(unknown)}")
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**data)

    def crf_params(self) -> CrfParams:
        return CrfParams(self.l2, self.epochs, self.batch_size, self.learning_rate, self.decay, self.seed)

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def hash(self) -> str:
        return config_hash(self.to_dict())

    def with_(self, **kw) -> "Config":
        return replace(self, **kw)


@dataclass(frozen=True)
class Prepared:
    doc: Document
    page: Page
    tokens: tuple[Token, ...]  # clean-text tokens carrying projected OCR boxes
    labels: tuple[str, ...]
    warnings: tuple[str, ...] = field(default=())

    def features(self, visual: bool) -> list[FeatureMap]:
        return sequence_features(self.tokens, self.page, visual=visual)

    def sequence(self, visual: bool) -> LabeledSequence:
        return LabeledSequence(tuple(self.features(visual)), self.labels)


def prepare(doc: Document) -> Prepared:
    page = parse_hocr(doc.hocr())
    amap = align(page.text, doc.clean_text)
    tokens = project_tokens(page, amap, doc.clean_text)
    labels = encode(tokens, doc.annotations)
    return Prepared(doc, page, tuple(tokens), tuple(labels), page.warnings)


def select(docs: Sequence[Document], split: str, config: Config) -> list[Document]:
    if split == "all":
        return list(docs)
    train_docs, test_docs = split_corpus(docs, config.train_fraction, config.seed)
    if split == "train":
        return train_docs
    if split == "test":
        return test_docs
    raise ValueError(f"unknown split {split!r}")


def train_model(prepared: Sequence[Prepared], config: Config, visual: bool, log=None) -> CrfModel:
    data = [p.sequence(visual) for p in prepared if p.tokens]
    model = train(data, config.crf_params(), log=log)
    model.meta = {"visual": visual, "config": config.to_dict(), "config_hash": config.hash}
    return model


def tag(model: CrfModel, prep: Prepared, constrained: bool = False) -> tuple[MetadataRecord, list[str]]:
    if not prep.tokens:
        return MetadataRecord(), []
    visual = bool(model.meta.get("visual", False))
    labels = viterbi(model, prep.features(visual), constrained=constrained)
    return decode(prep.tokens, labels), labels


def evaluate_model(
    model: CrfModel, prepared: Sequence[Prepared], config: Config
) -> tuple[EvalReport, list[MetadataRecord]]:
    preds, pred_labels = [], []
    for p in prepared:
        rec, labels = tag(model, p, config.constrained)
        preds.append(rec)
        pred_labels.append(labels)
    gold = [p.doc.ground_truth or MetadataRecord() for p in prepared]
    report = evaluate(preds, gold, config.threshold, config.similarity)
    report.tokens = token_scores([p.labels for p in prepared], pred_labels)
    return report, preds


def evaluate_heuristic(prepared_docs: Sequence[Document], config: Config) -> tuple[EvalReport, list[MetadataRecord]]:
    preds = [extract_heuristic(d.clean_text) for d in prepared_docs]
    gold = [d.ground_truth or MetadataRecord() for d in prepared_docs]
    return evaluate(preds, gold, config.threshold, config.similarity), preds


def run_experiment(docs: Sequence[Document], config: Config, log=None) -> dict[str, EvalReport]:
    """Heuristic, text-only CRF and visual CRF on one train/test split."""
    train_docs, test_docs = split_corpus(docs, config.train_fraction, config.seed)
    train_prep = [prepare(d) for d in train_docs]
    test_prep = [prepare(d) for d in test_docs]
    reports = {}
    reports["heuristic"], _ = evaluate_heuristic(test_docs, config)
    for name, visual in (("crf-text", False), ("crf-visual", True)):
        model = train_model(train_prep, config, visual, log=log)
        reports[name], _ = evaluate_model(model, test_prep, config)
    for r in reports.values():
        r.meta = {"config_hash": config.hash, "train_documents": len(train_docs), "test_documents": len(test_docs)}
    return reports
