"""Field-level fuzzy evaluation, token-level BIO metrics, model comparison."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .align import edit_distance, indel_distance
from .corpus import FIELDS, MetadataRecord

REPORT_SCHEMA = "etdmeta-eval-report/1"
COMPARISON_SCHEMA = "etdmeta-comparison/1"
DEFAULT_THRESHOLD = 0.95


def normalize(s: str) -> str:
    return " ".join(s.lower().split())


def similarity(a: str, b: str, method: str = "ratio") -> float:
    """Levenshtein-based similarity of two strings in [0, 1].

    Both strings are lowercased and whitespace-collapsed first.

    ``ratio`` (default)
        ``1 - indel / (len(a) + len(b))`` where ``indel`` is the edit distance
        with insertions and deletions only (a substitution costs 2). This is
        the usual fuzzy-matching ratio.
    ``max``
        ``1 - levenshtein / max(len(a), len(b))``.
    """
    a, b = normalize(a), normalize(b)
    if a == b:
        return 1.0
    if method == "ratio":
        return 1.0 - indel_distance(a, b) / (len(a) + len(b))
    if method == "max":
        return 1.0 - edit_distance(a, b) / max(len(a), len(b))
    raise ValueError(f"unknown similarity method {method!r}")


def _prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    p = tp / (tp + fp) if tp + fp else 0.0
    r = tp / (tp + fn) if tp + fn else 0.0
    f = 2 * p * r / (p + r) if p + r else 0.0
    return p, r, f


@dataclass
class FieldScore:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    support: int = 0

    @property
    def precision(self) -> float:
        return _prf(self.tp, self.fp, self.fn)[0]

    @property
    def recall(self) -> float:
        return _prf(self.tp, self.fp, self.fn)[1]

    @property
    def f1(self) -> float:
        return _prf(self.tp, self.fp, self.fn)[2]

    def to_dict(self) -> dict:
        return {
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "support": self.support,
            "precision": round(self.precision, 6),
            "recall": round(self.recall, 6),
            "f1": round(self.f1, 6),
        }


@dataclass
class EvalReport:
    fields: dict[str, FieldScore]
    threshold: float
    method: str = "ratio"
    documents: int = 0
    tokens: dict[str, FieldScore] = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def _scored(self, scores: Mapping[str, FieldScore]):
        # fields nobody predicted and nobody annotated are left out of the average
        return [s for s in scores.values() if s.support or s.fp]

    @property
    def macro_precision(self) -> float:
        s = self._scored(self.fields)
        return sum(x.precision for x in s) / len(s) if s else 0.0

    @property
    def macro_recall(self) -> float:
        s = self._scored(self.fields)
        return sum(x.recall for x in s) / len(s) if s else 0.0

    @property
    def macro_f1(self) -> float:
        s = self._scored(self.fields)
        return sum(x.f1 for x in s) / len(s) if s else 0.0

    def to_dict(self) -> dict:
        out = {
            "schema": REPORT_SCHEMA,
            "threshold": self.threshold,
            "similarity": self.method,
            "documents": self.documents,
            "fields": {name: score.to_dict() for name, score in self.fields.items()},
            "macro": {
                "precision": round(self.macro_precision, 6),
                "recall": round(self.macro_recall, 6),
                "f1": round(self.macro_f1, 6),
            },
        }
        if self.tokens:
            out["tokens"] = {lab: s.to_dict() for lab, s in self.tokens.items()}
        if self.meta:
            out["meta"] = self.meta
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "EvalReport":
        if data.get("schema") != REPORT_SCHEMA:
            raise ValueError(f"unsupported report schema {data.get('schema')!r}")

        def scores(raw):
            return {k: FieldScore(v["tp"], v["fp"], v["fn"], v["support"]) for k, v in raw.items()}

        return cls(
            fields=scores(data["fields"]),
            threshold=data["threshold"],
            method=data.get("similarity", "ratio"),
            documents=data.get("documents", 0),
            tokens=scores(data.get("tokens", {})),
            meta=data.get("meta", {}),
        )

    def table(self) -> str:
        lines = [f"{'field':<12} {'P':>6} {'R':>6} {'F1':>6} {'support':>8}"]
        for name, s in self.fields.items():
            lines.append(f"{name:<12} {s.precision:6.3f} {s.recall:6.3f} {s.f1:6.3f} {s.support:8d}")
        lines.append(
            f"{'macro':<12} {self.macro_precision:6.3f} {self.macro_recall:6.3f} {self.macro_f1:6.3f} {'':>8}"
        )
        return "\n".join(lines)


def evaluate(
    predictions: Sequence[MetadataRecord],
    gold: Sequence[MetadataRecord],
    threshold: float = DEFAULT_THRESHOLD,
    method: str = "ratio",
) -> EvalReport:
    """Score predicted records against gold records, document by document.

    A field is a true positive when both values are present and their
    similarity reaches ``threshold``. A present but non-matching prediction
    is both a false positive and (if gold exists) a false negative.
    """
    if len(predictions) != len(gold):
        raise ValueError(f"{len(predictions)} predictions for {len(gold)} gold records")
    if not 0 < threshold <= 1:
        raise ValueError("threshold must be in (0, 1]")
    scores = {name: FieldScore() for name in FIELDS}
    for pred, ref in zip(predictions, gold):
        for name in FIELDS:
            p, g = pred.get(name), ref.get(name)
            s = scores[name]
            if g is not None:
                s.support += 1
            if p is None:
                if g is not None:
                    s.fn += 1
            elif g is not None and similarity(p, g, method) >= threshold:
                s.tp += 1
            else:
                s.fp += 1
                if g is not None:
                    s.fn += 1
    return EvalReport(scores, threshold, method, documents=len(gold))


def token_scores(gold: Sequence[Sequence[str]], predicted: Sequence[Sequence[str]]) -> dict[str, FieldScore]:
    """Per-label precision/recall over tokens, ``O`` excluded."""
    scores: dict[str, FieldScore] = {}
    for g_seq, p_seq in zip(gold, predicted, strict=True):
        if len(g_seq) != len(p_seq):
            raise ValueError("label sequences differ in length")
        for g, p in zip(g_seq, p_seq):
            if g != "O":
                scores.setdefault(g, FieldScore()).support += 1
            if g == p:
                if g != "O":
                    scores[g].tp += 1
                continue
            if p != "O":
                scores.setdefault(p, FieldScore()).fp += 1
            if g != "O":
                scores[g].fn += 1
    return dict(sorted(scores.items()))


@dataclass
class Comparison:
    models: list[str]
    f1: dict[str, dict[str, float]]  # field -> model -> F1
    macro: dict[str, float]
    delta_pair: tuple[str, str] | None
    deltas: dict[str, float]

    def to_dict(self) -> dict:
        return {
            "schema": COMPARISON_SCHEMA,
            "models": self.models,
            "f1": self.f1,
            "macro_f1": self.macro,
            "delta": None if self.delta_pair is None else {"minuend": self.delta_pair[0], "subtrahend": self.delta_pair[1]},
            "deltas": self.deltas,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def table(self) -> str:
        width = max([12] + [len(m) + 1 for m in self.models])
        head = f"{'field':<12}" + "".join(f"{m:>{width}}" for m in self.models)
        if self.delta_pair:
            head += f"{'delta':>{width}}"
        lines = [head]
        for name in list(self.f1) + ["macro"]:
            row = self.f1.get(name, self.macro)
            line = f"{name:<12}" + "".join(f"{row[m]:>{width}.3f}" for m in self.models)
            if self.delta_pair:
                line += f"{self.deltas[name]:>+{width}.3f}"
            lines.append(line)
        return "\n".join(lines)


def compare_models(
    reports: Mapping[str, EvalReport],
    delta: tuple[str, str] | None = ("crf-visual", "crf-text"),
) -> Comparison:
    """Side-by-side per-field F1; ``delta`` names the (minuend, subtrahend) pair."""
    models = list(reports)
    names = [f for f in FIELDS if any(f in r.fields for r in reports.values())]
    f1 = {
        name: {m: round(reports[m].fields[name].f1 if name in reports[m].fields else 0.0, 6) for m in models}
        for name in names
    }
    macro = {m: round(reports[m].macro_f1, 6) for m in models}
    deltas: dict[str, float] = {}
    if delta is not None and not all(d in reports for d in delta):
        delta = None
    if delta is not None:
        a, b = delta
        for name in names:
            deltas[name] = round(f1[name][a] - f1[name][b], 6)
        deltas["macro"] = round(macro[a] - macro[b], 6)
    return Comparison(models, f1, macro, delta, deltas)
