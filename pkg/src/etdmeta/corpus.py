"""On-disk corpus of cover pages.

Layout, one subdirectory per document::

    <root>/<doc_id>/ocr.txt           raw OCR text (optional, rebuilt from hOCR when absent)
    <root>/<doc_id>/clean.txt         rectified text, lowercased, no blank lines
    <root>/<doc_id>/page.hocr         Tesseract hOCR
    <root>/<doc_id>/annotations.json  [{"field": "title", "start": 0, "end": 42}, ...]  (optional)
    <root>/<doc_id>/gt.json           {"title": ..., "author": ..., ...}                (optional)

Offsets in ``annotations.json`` count Unicode code points of ``clean.txt``.
"""

from __future__ import annotations

import json
import random
import re
import shutil
from dataclasses import asdict, dataclass, field
from pathlib import Path

FIELDS: tuple[str, ...] = ("title", "author", "degree", "program", "institution", "year", "advisor")

_YEAR_RE = re.compile(r"^\d{4}$")


class CorpusError(ValueError):
    def __init__(self, doc_id: str, message: str):
        super().__init__(f"{doc_id}: {message}")
        self.doc_id = doc_id
        self.message = message


@dataclass(frozen=True)
class Annotation:
    field: str
    start: int
    end: int

    def __post_init__(self):
        if self.field not in FIELDS:
            raise ValueError(f"unknown field {self.field!r}")
        if not (0 <= self.start < self.end):
            raise ValueError(f"bad annotation range [{self.start}, {self.end})")


@dataclass(frozen=True)
class MetadataRecord:
    title: str | None = None
    author: str | None = None
    degree: str | None = None
    program: str | None = None
    institution: str | None = None
    year: str | None = None
    advisor: str | None = None

    def __post_init__(self):
        if self.year is not None:
            if not _YEAR_RE.match(self.year) or not 1000 <= int(self.year) <= 2999:
                raise ValueError(f"year must be a 4-digit integer in [1000, 2999], got {self.year!r}")

    def get(self, name: str) -> str | None:
        return getattr(self, name)

    def to_dict(self) -> dict[str, str | None]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "MetadataRecord":
        if not isinstance(data, dict):
            raise ValueError("metadata must be a JSON object")
        unknown = set(data) - set(FIELDS)
        if unknown:
            raise ValueError(f"unknown metadata keys: {sorted(unknown)}")
        values = {}
        for name in FIELDS:
            value = data.get(name)
            if value is not None:
                if isinstance(value, int) and name == "year":
                    value = str(value)
                if not isinstance(value, str):
                    raise ValueError(f"{name} must be a string or null")
            values[name] = value
        return cls(**values)


@dataclass(frozen=True)
class Document:
    doc_id: str
    ocr_text: str
    clean_text: str
    hocr_path: Path | None = field(default=None, compare=False)
    annotations: tuple[Annotation, ...] = ()
    ground_truth: MetadataRecord | None = None

    def __post_init__(self):
        if not self.doc_id:
            raise ValueError("doc_id must be non-empty")
        if "\n\n" in self.clean_text:
            raise ValueError("clean text contains an empty line")
        validate_annotations(self.annotations, len(self.clean_text))

    def hocr(self) -> str:
        if self.hocr_path is None:
            raise ValueError(f"{self.doc_id}: no hOCR file")
        return Path(self.hocr_path).read_text(encoding="utf-8")


def validate_annotations(annotations, text_length: int) -> None:
    spans = sorted(annotations, key=lambda a: (a.start, a.end))
    for a in spans:
        if a.end > text_length:
            raise ValueError(f"annotation {a} exceeds text length {text_length}")
    for prev, cur in zip(spans, spans[1:]):
        if cur.start < prev.end:
            raise ValueError(f"overlapping annotations {prev} and {cur}")


def _load_document(path: Path) -> Document:
    doc_id = path.name
    hocr_path = path / "page.hocr"
    clean_path = path / "clean.txt"
    for required in (clean_path, hocr_path):
        if not required.is_file():
            raise CorpusError(doc_id, f"missing {required.name}")
    clean_text = clean_path.read_text(encoding="utf-8")

    ocr_path = path / "ocr.txt"
    if ocr_path.is_file():
        ocr_text = ocr_path.read_text(encoding="utf-8")
    else:
        from .hocr import HocrError, parse_hocr

        try:
            ocr_text = parse_hocr(hocr_path.read_text(encoding="utf-8")).text
        except HocrError as exc:
            raise CorpusError(doc_id, str(exc)) from exc

    annotations: tuple[Annotation, ...] = ()
    ann_path = path / "annotations.json"
    if ann_path.is_file():
        try:
            raw = json.loads(ann_path.read_text(encoding="utf-8"))
            annotations = tuple(Annotation(a["field"], int(a["start"]), int(a["end"])) for a in raw)
        except json.JSONDecodeError as exc:
            raise CorpusError(doc_id, f"malformed annotations.json: {exc}") from exc
        except (KeyError, TypeError, ValueError) as exc:
            raise CorpusError(doc_id, f"invalid annotation: {exc}") from exc

    ground_truth = None
    gt_path = path / "gt.json"
    if gt_path.is_file():
        try:
            ground_truth = MetadataRecord.from_dict(json.loads(gt_path.read_text(encoding="utf-8")))
        except json.JSONDecodeError as exc:
            raise CorpusError(doc_id, f"malformed gt.json: {exc}") from exc
        except ValueError as exc:
            raise CorpusError(doc_id, f"invalid gt.json: {exc}") from exc

    try:
        return Document(doc_id, ocr_text, clean_text, hocr_path, annotations, ground_truth)
    except ValueError as exc:
        raise CorpusError(doc_id, str(exc)) from exc


def load_corpus(root) -> tuple[list[Document], list[CorpusError]]:
    """Load every document under ``root``.

    Broken documents do not abort the load; they are returned as errors
    alongside the documents that loaded cleanly (sorted by doc_id).
    """
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(f"corpus directory not found: {root}")
    docs, errors = [], []
    for path in sorted(p for p in root.iterdir() if p.is_dir()):
        try:
            docs.append(_load_document(path))
        except CorpusError as exc:
            errors.append(exc)
    return docs, errors


def save_document(doc: Document, root, *, hocr: str | None = None) -> Path:
    path = Path(root) / doc.doc_id
    path.mkdir(parents=True, exist_ok=True)
    (path / "ocr.txt").write_text(doc.ocr_text, encoding="utf-8")
    (path / "clean.txt").write_text(doc.clean_text, encoding="utf-8")
    if hocr is not None:
        (path / "page.hocr").write_text(hocr, encoding="utf-8")
    elif doc.hocr_path is not None and Path(doc.hocr_path).resolve() != (path / "page.hocr").resolve():
        shutil.copyfile(doc.hocr_path, path / "page.hocr")
    anns = [{"field": a.field, "start": a.start, "end": a.end} for a in doc.annotations]
    (path / "annotations.json").write_text(json.dumps(anns, indent=1) + "\n", encoding="utf-8")
    if doc.ground_truth is not None:
        (path / "gt.json").write_text(
            json.dumps(doc.ground_truth.to_dict(), indent=1, ensure_ascii=False) + "\n", encoding="utf-8"
        )
    return path


def save_corpus(docs, root) -> None:
    for doc in docs:
        save_document(doc, root)


def split_corpus(docs, train_fraction: float, seed: int) -> tuple[list[Document], list[Document]]:
    """Deterministic shuffled train/test partition.

    The train side has ``round(n * train_fraction)`` documents, clamped so
    neither side is empty.
    """
    if not 0 < train_fraction < 1:
        raise ValueError("train_fraction must be in (0, 1)")
    docs = list(docs)
    if len(docs) < 2:
        raise ValueError("need at least 2 documents to split")
    order = sorted(docs, key=lambda d: d.doc_id)
    random.Random(seed).shuffle(order)
    n_train = min(max(round(len(order) * train_fraction), 1), len(order) - 1)
    train = sorted(order[:n_train], key=lambda d: d.doc_id)
    test = sorted(order[n_train:], key=lambda d: d.doc_id)
    return train, test

