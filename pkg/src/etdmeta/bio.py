"""Character annotations <-> token BIO labels, and span gluing."""

from __future__ import annotations

import re
from typing import Sequence

from .corpus import FIELDS, Annotation, MetadataRecord, validate_annotations
from .hocr import Token

_YEAR_IN_SPAN = re.compile(r"(?<!\d)([12]\d{3})(?!\d)")


def encode(tokens: Sequence[Token], annotations: Sequence[Annotation]) -> list[str]:
    """Label tokens whose character range overlaps an annotation.

    A token straddling an annotation boundary is inside it. A token that
    touches two annotations stays with the earlier one.
    """
    if annotations:
        # bounds are the caller's concern; only overlap is checked here
        validate_annotations(annotations, max(a.end for a in annotations))
    labels = ["O"] * len(tokens)
    for ann in sorted(annotations, key=lambda a: a.start):
        first = True
        for i, tok in enumerate(tokens):
            if tok.char_start < ann.end and ann.start < tok.char_end and labels[i] == "O":
                labels[i] = ("B-" if first else "I-") + ann.field
                first = False
    return labels


def spans(labels: Sequence[str]) -> list[tuple[str, int, int]]:
    """``(field, start, end)`` token runs; an I-x run without B-x still counts."""
    out = []
    cur = None
    for i, lab in enumerate(labels):
        kind, _, name = lab.partition("-")
        if kind == "B" or (kind == "I" and (cur is None or cur[0] != name)):
            if cur is not None:
                out.append((cur[0], cur[1], i))
            cur = (name, i)
        elif kind == "I":
            continue
        else:
            if cur is not None:
                out.append((cur[0], cur[1], i))
            cur = None
    if cur is not None:
        out.append((cur[0], cur[1], len(labels)))
    return out


def _year_value(text: str) -> str | None:
    m = _YEAR_IN_SPAN.search(text)
    return m.group(1) if m else None


def decode(tokens: Sequence[Token], labels: Sequence[str]) -> MetadataRecord:
    """Glue labelled tokens into field values.

    With several spans for one field the longest wins, then the earliest.
    Year spans are reduced to their first 4-digit number, or dropped.
    """
    if len(tokens) != len(labels):
        raise ValueError(f"{len(tokens)} tokens but {len(labels)} labels")
    best: dict[str, tuple[int, int]] = {}
    for name, start, end in spans(labels):
        if name not in FIELDS:
            continue
        held = best.get(name)
        if held is None or end - start > held[1] - held[0]:
            best[name] = (start, end)
    values = {}
    for name, (start, end) in best.items():
        text = " ".join(t.text for t in tokens[start:end])
        if name == "year":
            text = _year_value(text)
        if text:
            values[name] = text
    return MetadataRecord(**values)
