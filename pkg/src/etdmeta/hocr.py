"""Tesseract hOCR parsing.

Boxes are converted at ingest from hOCR's top-left origin to a bottom-left
origin, so ``y1`` is the bottom edge and ``y2`` the top edge, both measured
upward from the bottom of the page.
"""

from __future__ import annotations

import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from html import escape

LINE_CLASSES = frozenset({"ocr_line", "ocr_textfloat", "ocr_header", "ocr_caption"})

_BBOX_RE = re.compile(r"^\s*bbox\s+(-?\d+)\s+(-?\d+)\s+(-?\d+)\s+(-?\d+)\s*$")


class HocrError(ValueError):
    pass


@dataclass(frozen=True)
class BBox:
    x1: int
    y1: int
    x2: int
    y2: int

    def __post_init__(self):
        if self.x1 > self.x2 or self.y1 > self.y2:
            raise ValueError(f"inverted bbox {self}")
        if min(self.x1, self.y1, self.x2, self.y2) < 0:
            raise ValueError(f"negative bbox coordinate {self}")


@dataclass(frozen=True)
class Token:
    text: str
    line_index: int
    word_index: int
    bbox: BBox
    char_start: int
    char_end: int
    # original-case spelling; clean text is lowercased upstream
    cased: str | None = None

    def __post_init__(self):
        if not self.text or any(c.isspace() for c in self.text):
            raise ValueError(f"token text must be non-empty without whitespace: {self.text!r}")
        if self.char_end - self.char_start != len(self.text) or self.char_start < 0:
            raise ValueError(f"char range does not match text for {self.text!r}")

    @property
    def cased_text(self) -> str:
        return self.cased if self.cased is not None else self.text


@dataclass(frozen=True)
class Page:
    width: int
    height: int
    tokens: tuple[Token, ...] = ()
    warnings: tuple[str, ...] = field(default=(), compare=False)

    @property
    def text(self) -> str:
        """OCR text rebuilt from tokens: words joined by spaces, lines by newlines."""
        return reconstruct_text(self.tokens)


def reconstruct_text(tokens) -> str:
    parts = []
    prev_line = None
    for tok in tokens:
        if prev_line is not None:
            parts.append("\n" if tok.line_index != prev_line else " ")
        parts.append(tok.text)
        prev_line = tok.line_index
    return "".join(parts)


def _title_props(title: str | None) -> dict[str, str]:
    props = {}
    for part in (title or "").split(";"):
        part = part.strip()
        if part:
            key, _, rest = part.partition(" ")
            props[key] = rest.strip()
    return props


def _parse_bbox(title: str | None) -> tuple[int, int, int, int] | None:
    raw = _title_props(title).get("bbox")
    if raw is None:
        return None
    m = _BBOX_RE.match("bbox " + raw)
    if m is None:
        return None
    x0, y0, x1, y1 = (int(g) for g in m.groups())
    if x0 > x1 or y0 > y1:
        return None
    return x0, y0, x1, y1


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _classes(el) -> set[str]:
    return set((el.get("class") or "").split())


def parse_hocr(content: str) -> Page:
    """Parse hOCR markup into a :class:`Page`.

    Raises :class:`HocrError` when the input is not XML or when no
    ``ocr_page`` with a bbox is present. Words with a malformed bbox are
    skipped and noted in ``Page.warnings``.
    """
    try:
        root = ET.fromstring(content)
    except ET.ParseError as exc:
        raise HocrError(f"not well-formed hOCR: {exc}") from exc

    page_el = next((el for el in root.iter() if "ocr_page" in _classes(el)), None)
    if page_el is None:
        raise HocrError("no ocr_page element")
    page_box = _parse_bbox(page_el.get("title"))
    if page_box is None:
        raise HocrError("ocr_page has no page dimensions")
    width, height = page_box[2], page_box[3]
    if width <= 0 or height <= 0:
        raise HocrError(f"page dimensions must be positive, got {width}x{height}")

    warnings: list[str] = []
    lines: list[list[tuple[int, str, tuple[int, int, int, int]]]] = []

    def visit(el, current: list | None):
        classes = _classes(el)
        if classes & LINE_CLASSES:
            current = []
            lines.append(current)
        if "ocrx_word" in classes:
            text = "".join("".join(el.itertext()).split())
            if text:
                box = _parse_bbox(el.get("title"))
                if box is None:
                    warnings.append(f"skipped word {text!r}: bad bbox {el.get('title')!r}")
                else:
                    if current is None:
                        # word outside any line element gets a line of its own
                        current = []
                        lines.append(current)
                    current.append((len(current), text, box))
            return
        for child in el:
            visit(child, current)

    visit(page_el, None)

    tokens: list[Token] = []
    offset = 0
    line_index = 0
    for words in lines:
        if not words:
            continue
        # stable sort keeps reading order among equal x
        words = sorted(words, key=lambda w: (w[2][0], w[0]))
        if tokens:
            offset += 1  # newline
        for word_index, (_, text, (x0, top, x1, bottom)) in enumerate(words):
            if word_index:
                offset += 1  # space
            x0, x1 = min(max(x0, 0), width), min(max(x1, 0), width)
            top, bottom = min(max(top, 0), height), min(max(bottom, 0), height)
            bbox = BBox(x1=x0, y1=height - bottom, x2=x1, y2=height - top)
            tokens.append(Token(text, line_index, word_index, bbox, offset, offset + len(text)))
            offset += len(text)
        line_index += 1
    return Page(width, height, tuple(tokens), tuple(warnings))


def to_hocr(page: Page) -> str:
    """Minimal Tesseract-style hOCR serialisation of a page."""
    H = page.height
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<html xmlns="http://www.w3.org/1999/xhtml" xml:lang="en" lang="en">',
        "<head><title></title>",
        '<meta http-equiv="Content-Type" content="text/html;charset=utf-8"/>',
        '<meta name="ocr-system" content="tesseract"/>',
        "</head><body>",
        f"<div class='ocr_page' id='page_1' title='image \"page.tif\"; bbox 0 0 {page.width} {H}; ppageno 0'>",
    ]
    by_line: dict[int, list[Token]] = {}
    for tok in page.tokens:
        by_line.setdefault(tok.line_index, []).append(tok)
    word_id = 0
    for li, toks in sorted(by_line.items()):
        lx0 = min(t.bbox.x1 for t in toks)
        lx1 = max(t.bbox.x2 for t in toks)
        ltop = H - max(t.bbox.y2 for t in toks)
        lbot = H - min(t.bbox.y1 for t in toks)
        out.append(f"<span class='ocr_line' id='line_1_{li + 1}' title='bbox {lx0} {ltop} {lx1} {lbot}'>")
        for t in toks:
            word_id += 1
            b = t.bbox
            out.append(
                f"<span class='ocrx_word' id='word_1_{word_id}' "
                f"title='bbox {b.x1} {H - b.y2} {b.x2} {H - b.y1}; x_wconf 90'>{escape(t.text)}</span>"
            )
        out.append("</span>")
    out.append("</div></body></html>")
    return "\n".join(out) + "\n"


def normalize_bbox(bbox: BBox, page: Page) -> tuple[float, float, float]:
    """Return ``(x1, y1, y2)`` as fractions of the page size, clamped to [0, 1]."""
    if page.width <= 0 or page.height <= 0:
        raise ValueError("page has a zero dimension")

    def clamp(v: float) -> float:
        return min(1.0, max(0.0, v))

    return (
        clamp(bbox.x1 / page.width),
        clamp(bbox.y1 / page.height),
        clamp(bbox.y2 / page.height),
    )
