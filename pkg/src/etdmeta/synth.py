"""Synthetic scanned cover pages for desk-scale experiments.

Each page is drawn from one of a few layout templates. Titles sit in the
upper part of the page and names in the lower part, the way real cover
pages are usually set, so positional features carry signal. The rendered
words get OCR-like corruption in ``ocr.txt``/``page.hocr`` while
``clean.txt`` holds the lowercased correct text with character-offset
annotations for every field present on the page.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import Annotation, Document, MetadataRecord, save_document
from .hocr import BBox, Page, Token, reconstruct_text, to_hocr

PAGE_W, PAGE_H = 2550, 3300

FIRST = (
    "john mary robert linda james susan william karen richard nancy thomas carol charles "
    "margaret donald ruth george helen kenneth joyce edward alice ronald judith harold "
    "ann walter frances arthur martha ralph dorothy eugene evelyn howard irene lawrence "
    "marion samuel gloria"
).split()
LAST = (
    "anderson baker campbell dawson ellis fischer garcia hoffman ingram jensen keller "
    "lindqvist morrison nakamura olsen patterson quinn robertson schneider thompson "
    "underwood vasquez whitaker young zimmerman abernathy blackwell chang delgado "
    "eriksen fairbanks goldberg hutchinson iverson jablonski kowalski larsen mcallister "
    "novak oconnell pritchard ramirez sorensen takahashi ulrich vandermeer weinstein "
    "yamamoto brennan castellano donnelly everett fitzgerald gallagher"
).split()
DEGREES = (
    "doctor of philosophy",
    "doctor of philosophy",
    "doctor of philosophy",
    "doctor of science",
    "master of science",
    "master of arts",
    "doctor of education",
)
PROGRAMS = (
    "physics", "chemistry", "mathematics", "mechanical engineering", "chemical engineering",
    "electrical engineering", "civil engineering", "biology", "economics", "history",
    "psychology", "linguistics", "nuclear engineering", "political science", "sociology",
    "aeronautics and astronautics", "earth and planetary sciences", "english", "philosophy",
    "materials science", "ocean engineering", "management",
)
INSTITUTIONS = (
    "massachusetts institute of technology", "virginia polytechnic institute and state university",
    "university of british columbia", "old dominion university", "stanford university",
    "university of michigan", "cornell university", "university of illinois", "purdue university",
    "university of california", "university of wisconsin", "harvard university",
    "the ohio state university", "university of oxford", "mcgill university",
    "georgia institute of technology", "university of toronto", "columbia university",
    "university of minnesota", "texas a&m university",
)
ADJ = (
    "thermal nonlinear experimental theoretical stochastic structural dynamic optical electronic "
    "magnetic economic social political historical numerical statistical molecular turbulent "
    "viscous kinetic comparative quantitative acoustic seismic cognitive urban rural"
).split()
NOUN = (
    "analysis study investigation dynamics properties behavior effects theory structure synthesis "
    "transport stability measurement characterization evolution design control estimation "
    "response growth distribution"
).split()
TOPIC = (
    "two-phase flow", "thermo-fluid dynamics", "boundary layers", "polymer solutions", "crystal growth",
    "labor markets", "rural communities", "protein folding", "semiconductor devices", "heat exchangers",
    "plasma waves", "reinforced concrete", "ocean currents", "nuclear reactors", "metal alloys",
    "urban housing", "language acquisition", "public policy", "supersonic jets", "porous media",
    "random processes", "elastic shells", "gas turbines", "lake sediments", "chemical reactors",
    "electron beams", "industrial organization", "medieval trade", "soil mechanics", "laser pulses",
)
MONTHS = "january february march april may june july august september october november december".split()
TITLE_PATTERNS = (
    "{adj} {noun} of {topic}",
    "the {noun} of {topic} in {topic}",
    "{adj} {noun} of {adj} {topic}",
    "on the {noun} of {topic}",
    "a {noun} of {topic} and {topic}",
    "{noun} and {noun} of {topic}",
    "some {adj} aspects of {topic} with applications to {topic}",
    "the {adj} {noun} of {topic} under {adj} conditions",
)

OCR_CONFUSIONS = {
    "l": "1", "i": "l", "o": "0", "e": "c", "s": "5", "a": "o", "n": "m", "u": "v",
    "t": "f", "c": "e", "h": "b", "rn": "m",
}


@dataclass
class Piece:
    text: str
    field: str | None = None
    titlecase: bool = False  # display only; clean text stays lowercase


@dataclass
class Line:
    pieces: list[Piece]
    size: int = 42
    gap: float = 1.0  # blank space before the line, in line heights
    caps: bool = False


@dataclass
class Rendered:
    page: Page  # the page as the OCR engine reports it
    ocr_text: str
    clean_text: str
    annotations: tuple[Annotation, ...]
    truth: MetadataRecord
    template: str = field(default="")


def _name(rng: random.Random) -> str:
    parts = [rng.choice(FIRST)]
    if rng.random() < 0.5:
        parts.append(rng.choice("abcdefghjklmnprstw") + ".")
    parts.append(rng.choice(LAST))
    return " ".join(parts)


def _title(rng: random.Random) -> str:
    pattern = rng.choice(TITLE_PATTERNS)
    out = pattern
    while "{" in out:
        out = out.replace("{adj}", rng.choice(ADJ), 1).replace("{noun}", rng.choice(NOUN), 1)
        out = out.replace("{topic}", rng.choice(TOPIC), 1)
    return out


def _wrap(text: str, size: int, max_px: int) -> list[str]:
    lines, cur = [], []
    for w in text.split():
        trial = " ".join(cur + [w])
        if cur and len(trial) * size * 0.55 > max_px:
            lines.append(" ".join(cur))
            cur = [w]
        else:
            cur.append(w)
    if cur:
        lines.append(" ".join(cur))
    return lines


def _tc(text: str) -> str:
    small = {"of", "and", "the", "in", "on", "to", "for", "with", "at", "an", "a", "under"}
    words = text.split()
    return " ".join(
        w if (i and w in small) else w[:1].upper() + w[1:] for i, w in enumerate(words)
    )


def _field_lines(text: str, name: str, size: int, rng, max_px=1900, caps=False, gap=1.0, before="", after=""):
    lines = []
    for k, chunk in enumerate(_wrap(text, size, max_px)):
        pieces = []
        if k == 0 and before:
            pieces.append(Piece(before))
        pieces.append(Piece(chunk, name))
        lines.append(Line(pieces, size, gap if k == 0 else 0.25, caps))
    if after:
        lines[-1].pieces.append(Piece(after))
    return lines


def _template_mit(rng, f) -> list[Line]:
    lines = _field_lines(f["title"], "title", 56, rng, caps=True, gap=0)
    lines += [Line([Piece("by")], gap=1.2)]
    lines += _field_lines(f["author"], "author", 46, rng, caps=True, gap=0.6)
    prior = rng.choice(INSTITUTIONS)
    lines += [Line([Piece(f"b.s., {prior}", titlecase=True)], 38, 0.3)]
    lines += [Line([Piece(f"({f['year_prev']})")], 38, 0.1)]
    lines += [Line([Piece("submitted in partial fulfillment of the")], 40, 1.2),
              Line([Piece("requirements for the degree of")], 40, 0.2)]
    lines += _field_lines(f["degree"], "degree", 44, rng, caps=True, gap=0.6)
    lines += [Line([Piece("at the")], 40, 0.6)]
    lines += _field_lines(f["institution"], "institution", 44, rng, caps=True, gap=0.4)
    lines += [Line([Piece(f["month"] + ","), Piece(f["year"], "year")], 42, 0.6)]
    lines += [Line([Piece("signature of author ....................")], 38, 1.4)]
    if f["program"]:
        lines += [Line([Piece("department of"), Piece(f["program"], "program"), Piece(f"{f['month']} {f['year_prev2']}")], 38, 0.2)]
    if f["advisor"]:
        lines += [Line([Piece("certified by ...................")], 38, 1.0)]
        lines += _field_lines(f["advisor"], "advisor", 40, rng, gap=0.2)
        lines += [Line([Piece("thesis supervisor")], 38, 0.2)]
    lines += [Line([Piece("accepted by ...................")], 38, 1.0),
              Line([Piece("chairman, departmental committee on graduate students")], 38, 0.2)]
    return lines


CREDENTIALS = ("b.s.", "b.a., m.a.", "b.sc. (hons.)", "m.s.", "b.e., m.eng.", "ph.d.", "m.a., ph.d.")


def _credential(rng) -> list[Line]:
    return [Line([Piece(rng.choice(CREDENTIALS))], 36, 0.2)] if rng.random() < 0.4 else []


def _prior_degree(rng, f) -> list[Line]:
    if rng.random() >= 0.4:
        return []
    degree = rng.choice(("b.s.,", "b.a.,", "m.s.,"))
    return [Line([Piece(f"{degree} {rng.choice(INSTITUTIONS)}, {f['year_prev']}", titlecase=True)], 36, 0.3)]


def _template_us(rng, f) -> list[Line]:
    lines = _field_lines(f["title"], "title", 54, rng, gap=0)
    lines += [Line([Piece("a dissertation")], 42, 2.0),
              Line([Piece("presented to the faculty of the graduate school")], 40, 0.4),
              Line([Piece("of")], 40, 0.2)]
    lines += _field_lines(f["institution"], "institution", 42, rng, gap=0.2)
    lines += [Line([Piece("in candidacy for the degree of")], 40, 1.0)]
    lines += _field_lines(f["degree"], "degree", 42, rng, gap=0.3)
    if f["program"]:
        lines += [Line([Piece("department of"), Piece(f["program"], "program")], 40, 1.0)]
    cue = rng.choice(("by", "by", "submitted by", None))
    if cue:
        lines += [Line([Piece(cue)], 40, 1.6)]
    lines += _field_lines(f["author"], "author", 44, rng, gap=0.3 if cue else 1.8)
    lines += _prior_degree(rng, f) or _credential(rng)
    year_line = Line([Piece(f["year"], "year")], 42, 1.2)
    year_last = rng.random() < 0.5
    if not year_last:
        lines.append(year_line)
    if f["advisor"]:
        cue = rng.choice(("approved by:", "dissertation advisor:", None))
        if cue:
            lines += [Line([Piece(cue)], 38, 2.0)]
        after = rng.choice((", advisor", "", ""))
        lines += _field_lines(f["advisor"], "advisor", 40, rng, gap=0.3 if cue else 2.2, after=after)
        lines += _credential(rng)
    if year_last:
        year_line.gap = 1.6
        lines.append(year_line)
    return lines


def _template_uk(rng, f) -> list[Line]:
    lines = _field_lines(f["institution"], "institution", 44, rng, gap=0)
    lines += _field_lines(f["title"], "title", 56, rng, gap=1.6)
    lines += [Line([Piece("a thesis submitted for the degree of")], 40, 2.0)]
    lines += _field_lines(f["degree"], "degree", 42, rng, gap=0.3)
    if f["program"]:
        lines += [Line([Piece("in the faculty of"), Piece(f["program"], "program")], 40, 0.6)]
    lines += _field_lines(f["author"], "author", 46, rng, gap=2.4)
    lines += _credential(rng)
    year_line = Line([Piece(f["year"], "year")], 42, 0.6)
    year_last = rng.random() < 0.5
    if not year_last:
        lines.append(year_line)
    if f["advisor"]:
        if rng.random() < 0.5:
            lines += [Line([Piece(rng.choice(("supervisor: dr.", "supervised by", "supervisor:")))], 38, 2.4)]
            lines += _field_lines(f["advisor"], "advisor", 40, rng, gap=0.2)
        else:
            lines += _field_lines(f["advisor"], "advisor", 40, rng, gap=2.6)
        lines += _credential(rng)
    if year_last:
        year_line.gap = 1.4
        lines.append(year_line)
    return lines


TEMPLATES = {"mit": _template_mit, "us": _template_us, "uk": _template_uk}


def _corrupt(word: str, rng: random.Random, rate: float) -> str:
    if rng.random() >= rate or len(word) < 3:
        return word
    i = rng.randrange(len(word))
    roll = rng.random()
    if roll < 0.6:
        for src, dst in OCR_CONFUSIONS.items():
            if word.lower().startswith(src, i):
                return word[:i] + dst + word[i + len(src):]
        return word
    if roll < 0.8:
        return word[:i] + word[i + 1:]
    return word[:i] + rng.choice(".,'") + word[i:]


def _spread(lines, heights, top: float, bottom: float, skip_first_gap=False) -> list[float]:
    """Top edge of each line, spreading the free space over the lines' gaps."""
    gaps = [0.0 if skip_first_gap and i == 0 else ln.gap for i, ln in enumerate(lines)]
    free = max(0.0, bottom - top - sum(heights))
    unit = min(free / (sum(gaps) or 1.0), 220)
    tops, y = [], top
    for gap, h in zip(gaps, heights):
        y += gap * unit
        tops.append(y)
        y += h
    return tops


def render(rng: random.Random, template: str | None = None, noise: float = 0.08) -> Rendered:
    """Compose, lay out and OCR-corrupt one cover page."""
    year = rng.randint(1945, 1990)
    f = {
        "title": _title(rng),
        "author": _name(rng),
        "degree": rng.choice(DEGREES),
        "program": rng.choice(PROGRAMS) if rng.random() < 0.9 else None,
        "institution": rng.choice(INSTITUTIONS),
        "year": str(year),
        "year_prev": str(year - rng.randint(3, 8)),
        "year_prev2": str(year - 1),
        "month": rng.choice(MONTHS),
        "advisor": _name(rng) if rng.random() < 0.85 else None,
    }
    name = template or rng.choice(sorted(TEMPLATES))
    lines = TEMPLATES[name](rng, f)
    left_aligned = name == "uk"

    # vertical layout: everything before the author sits in the upper half,
    # the author block and what follows in the lower half
    top_margin, bottom_margin = 260 + rng.randint(-40, 40), 280 + rng.randint(-40, 40)
    heights = [ln.size * 1.35 for ln in lines]
    split = next(i for i, ln in enumerate(lines) if any(p.field == "author" for p in ln.pieces))
    tail_top = PAGE_H // 2 + rng.randint(0, 160)
    tops = _spread(lines[:split], heights[:split], top_margin, PAGE_H // 2 - 60)
    start = max(tail_top, int(tops[-1] + heights[split - 1]) if tops else tail_top)
    tops += _spread(lines[split:], heights[split:], start, PAGE_H - bottom_margin, skip_first_gap=True)
    dx = rng.randint(-50, 50)

    ocr_tokens: list[Token] = []
    clean_lines: list[str] = []
    clean_offset = 0
    annotations: dict[str, list[int]] = {}
    truth_parts: dict[str, list[str]] = {}
    ocr_offset = 0
    line_index = 0
    for ln, y in zip(lines, tops):
        words: list[tuple[str, str | None, bool]] = []
        for piece in ln.pieces:
            for w in piece.text.lower().split():
                words.append((w, piece.field, piece.titlecase or piece.field not in (None, "year")))
        clean_line = " ".join(w for w, _, _ in words)
        # clean text and annotations
        pos = clean_offset
        for k, (w, fld, _) in enumerate(words):
            if k:
                pos += 1
            if fld:
                span = annotations.setdefault(fld, [pos, pos + len(w)])
                span[1] = pos + len(w)
                truth_parts.setdefault(fld, []).append(w)
            pos += len(w)
        clean_lines.append(clean_line)
        clean_offset += len(clean_line) + 1

        # display form and OCR words
        shown = []
        for w, fld, tc in words:
            if ln.caps:
                d = w.upper()
            elif tc:
                d = _tc(w) if w not in ("of", "and", "the", "in", "on", "to", "with", "under") else w
            else:
                d = w
            # hyphenated words are often split by justification
            if "-" in d[1:-1] and rng.random() < 0.5:
                left, _, right = d.partition("-")
                shown += [left + "-", right]
            else:
                shown.append(_corrupt(d, rng, noise))
        if rng.random() < noise / 2:
            shown.insert(rng.randrange(len(shown) + 1), rng.choice(["|", "©", "~", "."]))
        cw = ln.size * 0.55
        line_px = (sum(len(w) for w in shown) + len(shown) - 1) * cw
        x = 300 + dx if left_aligned else (PAGE_W - line_px) / 2 + dx
        top = int(y)
        for k, w in enumerate(shown):
            x0 = int(x)
            x1 = int(x + len(w) * cw)
            bbox = BBox(x1=max(0, x0), y1=max(0, PAGE_H - (top + ln.size)), x2=min(PAGE_W, x1), y2=PAGE_H - top)
            if k:
                ocr_offset += 1
            ocr_tokens.append(Token(w, line_index, k, bbox, ocr_offset, ocr_offset + len(w)))
            ocr_offset += len(w)
            x += (len(w) + 1) * cw
        ocr_offset += 1
        line_index += 1

    page = Page(PAGE_W, PAGE_H, tuple(ocr_tokens))
    anns = tuple(sorted((Annotation(k, s, e) for k, (s, e) in annotations.items()), key=lambda a: a.start))
    truth = MetadataRecord(**{k: " ".join(v) for k, v in truth_parts.items()})
    return Rendered(page, reconstruct_text(ocr_tokens), "\n".join(clean_lines), anns, truth, name)


def generate_corpus(root, n: int = 240, seed: int = 0, noise: float = 0.08) -> list[str]:
    """Write ``n`` synthetic documents under ``root``; returns their ids."""
    rng = random.Random(seed)
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    ids = []
    for i in range(n):
        r = render(rng, noise=noise)
        doc_id = f"synth{i:04d}"
        doc = Document(doc_id, r.ocr_text, r.clean_text, None, r.annotations, r.truth)
        save_document(doc, root, hocr=to_hocr(r.page))
        ids.append(doc_id)
    return ids
