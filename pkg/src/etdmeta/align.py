"""Character alignment of OCR text against clean text, and bbox projection.

The objective is unit-cost Levenshtein distance. ``edit_distance`` uses the
Myers/Hyyrö bit-vector recurrence; ``align`` fills the full DP matrix (one
numpy row at a time) so it can trace back an optimal edit script.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .hocr import Page, Token

_WORD_RE = re.compile(r"\S+")


@dataclass(frozen=True)
class AlignmentMap:
    pairs: tuple[tuple[int, int], ...]
    distance: int

    def ocr_to_clean(self) -> dict[int, int]:
        return dict(self.pairs)

    def clean_to_ocr(self) -> dict[int, int]:
        return {c: o for o, c in self.pairs}


def edit_distance(a: str, b: str) -> int:
    """Levenshtein distance with unit insert/delete/substitute costs."""
    if len(a) < len(b):
        a, b = b, a
    m = len(b)
    if m == 0:
        return len(a)
    # b is the pattern held in the bit vectors; a streams through
    peq: dict[str, int] = {}
    for i, ch in enumerate(b):
        peq[ch] = peq.get(ch, 0) | (1 << i)
    full = (1 << m) - 1
    high = 1 << (m - 1)
    pv, mv, score = full, 0, m
    for ch in a:
        eq = peq.get(ch, 0)
        xv = eq | mv
        xh = (((eq & pv) + pv) ^ pv) | eq
        ph = (mv | ~(xh | pv)) & full
        mh = pv & xh
        if ph & high:
            score += 1
        elif mh & high:
            score -= 1
        # top DP row is 0, 1, 2, ... so a +1 horizontal delta enters at row 0
        ph = ((ph << 1) | 1) & full
        mh = (mh << 1) & full
        pv = (mh | ~(xv | ph)) & full
        mv = ph & xv
    return score


def lcs_length(a: str, b: str) -> int:
    """Length of the longest common subsequence (Allison-Dix bit vectors)."""
    if len(a) < len(b):
        a, b = b, a
    m = len(b)
    if m == 0:
        return 0
    peq: dict[str, int] = {}
    for i, ch in enumerate(b):
        peq[ch] = peq.get(ch, 0) | (1 << i)
    full = (1 << m) - 1
    s = full
    for ch in a:
        u = s & peq.get(ch, 0)
        s = ((s + u) | (s - u)) & full
    return m - bin(s).count("1")


def indel_distance(a: str, b: str) -> int:
    """Edit distance allowing only insertions and deletions."""
    return len(a) + len(b) - 2 * lcs_length(a, b)


def _dp_matrix(a: str, b: str) -> np.ndarray:
    n, m = len(a), len(b)
    D = np.empty((n + 1, m + 1), dtype=np.int32)
    cols = np.arange(m + 1, dtype=np.int32)
    D[0] = cols
    if m == 0:
        D[:, 0] = np.arange(n + 1)
        return D
    bcodes = np.array([ord(c) for c in b], dtype=np.int64)
    for i in range(1, n + 1):
        prev = D[i - 1]
        sub = prev[:-1] + (bcodes != ord(a[i - 1]))
        cand = np.empty(m + 1, dtype=np.int32)
        cand[0] = i
        cand[1:] = np.minimum(sub, prev[1:] + 1)
        # left-to-right insertions: D[i, j] = min_k cand[k] + (j - k)
        D[i] = np.minimum.accumulate(cand - cols) + cols
    return D


def align(ocr_text: str, clean_text: str) -> AlignmentMap:
    """Optimal character alignment of ``ocr_text`` onto ``clean_text``.

    Matched and substituted characters are both reported as pairs. When
    several edit scripts are optimal, traceback prefers a diagonal step,
    then an insertion (clean character with no OCR source), then a deletion.
    """
    D = _dp_matrix(ocr_text, clean_text)
    i, j = len(ocr_text), len(clean_text)
    pairs = []
    while i > 0 or j > 0:
        here = D[i, j]
        if i > 0 and j > 0 and here == D[i - 1, j - 1] + (ocr_text[i - 1] != clean_text[j - 1]):
            pairs.append((i - 1, j - 1))
            i, j = i - 1, j - 1
        elif j > 0 and here == D[i, j - 1] + 1:
            j -= 1
        else:
            i -= 1
    pairs.reverse()
    return AlignmentMap(tuple(pairs), int(D[-1, -1]))


def project_tokens(ocr_page: Page, amap: AlignmentMap, clean_text: str) -> list[Token]:
    """Give each whitespace-delimited clean token a bbox from an OCR token.

    The donor is the OCR token holding most of the clean token's aligned
    characters (ties go to the earlier OCR token). Clean tokens with no
    aligned character borrow from the nearest preceding projected token,
    or the following one at the start of the text. The ``cased`` field
    restores capitalisation from the aligned OCR characters.
    """
    if not ocr_page.tokens:
        raise ValueError("OCR page has no tokens to project")
    ocr_text = ocr_page.text
    owner = [-1] * len(ocr_text)
    for k, tok in enumerate(ocr_page.tokens):
        for p in range(tok.char_start, tok.char_end):
            owner[p] = k
    clean_to_ocr = amap.clean_to_ocr()

    spans = [(m.start(), m.end(), m.group()) for m in _WORD_RE.finditer(clean_text)]
    donors: list[int | None] = []
    cased: list[str] = []
    for start, end, text in spans:
        votes: Counter[int] = Counter()
        chars = []
        for p in range(start, end):
            src = clean_to_ocr.get(p)
            ch = clean_text[p]
            if src is not None and src < len(ocr_text):
                if owner[src] >= 0:
                    votes[owner[src]] += 1
                if ocr_text[src].lower() == ch and ocr_text[src] != ch:
                    ch = ocr_text[src]
            chars.append(ch)
        cased.append("".join(chars))
        if votes:
            top = max(votes.values())
            donors.append(min(k for k, v in votes.items() if v == top))
        else:
            donors.append(None)

    # fallback: nearest preceding donor, else nearest following
    filled: list[int] = []
    last = None
    for d in donors:
        last = d if d is not None else last
        filled.append(last)  # type: ignore[arg-type]
    nxt = None
    for idx in range(len(filled) - 1, -1, -1):
        if donors[idx] is not None:
            nxt = donors[idx]
        if filled[idx] is None:
            filled[idx] = nxt if nxt is not None else 0

    out: list[Token] = []
    word_counts: Counter[int] = Counter()
    for (start, end, text), donor_idx, case_text in zip(spans, filled, cased):
        donor = ocr_page.tokens[donor_idx]
        line = donor.line_index
        out.append(
            Token(
                text=text,
                line_index=line,
                word_index=word_counts[line],
                bbox=donor.bbox,
                char_start=start,
                char_end=end,
                cased=case_text,
            )
        )
        word_counts[line] += 1
    return out
