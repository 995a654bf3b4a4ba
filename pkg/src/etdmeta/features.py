"""Per-token features: ten text features, three visual features, POS tags."""

from __future__ import annotations

import re
from decimal import ROUND_HALF_UP, Decimal
from typing import Callable, Sequence

from .hocr import Page, Token, normalize_bbox

FeatureMap = dict  # feature name -> "true"/"false", a string, or a ratio in [0, 1]

TEXT_FEATURES: tuple[str, ...] = (
    "all_upper",
    "all_lower",
    "all_digit",
    "suffix3",
    "suffix2",
    "pos",
    "pos_suffix2",
    "pos_next2",
    "consec_initcap",
    "initcap_interior",
)
VISUAL_FEATURES: tuple[str, ...] = ("left_margin", "upper_y", "lower_y")

EOS = "EOS"

TAGSET = frozenset(
    {"CC", "CD", "DT", "IN", "JJ", "MD", "NN", "NNP", "NNS", "PRP", "PRP$", "RB", "SYM", "TO", "VB",
     "VBD", "VBG", "VBN", "VBZ", "WDT"}
)

_LEXICON: dict[str, str] = {}
for _tag, _words in {
    "IN": "of in at by for from with on into upon under within as than about through during "
    "between among toward towards via per",
    "DT": "the a an this that these those each every no all any some",
    "CC": "and or but nor",
    "TO": "to",
    "PRP": "i he she it we they you him them me us",
    "PRP$": "his her its their our my your",
    "MD": "may might must shall should will would can could",
    "VBZ": "is has does",
    "VBD": "was were had did",
    "VB": "be have do",
    "WDT": "which whose",
    "CD": "one two three four five six seven eight nine ten",
}.items():
    for _w in _words.split():
        _LEXICON[_w] = _tag

_PUNCT = "\"'.,;:!?()[]{}<>-_/\\|*&^%$#@~`+=©®"
_NUMBER_RE = re.compile(r"^\d+(?:[.,/-]\d+)*(?:st|nd|rd|th|s)?$")
_SUFFIX_RULES: tuple[tuple[str, str], ...] = (
    ("ing", "VBG"),
    ("ed", "VBN"),
    ("ly", "RB"),
    ("ous", "JJ"),
    ("ive", "JJ"),
    ("able", "JJ"),
    ("ible", "JJ"),
    ("ful", "JJ"),
    ("ical", "JJ"),
    ("ic", "JJ"),
    ("al", "JJ"),
)

Tagger = Callable[[Sequence[str], Sequence[str]], list]


def rule_tagger(words: Sequence[str], cased: Sequence[str]) -> list[str]:
    """Lexicon and suffix rules; capitalised open-class words become NNP."""
    tags = []
    for word, orig in zip(words, cased):
        core = word.strip(_PUNCT).lower()
        orig_core = orig.strip(_PUNCT)
        if not core:
            tags.append("SYM")
        elif _NUMBER_RE.match(core):
            tags.append("CD")
        elif core in _LEXICON:
            tags.append(_LEXICON[core])
        elif orig_core[:1].isupper():
            tags.append("NNP")
        else:
            for suffix, tag in _SUFFIX_RULES:
                if core.endswith(suffix) and len(core) > len(suffix) + 2:
                    tags.append(tag)
                    break
            else:
                if core.endswith("s") and not core.endswith("ss") and len(core) > 3:
                    tags.append("NNS")
                else:
                    tags.append("NN")
    return tags


def pos_tag(words: Sequence[str], cased: Sequence[str] | None = None, tagger: Tagger | None = None) -> list[str]:
    """Tag each word. ``cased`` carries original capitalisation when ``words`` are lowercased."""
    if any(not w for w in words):
        raise ValueError("cannot tag an empty token")
    if cased is None:
        cased = words
    if len(cased) != len(words):
        raise ValueError("cased sidecar length differs from tokens")
    tags = (tagger or rule_tagger)(words, cased)
    if len(tags) != len(words):
        raise ValueError("tagger returned the wrong number of tags")
    return list(tags)


def _flag(value: bool) -> str:
    return "true" if value else "false"


def _initcap(text: str) -> bool:
    return text[:1].isupper()


def text_features(seq: Sequence[Token], i: int, pos: Sequence[str]) -> FeatureMap:
    if len(pos) != len(seq):
        raise ValueError("need one POS tag per token")
    if not 0 <= i < len(seq):
        raise IndexError(f"token index {i} out of range for sequence of {len(seq)}")
    tok = seq[i]
    cased = tok.cased_text
    lower = tok.text.lower()
    nxt = [pos[j] if j < len(seq) else EOS for j in (i + 1, i + 2)]
    first_line = min(t.line_index for t in seq)
    last_line = max(t.line_index for t in seq)
    interior = first_line < tok.line_index < last_line
    return {
        "all_upper": _flag(cased.isupper()),
        "all_lower": _flag(cased.islower()),
        "all_digit": _flag(cased.isdigit()),
        "suffix3": lower[-3:],
        "suffix2": lower[-2:],
        "pos": pos[i],
        "pos_suffix2": pos[i][-2:],
        "pos_next2": "|".join(nxt),
        "consec_initcap": _flag(i + 1 < len(seq) and _initcap(cased) and _initcap(seq[i + 1].cased_text)),
        "initcap_interior": _flag(_initcap(cased) and interior),
    }


def quantize(value: float) -> float:
    return float(Decimal(repr(value)).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def visual_features(token: Token, page: Page, line_first_token: Token) -> FeatureMap:
    if page.width <= 0 or page.height <= 0:
        raise ValueError("page has a zero dimension")
    left, _, _ = normalize_bbox(line_first_token.bbox, page)
    _, lower, upper = normalize_bbox(token.bbox, page)
    return {
        "left_margin": quantize(left),
        "upper_y": quantize(upper),
        "lower_y": quantize(lower),
    }


def sequence_features(
    tokens: Sequence[Token],
    page: Page | None = None,
    *,
    visual: bool = False,
    tagger: Tagger | None = None,
) -> list[FeatureMap]:
    """Feature maps for a whole token sequence, visual ones only if ``visual``."""
    if not tokens:
        return []
    pos = pos_tag([t.text for t in tokens], [t.cased_text for t in tokens], tagger)
    maps = [text_features(tokens, i, pos) for i in range(len(tokens))]
    if visual:
        if page is None:
            raise ValueError("visual features need the page")
        line_first: dict[int, Token] = {}
        for tok in tokens:
            line_first.setdefault(tok.line_index, tok)
        for fm, tok in zip(maps, tokens):
            fm.update(visual_features(tok, page, line_first[tok.line_index]))
    return maps


def feature_strings(fm: FeatureMap) -> list[str]:
    """``name=value`` indicator strings for the CRF dictionary."""
    out = []
    for name, value in fm.items():
        if isinstance(value, float):
            value = f"{value:.2f}"
        out.append(f"{name}={value}")
    return out
