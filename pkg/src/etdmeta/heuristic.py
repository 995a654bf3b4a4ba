"""Regular-expression baseline extractor for cover pages.

Rules work line by line on the clean (lowercased) text. Cue lists and
degree patterns come from a JSON rules file; the packaged default is
``data/heuristic_rules.json`` and accepts these keys:

``year_min``/``year_max``
    inclusive range for year candidates.
``degree_patterns``
    regexes for degree names, tried in order.
``institution_keywords``, ``institution_strip_prefixes``
    words marking an institution line, and leading words trimmed from it.
``author_cues``, ``advisor_cues``, ``program_cues``
    phrases that introduce the respective field.
``name_max_words``
    longest line still accepted as a person's name.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from functools import cached_property
from importlib import resources
from pathlib import Path

from .corpus import MetadataRecord

_NAME_RE = re.compile(r"^[a-z][a-z.'\-]*(?: [a-z][a-z.'\-]*)*$")


def _norm(s: str) -> str:
    return " ".join(s.split()).strip(" :,;-")


@dataclass(frozen=True)
class Rules:
    year_min: int
    year_max: int
    degree_patterns: tuple[str, ...]
    institution_keywords: tuple[str, ...]
    institution_strip_prefixes: tuple[str, ...]
    author_cues: tuple[str, ...]
    advisor_cues: tuple[str, ...]
    program_cues: tuple[str, ...]
    name_max_words: int = 5

    @classmethod
    def load(cls, path=None) -> "Rules":
        if path is None:
            raw = resources.files("etdmeta").joinpath("data/heuristic_rules.json").read_text(encoding="utf-8")
        else:
            raw = Path(path).read_text(encoding="utf-8")
        data = json.loads(raw)
        return cls(**{k: tuple(v) if isinstance(v, list) else v for k, v in data.items()})

    @cached_property
    def degree_re(self):
        return re.compile(r"\b(?:" + "|".join(self.degree_patterns) + r")(?!\w)")

    def cue_re(self, cues) -> re.Pattern:
        ordered = sorted(cues, key=len, reverse=True)
        return re.compile(r"(?<!\w)(?:" + "|".join(re.escape(c) for c in ordered) + r")(?!\w)")


class HeuristicExtractor:
    def __init__(self, rules: Rules | None = None):
        self.rules = rules or Rules.load()
        r = self.rules
        self._author = r.cue_re(r.author_cues)
        self._advisor = r.cue_re(r.advisor_cues)
        self._program = r.cue_re(r.program_cues)
        self._institution = r.cue_re(r.institution_keywords)
        self._year = re.compile(r"(?<!\d)(\d{4})(?!\d)")

    def _looks_like_name(self, text: str) -> bool:
        return bool(text) and bool(_NAME_RE.match(text)) and len(text.split()) <= self.rules.name_max_words

    def year(self, lines):
        found = None
        for line in lines:
            for m in self._year.finditer(line):
                if self.rules.year_min <= int(m.group(1)) <= self.rules.year_max:
                    found = m.group(1)
        return found

    def degree(self, lines):
        for line in lines:
            m = self.rules.degree_re.search(line)
            if m:
                return m.group(0)
        return None

    def institution(self, lines):
        prefixes = sorted(self.rules.institution_strip_prefixes, key=len, reverse=True)
        for line in lines:
            if self._institution.search(line):
                text = _norm(line)
                for prefix in prefixes:
                    if text.startswith(prefix + " "):
                        text = text[len(prefix) + 1 :]
                        break
                return _norm(text)
        return None

    def program(self, lines):
        for line in lines:
            m = self._program.search(line)
            if m:
                rest = _norm(line[m.end() :])
                if rest:
                    return rest
        return None

    def author(self, lines) -> tuple[str | None, int | None]:
        for i, line in enumerate(lines):
            m = self._author.search(line)
            if m is None or self._advisor.search(line):
                continue
            rest = _norm(line[m.end() :])
            if self._looks_like_name(rest):
                return rest, i
            if not rest and i + 1 < len(lines) and self._looks_like_name(_norm(lines[i + 1])):
                return _norm(lines[i + 1]), i
        return None, None

    def advisor(self, lines):
        for i, line in enumerate(lines):
            m = self._advisor.search(line)
            if m is None:
                continue
            after = _norm(line[m.end() :])
            before = _norm(line[: m.start()])
            for candidate in (after, before):
                if self._looks_like_name(candidate):
                    return candidate
            if not after and i + 1 < len(lines) and self._looks_like_name(_norm(lines[i + 1])):
                return _norm(lines[i + 1])
        return None

    def title(self, lines, stop: int | None):
        limit = len(lines) if stop is None else stop
        blocks, cur = [], []
        for line in lines[:limit]:
            taken = (
                self.rules.degree_re.search(line)
                or self._institution.search(line)
                or self._program.search(line)
                or self._author.search(line)
                or self._advisor.search(line)
                or self._year.search(line)
            )
            if taken:
                if cur:
                    blocks.append(cur)
                cur = []
            else:
                cur.append(_norm(line))
        if cur:
            blocks.append(cur)
        if not blocks:
            return None
        best = max(blocks, key=lambda b: sum(len(x) for x in b))
        return _norm(" ".join(best)) or None

    def extract(self, clean_text: str) -> MetadataRecord:
        lines = [ln for ln in clean_text.lower().splitlines() if ln.strip()]
        if not lines:
            return MetadataRecord()
        author, author_line = self.author(lines)
        return MetadataRecord(
            title=self.title(lines, author_line),
            author=author,
            degree=self.degree(lines),
            program=self.program(lines),
            institution=self.institution(lines),
            year=self.year(lines),
            advisor=self.advisor(lines),
        )


def extract_heuristic(clean_text: str, rules: Rules | None = None) -> MetadataRecord:
    return HeuristicExtractor(rules).extract(clean_text)
