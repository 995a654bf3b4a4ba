import random

import pytest

from etdmeta.corpus import load_corpus
from etdmeta.hocr import parse_hocr
from etdmeta.synth import TEMPLATES, generate_corpus, render


@pytest.mark.parametrize("template", sorted(TEMPLATES))
def test_render_consistency(template):
    for seed in range(20):
        r = render(random.Random(seed), template)
        assert r.template == template
        for ann in r.annotations:
            assert " ".join(r.clean_text[ann.start:ann.end].split()) == r.truth.get(ann.field)
        assert r.clean_text == r.clean_text.lower()
        assert "\n\n" not in r.clean_text


@pytest.mark.parametrize("template", sorted(TEMPLATES))
def test_title_above_author_below(template):
    for seed in range(20):
        r = render(random.Random(seed), template)
        height = r.page.height
        lines = r.clean_text.split("\n")
        author_line = next(i for i, ln in enumerate(lines) if r.truth.author.split()[0] in ln.split())
        by_line = {}
        for tok in r.page.tokens:
            by_line.setdefault(tok.line_index, tok)
        assert by_line[author_line].bbox.y2 <= height / 2
        title_line = next(i for i, ln in enumerate(lines) if ln.startswith(r.truth.title.split()[0]))
        assert by_line[title_line].bbox.y1 > height / 2


def test_generate_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    generate_corpus(a, n=5, seed=7)
    generate_corpus(b, n=5, seed=7)
    for path in sorted(a.rglob("*.*")):
        assert path.read_bytes() == (b / path.relative_to(a)).read_bytes()
    docs, errors = load_corpus(a)
    assert len(docs) == 5 and not errors
    for doc in docs:
        assert parse_hocr(doc.hocr()).text == doc.ocr_text
