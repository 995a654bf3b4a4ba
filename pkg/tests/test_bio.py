import random

import pytest

from etdmeta.bio import decode, encode, spans
from etdmeta.corpus import FIELDS, Annotation, MetadataRecord
from etdmeta.crf import is_valid_bio
from etdmeta.hocr import BBox, Token

BOX = BBox(0, 0, 1, 1)


def tokens_for(words):
    toks, offset = [], 0
    for i, w in enumerate(words):
        toks.append(Token(w, 0, i, BOX, offset, offset + len(w)))
        offset += len(w) + 1
    return toks


def random_layout(rng: random.Random):
    """Random words plus one annotation per chosen field over disjoint token runs.

    Annotation edges may fall inside the first/last token of a run. A year
    annotation covers a single 4-digit token.
    """
    n = rng.randint(1, 40)
    words = ["".join(rng.choice("abcdefgh1.,") for _ in range(rng.randint(1, 7))) for _ in range(n)]
    toks = tokens_for(words)
    fields = rng.sample(FIELDS, rng.randint(0, len(FIELDS)))
    cuts = sorted(rng.sample(range(n + 1), min(n + 1, 2 * len(fields))))
    anns, expected = [], {}
    for name, (a, b) in zip(fields, zip(cuts[::2], cuts[1::2])):
        if a == b:
            continue
        if name == "year":
            b = a + 1
            words[a] = str(rng.randint(1000, 2999))
            toks = tokens_for(words)
        start = toks[a].char_start + rng.randrange(len(toks[a].text))
        end = toks[b - 1].char_start + 1 + rng.randrange(len(toks[b - 1].text))
        if start >= end:
            continue
        anns.append(Annotation(name, start, end))
        expected[name] = " ".join(words[a:b])
    return toks, anns, expected


def test_author_span():
    toks = tokens_for("submitted by the john q smith in 1972".split())
    text = " ".join(t.text for t in toks)
    start = text.index("john")
    labels = encode(toks, [Annotation("author", start, start + len("john q smith"))])
    assert labels == ["O", "O", "O", "B-author", "I-author", "I-author", "O", "O"]


def test_no_annotations():
    assert encode(tokens_for(["a", "b"]), []) == ["O", "O"]


def test_partial_overlap_includes_token():
    toks = tokens_for(["thesis", "1972.", "end"])
    # annotation covers only "1972" inside "1972."
    labels = encode(toks, [Annotation("year", 7, 11)])
    assert labels == ["O", "B-year", "O"]
    assert decode(toks, labels) == MetadataRecord(year="1972")


def test_overlap_rejected():
    with pytest.raises(ValueError):
        encode(tokens_for(["a", "b"]), [Annotation("title", 0, 3), Annotation("author", 2, 3)])


def test_decode_simple():
    rec = decode(tokens_for(["a", "b", "c", "d"]), ["B-title", "I-title", "O", "B-author"])
    assert rec == MetadataRecord(title="a b", author="d")


def test_decode_longest_then_earliest():
    toks = tokens_for(["x", "y", "o", "z", "o", "p", "q"])
    labels = ["B-author", "O", "O", "B-author", "I-author", "O", "B-author"]
    assert decode(toks, labels).author == "z o"
    labels = ["B-author", "O", "O", "B-author", "O", "O", "O"]
    assert decode(toks, labels).author == "x"


def test_decode_orphan_i_run():
    toks = tokens_for(["a", "b", "c"])
    assert decode(toks, ["O", "I-advisor", "I-advisor"]).advisor == "b c"
    assert spans(["I-title", "I-author", "B-author", "I-author"]) == [("title", 0, 1), ("author", 1, 2), ("author", 2, 4)]


def test_decode_all_o_and_mismatch():
    assert decode(tokens_for(["a"]), ["O"]) == MetadataRecord()
    with pytest.raises(ValueError):
        decode(tokens_for(["a"]), [])


def test_decode_year_without_digits_dropped():
    assert decode(tokens_for(["june,", "mcmlxx"]), ["B-year", "I-year"]).year is None
    assert decode(tokens_for(["june,", "1970"]), ["B-year", "I-year"]).year == "1970"


def test_round_trip_and_validity():
    rng = random.Random(0)
    for _ in range(200):
        toks, anns, expected = random_layout(rng)
        labels = encode(toks, anns)
        assert is_valid_bio(labels)
        rec = decode(toks, labels)
        for name, text in expected.items():
            assert rec.get(name) == text
