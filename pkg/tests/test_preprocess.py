import unicodedata

import pytest
from hypothesis import given, strategies as st

from pabsa.preprocess import (
    Stoplist,
    Token,
    ZWNJ,
    default_stoplist,
    feature_tokens,
    load_stoplist,
    normalize,
    remove_stopwords,
    stem,
    tokenize,
)

# text drawn from characters the pipeline actually deals with
persian_text = st.text(
    alphabet=st.sampled_from(
        "ابپتثجچحخدذرزژسشصضطظعغفقکگلمنوهی" + "يك" + ZWNJ + " \tًـ۰۹0a."
    ),
    max_size=40,
)


class TestNormalize:
    def test_arabic_yeh_becomes_farsi_yeh(self):
        assert normalize("علي") == "علی"
        assert "ي" not in normalize("يي")

    def test_arabic_kaf_becomes_keheh(self):
        assert normalize("كتاب") == "کتاب"

    def test_diacritics_and_tatweel_removed(self):
        assert normalize("کِتاب") == "کتاب"
        assert normalize("باــزار") == "بازار"

    def test_digits_unified_to_persian(self):
        assert normalize("٠١٢") == "۰۱۲"
        assert normalize("۵") == "۵"
        assert normalize("123") == "123"  # ASCII digits untouched

    def test_whitespace_collapsed_and_stripped(self):
        assert normalize("a  b") == "a b"
        assert normalize("  a\t\nb ") == "a b"

    def test_zwnj_interior_kept_edges_stripped(self):
        assert normalize("می" + ZWNJ + "رود") == "می" + ZWNJ + "رود"
        assert normalize(ZWNJ + "ها") == "ها"
        assert normalize("ها" + ZWNJ) == "ها"
        assert normalize("a " + ZWNJ + " b") == "a b"
        assert normalize("a" + ZWNJ + ZWNJ + "b") == "a" + ZWNJ + "b"

    @given(st.text(max_size=60))
    def test_idempotent(self, t):
        once = normalize(t)
        assert normalize(once) == once

    @given(persian_text)
    def test_length_never_grows_on_domain_text(self, t):
        assert len(normalize(t)) <= len(t)

    @given(persian_text)
    def test_output_is_nfc(self, t):
        out = normalize(t)
        assert unicodedata.normalize("NFC", out) == out


class TestTokenize:
    def test_punctuation_offsets(self):
        toks = tokenize("hello, world")
        assert toks == [
            Token("hello", 0, 5, False),
            Token(",", 5, 6, True),
            Token("world", 7, 12, False),
        ]

    def test_empty(self):
        assert tokenize("") == []

    def test_zwnj_does_not_split(self):
        toks = tokenize("می" + ZWNJ + "رود")
        assert len(toks) == 1
        assert toks[0].surface == "می" + ZWNJ + "رود"

    def test_persian_punctuation_is_punct(self):
        toks = tokenize("خوب، بد؟")
        surfaces = [(t.surface, t.is_punct) for t in toks]
        assert surfaces == [("خوب", False), ("،", True), ("بد", False), ("؟", True)]

    @given(persian_text)
    def test_surfaces_are_slices(self, t):
        t = normalize(t)
        for tok in tokenize(t):
            assert t[tok.start : tok.end] == tok.surface
            assert tok.start < tok.end

    @given(persian_text)
    def test_tokens_ordered_and_disjoint(self, t):
        toks = tokenize(normalize(t))
        for a, b in zip(toks, toks[1:]):
            assert a.end <= b.start

    @given(persian_text)
    def test_round_trip(self, t):
        t = normalize(t)
        toks = tokenize(t)
        parts = []
        prev = 0
        for tok in toks:
            if tok.start > prev:
                parts.append(" ")
            parts.append(tok.surface)
            prev = tok.end
        assert "".join(parts) == t


class TestStopwords:
    def test_removal(self):
        toks = [Token("of", 0, 2), Token("the", 3, 6), Token("cat", 7, 10)]
        out = remove_stopwords(toks, Stoplist(frozenset({"of", "the"})))
        assert [t.surface for t in out] == ["cat"]
        assert out[0].start == 7  # offsets untouched

    def test_empty_stoplist_is_identity(self):
        toks = tokenize("a b c")
        assert remove_stopwords(toks, Stoplist(frozenset())) == toks

    def test_all_removed(self):
        toks = tokenize("a b")
        assert remove_stopwords(toks, Stoplist(frozenset({"a", "b"}))) == []

    def test_load_stoplist(self, tmp_path):
        p = tmp_path / "stop.txt"
        p.write_text("# comment\nاز\nعلي\n\n", encoding="utf-8")
        s = load_stoplist(p)
        assert "از" in s
        assert "علی" in s  # normalized on load
        assert len(s) == 2

    def test_default_stoplist_entries_are_normalization_stable(self):
        s = default_stoplist()
        assert len(s) > 20
        for w in s.words:
            assert normalize(w) == w


class TestStem:
    @pytest.mark.parametrize(
        "word,expected",
        [
            ("کتاب" + ZWNJ + "ها", "کتاب"),
            ("کتابها", "کتاب"),
            ("بزرگ" + ZWNJ + "ترین", "بزرگ"),
            ("بزرگتر", "بزرگ"),
            ("مردان", "مرد"),
            # longest match: تان shadows ان at the end of دوستان
            ("دوستان", "دوس"),
            ("کتابشان", "کتاب"),
            ("آب", "آب"),  # never strips below 2 characters
            ("خوب", "خوب"),  # no suffix
        ],
    )
    def test_examples(self, word, expected):
        assert stem(word) == expected

    def test_longest_match_wins(self):
        # ترین strips as a whole, not تر then ین
        assert stem("مهم" + ZWNJ + "ترین") == "مهم"

    @given(st.text(alphabet="ابتکگه" + ZWNJ, min_size=2, max_size=12))
    def test_never_below_two_chars(self, w):
        assert len(stem(w)) >= 2

    @given(st.text(alphabet="ابتکگهمنش" + ZWNJ, min_size=1, max_size=12))
    def test_single_pass_strips_a_listed_suffix(self, w):
        out = stem(w)
        if out != w:
            suffix = w[len(out) :]
            from pabsa.preprocess import _SUFFIX_CANDIDATES

            assert suffix in _SUFFIX_CANDIDATES


def test_feature_tokens_pipeline():
    stop = Stoplist(frozenset({"است"}))
    toks = feature_tokens("کتاب‌ها خوب است؟", stoplist=stop, stemming=True)
    assert toks == ["کتاب", "خوب"]
