from __future__ import annotations

import pytest

from conceptdag.errors import AnnotationError
from conceptdag.spans import (
    AnnotatedSpan,
    TokenAnnotation,
    expand,
    expand_all,
    find_head,
    validate_token_tree,
)
from conceptdag.textnorm import Lexicon, normalize_text


def span_of(text, heads, count=1, is_input=True):
    forms = text.split()
    assert len(forms) == len(heads)
    tokens = tuple(TokenAnnotation(form=f, head=h) for f, h in zip(forms, heads))
    return AnnotatedSpan(text=text, count=count, is_input=is_input, tokens=tokens)


# "severe pain in the lower right leg": pain is the root, leg hangs under pain.
SEVERE_PAIN = span_of("severe pain in the lower right leg", [1, -1, 6, 6, 6, 6, 1])


class TestFindHead:
    def test_parse_root_wins(self):
        assert find_head(SEVERE_PAIN) == 1

    def test_single_token(self):
        assert find_head(AnnotatedSpan(text="endometriosis")) == 0

    def test_unannotated_fallback_skips_stopwords(self):
        lex = Lexicon(stopwords=frozenset({"of", "the"}))
        span = AnnotatedSpan(text="herniation of the disc")
        assert find_head(span, lex) == 3
        span2 = AnnotatedSpan(text="lumbar disk herniation")
        assert find_head(span2, lex) == 2

    def test_all_stopwords_falls_back_to_last(self):
        lex = Lexicon(stopwords=frozenset({"of", "the"}))
        assert find_head(AnnotatedSpan(text="of the"), lex) == 1

    def test_multiple_roots_rejected(self):
        span = span_of("a b", [-1, -1])
        with pytest.raises(AnnotationError):
            find_head(span)

    def test_cycle_rejected(self):
        tokens = (
            TokenAnnotation(form="a", head=1),
            TokenAnnotation(form="b", head=0),
            TokenAnnotation(form="c", head=-1),
        )
        with pytest.raises(AnnotationError):
            validate_token_tree(tokens)

    def test_out_of_range_head_rejected(self):
        span = span_of("a b", [5, -1])
        with pytest.raises(AnnotationError):
            find_head(span)


class TestExpand:
    def test_paper_example_modification_spans(self):
        derived = expand(SEVERE_PAIN)
        assert derived == {"pain", "severe pain", "pain in the lower right leg"}

    def test_no_modifiers_yields_nothing(self):
        assert expand(AnnotatedSpan(text="fracture", tokens=(TokenAnnotation("fracture", -1),))) == set()

    def test_left_right_adjacent_modifiers(self):
        span = span_of("L h R", [1, -1, 1])
        assert expand(span) == {"h", "L h", "h R"}

    def test_noncontiguous_subsets_discarded(self):
        # both modifiers attach to the final head; {first} alone is not contiguous
        span = span_of("displaced rib fracture", [2, 2, -1])
        assert expand(span) == {"fracture", "rib fracture"}

    def test_unannotated_expands_to_head_word_only(self):
        lex = Lexicon(stopwords=frozenset({"of"}))
        span = AnnotatedSpan(text="lumbar disk herniation")
        assert expand(span, lex) == {"herniation"}

    def test_unannotated_single_token_expands_to_nothing(self):
        assert expand(AnnotatedSpan(text="endometriosis")) == set()

    def test_derived_are_contiguous_and_contain_head(self):
        span = span_of("very severe pain in leg", [1, 2, -1, 4, 2], count=3)
        head_form = span.tokens[2].form
        originals = span.text.split()
        for text in expand(span):
            words = text.split()
            assert head_form in words
            joined = " ".join(originals)
            assert text in joined  # contiguous token substring

    def test_modifier_cap_keeps_linear_subsets(self):
        n = 14
        forms = [f"m{i}" for i in range(n)] + ["head"]
        heads = [n] * n + [-1]
        span = span_of(" ".join(forms), heads)
        derived = expand(span)
        # prefix-by-distance subsets: one per size, minus the full original
        assert len(derived) == n
        assert "head" in derived


class TestExpandAll:
    def test_derived_rib_fracture_added(self):
        spans = [
            span_of("displaced rib fracture", [2, 2, -1], count=3),
            span_of("painful rib fracture", [2, 2, -1], count=2),
        ]
        out = expand_all(spans)
        texts = {s.normalized: s for s in out}
        assert "rib fracture" in texts
        assert not texts["rib fracture"].is_input
        assert texts["rib fracture"].count == 0

    def test_no_modifiers_output_equals_inputs(self):
        spans = [AnnotatedSpan(text="pneumonia"), AnnotatedSpan(text="pneumothorax")]
        assert expand_all(spans) == spans

    def test_shared_derived_text_appears_once(self):
        spans = [
            span_of("severe pain", [1, -1]),
            span_of("chronic pain", [1, -1]),
        ]
        out = expand_all(spans)
        pains = [s for s in out if s.normalized == "pain"]
        assert len(pains) == 1
        assert not pains[0].is_input

    def test_original_wins_over_derived(self):
        spans = [
            span_of("severe pain", [1, -1], count=4),
            AnnotatedSpan(text="pain", count=9),
        ]
        out = expand_all(spans)
        pains = [s for s in out if s.normalized == "pain"]
        assert len(pains) == 1
        assert pains[0].is_input
        assert pains[0].count == 9

    def test_empty_input_rejected(self):
        with pytest.raises(ValueError):
            expand_all([])

    def test_no_duplicate_normalized_texts(self):
        spans = [
            span_of("severe pain", [1, -1]),
            AnnotatedSpan(text="Severe  Pain", count=2),
            span_of("mild pain", [1, -1]),
        ]
        out = expand_all(spans)
        norms = [s.normalized for s in out]
        assert len(norms) == len(set(norms))
        originals = [s for s in out if s.is_input]
        assert len(originals) == 2

    def test_every_original_survives(self):
        spans = [
            span_of("displaced rib fracture", [2, 2, -1]),
            AnnotatedSpan(text="pneumonia"),
        ]
        out = expand_all(spans)
        input_norms = {s.normalized for s in out if s.is_input}
        assert input_norms == {"displaced rib fracture", "pneumonia"}


def test_normalized_property():
    assert AnnotatedSpan(text="  Rib   Fracture ").normalized == "rib fracture"


def test_normalize_agreement():
    assert normalize_text("A  b") == "a b"
