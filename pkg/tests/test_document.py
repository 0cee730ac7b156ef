import pytest
from hypothesis import given, strategies as st

from coauthor.document import (
    HUMAN,
    AuthorKind,
    Provenance,
    RangeError,
    Selection,
    Span,
    StoryDocument,
    model_provenance,
    word_count,
)


def doc_from(*parts: tuple[str, Provenance]) -> StoryDocument:
    doc = StoryDocument.empty()
    for text, prov in parts:
        doc = doc.replace_range(Selection(doc.length, doc.length), text, prov)
    return doc


class TestProvenance:
    def test_model_requires_request_id(self):
        with pytest.raises(ValueError):
            Provenance(AuthorKind.MODEL)

    def test_human_forbids_request_id(self):
        with pytest.raises(ValueError):
            Provenance(AuthorKind.HUMAN, "req-1")

    def test_model_provenance_helper(self):
        prov = model_provenance("req-1")
        assert prov.kind is AuthorKind.MODEL
        assert prov.request_id == "req-1"


class TestSelection:
    def test_caret(self):
        assert Selection(3, 3).is_caret

    def test_negative_start_rejected(self):
        with pytest.raises(RangeError):
            Selection(-1, 0)

    def test_end_before_start_rejected(self):
        with pytest.raises(RangeError):
            Selection(4, 2)


class TestFullText:
    def test_concatenates_spans(self):
        doc = doc_from(("An elderly man", HUMAN), (" was sitting alone.", model_provenance("r1")))
        assert doc.full_text() == "An elderly man was sitting alone."

    def test_empty_document(self):
        assert StoryDocument.empty().full_text() == ""


class TestSelectedText:
    def test_substring(self):
        doc = doc_from(("Suddenly he saw a whitetail doe. It was beautiful.", HUMAN))
        sel = Selection(9, 9 + len("he saw a whitetail doe"))
        assert doc.selected_text(sel) == "he saw a whitetail doe"

    def test_caret_is_empty(self):
        doc = doc_from(("hello", HUMAN))
        assert doc.selected_text(Selection(2, 2)) == ""

    def test_out_of_bounds(self):
        doc = doc_from(("hello", HUMAN))
        with pytest.raises(RangeError):
            doc.selected_text(Selection(0, 6))


class TestReplaceRange:
    def test_replace_and_undo_restores_text(self):
        doc = doc_from(("The knight drew a sword from the stone.", HUMAN))
        start = doc.full_text().index("a sword")
        sel = Selection(start, start + len("a sword"))
        edited = doc.replace_range(sel, "a talking sword", HUMAN)
        back = edited.replace_range(Selection(start, start + len("a talking sword")), "a sword", HUMAN)
        assert back.full_text() == doc.full_text()

    def test_caret_insert_creates_single_model_span(self):
        doc = doc_from(("one two three", HUMAN))
        out = doc.replace_range(Selection(4, 4), "NEW ", model_provenance("r9"))
        model_spans = [s for s in out.spans if s.provenance.kind is AuthorKind.MODEL]
        assert len(model_spans) == 1
        assert model_spans[0].text == "NEW "
        assert out.full_text() == "one NEW two three"

    def test_replace_all_with_empty_annihilates(self):
        doc = doc_from(("some text", HUMAN))
        out = doc.replace_range(Selection(0, doc.length), "", HUMAN)
        assert out.full_text() == ""
        assert out.spans == ()

    def test_version_increments(self):
        doc = StoryDocument.empty()
        d1 = doc.replace_range(Selection(0, 0), "a", HUMAN)
        d2 = d1.replace_range(Selection(0, 0), "b", HUMAN)
        assert (doc.version, d1.version, d2.version) == (0, 1, 2)

    def test_adjacent_same_provenance_merges(self):
        doc = doc_from(("ab", HUMAN), ("cd", HUMAN))
        assert len(doc.spans) == 1

    def test_different_requests_stay_separate(self):
        doc = doc_from(("ab", model_provenance("r1")), ("cd", model_provenance("r2")))
        assert len(doc.spans) == 2

    def test_out_of_bounds(self):
        doc = doc_from(("hello", HUMAN))
        with pytest.raises(RangeError):
            doc.replace_range(Selection(3, 99), "x", HUMAN)


class TestWordCount:
    @pytest.mark.parametrize(
        "text,count",
        [
            ("he saw a whitetail doe", 5),
            ("", 0),
            ("  two   words  ", 2),
            ("doe.", 1),
            ("a deer appeared from the treeline", 6),
            ("an angel appeared, shining brightly", 5),
        ],
    )
    def test_counts_whitespace_runs(self, text, count):
        assert word_count(text) == count


# -- randomized properties against a flat-string oracle ----------------------

# small alphabet with multi-byte code points to keep offsets honest
_texts = st.text(alphabet="ab é💡 .\n", max_size=20)


@st.composite
def edit_scripts(draw):
    n_ops = draw(st.integers(min_value=0, max_value=12))
    return [
        (draw(st.floats(0, 1)), draw(st.floats(0, 1)), draw(_texts), draw(st.booleans()))
        for _ in range(n_ops)
    ]


def run_script(script):
    doc = StoryDocument.empty()
    shadow = ""
    req_counter = 0
    for f_start, f_end, text, as_model in script:
        length = doc.length
        a = round(f_start * length)
        b = round(f_end * length)
        start, end = min(a, b), max(a, b)
        if as_model and text:
            req_counter += 1
            prov = model_provenance(f"r{req_counter}")
        else:
            prov = HUMAN
        doc = doc.replace_range(Selection(start, end), text, prov)
        shadow = shadow[:start] + text + shadow[end:]
    return doc, shadow


@given(edit_scripts())
def test_full_text_matches_flat_string_oracle(script):
    doc, shadow = run_script(script)
    assert doc.full_text() == shadow


@given(edit_scripts(), st.floats(0, 1), st.floats(0, 1))
def test_selected_text_matches_substring_oracle(script, f_start, f_end):
    doc, shadow = run_script(script)
    a = round(f_start * doc.length)
    b = round(f_end * doc.length)
    start, end = min(a, b), max(a, b)
    assert doc.selected_text(Selection(start, end)) == shadow[start:end]


@given(edit_scripts())
def test_partition_invariant(script):
    doc, _ = run_script(script)
    assert sum(len(s.text) for s in doc.spans) == doc.length
    assert all(s.text for s in doc.spans)


@given(edit_scripts())
def test_canonical_form_has_no_adjacent_equal_provenance(script):
    doc, _ = run_script(script)
    for left, right in zip(doc.spans, doc.spans[1:]):
        assert left.provenance != right.provenance


@given(edit_scripts(), _texts)
def test_provenance_conservation_outside_replaced_range(script, inserted):
    doc, _ = run_script(script)
    length = doc.length
    start, end = (length // 3, 2 * length // 3)

    def char_provs(d):
        out = []
        for span in d.spans:
            out.extend([span.provenance] * len(span.text))
        return out

    before = char_provs(doc)
    after = char_provs(doc.replace_range(Selection(start, end), inserted, model_provenance("rx")))
    assert after[:start] == before[:start]
    tail = len(before) - end
    assert after[len(after) - tail :] == (before[end:] if tail else [])
