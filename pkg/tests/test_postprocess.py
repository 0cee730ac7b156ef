import copy

import pytest
from hypothesis import given, strategies as st

from coauthor.backends import Candidate
from coauthor.document import HUMAN, Selection, StoryDocument, word_count
from coauthor.postprocess import (
    MetaRule,
    RuleKind,
    RulesParseError,
    annotate_word_count,
    dedupe,
    detect_meta,
    parse_rules,
    pipeline,
    trim_to_sentence,
)
from coauthor.tasks import continuation_request, infill_request, rewrite_request

DOE_STORY = (
    "An elderly man was sitting alone on a dark path. "
    "Suddenly he saw a whitetail doe. It was beautiful."
)

META_CANDIDATE = "What's the story about? Why does he need the four words? What's the conflict?"

CONTINUATION_CANDIDATES = [
    "The air was cold but he was warm inside. He had come across a clearing, "
    "and in the center of it was an ancient old willow tree.",
    "Advancing towards him, the man could see a small figure, illuminated by "
    "a light from the distance.",
    "The moonlight glistened on the full, rounded moon.",
]

INFILL_CANDIDATES = [
    "a deer appeared from the treeline",
    "an angel appeared, shining brightly",
    "the sun rose the sky turned orange in color",
]


def cand(text: str) -> Candidate:
    return Candidate(text=text, backend_id="test", raw_text=text)


def make_doc(text: str) -> StoryDocument:
    return StoryDocument.empty().replace_range(Selection(0, 0), text, HUMAN)


class TestDetectMeta:
    def test_question_about_the_story_is_flagged(self):
        verdict = detect_meta(META_CANDIDATE, DOE_STORY)
        assert verdict.is_meta
        assert verdict.matched_rules

    @pytest.mark.parametrize("text", CONTINUATION_CANDIDATES + INFILL_CANDIDATES)
    def test_story_text_is_not_flagged(self, text):
        assert not detect_meta(text, DOE_STORY).is_meta

    def test_empty_string_is_not_meta(self):
        assert not detect_meta("", DOE_STORY).is_meta

    @pytest.mark.parametrize(
        "text",
        [
            "I don't understand, could you explain?",
            "I have no idea what this is for but I like where its going.",
            "I don't really get what you are asking..",
        ],
    )
    def test_first_person_commentary_is_flagged(self, text):
        assert detect_meta(text, DOE_STORY).is_meta

    def test_second_person_story_address_is_flagged(self):
        assert detect_meta("Maybe you should explain what your story means.", DOE_STORY).is_meta

    def test_story_word_outside_question_is_fine(self):
        assert not detect_meta("He told her a story about the sea.", DOE_STORY).is_meta

    def test_custom_rules_override_defaults(self):
        rules = (MetaRule("only-zebra", RuleKind.SUBSTRING, "zebra"),)
        assert detect_meta("a zebra walked by", DOE_STORY, rules).matched_rules == ("only-zebra",)
        assert not detect_meta(META_CANDIDATE, DOE_STORY, rules).is_meta


class TestRulesFile:
    def test_parse_rules(self):
        rules = parse_rules(
            "# comment\n"
            "RULE ask-story: regex-lite story?\n"
            "RULE no-idea: substring I have no idea\n"
        )
        assert rules == (
            MetaRule("ask-story", RuleKind.REGEX_LITE, "story?"),
            MetaRule("no-idea", RuleKind.SUBSTRING, "I have no idea"),
        )

    def test_malformed_line_names_position(self):
        with pytest.raises(RulesParseError, match="line 2"):
            parse_rules("RULE a: substring x\nnot a rule\n")


class TestDedupe:
    def test_case_fold_duplicate_removed(self):
        out = dedupe([cand("A."), cand("a."), cand("B.")])
        assert [c.text for c in out] == ["A.", "B."]

    def test_distinct_list_unchanged(self):
        items = [cand("one"), cand("two"), cand("three")]
        assert dedupe(items) == items

    def test_whitespace_normalized(self):
        out = dedupe([cand("a  b"), cand("a b")])
        assert len(out) == 1

    @given(st.lists(st.text(alphabet="ab B ", max_size=6), max_size=12))
    def test_matches_first_occurrence_oracle(self, texts):
        out = dedupe([cand(t) for t in texts])
        seen = set()
        expected = []
        for t in texts:
            key = " ".join(t.split()).casefold()
            if key not in seen:
                seen.add(key)
                expected.append(t)
        assert [c.text for c in out] == expected


class TestTrimToSentence:
    def test_trailing_fragment_dropped(self):
        text = (
            "He wasn't certain it was entirely safe to be walking the streets, "
            "given the amount of trouble that had happened in the past while here. "
            "A man with shaggy dark hair stood near the edge of the road. "
            "The elderly man stared at him for a"
        )
        trimmed, was_trimmed = trim_to_sentence(text)
        assert was_trimmed
        assert trimmed.endswith("near the edge of the road.")

    def test_complete_sentence_unchanged(self):
        text = "The air was cold but he was warm inside."
        assert trim_to_sentence(text) == (text, False)

    def test_no_terminator_at_all(self):
        assert trim_to_sentence("no terminator at all") == ("no terminator at all", False)

    def test_closing_quote_after_terminator_counts(self):
        text = 'He said "stop." and left? "Yes."'
        assert trim_to_sentence(text) == (text, False)

    def test_trims_after_quoted_sentence(self):
        text = '"May I see it?" he asked. "I'
        trimmed, was_trimmed = trim_to_sentence(text)
        assert was_trimmed
        assert trimmed == '"May I see it?" he asked.'

    @given(st.text(alphabet="ab. !?\"'x", max_size=40))
    def test_result_is_prefix(self, text):
        trimmed, _ = trim_to_sentence(text)
        assert text.startswith(trimmed)


class TestAnnotateWordCount:
    @pytest.mark.parametrize(
        "text,target,delta",
        [
            ("a deer appeared from the treeline", 4, 2),
            ("an angel appeared, shining brightly", 5, 0),
            ("", 4, -4),
        ],
    )
    def test_delta(self, text, target, delta):
        out = annotate_word_count(Candidate(text=text, backend_id="t", raw_text=text), target)
        assert out.annotations["word_count_delta"] == delta

    @given(st.text(alphabet="ab \n", max_size=30), st.integers(1, 9))
    def test_matches_whitespace_run_oracle(self, text, target):
        out = annotate_word_count(Candidate(text=text, backend_id="t", raw_text=text), target)
        assert out.annotations["word_count_delta"] == word_count(text) - target


class TestPipeline:
    def infill_req(self, n_words=4):
        doc = make_doc(DOE_STORY)
        start = DOE_STORY.index("he saw a whitetail doe")
        return infill_request(doc, Selection(start, start + 22), n_words=n_words)

    def test_empty_candidates_dropped(self):
        out = pipeline([cand("one."), cand("   "), cand("two.")], self.infill_req())
        assert [c.text for c in out] == ["one.", "two."]

    def test_meta_candidate_retained_and_flagged(self):
        out = pipeline([cand("There was a blinding flash of light."), cand(META_CANDIDATE)], self.infill_req())
        assert len(out) == 2
        assert not out[0].annotations["meta_text"]
        assert out[1].annotations["meta_text"]
        assert out[1].text == META_CANDIDATE

    def test_word_count_only_for_infill(self):
        infill_out = pipeline([cand("a deer appeared from the treeline")], self.infill_req(4))
        assert infill_out[0].annotations["word_count_delta"] == 2
        rewrite = rewrite_request(make_doc(DOE_STORY), None, "noir")
        rewrite_out = pipeline([cand("a deer appeared from the treeline")], rewrite)
        assert "word_count_delta" not in rewrite_out[0].annotations

    def test_trimming_only_for_continuation(self):
        dangling = "He walked on. The elderly man stared at him for a"
        cont = continuation_request(make_doc(DOE_STORY))
        cont_out = pipeline([cand(dangling)], cont)
        assert cont_out[0].text == "He walked on."
        assert cont_out[0].annotations["trimmed"]
        infill_out = pipeline([cand(dangling)], self.infill_req())
        assert infill_out[0].text == dangling
        assert not infill_out[0].annotations["trimmed"]

    def test_strip_whitespace(self):
        out = pipeline([cand("  padded.  ")], self.infill_req())
        assert out[0].text == "padded."
        assert out[0].raw_text == "  padded.  "

    def test_order_preserved_and_dedupe_applied(self):
        out = pipeline([cand("B."), cand("A."), cand("b."), cand("C.")], self.infill_req())
        assert [c.text for c in out] == ["B.", "A.", "C."]

    def test_idempotent(self):
        raw = [
            cand("  The night was long. And the morning was "),
            cand(META_CANDIDATE),
            cand("The night was long."),
            cand(""),
        ]
        cont = continuation_request(make_doc(DOE_STORY))
        once = pipeline(copy.deepcopy(raw), cont)
        twice = pipeline(copy.deepcopy(once), cont)
        assert twice == once

    def test_outputs_are_trimmed_substrings_of_raw(self):
        raw = [cand("  one. two "), cand("three.")]
        out = pipeline(raw, continuation_request(make_doc(DOE_STORY)))
        for c in out:
            assert c.text in c.raw_text
