"""Completion parsers: criteria lists, score pairs, verdict tokens."""

import pytest

from bsm.errors import ParseFailure, ScoreParseFailure, VerdictParseFailure
from bsm.judge.parsing import parse_criteria, parse_scores, parse_verdict
from bsm.judge.types import Position


class TestParseCriteria:
    def test_numbered_with_colon(self):
        criteria = parse_criteria("1. Relevance: fit to question\n2. Clarity: readability", 5)
        assert [(c.title, c.description) for c in criteria] == [
            ("Relevance", "fit to question"),
            ("Clarity", "readability"),
        ]

    def test_bullet_with_dash_separator(self):
        criteria = parse_criteria("- Accuracy - factual correctness", 5)
        assert [(c.title, c.description) for c in criteria] == [
            ("Accuracy", "factual correctness")
        ]

    def test_prose_raises(self):
        with pytest.raises(ParseFailure):
            parse_criteria("The criteria are relevance and clarity.", 5)

    def test_cap_keeps_first_k(self):
        text = "\n".join(f"{i}. Crit{i}: d{i}" for i in range(1, 8))
        criteria = parse_criteria(text, 5)
        assert len(criteria) == 5
        assert criteria[0].title == "Crit1"
        assert criteria[-1].title == "Crit5"

    @pytest.mark.parametrize("n", range(1, 11))
    def test_cap_never_exceeded_never_empty(self, n):
        text = "\n".join(f"{i}) Factor{i}: desc" for i in range(1, n + 1))
        criteria = parse_criteria(text, 5)
        assert 1 <= len(criteria) <= 5
        assert len(criteria) == min(n, 5)

    def test_preamble_and_continuation_lines(self):
        text = (
            "Here is my evaluation plan:\n"
            "1. Relevance: Assess how well the response aligns\n"
            "   with the question intent.\n"
            "2. Depth: Level of detail."
        )
        criteria = parse_criteria(text, 5)
        assert criteria[0].description == "Assess how well the response aligns with the question intent."
        assert criteria[1].title == "Depth"

    def test_markdown_bold_titles_stripped(self):
        criteria = parse_criteria("1. **Relevance**: on topic", 5)
        assert criteria[0].title == "Relevance"

    def test_title_without_description(self):
        criteria = parse_criteria("1. Relevance\n2. Clarity", 5)
        assert [(c.title, c.description) for c in criteria] == [
            ("Relevance", ""),
            ("Clarity", ""),
        ]


class TestParseScores:
    def test_labeled_fractions(self):
        assert parse_scores("Assistant A: 4/5. Assistant B: 3/5.", (1, 5)) == (4, 3)

    def test_labeled_plain(self):
        assert parse_scores("A: 3, B: 3", (1, 5)) == (3, 3)

    def test_out_of_scale_values_still_parse(self):
        # the range check lives with the caller; parsing never clamps
        assert parse_scores("A: 9/10, B: 2/10", (1, 5)) == (9, 2)

    def test_prose_with_out_of_marker(self):
        assert parse_scores("I give 7 and 9 out of 10.", (1, 10)) == (7, 9)

    def test_no_scores_raises(self):
        with pytest.raises(ScoreParseFailure):
            parse_scores("Both are good.", (1, 5))

    def test_unlabeled_fractions_in_order(self):
        assert parse_scores("First one merits 4/5 while the other 2/5.", (1, 5)) == (4, 2)

    def test_fraction_with_wrong_denominator_ignored_by_fraction_rule(self):
        # 3/10 fractions don't match a (1,5) scale; falls through to integers
        assert parse_scores("scores: 3/10 and 4/10", (1, 10)) == (3, 4)

    def test_labeled_takes_last_occurrence(self):
        text = (
            "Factor one: Assistant A: 2/5, Assistant B: 5/5.\n"
            "Summing up. Total for Assistant A: 12. Total for Assistant B: 9."
        )
        assert parse_scores(text, (1, 25)) == (12, 9)

    def test_plan_and_solve_totals(self):
        assert parse_scores("plan...\nTotal A: 12, Total B: 10", (1, 25)) == (12, 10)

    def test_standalone_integers_take_last_two(self):
        assert parse_scores("maybe 1, but final: 4 then 5", (1, 5)) == (4, 5)

    def test_assistant_prose_fraction_same_line(self):
        text = "Assistant A scores a solid 4/5 here.\nAssistant B earns 2/5 overall."
        assert parse_scores(text, (1, 5)) == (4, 2)


class TestParseVerdict:
    @pytest.mark.parametrize(
        "text,expected",
        [
            ("Final verdict: A", Position.FIRST),
            ("Verdict: B", Position.SECOND),
            ("verdict is tie", Position.TIE),
            ("Tie", Position.TIE),
            ("It's a tie.", Position.TIE),
            ("A", Position.FIRST),
            ("B.", Position.SECOND),
            ("[[B]]", Position.SECOND),
            ("[[C]]", Position.TIE),
            ("After weighing everything, [[A]] it is.", Position.FIRST),
            ("Assistant B is better overall.", Position.SECOND),
            ("Response A wins on clarity and depth.", Position.FIRST),
            ("Considering all factors, the verdict: assistant B", Position.SECOND),
            ("Final verdict: **A**", Position.FIRST),
        ],
    )
    def test_verdict_tokens(self, text, expected):
        assert parse_verdict(text) == expected

    def test_no_token_raises(self):
        with pytest.raises(VerdictParseFailure):
            parse_verdict("Both responses have merit in different ways.")

    def test_explicit_verdict_beats_tie_word(self):
        assert parse_verdict("It could have been a tie, but verdict: A") == Position.FIRST

    def test_last_explicit_verdict_wins(self):
        text = "Preliminary verdict: A. After the swap check, final verdict: tie"
        assert parse_verdict(text) == Position.TIE
