"""Comparison judges under the shared swap protocol."""

import pytest
from hypothesis import given, strategies as st

from bsm.backends.mock import MockRule
from bsm.errors import ScoreParseFailure, VerdictParseFailure
from bsm.judge.baselines import (
    bsm_sc,
    judge_sample,
    majority_vote,
    plan_and_solve,
    run_with_swap,
    self_consistency,
    zeroshot_absolute,
    zeroshot_relative,
)
from bsm.judge.pipeline import ORDER_AB, ORDER_BA, JudgeConfig, judge_pair
from bsm.judge.types import FinalVerdict, Position
from helpers import SequenceBackend, branch_rule, make_sample, mock_backend, pair_rule

CFG = JudgeConfig()

BRANCH_ONE = "1. Quality: overall quality."


class TestZeroshotRelative:
    def test_verdict_b(self):
        backend = mock_backend(MockRule("Verdict", "Verdict: B"))
        assert zeroshot_relative(make_sample(), backend, CFG).position is Position.SECOND

    def test_tie(self):
        backend = mock_backend(MockRule("Verdict", "Tie"))
        assert zeroshot_relative(make_sample(), backend, CFG).position is Position.TIE

    def test_garbage_raises(self):
        backend = mock_backend(MockRule("Verdict", "interesting thoughts, no conclusion"))
        with pytest.raises(VerdictParseFailure):
            zeroshot_relative(make_sample(), backend, CFG)


class TestZeroshotAbsolute:
    def test_higher_score_wins(self):
        backend = mock_backend(MockRule("scale", "A: 4/5, B: 2/5"))
        verdict = zeroshot_absolute(make_sample(), backend, CFG)
        assert verdict.position is Position.FIRST
        assert (verdict.total_first, verdict.total_second) == (4, 2)

    def test_equal_scores_tie(self):
        backend = mock_backend(MockRule("scale", "A: 3/5, B: 3/5"))
        assert zeroshot_absolute(make_sample(), backend, CFG).position is Position.TIE

    def test_no_scores_raises(self):
        backend = mock_backend(MockRule("scale", "excellent answers"))
        with pytest.raises(ScoreParseFailure):
            zeroshot_absolute(make_sample(), backend, CFG)


class TestPlanAndSolve:
    def test_totals_decide(self):
        completion = (
            "Factors: 1. Relevance 2. Clarity 3. Depth\n"
            "Relevance: A 4/5, B 4/5. Clarity: A 4/5 B 3/5. Depth: A 4/5 B 3/5.\n"
            "Total A: 12, Total B: 10"
        )
        backend = mock_backend(MockRule("single pass", completion))
        verdict = plan_and_solve(make_sample(), backend, CFG)
        assert verdict.position is Position.FIRST
        assert (verdict.total_first, verdict.total_second) == (12, 10)

    def test_single_backend_call_per_order(self):
        calls = []

        class Spy:
            backend_id = "spy"

            def complete(self, request):
                calls.append(request.prompt)
                from bsm.backends.base import CompletionResult

                return CompletionResult("Total A: 9, Total B: 9", "spy")

        run_with_swap(plan_and_solve, make_sample(), Spy(), CFG)
        assert len(calls) == 2  # one completion per encoding order, no parallel solves

    def test_equal_totals_tie(self):
        backend = mock_backend(MockRule("single pass", "Total A: 10, Total B: 10"))
        assert plan_and_solve(make_sample(), backend, CFG).position is Position.TIE

    def test_missing_totals_raise(self):
        backend = mock_backend(MockRule("single pass", "a plan without any numbers"))
        with pytest.raises(ScoreParseFailure):
            plan_and_solve(make_sample(), backend, CFG)


class TestMajorityVote:
    def test_majority(self):
        votes = [Position.FIRST, Position.FIRST, Position.SECOND, Position.TIE, Position.FIRST]
        assert majority_vote(votes) is Position.FIRST

    def test_top_count_tie_resolves_to_tie(self):
        assert majority_vote([Position.FIRST, Position.SECOND]) is Position.TIE

    @given(
        st.lists(st.sampled_from(list(Position)), min_size=1, max_size=15),
        st.randoms(use_true_random=False),
    )
    def test_permutation_invariance(self, votes, rng):
        shuffled = list(votes)
        rng.shuffle(shuffled)
        assert majority_vote(votes) == majority_vote(shuffled)


class TestSelfConsistency:
    def test_votes_majority_over_samples(self):
        texts = ["Verdict: A", "Verdict: A", "Verdict: B"]
        backend = SequenceBackend(texts)
        verdict, dropped = self_consistency(
            make_sample(), backend, JudgeConfig(method="self_consistency", n_samples=3)
        )
        assert verdict.position is Position.FIRST
        assert dropped == 0

    def test_failures_dropped_from_vote(self):
        texts = ["nothing to see", "still nothing", "Verdict: B"]
        backend = SequenceBackend(texts)
        verdict, dropped = self_consistency(
            make_sample(), backend, JudgeConfig(method="self_consistency", n_samples=3)
        )
        assert verdict.position is Position.SECOND
        assert dropped == 2

    def test_all_failures_raise(self):
        backend = SequenceBackend(["junk", "junk"])
        with pytest.raises(VerdictParseFailure):
            self_consistency(
                make_sample(), backend, JudgeConfig(method="self_consistency", n_samples=2)
            )

    def test_distinct_seeds_per_sample(self):
        seeds = []

        class Spy:
            backend_id = "spy"

            def complete(self, request):
                seeds.append(request.decoding.seed)
                from bsm.backends.base import CompletionResult

                return CompletionResult("Verdict: A", "spy")

        self_consistency(
            make_sample(), Spy(), JudgeConfig(method="self_consistency", n_samples=4, random_seed=7)
        )
        assert seeds == [7, 8, 9, 10]
        assert all(s is not None for s in seeds)

    def test_n1_equals_zeroshot_relative_under_mock(self):
        backend = mock_backend(MockRule("Verdict", "Verdict: B"))
        sc_cfg = JudgeConfig(method="self_consistency", n_samples=1)
        sc = run_with_swap(self_consistency, make_sample(), backend, sc_cfg)
        zs = run_with_swap(zeroshot_relative, make_sample(), backend, CFG)
        assert sc.final == zs.final
        assert sc.run_preferences == zs.run_preferences


class TestBsmSc:
    def _sequence_for_run(self, pairs_per_criterion):
        texts = [BRANCH_ONE]
        for pairs in pairs_per_criterion:
            texts.extend(f"A: {a}, B: {b}" for a, b in pairs)
        return texts

    def test_branch_scores_are_means(self):
        samples = [(4, 3), (5, 3), (4, 3), (4, 4), (3, 2)]
        texts = self._sequence_for_run([samples]) + self._sequence_for_run([samples])
        backend = SequenceBackend(texts)
        result = bsm_sc(
            make_sample(), backend, JudgeConfig(method="bsm_sc", n_samples=5)
        )
        branch = result.run1.judgments[0]
        assert (branch.score_first, branch.score_second) == (4.0, 3.0)
        assert branch.n_used == 5

    def test_real_total_tie(self):
        # two criteria with means (4.0, 3.0) and (2.5, 3.5) -> totals (6.5, 6.5)
        two_criteria = "1. Quality: q\n2. Style: s"
        run = [two_criteria, "A: 4, B: 3", "A: 4, B: 3", "A: 2, B: 3", "A: 3, B: 4"]
        backend = SequenceBackend(run + run)
        result = bsm_sc(make_sample(), backend, JudgeConfig(method="bsm_sc", n_samples=2))
        verdict = result.run1.verdict
        assert (verdict.total_first, verdict.total_second) == (6.5, 6.5)
        assert verdict.position is Position.TIE
        assert result.final is FinalVerdict.TIE

    def test_n1_reduces_to_judge_pair(self):
        backend = mock_backend(
            branch_rule(),
            pair_rule("alphatrain", "betabus", "A: 5, B: 2"),
            pair_rule("betabus", "alphatrain", "A: 1, B: 4"),
        )
        pair = judge_pair(make_sample(), CFG, backend)
        sc = bsm_sc(make_sample(), backend, JudgeConfig(method="bsm_sc", n_samples=1))
        assert sc.final == pair.final
        assert sc.run_preferences == pair.run_preferences
        assert sc.run1.verdict.total_first == pair.run1.verdict.total_first
        assert sc.run1.verdict.total_second == pair.run1.verdict.total_second

    def test_branch_with_all_samples_failing_aborts(self):
        run = [BRANCH_ONE, "no numbers", "still none"]
        backend = SequenceBackend(run)
        with pytest.raises(ScoreParseFailure):
            bsm_sc(make_sample(), backend, JudgeConfig(method="bsm_sc", n_samples=2))

    def test_partial_failures_average_over_successes(self):
        run = [BRANCH_ONE, "unusable", "A: 4, B: 2"]
        backend = SequenceBackend(run + run)
        result = bsm_sc(make_sample(), backend, JudgeConfig(method="bsm_sc", n_samples=2))
        branch = result.run1.judgments[0]
        assert (branch.score_first, branch.score_second) == (4.0, 2.0)
        assert branch.n_used == 1


class TestDispatch:
    @pytest.mark.parametrize(
        "method",
        ["bsm", "zeroshot_relative", "zeroshot_absolute", "plan_and_solve",
         "self_consistency", "bsm_sc"],
    )
    def test_all_methods_share_sample_and_output_schema(self, method):
        backend = mock_backend(
            branch_rule(),
            MockRule("Evaluation Factor", "A: 4, B: 2. Verdict: A"),
            MockRule("", "Assistant A: 4/5. Assistant B: 2/5. Verdict: A"),
        )
        config = JudgeConfig(method=method, n_samples=2)
        result = judge_sample(make_sample(), backend, config)
        assert result.final in tuple(FinalVerdict)
        for run in (result.run1, result.run2):
            assert run.verdict.position in tuple(Position)
            assert run.preference in tuple(FinalVerdict)
        assert result.run1.order == ORDER_AB
        assert result.run2.order == ORDER_BA
