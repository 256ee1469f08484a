"""Comparison judges, all run under the same encoding-order swap protocol."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Callable

from bsm.backends.base import Backend, Decoding
from bsm.errors import ScoreOutOfRange, ScoreParseFailure, VerdictParseFailure
from bsm.judge.parsing import parse_scores, parse_verdict
from bsm.judge.pipeline import (
    ORDER_AB,
    ORDER_BA,
    JudgeConfig,
    OrderRun,
    PairResult,
    _request,
    branch_criteria,
    combine_preferences,
    conversation_block,
    judge_pair,
    preference_for,
    solve_criterion,
    sum_scores_verdict,
)
from bsm.judge.types import EvalSample, Position, RunVerdict
from bsm.templates import builtin_template, render_prompt


@dataclass(frozen=True)
class BranchScore:
    """Per-criterion mean score pair produced by sampled solving."""

    criterion_title: str
    score_first: float
    score_second: float
    n_used: int


def zeroshot_relative(
    sample: EvalSample,
    backend: Backend,
    config: JudgeConfig,
    order: tuple[str, str] = ORDER_AB,
    decoding: Decoding | None = None,
) -> RunVerdict:
    """Directly generate a preference verdict in one completion."""
    prompt = render_prompt(
        builtin_template("judge_zeroshot_relative"),
        {"conversation_block": conversation_block(sample, order)},
    )
    request = _request(config, prompt, config.solve_max_new_tokens, decoding or Decoding.greedy())
    result = backend.complete(request)
    return RunVerdict(position=parse_verdict(result.text))


def zeroshot_absolute(
    sample: EvalSample,
    backend: Backend,
    config: JudgeConfig,
    order: tuple[str, str] = ORDER_AB,
) -> RunVerdict:
    """Score both responses once; the higher score wins, equal scores tie."""
    prompt = render_prompt(
        builtin_template("judge_zeroshot_absolute"),
        {
            "conversation_block": conversation_block(sample, order),
            "scale_lo": config.scale.lo,
            "scale_hi": config.scale.hi,
        },
    )
    result = backend.complete(_request(config, prompt, config.solve_max_new_tokens))
    first, second = parse_scores(result.text, config.scale.as_tuple())
    for score in (first, second):
        if not (config.scale.lo <= score <= config.scale.hi):
            raise ScoreOutOfRange(f"score {score} outside scale {config.scale.as_tuple()}")
    return sum_scores_verdict([(first, second)])


def plan_and_solve(
    sample: EvalSample,
    backend: Backend,
    config: JudgeConfig,
    order: tuple[str, str] = ORDER_AB,
) -> RunVerdict:
    """Plan criteria and solve them all in one completion per order.

    The final scores come from the completion's concluding totals, parsed
    with the shared score parser over widened bounds (totals can reach
    scale.hi * max_k).
    """
    prompt = render_prompt(
        builtin_template("judge_plan_solve"),
        {
            "conversation_block": conversation_block(sample, order),
            "max_k": config.max_k,
            "scale_lo": config.scale.lo,
            "scale_hi": config.scale.hi,
        },
    )
    result = backend.complete(_request(config, prompt, config.solve_max_new_tokens))
    bounds = (config.scale.lo, config.scale.hi * config.max_k)
    total_first, total_second = parse_scores(result.text, bounds)
    return sum_scores_verdict([(total_first, total_second)])


def majority_vote(votes: list[Position]) -> Position:
    """Majority class; a tie in the top vote counts resolves to Tie."""
    counts = Counter(votes)
    top = max(counts.values())
    winners = [position for position, count in counts.items() if count == top]
    if len(winners) == 1:
        return winners[0]
    return Position.TIE


def self_consistency(
    sample: EvalSample,
    backend: Backend,
    config: JudgeConfig,
    order: tuple[str, str] = ORDER_AB,
) -> tuple[RunVerdict, int]:
    """Sample n verdicts at the configured temperature and take the majority.

    Unparseable samples are dropped from the vote (and counted); if every
    sample fails, the failure surfaces.
    """
    votes: list[Position] = []
    dropped = 0
    for i in range(config.n_samples):
        decoding = Decoding.sample(config.temperature, config.random_seed + i)
        try:
            verdict = zeroshot_relative(sample, backend, config, order, decoding)
            votes.append(verdict.position)
        except VerdictParseFailure:
            dropped += 1
    if not votes:
        raise VerdictParseFailure(f"all {config.n_samples} sampled verdicts were unparseable")
    return RunVerdict(position=majority_vote(votes)), dropped


def run_with_swap(
    per_order: Callable[[EvalSample, Backend, JudgeConfig, tuple[str, str]], RunVerdict],
    sample: EvalSample,
    backend: Backend,
    config: JudgeConfig,
) -> PairResult:
    """Apply a per-order judge to both encoding orders and combine."""
    runs = []
    for order in (ORDER_AB, ORDER_BA):
        outcome = per_order(sample, backend, config, order)
        dropped = 0
        if isinstance(outcome, tuple):
            outcome, dropped = outcome
        runs.append(
            OrderRun(
                order=order,
                verdict=outcome,
                preference=preference_for(order, outcome.position),
                dropped=dropped,
            )
        )
    final = combine_preferences(runs[0].preference, runs[1].preference)
    return PairResult(final=final, run1=runs[0], run2=runs[1])


def _bsm_sc_order(
    sample: EvalSample,
    backend: Backend,
    config: JudgeConfig,
    order: tuple[str, str],
) -> OrderRun:
    """One encoding-order run with n sampled solves per branch.

    The branch plan is generated greedily as usual; each criterion's score
    pair is the arithmetic mean of its successfully parsed samples. A
    branch whose samples all fail aborts the sample.
    """
    plan = branch_criteria(sample, backend, config.max_k, config)
    branch_scores: list[BranchScore] = []
    for criterion in plan.criteria:
        pairs: list[tuple[int, int]] = []
        last_error: Exception | None = None
        for i in range(config.n_samples):
            decoding = Decoding.sample(config.temperature, config.random_seed + i)
            try:
                judgment = solve_criterion(
                    sample, order, criterion, config.scale, backend, config, decoding
                )
                pairs.append((judgment.score_first, judgment.score_second))
            except (ScoreParseFailure, ScoreOutOfRange) as exc:
                last_error = exc
        if not pairs:
            raise ScoreParseFailure(
                f"all {config.n_samples} samples failed for criterion "
                f"{criterion.title!r}: {last_error}"
            )
        branch_scores.append(
            BranchScore(
                criterion_title=criterion.title,
                score_first=sum(p[0] for p in pairs) / len(pairs),
                score_second=sum(p[1] for p in pairs) / len(pairs),
                n_used=len(pairs),
            )
        )
    verdict = sum_scores_verdict([(b.score_first, b.score_second) for b in branch_scores])
    return OrderRun(
        order=order,
        verdict=verdict,
        preference=preference_for(order, verdict.position),
        judgments=branch_scores,
        plan=plan,
    )


def bsm_sc(sample: EvalSample, backend: Backend, config: JudgeConfig) -> PairResult:
    """Decomposed judging with per-branch self-consistency, then the swap rule."""
    run1 = _bsm_sc_order(sample, backend, config, ORDER_AB)
    run2 = _bsm_sc_order(sample, backend, config, ORDER_BA)
    final = combine_preferences(run1.preference, run2.preference)
    return PairResult(final=final, run1=run1, run2=run2)


def judge_sample(sample: EvalSample, backend: Backend, config: JudgeConfig) -> PairResult:
    """Front door: judge one sample with the configured method."""
    method = config.method
    if method == "bsm":
        return judge_pair(sample, config, backend)
    if method == "bsm_sc":
        return bsm_sc(sample, backend, config)
    if method == "zeroshot_relative":
        return run_with_swap(zeroshot_relative, sample, backend, config)
    if method == "zeroshot_absolute":
        return run_with_swap(zeroshot_absolute, sample, backend, config)
    if method == "plan_and_solve":
        return run_with_swap(plan_and_solve, sample, backend, config)
    if method == "self_consistency":
        return run_with_swap(self_consistency, sample, backend, config)
    raise ValueError(f"unknown method {method!r}")
