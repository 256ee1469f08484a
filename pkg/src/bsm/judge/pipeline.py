"""Criteria-decomposed pairwise judging with the encoding-order swap protocol.

One sample is judged by two independent runs: the first encodes response A
first, the second encodes B first. Within a run, the judge branches into
evaluation criteria, scores the pair per criterion, and merges the scores.
A response wins only when both runs prefer it; everything else is a tie.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from bsm.backends.base import Backend, CompletionRequest, Decoding, GREEDY
from bsm.errors import EmptyJudgments
from bsm.judge.parsing import parse_criteria, parse_scores, parse_verdict
from bsm.judge.types import (
    BranchPlan,
    Criterion,
    CriterionJudgment,
    EvalSample,
    FinalVerdict,
    Position,
    RunVerdict,
    Scale,
)
from bsm.program import CallLog, ProgramTrace, RecordingBackend, run_program
from bsm.templates import builtin_template, render_prompt

METHODS = (
    "bsm",
    "zeroshot_relative",
    "zeroshot_absolute",
    "plan_and_solve",
    "self_consistency",
    "bsm_sc",
)

ORDER_AB = ("A", "B")
ORDER_BA = ("B", "A")


@dataclass(frozen=True)
class JudgeConfig:
    """Knobs shared by the decomposed judge and the comparison judges.

    n_samples and temperature apply only to the sampling methods
    (self_consistency, bsm_sc); everything else decodes greedily.
    """

    method: str = "bsm"
    scale: Scale = field(default_factory=Scale)
    max_k: int = 5
    merge: str = "sum"
    n_samples: int = 5
    temperature: float = 0.7
    share_branch_plan: bool = False
    model_id: str = "default"
    random_seed: int = 0
    solve_parallelism: int = 1
    branch_max_new_tokens: int = 512
    solve_max_new_tokens: int = 1024
    merge_max_new_tokens: int = 1024

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.merge not in ("sum", "neural"):
            raise ValueError(f"unknown merge variant {self.merge!r}")
        if self.max_k < 1:
            raise ValueError("max_k must be >= 1")
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        if not (0.0 < self.temperature <= 2.0):
            raise ValueError("temperature must be in (0, 2]")


@dataclass
class OrderRun:
    """Everything produced by one encoding-order run."""

    order: tuple[str, str]
    verdict: RunVerdict
    preference: FinalVerdict
    judgments: list = field(default_factory=list)
    plan: Optional[BranchPlan] = None
    trace: Optional[ProgramTrace] = None
    dropped: int = 0  # unparseable votes discarded by sampling methods


@dataclass
class PairResult:
    """Final verdict for a sample plus both order runs."""

    final: FinalVerdict
    run1: OrderRun
    run2: OrderRun

    @property
    def traces(self) -> tuple[Optional[ProgramTrace], Optional[ProgramTrace]]:
        return (self.run1.trace, self.run2.trace)

    @property
    def run_preferences(self) -> tuple[FinalVerdict, FinalVerdict]:
        return (self.run1.preference, self.run2.preference)


def preference_for(order: tuple[str, str], position: Position) -> FinalVerdict:
    """Map a positional verdict back to the response identity it points at."""
    if position is Position.TIE:
        return FinalVerdict.TIE
    identity = order[0] if position is Position.FIRST else order[1]
    return FinalVerdict.A if identity == "A" else FinalVerdict.B


def combine_preferences(first: FinalVerdict, second: FinalVerdict) -> FinalVerdict:
    """Consistency rule over the two runs: agreement picks a winner, else tie."""
    if first == second:
        return first
    return FinalVerdict.TIE


def _request(
    config: JudgeConfig, prompt: str, max_new_tokens: int, decoding: Decoding = GREEDY
) -> CompletionRequest:
    return CompletionRequest(
        prompt=prompt,
        decoding=decoding,
        max_new_tokens=max_new_tokens,
        model_id=config.model_id,
    )


def reference_block(sample: EvalSample) -> str:
    if not sample.reference_answer:
        return ""
    return f"\n[Reference Answer]\n{sample.reference_answer}\n"


def conversation_block(sample: EvalSample, order: tuple[str, str]) -> str:
    """Question/response block for single-prompt judges, in encoding order."""
    first, second = order
    r1_first, r2_first = sample.responses_for(first)
    r1_second, r2_second = sample.responses_for(second)
    if sample.turn == 1:
        block = (
            f"[User Question]\n{sample.question_1}\n\n"
            f"[Assistant A's Response]\n{r1_first}\n\n"
            f"[Assistant B's Response]\n{r1_second}"
        )
    else:
        block = (
            f"[First User Question]\n{sample.question_1}\n\n"
            f"[Assistant A's First Response]\n{r1_first}\n\n"
            f"[Assistant B's First Response]\n{r1_second}\n\n"
            f"[Follow-up User Question]\n{sample.question_2}\n\n"
            f"[Assistant A's Follow-up Response]\n{r2_first}\n\n"
            f"[Assistant B's Follow-up Response]\n{r2_second}"
        )
    return block + reference_block(sample)


def question_block(sample: EvalSample) -> str:
    if sample.turn == 1:
        return f"[User Question]\n{sample.question_1}"
    return (
        f"[First User Question]\n{sample.question_1}\n\n"
        f"[Follow-up User Question]\n{sample.question_2}"
    )


def branch_criteria(
    sample: EvalSample, backend: Backend, max_k: int, config: JudgeConfig
) -> BranchPlan:
    """Generate the evaluation plan. Conditions on the question(s) only --
    the branch module never sees any response."""
    if sample.turn == 1:
        template = builtin_template("judge_branch_turn1")
        bindings = {"question1": sample.question_1, "max_k": max_k}
    else:
        template = builtin_template("judge_branch_turn2")
        bindings = {
            "question1": sample.question_1,
            "question2": sample.question_2,
            "max_k": max_k,
        }
    prompt = render_prompt(template, bindings)
    result = backend.complete(_request(config, prompt, config.branch_max_new_tokens))
    criteria = parse_criteria(result.text, max_k)
    return BranchPlan(criteria=tuple(criteria), raw_text=result.text)


def solve_criterion(
    sample: EvalSample,
    order: tuple[str, str],
    criterion: Criterion,
    scale: Scale,
    backend: Backend,
    config: JudgeConfig,
    decoding: Decoding = GREEDY,
) -> CriterionJudgment:
    """Score both responses on one criterion, in the given encoding order.

    The in-prompt labels A/B always refer to the first/second encoded
    response; out-of-scale scores surface as errors, never clamped.
    """
    first, second = order
    if sample.turn == 1:
        template = builtin_template("judge_solve_turn1")
        bindings = {
            "question1": sample.question_1,
            "response_first": sample.responses_for(first)[0],
            "response_second": sample.responses_for(second)[0],
        }
    else:
        template = builtin_template("judge_solve_turn2")
        bindings = {
            "question1": sample.question_1,
            "response1_first": sample.responses_for(first)[0],
            "response1_second": sample.responses_for(second)[0],
            "question2": sample.question_2,
            "response2_first": sample.responses_for(first)[1],
            "response2_second": sample.responses_for(second)[1],
        }
    bindings.update(
        reference_block=reference_block(sample),
        criterion_title=criterion.title,
        criterion_description=criterion.description,
        scale_lo=scale.lo,
        scale_hi=scale.hi,
    )
    prompt = render_prompt(template, bindings)
    result = backend.complete(_request(config, prompt, config.solve_max_new_tokens, decoding))
    score_first, score_second = parse_scores(result.text, scale.as_tuple())
    return CriterionJudgment(
        criterion=criterion,
        score_first=score_first,
        score_second=score_second,
        explanation=result.text,
        scale=scale,
    )


def sum_scores_verdict(pairs: list[tuple[float, float]]) -> RunVerdict:
    """Sum (first, second) score pairs and compare the totals."""
    if not pairs:
        raise EmptyJudgments("cannot merge an empty judgment list")
    total_first = sum(p[0] for p in pairs)
    total_second = sum(p[1] for p in pairs)
    if total_first > total_second:
        position = Position.FIRST
    elif total_second > total_first:
        position = Position.SECOND
    else:
        position = Position.TIE
    return RunVerdict(position=position, total_first=total_first, total_second=total_second)


def merge_sum(judgments: list[CriterionJudgment]) -> RunVerdict:
    """Non-neural merge: sum the scores across all branches."""
    if not judgments:
        raise EmptyJudgments("cannot merge an empty judgment list")
    scales = {j.scale for j in judgments}
    if len(scales) > 1:
        raise ValueError("judgments mix scales")
    return sum_scores_verdict([(j.score_first, j.score_second) for j in judgments])


def merge_neural(
    sample: EvalSample,
    plan: BranchPlan,
    judgments: list[CriterionJudgment],
    backend: Backend,
    config: JudgeConfig,
) -> RunVerdict:
    """Neural merge: the model reads the per-criterion evaluations and emits
    the verdict token itself; aggregation strategy is model-decided."""
    if not judgments:
        raise EmptyJudgments("cannot merge an empty judgment list")
    del plan  # criteria already embedded in the judgments
    lines = []
    for i, judgment in enumerate(judgments, start=1):
        hi = judgment.scale.hi
        lines.append(
            f"{i}. {judgment.criterion.title}: "
            f"Assistant A: {judgment.score_first}/{hi}, "
            f"Assistant B: {judgment.score_second}/{hi}\n"
            f"{judgment.explanation}"
        )
    prompt = render_prompt(
        builtin_template("judge_merge"),
        {"question_block": question_block(sample), "evaluations": "\n\n".join(lines)},
    )
    result = backend.complete(_request(config, prompt, config.merge_max_new_tokens))
    return RunVerdict(position=parse_verdict(result.text))


def _run_order(
    sample: EvalSample,
    order: tuple[str, str],
    backend: Backend,
    config: JudgeConfig,
    plan: Optional[BranchPlan] = None,
) -> OrderRun:
    """One full branch->solve->merge run for a single encoding order."""
    log = CallLog()
    recorder = RecordingBackend(backend, log)
    state: dict = {"plan": plan}

    def branch_fn(s: EvalSample) -> list[Criterion]:
        if state["plan"] is None:
            state["plan"] = branch_criteria(s, recorder, config.max_k, config)
        return list(state["plan"].criteria)

    def solve_fn(criterion: Criterion) -> CriterionJudgment:
        return solve_criterion(sample, order, criterion, config.scale, recorder, config)

    def merge_fn(judgments: list[CriterionJudgment]) -> RunVerdict:
        if config.merge == "neural":
            return merge_neural(sample, state["plan"], judgments, recorder, config)
        return merge_sum(judgments)

    verdict, trace = run_program(
        sample,
        branch_fn,
        solve_fn,
        merge_fn,
        max_branches=config.max_k,
        parallelism=config.solve_parallelism,
        call_log=log,
    )
    return OrderRun(
        order=order,
        verdict=verdict,
        preference=preference_for(order, verdict.position),
        judgments=[record.solution for record in trace.solve_records],
        plan=state["plan"],
        trace=trace,
    )


def judge_pair(sample: EvalSample, config: JudgeConfig, backend: Backend) -> PairResult:
    """Judge a sample with two swapped runs and the consistency rule.

    Each run re-branches by default; share_branch_plan reuses run 1's plan
    for run 2 (an ablation switch, off in the standard protocol).
    """
    run1 = _run_order(sample, ORDER_AB, backend, config)
    shared = run1.plan if config.share_branch_plan else None
    run2 = _run_order(sample, ORDER_BA, backend, config, plan=shared)
    final = combine_preferences(run1.preference, run2.preference)
    return PairResult(final=final, run1=run1, run2=run2)
