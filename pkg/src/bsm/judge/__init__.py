"""Pairwise response judging: criteria-decomposed judge plus the comparison judges."""

from bsm.judge.baselines import (
    bsm_sc,
    judge_sample,
    plan_and_solve,
    run_with_swap,
    self_consistency,
    zeroshot_absolute,
    zeroshot_relative,
)
from bsm.judge.parsing import parse_criteria, parse_scores, parse_verdict
from bsm.judge.pipeline import (
    JudgeConfig,
    OrderRun,
    PairResult,
    branch_criteria,
    combine_preferences,
    judge_pair,
    merge_neural,
    merge_sum,
    preference_for,
    solve_criterion,
    sum_scores_verdict,
)
from bsm.judge.types import (
    MT_BENCH_CATEGORIES,
    BranchPlan,
    Criterion,
    CriterionJudgment,
    EvalSample,
    FinalVerdict,
    Position,
    RunVerdict,
    Scale,
)

__all__ = [
    "BranchPlan",
    "Criterion",
    "CriterionJudgment",
    "EvalSample",
    "FinalVerdict",
    "JudgeConfig",
    "MT_BENCH_CATEGORIES",
    "OrderRun",
    "PairResult",
    "Position",
    "RunVerdict",
    "Scale",
    "branch_criteria",
    "bsm_sc",
    "combine_preferences",
    "judge_pair",
    "judge_sample",
    "merge_neural",
    "merge_sum",
    "parse_criteria",
    "parse_scores",
    "parse_verdict",
    "plan_and_solve",
    "preference_for",
    "run_with_swap",
    "self_consistency",
    "solve_criterion",
    "sum_scores_verdict",
    "zeroshot_absolute",
    "zeroshot_relative",
]
