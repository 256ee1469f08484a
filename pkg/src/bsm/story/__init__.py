"""Constrained story generation: concept partitioning, sub-story fusion, coverage."""

from bsm.story.coverage import attribute_missing, concept_present, constraint_metrics
from bsm.story.pipeline import (
    StoryConfig,
    StoryJudgment,
    branch_concepts,
    judge_story_pair,
    merge_stories,
    parse_story_plan,
    repair_partition,
    run_story,
    solve_substory,
    zeroshot_story,
)
from bsm.story.stemmer import stem
from bsm.story.types import ConceptSet, StoryPlan, StoryResult

__all__ = [
    "ConceptSet",
    "StoryConfig",
    "StoryJudgment",
    "StoryPlan",
    "StoryResult",
    "attribute_missing",
    "branch_concepts",
    "concept_present",
    "constraint_metrics",
    "judge_story_pair",
    "merge_stories",
    "parse_story_plan",
    "repair_partition",
    "run_story",
    "solve_substory",
    "stem",
    "zeroshot_story",
]
