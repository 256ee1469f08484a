"""Concept coverage checks and the constraint-satisfaction metrics."""

from __future__ import annotations

import re
from typing import Iterable, Sequence

from bsm.errors import EmptyInput
from bsm.story.stemmer import stem
from bsm.story.types import StoryResult

SOLVE_STAGE = "solve_stage"
MERGE_STAGE = "merge_stage"

_TOKEN_RE = re.compile(r"[a-z0-9]+")


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def concept_present(concept: str, story_text: str) -> bool:
    """True when the story contains the concept in some word form.

    Tokens and concept words are compared by Porter stem; a multi-word
    concept is present only when every one of its words is.
    """
    words = tokenize(concept)
    if not words:
        return False
    story_stems = {stem(token) for token in tokenize(story_text)}
    return all(stem(word) in story_stems for word in words)


def missing_concepts(concepts: Iterable[str], story_text: str) -> tuple[str, ...]:
    return tuple(c for c in concepts if not concept_present(c, story_text))


def constraint_metrics(results: Sequence[StoryResult]) -> tuple[float, float]:
    """(AP, MC) percents: fraction of fully satisfied stories, and mean
    percentage of omitted concepts."""
    if not results:
        raise EmptyInput("no story results")
    all_present = sum(1 for r in results if not r.missing)
    ap = 100.0 * all_present / len(results)
    mc = sum(100.0 * len(r.missing) / len(r.concept_set.concepts) for r in results) / len(results)
    return (ap, mc)


def ap_mc_from_counts(missing_counts: Sequence[int], set_sizes: Sequence[int]) -> tuple[float, float]:
    """Same metrics over bare (missing, total) counts, for non-plan stories."""
    if not missing_counts:
        raise EmptyInput("no story results")
    ap = 100.0 * sum(1 for m in missing_counts if m == 0) / len(missing_counts)
    mc = sum(100.0 * m / n for m, n in zip(missing_counts, set_sizes)) / len(missing_counts)
    return (ap, mc)


def attribute_missing(result: StoryResult) -> dict[str, str]:
    """Stage attribution for every concept missing from the final story.

    solve_stage: the concept never made it into its own sub-story.
    merge_stage: the sub-story had it but the fusion dropped it.
    """
    attribution: dict[str, str] = {}
    for concept in result.missing:
        substory = result.substory_1 if concept in result.plan.subset_1 else result.substory_2
        if concept_present(concept, substory):
            attribution[concept] = MERGE_STAGE
        else:
            attribution[concept] = SOLVE_STAGE
    return attribution
