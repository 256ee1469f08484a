"""Story generation pipeline: partition concepts, write sub-stories, fuse."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional, Sequence

from bsm.backends.base import Backend, CompletionRequest
from bsm.errors import PlanParseFailure, VerdictParseFailure
from bsm.judge.parsing import parse_verdict
from bsm.judge.types import Position
from bsm.program import CallLog, ProgramTrace, RecordingBackend, run_program
from bsm.story.coverage import attribute_missing, missing_concepts
from bsm.story.types import ConceptSet, StoryPlan, StoryResult
from bsm.templates import builtin_template, render_prompt

_GROUP_1_RE = re.compile(r"(?im)^\s*(?:group|subset|set|part)\s*(?:1|one|a)\b\s*[:\-]\s*(.+)$")
_GROUP_2_RE = re.compile(r"(?im)^\s*(?:group|subset|set|part)\s*(?:2|two|b)\b\s*[:\-]\s*(.+)$")
_TOPIC_RE = re.compile(r"(?im)^\s*(?:story\s+)?topic\s*[:\-]\s*(.+)$")


@dataclass(frozen=True)
class StoryConfig:
    model_id: str = "default"
    branch_max_new_tokens: int = 512
    story_max_new_tokens: int = 1024


def _request(config: StoryConfig, prompt: str, max_new_tokens: int) -> CompletionRequest:
    # all story modules decode greedily
    return CompletionRequest(prompt=prompt, max_new_tokens=max_new_tokens, model_id=config.model_id)


def _normalize_item(item: str) -> str:
    return re.sub(r"\s+", " ", item.strip().strip(".,;:!?\"'()*").lower())


def _split_items(line: str) -> list[str]:
    parts = re.split(r",|\band\b", line)
    return [item for item in (_normalize_item(p) for p in parts) if item]


def parse_story_plan(text: str) -> tuple[list[str], list[str], str]:
    """Pull the two raw concept groups and the topic line out of a completion."""
    group_1 = _GROUP_1_RE.search(text)
    group_2 = _GROUP_2_RE.search(text)
    topic = _TOPIC_RE.search(text)
    if group_1 is None or group_2 is None:
        raise PlanParseFailure("no recognizable concept groups in branch completion")
    if topic is None or not topic.group(1).strip():
        raise PlanParseFailure("no topic line in branch completion")
    return (_split_items(group_1.group(1)), _split_items(group_2.group(1)), topic.group(1).strip())


def repair_partition(
    concepts: Sequence[str], parsed_1: Sequence[str], parsed_2: Sequence[str]
) -> tuple[tuple[str, ...], tuple[str, ...]]:
    """Force the parsed groups into a disjoint, complete, non-empty partition.

    Concepts in both groups stay in the first; concepts in neither are
    appended to the smaller group; if a group still ends up empty, one
    concept migrates over. Concepts are matched case-insensitively and
    hallucinated extras are dropped.
    """
    if len(concepts) < 2:
        raise ValueError("partition repair needs at least two concepts")
    lookup_1 = {_normalize_item(p) for p in parsed_1}
    lookup_2 = {_normalize_item(p) for p in parsed_2}
    subset_1 = [c for c in concepts if c in lookup_1]
    taken = set(subset_1)
    subset_2 = [c for c in concepts if c in lookup_2 and c not in taken]
    placed = taken | set(subset_2)
    for concept in concepts:
        if concept not in placed:
            target = subset_2 if len(subset_2) < len(subset_1) else subset_1
            target.append(concept)
            placed.add(concept)
    if not subset_1:
        subset_1.append(subset_2.pop())
    elif not subset_2:
        subset_2.append(subset_1.pop())
    return (tuple(subset_1), tuple(subset_2))


def branch_concepts(
    concept_set: ConceptSet, backend: Backend, config: StoryConfig
) -> StoryPlan:
    """Ask for a two-group split plus a topic, then repair the partition."""
    if len(concept_set.concepts) < 2:
        raise ValueError("branching needs at least two concepts")
    prompt = render_prompt(
        builtin_template("story_branch"), {"concepts": ", ".join(concept_set.concepts)}
    )
    result = backend.complete(_request(config, prompt, config.branch_max_new_tokens))
    parsed_1, parsed_2, topic = parse_story_plan(result.text)
    subset_1, subset_2 = repair_partition(concept_set.concepts, parsed_1, parsed_2)
    return StoryPlan(subset_1=subset_1, subset_2=subset_2, topic=topic)


def solve_substory(
    subset: Sequence[str], topic: str, backend: Backend, config: StoryConfig
) -> str:
    """Generate one topic-anchored sub-story. Inclusion is measured later,
    never enforced here."""
    if not subset:
        raise ValueError("cannot write a sub-story for an empty concept subset")
    prompt = render_prompt(
        builtin_template("story_solve"), {"concepts": ", ".join(subset), "topic": topic}
    )
    return backend.complete(_request(config, prompt, config.story_max_new_tokens)).text


def merge_stories(
    substory_1: str,
    subset_1: Sequence[str],
    substory_2: str,
    subset_2: Sequence[str],
    backend: Backend,
    config: StoryConfig,
) -> str:
    prompt = render_prompt(
        builtin_template("story_merge"),
        {
            "story_1": substory_1,
            "concepts_1": ", ".join(subset_1),
            "story_2": substory_2,
            "concepts_2": ", ".join(subset_2),
        },
    )
    return backend.complete(_request(config, prompt, config.story_max_new_tokens)).text


def zeroshot_story(concept_set: ConceptSet, backend: Backend, config: StoryConfig) -> str:
    """Single-pass comparison story over the full concept list."""
    prompt = render_prompt(
        builtin_template("story_zeroshot"), {"concepts": ", ".join(concept_set.concepts)}
    )
    return backend.complete(_request(config, prompt, config.story_max_new_tokens)).text


def run_story(
    concept_set: ConceptSet, backend: Backend, config: StoryConfig
) -> tuple[StoryResult, ProgramTrace]:
    """Full branch -> two solves -> merge pass, plus coverage accounting."""
    log = CallLog()
    recorder = RecordingBackend(backend, log)
    state: dict = {}

    def branch_fn(cs: ConceptSet) -> list:
        plan = branch_concepts(cs, recorder, config)
        state["plan"] = plan
        return [(plan.subset_1, plan.topic), (plan.subset_2, plan.topic)]

    def solve_fn(subproblem: tuple) -> str:
        subset, topic = subproblem
        return solve_substory(subset, topic, recorder, config)

    def merge_fn(substories: list) -> str:
        plan = state["plan"]
        return merge_stories(substories[0], plan.subset_1, substories[1], plan.subset_2, recorder, config)

    final_story, trace = run_program(concept_set, branch_fn, solve_fn, merge_fn, call_log=log)
    plan = state["plan"]
    result = StoryResult(
        concept_set=concept_set,
        plan=plan,
        substory_1=trace.solve_records[0].solution,
        substory_2=trace.solve_records[1].solution,
        final_story=final_story,
        missing=missing_concepts(concept_set.concepts, final_story),
    )
    result.stage_attribution = attribute_missing(result)
    return result, trace


@dataclass(frozen=True)
class StoryJudgment:
    """Outcome of a swapped pairwise story-quality comparison."""

    preference: str  # "x" | "y" | "tie"
    failed_orders: int = 0


def _story_order_verdict(
    concepts: Sequence[str],
    story_first: str,
    story_second: str,
    backend: Backend,
    config: StoryConfig,
) -> Position:
    prompt = render_prompt(
        builtin_template("story_judge"),
        {
            "concepts": ", ".join(concepts),
            "story_first": story_first,
            "story_second": story_second,
        },
    )
    result = backend.complete(_request(config, prompt, config.story_max_new_tokens))
    return parse_verdict(result.text)


def judge_story_pair(
    concept_set: ConceptSet,
    story_x: str,
    story_y: str,
    backend: Backend,
    config: Optional[StoryConfig] = None,
) -> StoryJudgment:
    """Compare two stories twice with swapped order; prefer one only when
    both orders agree. An unparseable verdict makes the pair a tie, with
    the failure recorded."""
    config = config or StoryConfig()
    failed = 0
    preferences = []
    for story_first, story_second, first_id, second_id in (
        (story_x, story_y, "x", "y"),
        (story_y, story_x, "y", "x"),
    ):
        try:
            position = _story_order_verdict(
                concept_set.concepts, story_first, story_second, backend, config
            )
        except VerdictParseFailure:
            failed += 1
            preferences.append("tie")
            continue
        if position is Position.FIRST:
            preferences.append(first_id)
        elif position is Position.SECOND:
            preferences.append(second_id)
        else:
            preferences.append("tie")
    if failed:
        return StoryJudgment(preference="tie", failed_orders=failed)
    if preferences[0] == preferences[1] and preferences[0] != "tie":
        return StoryJudgment(preference=preferences[0])
    return StoryJudgment(preference="tie")
