"""Domain types for constrained story generation."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class ConceptSet:
    """Ordered list of lowercase concepts a story must include."""

    id: str
    concepts: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.concepts:
            raise ValueError("concept set must be non-empty")
        seen = set()
        for concept in self.concepts:
            if not concept.strip():
                raise ValueError("concepts must be non-empty")
            if concept != concept.lower():
                raise ValueError(f"concepts must be lowercase: {concept!r}")
            if concept in seen:
                raise ValueError(f"duplicate concept: {concept!r}")
            seen.add(concept)


@dataclass(frozen=True)
class StoryPlan:
    """Branch output: a disjoint two-way concept split plus a shared topic."""

    subset_1: tuple[str, ...]
    subset_2: tuple[str, ...]
    topic: str

    def __post_init__(self) -> None:
        if not self.subset_1 or not self.subset_2:
            raise ValueError("both concept subsets must be non-empty")
        if set(self.subset_1) & set(self.subset_2):
            raise ValueError("concept subsets must be disjoint")
        if not self.topic.strip():
            raise ValueError("story topic must be non-empty")

    @property
    def all_concepts(self) -> tuple[str, ...]:
        return self.subset_1 + self.subset_2


@dataclass
class StoryResult:
    """One full story run: the plan, both sub-stories, the fused story, and
    which concepts went missing at which stage."""

    concept_set: "ConceptSet"
    plan: StoryPlan
    substory_1: str
    substory_2: str
    final_story: str
    missing: tuple[str, ...] = ()
    stage_attribution: dict[str, str] = field(default_factory=dict)
