"""Correctness and consistency metrics for pairwise judging runs.

All functions are pure and operate on in-memory records keyed by
(question_id, turn, model_a, model_b). Human votes whose sample has no
prediction are excluded from denominators and counted as such.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from bsm.errors import EmptyDenominator, EmptySubset
from bsm.judge.types import EvalSample, FinalVerdict

SampleKey = tuple[str, int, str, str]


@dataclass(frozen=True)
class HumanJudgment:
    """One human preference vote on a sample."""

    question_id: str
    turn: int
    model_a: str
    model_b: str
    vote: FinalVerdict
    annotator_id: str

    @property
    def key(self) -> SampleKey:
        return (self.question_id, self.turn, self.model_a, self.model_b)

    @property
    def unique_key(self) -> tuple:
        return (self.question_id, self.turn, self.model_a, self.model_b, self.annotator_id)


@dataclass(frozen=True)
class AgreementResult:
    value: float
    matched: int
    compared: int
    excluded_votes: int = 0  # votes on samples without a prediction
    excluded_tied_samples: int = 0  # majority mode: samples with tied vote counts


def agreement(
    predictions: Mapping[SampleKey, FinalVerdict],
    humans: Sequence[HumanJudgment],
    mode: str = "per_vote",
) -> AgreementResult:
    """Exact-match judge/human agreement over {A, B, tie}.

    per_vote treats every human vote independently; majority collapses a
    sample's votes to the majority class first and drops samples whose top
    vote counts tie.
    """
    if mode == "per_vote":
        matched = 0
        compared = 0
        excluded = 0
        for human in humans:
            prediction = predictions.get(human.key)
            if prediction is None:
                excluded += 1
                continue
            compared += 1
            if prediction == human.vote:
                matched += 1
        if compared == 0:
            raise EmptyDenominator("no human votes with predictions to compare")
        return AgreementResult(matched / compared, matched, compared, excluded_votes=excluded)

    if mode == "majority":
        votes_by_sample: dict[SampleKey, list[FinalVerdict]] = defaultdict(list)
        excluded_votes = 0
        for human in humans:
            if human.key in predictions:
                votes_by_sample[human.key].append(human.vote)
            else:
                excluded_votes += 1
        matched = 0
        compared = 0
        excluded_tied = 0
        for key, votes in votes_by_sample.items():
            counts = Counter(votes)
            top = max(counts.values())
            winners = [verdict for verdict, count in counts.items() if count == top]
            if len(winners) != 1:
                excluded_tied += 1
                continue
            compared += 1
            if predictions[key] == winners[0]:
                matched += 1
        if compared == 0:
            raise EmptyDenominator("no samples with an untied human majority")
        return AgreementResult(
            matched / compared,
            matched,
            compared,
            excluded_votes=excluded_votes,
            excluded_tied_samples=excluded_tied,
        )

    raise ValueError(f"unknown agreement mode {mode!r}")


def position_bias(
    run_records: Mapping[SampleKey, tuple[FinalVerdict, FinalVerdict]],
) -> float:
    """Percent of samples whose two runs point at different responses.

    Tie is its own class, so (A, tie) counts as changed.
    """
    if not run_records:
        raise EmptyDenominator("no run records")
    changed = sum(1 for first, second in run_records.values() if first != second)
    return 100.0 * changed / len(run_records)


@dataclass(frozen=True)
class LengthBiasResult:
    value: float
    numerator: int
    denominator: int


def length_bias(
    predictions: Mapping[SampleKey, FinalVerdict],
    humans: Sequence[HumanJudgment],
    response_lengths: Mapping[SampleKey, tuple[int, int]],
    include_evaluator_ties: bool = False,
) -> LengthBiasResult:
    """How often the judge picks the longer response against a human who
    preferred the strictly shorter one.

    Denominator: human votes choosing the strictly shorter response
    (equal-length pairs excluded). Numerator: those votes where the
    prediction is the longer response; evaluator ties are excluded unless
    include_evaluator_ties, which counts any prediction that is not the
    shorter response.
    """
    numerator = 0
    denominator = 0
    for human in humans:
        prediction = predictions.get(human.key)
        if prediction is None:
            continue
        lengths = response_lengths.get(human.key)
        if lengths is None:
            continue
        len_a, len_b = lengths
        if len_a == len_b:
            continue
        shorter = FinalVerdict.A if len_a < len_b else FinalVerdict.B
        longer = FinalVerdict.B if shorter == FinalVerdict.A else FinalVerdict.A
        if human.vote != shorter:
            continue
        denominator += 1
        if prediction == longer:
            numerator += 1
        elif include_evaluator_ties and prediction == FinalVerdict.TIE:
            numerator += 1
    if denominator == 0:
        raise EmptyDenominator("no votes preferring a strictly shorter response")
    return LengthBiasResult(100.0 * numerator / denominator, numerator, denominator)


@dataclass(frozen=True)
class SelfEnhancementResult:
    subset_keys: tuple[SampleKey, ...]
    agreement: AgreementResult


def self_enhancement_subset(
    samples: Sequence[EvalSample],
    predictions: Mapping[SampleKey, FinalVerdict],
    humans: Sequence[HumanJudgment],
    judge_model_id: str,
) -> SelfEnhancementResult:
    """Per-vote agreement on the samples where the judge authored one response."""
    subset_keys = tuple(
        s.key for s in samples if judge_model_id in (s.model_a, s.model_b)
    )
    if not subset_keys:
        raise EmptySubset(f"no sample involves judge model {judge_model_id!r}")
    allowed = set(subset_keys)
    subset_humans = [h for h in humans if h.key in allowed]
    subset_predictions = {k: v for k, v in predictions.items() if k in allowed}
    result = agreement(subset_predictions, subset_humans, mode="per_vote")
    return SelfEnhancementResult(subset_keys=subset_keys, agreement=result)


# --- report assembly ---

@dataclass
class MetricsSlice:
    """One report row (overall, turn-1, or turn-2); None means the
    denominator was empty for that cell."""

    n_samples: int = 0
    n_votes: int = 0
    n_votes_compared: int = 0
    n_votes_excluded: int = 0
    ag: Optional[float] = None
    ag_majority: Optional[float] = None
    pb: Optional[float] = None
    lb: Optional[float] = None
    lb_including_ties: Optional[float] = None

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class MetricsReport:
    overall: MetricsSlice = field(default_factory=MetricsSlice)
    turn_1: MetricsSlice = field(default_factory=MetricsSlice)
    turn_2: MetricsSlice = field(default_factory=MetricsSlice)
    sb: Optional[dict] = None

    def to_dict(self) -> dict:
        return {
            "overall": self.overall.to_dict(),
            "turn_1": self.turn_1.to_dict(),
            "turn_2": self.turn_2.to_dict(),
            "sb": self.sb,
        }


def _slice_metrics(
    keys: set[SampleKey],
    predictions: Mapping[SampleKey, FinalVerdict],
    runs: Mapping[SampleKey, tuple[FinalVerdict, FinalVerdict]],
    humans: Sequence[HumanJudgment],
    lengths: Mapping[SampleKey, tuple[int, int]],
) -> MetricsSlice:
    sliced = MetricsSlice()
    predictions = {k: v for k, v in predictions.items() if k in keys}
    runs = {k: v for k, v in runs.items() if k in keys}
    humans = [h for h in humans if h.key in keys]
    sliced.n_samples = len(keys)
    sliced.n_votes = len(humans)
    try:
        result = agreement(predictions, humans, mode="per_vote")
        sliced.ag = result.value
        sliced.n_votes_compared = result.compared
        sliced.n_votes_excluded = result.excluded_votes
    except EmptyDenominator:
        sliced.n_votes_excluded = sliced.n_votes
    try:
        sliced.ag_majority = agreement(predictions, humans, mode="majority").value
    except EmptyDenominator:
        pass
    try:
        sliced.pb = position_bias(runs)
    except EmptyDenominator:
        pass
    try:
        sliced.lb = length_bias(predictions, humans, lengths).value
        sliced.lb_including_ties = length_bias(
            predictions, humans, lengths, include_evaluator_ties=True
        ).value
    except EmptyDenominator:
        pass
    return sliced


def build_judge_report(
    samples: Sequence[EvalSample],
    predictions: Mapping[SampleKey, FinalVerdict],
    runs: Mapping[SampleKey, tuple[FinalVerdict, FinalVerdict]],
    humans: Sequence[HumanJudgment],
    judge_model_id: Optional[str] = None,
) -> MetricsReport:
    """Assemble the full report: every metric per slice plus the optional
    self-enhancement block."""
    lengths = response_lengths(samples)
    all_keys = {s.key for s in samples}
    report = MetricsReport(
        overall=_slice_metrics(all_keys, predictions, runs, humans, lengths),
        turn_1=_slice_metrics(
            {k for k in all_keys if k[1] == 1}, predictions, runs, humans, lengths
        ),
        turn_2=_slice_metrics(
            {k for k in all_keys if k[1] == 2}, predictions, runs, humans, lengths
        ),
    )
    if judge_model_id:
        try:
            sb = self_enhancement_subset(samples, predictions, humans, judge_model_id)
            report.sb = {
                "judge_model_id": judge_model_id,
                "subset_size": len(sb.subset_keys),
                "ag": sb.agreement.value,
                "votes_compared": sb.agreement.compared,
            }
        except (EmptySubset, EmptyDenominator):
            report.sb = {"judge_model_id": judge_model_id, "subset_size": 0, "ag": None}
    return report


def response_lengths(samples: Iterable[EvalSample]) -> dict[SampleKey, tuple[int, int]]:
    """Whitespace-token lengths of each sample's judged-turn responses."""
    lengths = {}
    for sample in samples:
        text_a, text_b = sample.judged_responses()
        lengths[sample.key] = (len(text_a.split()), len(text_b.split()))
    return lengths
