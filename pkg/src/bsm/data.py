"""Record-file (JSONL) ingestion for both tasks.

Judge data comes as three files -- questions, per-model responses, and
human votes -- joined into samples of every response pair per question
turn. Story data is one concept list per line.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path

from bsm.errors import JoinError, SchemaError
from bsm.judge.types import MT_BENCH_CATEGORIES, EvalSample, FinalVerdict
from bsm.metrics import HumanJudgment
from bsm.story.types import ConceptSet

_WINNER_TOKENS = {
    "model_a": FinalVerdict.A,
    "model_b": FinalVerdict.B,
    "a": FinalVerdict.A,
    "b": FinalVerdict.B,
    "tie": FinalVerdict.TIE,
}


def _read_jsonl(path: str | Path) -> list[tuple[int, dict]]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(str(path), line_no, f"invalid JSON: {exc}") from exc
            if not isinstance(record, dict):
                raise SchemaError(str(path), line_no, "record is not an object")
            records.append((line_no, record))
    return records


def _require(record: dict, name: str, path: str, line_no: int):
    if name not in record:
        raise SchemaError(path, line_no, f"missing field {name!r}")
    return record[name]


@dataclass
class EvalDataset:
    samples: list[EvalSample]
    humans: list[HumanJudgment]
    category_counts: dict[str, int] = field(default_factory=dict)
    n_questions: int = 0
    models: tuple[str, ...] = ()


@dataclass
class _Question:
    question_id: str
    category: str
    turns: list[str]
    reference: list[str]


def _load_questions(path: str | Path) -> dict[str, _Question]:
    questions: dict[str, _Question] = {}
    for line_no, record in _read_jsonl(path):
        question_id = str(_require(record, "question_id", str(path), line_no))
        category = _require(record, "category", str(path), line_no)
        if category not in MT_BENCH_CATEGORIES:
            raise SchemaError(str(path), line_no, f"unknown category {category!r}")
        turns = _require(record, "turns", str(path), line_no)
        if not isinstance(turns, list) or not (1 <= len(turns) <= 2):
            raise SchemaError(str(path), line_no, "turns must be a list of 1 or 2 questions")
        if any(not isinstance(t, str) or not t.strip() for t in turns):
            raise SchemaError(str(path), line_no, "every turn must be non-empty text")
        reference = record.get("reference", [])
        if reference and (
            not isinstance(reference, list) or any(not isinstance(r, str) for r in reference)
        ):
            raise SchemaError(str(path), line_no, "reference must be a list of strings")
        if question_id in questions:
            raise SchemaError(str(path), line_no, f"duplicate question_id {question_id!r}")
        questions[question_id] = _Question(question_id, category, list(turns), list(reference))
    return questions


def _load_responses(
    path: str | Path, questions: dict[str, _Question]
) -> dict[str, dict[str, list[str]]]:
    responses: dict[str, dict[str, list[str]]] = {qid: {} for qid in questions}
    for line_no, record in _read_jsonl(path):
        question_id = str(_require(record, "question_id", str(path), line_no))
        model_id = _require(record, "model_id", str(path), line_no)
        turns = _require(record, "turns", str(path), line_no)
        if question_id not in questions:
            raise JoinError(
                f"{path}:{line_no}: response references unknown question {question_id!r}"
            )
        expected = len(questions[question_id].turns)
        if not isinstance(turns, list) or len(turns) < expected:
            raise SchemaError(
                str(path), line_no,
                f"response needs {expected} turns for question {question_id!r}",
            )
        if any(not isinstance(t, str) for t in turns):
            raise SchemaError(str(path), line_no, "every response turn must be text")
        if model_id in responses[question_id]:
            raise SchemaError(
                str(path), line_no,
                f"duplicate response for question {question_id!r} model {model_id!r}",
            )
        responses[question_id][model_id] = list(turns)
    return responses


def _load_humans(
    path: str | Path,
    questions: dict[str, _Question],
    responses: dict[str, dict[str, list[str]]],
) -> list[HumanJudgment]:
    humans: list[HumanJudgment] = []
    seen: set[tuple] = set()
    for line_no, record in _read_jsonl(path):
        question_id = str(_require(record, "question_id", str(path), line_no))
        if question_id not in questions:
            raise JoinError(
                f"{path}:{line_no}: human vote references unknown question {question_id!r}"
            )
        turn = _require(record, "turn", str(path), line_no)
        if turn not in (1, 2) or turn > len(questions[question_id].turns):
            raise SchemaError(str(path), line_no, f"invalid turn {turn!r}")
        model_a = _require(record, "model_a", str(path), line_no)
        model_b = _require(record, "model_b", str(path), line_no)
        for model in (model_a, model_b):
            if model not in responses[question_id]:
                raise JoinError(
                    f"{path}:{line_no}: vote references model {model!r} "
                    f"with no response for question {question_id!r}"
                )
        winner_raw = str(_require(record, "winner", str(path), line_no)).lower()
        if winner_raw not in _WINNER_TOKENS:
            raise SchemaError(str(path), line_no, f"unknown winner token {winner_raw!r}")
        vote = _WINNER_TOKENS[winner_raw]
        annotator = record.get("annotator_id", record.get("judge", "annotator_0"))
        if isinstance(annotator, list):
            annotator = annotator[0] if annotator else "annotator_0"
        # canonicalize the pair order so votes join with samples
        if model_a > model_b:
            model_a, model_b = model_b, model_a
            if vote is FinalVerdict.A:
                vote = FinalVerdict.B
            elif vote is FinalVerdict.B:
                vote = FinalVerdict.A
        judgment = HumanJudgment(
            question_id=question_id,
            turn=turn,
            model_a=model_a,
            model_b=model_b,
            vote=vote,
            annotator_id=str(annotator),
        )
        if judgment.unique_key in seen:
            raise SchemaError(str(path), line_no, "duplicate human judgment")
        seen.add(judgment.unique_key)
        humans.append(judgment)
    return humans


def load_eval_dataset(
    questions_path: str | Path, responses_path: str | Path, humans_path: str | Path
) -> EvalDataset:
    """Join the three judge record files into samples and votes.

    Every unordered response pair yields one sample per question turn
    (n models -> C(n,2) pairs); pair order is canonicalized by model id.
    """
    questions = _load_questions(questions_path)
    responses = _load_responses(responses_path, questions)
    humans = _load_humans(humans_path, questions, responses)

    samples: list[EvalSample] = []
    models: set[str] = set()
    category_counts: dict[str, int] = {}
    for question_id in sorted(questions):
        question = questions[question_id]
        by_model = responses[question_id]
        models.update(by_model)
        for model_a, model_b in combinations(sorted(by_model), 2):
            turns_a, turns_b = by_model[model_a], by_model[model_b]
            for turn in range(1, len(question.turns) + 1):
                reference = (
                    question.reference[turn - 1] if len(question.reference) >= turn else None
                )
                samples.append(
                    EvalSample(
                        question_id=question_id,
                        category=question.category,
                        turn=turn,
                        question_1=question.turns[0],
                        question_2=question.turns[1] if turn == 2 else None,
                        model_a=model_a,
                        model_b=model_b,
                        response_a_1=turns_a[0],
                        response_b_1=turns_b[0],
                        response_a_2=turns_a[1] if turn == 2 else None,
                        response_b_2=turns_b[1] if turn == 2 else None,
                        reference_answer=reference,
                    )
                )
                category_counts[question.category] = (
                    category_counts.get(question.category, 0) + 1
                )
    return EvalDataset(
        samples=samples,
        humans=humans,
        category_counts=category_counts,
        n_questions=len(questions),
        models=tuple(sorted(models)),
    )


def load_concept_sets(path: str | Path) -> tuple[list[ConceptSet], int]:
    """One concept list per record; lowercased, deduplicated with a warning count."""
    concept_sets: list[ConceptSet] = []
    warnings = 0
    seen_ids: set[str] = set()
    for line_no, record in _read_jsonl(path):
        raw = _require(record, "concepts", str(path), line_no)
        if not isinstance(raw, list) or not raw:
            raise SchemaError(str(path), line_no, "concepts must be a non-empty list")
        cleaned: list[str] = []
        for concept in raw:
            if not isinstance(concept, str) or not concept.strip():
                raise SchemaError(str(path), line_no, f"invalid concept {concept!r}")
            concept = concept.strip().lower()
            if concept in cleaned:
                warnings += 1
                continue
            cleaned.append(concept)
        set_id = str(record.get("id", record.get("concept_set_id", f"set-{line_no}")))
        if set_id in seen_ids:
            raise SchemaError(str(path), line_no, f"duplicate concept set id {set_id!r}")
        seen_ids.add(set_id)
        concept_sets.append(ConceptSet(id=set_id, concepts=tuple(cleaned)))
    return concept_sets, warnings
