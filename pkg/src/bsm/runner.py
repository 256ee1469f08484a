"""Run orchestration: configs, suite execution, manifests, persistence.

A run executes one method over a dataset with bounded parallelism, writes
per-sample records incrementally in input order (so reruns are
byte-identical), computes the metric report at the end, and never aborts
on per-sample failures.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, Field

from bsm.backends.base import Backend, CountingBackend
from bsm.backends.cache import CachingBackend, CompletionCache
from bsm.backends.mock import MockBackend, MockScript
from bsm.backends.remote import RemoteBackend
from bsm.data import load_concept_sets, load_eval_dataset
from bsm.errors import BsmError, SolveFailure
from bsm.judge.baselines import BranchScore, judge_sample
from bsm.judge.pipeline import JudgeConfig, OrderRun, PairResult
from bsm.judge.types import CriterionJudgment, EvalSample, FinalVerdict, Scale
from bsm.metrics import build_judge_report
from bsm.story.coverage import ap_mc_from_counts, constraint_metrics, missing_concepts
from bsm.story.pipeline import StoryConfig, judge_story_pair, run_story, zeroshot_story
from bsm.story.types import ConceptSet

RECORD_SCHEMA_VERSION = 1


class BackendSpec(BaseModel):
    """How to construct the completion backend for a run."""

    kind: Literal["mock", "remote"] = "mock"
    model_id: str = "mock-model"
    endpoint_url: Optional[str] = None
    mock_script_path: Optional[str] = None
    cache_dir: Optional[str] = None
    api_key_env: str = "BSM_API_KEY"
    timeout_s: float = 60.0


class RunConfig(BaseModel):
    """Fully serializable description of one run; stored in its manifest."""

    task: Literal["judge", "storygen"]
    output_dir: str
    backend: BackendSpec = Field(default_factory=BackendSpec)
    method: Literal[
        "bsm",
        "zeroshot_relative",
        "zeroshot_absolute",
        "plan_and_solve",
        "self_consistency",
        "bsm_sc",
    ] = "bsm"
    questions_path: Optional[str] = None
    responses_path: Optional[str] = None
    humans_path: Optional[str] = None
    concepts_path: Optional[str] = None
    category: Optional[str] = None
    limit: Optional[int] = None
    scale: tuple[int, int] = (1, 5)
    max_k: int = 5
    merge: Literal["sum", "neural"] = "sum"
    n_samples: int = 5
    temperature: float = 0.7
    share_branch_plan: bool = False
    parallelism: int = 1
    random_seed: int = 0
    judge_model_id: Optional[str] = None
    compare_zeroshot: bool = True
    save_traces: bool = False
    branch_max_new_tokens: int = 512
    solve_max_new_tokens: int = 1024
    merge_max_new_tokens: int = 1024
    story_max_new_tokens: int = 1024

    def judge_config(self) -> JudgeConfig:
        return JudgeConfig(
            method=self.method,
            scale=Scale(*self.scale),
            max_k=self.max_k,
            merge=self.merge,
            n_samples=self.n_samples,
            temperature=self.temperature,
            share_branch_plan=self.share_branch_plan,
            model_id=self.backend.model_id,
            random_seed=self.random_seed,
            branch_max_new_tokens=self.branch_max_new_tokens,
            solve_max_new_tokens=self.solve_max_new_tokens,
            merge_max_new_tokens=self.merge_max_new_tokens,
        )

    def story_config(self) -> StoryConfig:
        return StoryConfig(
            model_id=self.backend.model_id,
            branch_max_new_tokens=self.branch_max_new_tokens,
            story_max_new_tokens=self.story_max_new_tokens,
        )


class SampleStatus(BaseModel):
    sample_id: str
    status: Literal["ok", "failed"]
    error_class: Optional[str] = None


class RunManifest(BaseModel):
    """Run summary stored beside the outputs.

    wall_clock_ms is volatile and therefore excluded from the canonical
    serialization (it goes to the timing sidecar); everything else is
    byte-deterministic for a fixed config and backend script.
    """

    schema_version: int = 1
    task: str
    config: RunConfig
    samples: list[SampleStatus]
    counts: dict[str, int]
    metrics: dict
    backend_calls: dict[str, int]
    records_path: str = "records.jsonl"
    report_path: str = "report.txt"
    wall_clock_ms: Optional[int] = None

    def canonical_json(self) -> str:
        payload = self.model_dump(exclude={"wall_clock_ms"}, mode="json")
        return json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def build_backend(spec: BackendSpec) -> tuple[CountingBackend, Optional[CompletionCache]]:
    """Assemble the backend stack: base, optional cache, call counter."""
    if spec.kind == "mock":
        if not spec.mock_script_path:
            raise BsmError("mock backend needs --mock-script")
        base: Backend = MockBackend(MockScript.from_file(spec.mock_script_path))
    else:
        if not spec.endpoint_url:
            raise BsmError("remote backend needs --endpoint-url")
        base = RemoteBackend(
            spec.endpoint_url, api_key_env=spec.api_key_env, timeout_s=spec.timeout_s
        )
    cache = None
    if spec.cache_dir:
        cache = CompletionCache(spec.cache_dir)
        base = CachingBackend(base, cache)
    return CountingBackend(base), cache


def _error_class(exc: BaseException) -> str:
    if isinstance(exc, SolveFailure) and exc.__cause__ is not None:
        return type(exc.__cause__).__name__
    return type(exc).__name__


def _order_run_dict(run: OrderRun) -> dict:
    scores = []
    for judgment in run.judgments:
        if isinstance(judgment, CriterionJudgment):
            scores.append(
                {
                    "criterion": judgment.criterion.title,
                    "first": judgment.score_first,
                    "second": judgment.score_second,
                }
            )
        elif isinstance(judgment, BranchScore):
            scores.append(
                {
                    "criterion": judgment.criterion_title,
                    "first": judgment.score_first,
                    "second": judgment.score_second,
                    "n_used": judgment.n_used,
                }
            )
    return {
        "order": list(run.order),
        "position": run.verdict.position.value,
        "preference": run.preference.value,
        "total_first": run.verdict.total_first,
        "total_second": run.verdict.total_second,
        "scores": scores,
        "dropped": run.dropped,
    }


def _judge_record(sample: EvalSample, method: str, result: PairResult, trace_ref) -> dict:
    return {
        "schema_version": RECORD_SCHEMA_VERSION,
        "kind": "judge_sample",
        "sample_id": sample.sample_id,
        "question_id": sample.question_id,
        "category": sample.category,
        "turn": sample.turn,
        "model_a": sample.model_a,
        "model_b": sample.model_b,
        "method": method,
        "status": "ok",
        "final": result.final.value,
        "run1": _order_run_dict(result.run1),
        "run2": _order_run_dict(result.run2),
        "trace_ref": trace_ref,
    }


def _failure_record(kind: str, sample_id: str, exc: BaseException, extra: dict) -> dict:
    record = {
        "schema_version": RECORD_SCHEMA_VERSION,
        "kind": kind,
        "sample_id": sample_id,
        "status": "failed",
        "error_class": _error_class(exc),
        "error": str(exc),
    }
    record.update(extra)
    return record


def _write_trace(output_dir: Path, sample_id: str, result: PairResult) -> Optional[str]:
    traces_dir = output_dir / "traces"
    traces_dir.mkdir(exist_ok=True)
    payload = []
    for label, trace in zip(("run1", "run2"), result.traces):
        if trace is None:
            continue
        payload.append(
            {
                "run": label,
                "started": trace.started,
                "finished": trace.finished,
                "calls": [
                    {
                        "label": call.label,
                        "request": call.request.canonical_dict(),
                        "text": call.result.text,
                    }
                    for call in trace.calls
                ],
            }
        )
    ref = f"traces/{sample_id.replace(':', '_')}.json"
    with open(output_dir / ref, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, ensure_ascii=False)
    return ref


def _run_judge_suite(config: RunConfig, backend: Backend, output_dir: Path):
    dataset = load_eval_dataset(config.questions_path, config.responses_path, config.humans_path)
    samples = dataset.samples
    if config.category:
        samples = [s for s in samples if s.category == config.category]
    if config.limit is not None:
        samples = samples[: config.limit]

    judge_config = config.judge_config()
    statuses: list[SampleStatus] = []
    predictions: dict = {}
    runs: dict = {}

    def work(sample: EvalSample):
        return judge_sample(sample, backend, judge_config)

    records_file = output_dir / "records.jsonl"
    with open(records_file, "w", encoding="utf-8") as records, ThreadPoolExecutor(
        max_workers=max(1, config.parallelism)
    ) as pool:
        futures = [(sample, pool.submit(work, sample)) for sample in samples]
        for sample, future in futures:
            try:
                result = future.result()
            except BsmError as exc:
                statuses.append(
                    SampleStatus(
                        sample_id=sample.sample_id, status="failed", error_class=_error_class(exc)
                    )
                )
                record = _failure_record(
                    "judge_sample",
                    sample.sample_id,
                    exc,
                    {
                        "question_id": sample.question_id,
                        "category": sample.category,
                        "turn": sample.turn,
                        "model_a": sample.model_a,
                        "model_b": sample.model_b,
                        "method": config.method,
                    },
                )
            else:
                statuses.append(SampleStatus(sample_id=sample.sample_id, status="ok"))
                predictions[sample.key] = result.final
                runs[sample.key] = result.run_preferences
                trace_ref = (
                    _write_trace(output_dir, sample.sample_id, result)
                    if config.save_traces
                    else None
                )
                record = _judge_record(sample, config.method, result, trace_ref)
            records.write(json.dumps(record, sort_keys=True, ensure_ascii=False) + "\n")
            records.flush()

    judge_model = config.judge_model_id or config.backend.model_id
    report = build_judge_report(samples, predictions, runs, dataset.humans, judge_model)
    metrics = {"method": config.method, "report": report.to_dict()}
    return statuses, metrics


def _run_storygen_suite(config: RunConfig, backend: Backend, output_dir: Path):
    concept_sets, dedupe_warnings = load_concept_sets(config.concepts_path)
    if config.limit is not None:
        concept_sets = concept_sets[: config.limit]
    story_config = config.story_config()

    statuses: list[SampleStatus] = []
    results = []
    zeroshot_missing_counts: list[int] = []
    zeroshot_sizes: list[int] = []
    preference_counts = {"bsm": 0, "zeroshot": 0, "tie": 0}
    judged = 0
    judge_failures = 0

    def work(concept_set: ConceptSet):
        result, _trace = run_story(concept_set, backend, story_config)
        comparison = None
        if config.compare_zeroshot:
            baseline = zeroshot_story(concept_set, backend, story_config)
            judgment = judge_story_pair(
                concept_set, result.final_story, baseline, backend, story_config
            )
            comparison = (baseline, judgment)
        return result, comparison

    records_file = output_dir / "records.jsonl"
    with open(records_file, "w", encoding="utf-8") as records, ThreadPoolExecutor(
        max_workers=max(1, config.parallelism)
    ) as pool:
        futures = [(cs, pool.submit(work, cs)) for cs in concept_sets]
        for concept_set, future in futures:
            try:
                result, comparison = future.result()
            except BsmError as exc:
                statuses.append(
                    SampleStatus(
                        sample_id=concept_set.id, status="failed", error_class=_error_class(exc)
                    )
                )
                record = _failure_record("story_sample", concept_set.id, exc, {})
            else:
                statuses.append(SampleStatus(sample_id=concept_set.id, status="ok"))
                results.append(result)
                record = {
                    "schema_version": RECORD_SCHEMA_VERSION,
                    "kind": "story_sample",
                    "sample_id": concept_set.id,
                    "status": "ok",
                    "concepts": list(concept_set.concepts),
                    "topic": result.plan.topic,
                    "subset_1": list(result.plan.subset_1),
                    "subset_2": list(result.plan.subset_2),
                    "substory_1": result.substory_1,
                    "substory_2": result.substory_2,
                    "final_story": result.final_story,
                    "missing": list(result.missing),
                    "attribution": dict(sorted(result.stage_attribution.items())),
                }
                if comparison is not None:
                    baseline, judgment = comparison
                    z_missing = missing_concepts(concept_set.concepts, baseline)
                    zeroshot_missing_counts.append(len(z_missing))
                    zeroshot_sizes.append(len(concept_set.concepts))
                    preference = {"x": "bsm", "y": "zeroshot", "tie": "tie"}[judgment.preference]
                    preference_counts[preference] += 1
                    judged += 1
                    judge_failures += judgment.failed_orders
                    record["zeroshot_story"] = baseline
                    record["zeroshot_missing"] = list(z_missing)
                    record["preference"] = preference
            records.write(json.dumps(record, sort_keys=True, ensure_ascii=False) + "\n")
            records.flush()

    metrics: dict = {"dedupe_warnings": dedupe_warnings}
    if results:
        ap, mc = constraint_metrics(results)
        solve_stage = sum(
            1 for r in results for stage in r.stage_attribution.values() if stage == "solve_stage"
        )
        merge_stage = sum(
            1 for r in results for stage in r.stage_attribution.values() if stage == "merge_stage"
        )
        metrics["bsm"] = {
            "ap": ap,
            "mc": mc,
            "missing_solve_stage": solve_stage,
            "missing_merge_stage": merge_stage,
        }
    if zeroshot_missing_counts:
        z_ap, z_mc = ap_mc_from_counts(zeroshot_missing_counts, zeroshot_sizes)
        metrics["zeroshot"] = {"ap": z_ap, "mc": z_mc}
    if judged:
        metrics["preference"] = {
            "bsm_pct": 100.0 * preference_counts["bsm"] / judged,
            "zeroshot_pct": 100.0 * preference_counts["zeroshot"] / judged,
            "tie_pct": 100.0 * preference_counts["tie"] / judged,
            "judged": judged,
            "verdict_failures": judge_failures,
        }
    return statuses, metrics


def run_suite(config: RunConfig, backend: Optional[Backend] = None) -> RunManifest:
    """Execute a full run and persist manifest, records, report, and timing."""
    from bsm.reporting import emit_report

    started = time.monotonic()
    output_dir = Path(config.output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)

    cache = None
    if backend is None:
        backend, cache = build_backend(config.backend)
    counting = backend if isinstance(backend, CountingBackend) else CountingBackend(backend)

    if config.task == "judge":
        for name in ("questions_path", "responses_path", "humans_path"):
            if getattr(config, name) is None:
                raise BsmError(f"judge runs need {name}")
        statuses, metrics = _run_judge_suite(config, counting, output_dir)
    else:
        if config.concepts_path is None:
            raise BsmError("storygen runs need concepts_path")
        statuses, metrics = _run_storygen_suite(config, counting, output_dir)

    counts = {
        "total": len(statuses),
        "ok": sum(1 for s in statuses if s.status == "ok"),
        "failed": sum(1 for s in statuses if s.status == "failed"),
    }
    manifest = RunManifest(
        task=config.task,
        config=config,
        samples=statuses,
        counts=counts,
        metrics=metrics,
        backend_calls={
            "total": counting.total,
            "cached": cache.hits if cache is not None else 0,
        },
        wall_clock_ms=int((time.monotonic() - started) * 1000),
    )

    (output_dir / "manifest.json").write_text(manifest.canonical_json(), encoding="utf-8")
    report_text = emit_report(manifest, "table")
    (output_dir / manifest.report_path).write_text(report_text, encoding="utf-8")
    (output_dir / "timing.json").write_text(
        json.dumps({"wall_clock_ms": manifest.wall_clock_ms}) + "\n", encoding="utf-8"
    )
    return manifest
