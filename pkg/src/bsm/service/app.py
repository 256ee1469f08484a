"""FastAPI application wrapping the engine."""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

import bsm
from bsm.backends.base import CompletionRequest
from bsm.data import load_concept_sets, load_eval_dataset
from bsm.errors import (
    BackendRefusal,
    BsmError,
    JoinError,
    SchemaError,
    TransportError,
)
from bsm.judge.baselines import judge_sample
from bsm.judge.pipeline import JudgeConfig
from bsm.judge.types import Scale
from bsm.reporting import emit_report
from bsm.runner import RunConfig, _order_run_dict, build_backend, run_suite
from bsm.service import schemas
from bsm.story.coverage import missing_concepts
from bsm.story.pipeline import StoryConfig, judge_story_pair, run_story, zeroshot_story
from bsm.story.types import ConceptSet


def _status_for(exc: BsmError) -> int:
    if isinstance(exc, (SchemaError, JoinError, FileNotFoundError)):
        return 400
    if isinstance(exc, (TransportError, BackendRefusal)):
        return 502
    return 422


def create_app() -> FastAPI:
    app = FastAPI(title="bsm-engine", version=bsm.__version__)

    @app.exception_handler(BsmError)
    def _bsm_error_handler(_request: Request, exc: BsmError) -> JSONResponse:
        return JSONResponse(
            status_code=_status_for(exc),
            content={"error_class": type(exc).__name__, "detail": str(exc)},
        )

    @app.exception_handler(FileNotFoundError)
    def _missing_file_handler(_request: Request, exc: FileNotFoundError) -> JSONResponse:
        return JSONResponse(
            status_code=400,
            content={"error_class": "FileNotFoundError", "detail": str(exc)},
        )

    @app.get("/health", response_model=schemas.HealthResponse)
    def health() -> schemas.HealthResponse:
        return schemas.HealthResponse(version=bsm.__version__)

    @app.post("/complete", response_model=schemas.CompleteResponse)
    def complete(request: schemas.CompleteRequest) -> schemas.CompleteResponse:
        backend, _cache = build_backend(request.backend)
        result = backend.complete(
            CompletionRequest(
                prompt=request.prompt,
                decoding=request.decoding.to_decoding(),
                max_new_tokens=request.max_new_tokens,
                model_id=request.backend.model_id,
            )
        )
        return schemas.CompleteResponse(
            text=result.text,
            backend_id=result.backend_id,
            cached=result.cached,
            latency_ms=result.latency_ms,
        )

    @app.post("/judge/sample", response_model=schemas.JudgeSampleResponse)
    def judge_one(request: schemas.JudgeSampleRequest) -> schemas.JudgeSampleResponse:
        backend, _cache = build_backend(request.backend)
        sample = request.sample.to_sample()
        config = JudgeConfig(
            method=request.method,
            scale=Scale(*request.scale),
            max_k=request.max_k,
            merge=request.merge,
            n_samples=request.n_samples,
            temperature=request.temperature,
            share_branch_plan=request.share_branch_plan,
            model_id=request.backend.model_id,
            random_seed=request.random_seed,
        )
        result = judge_sample(sample, backend, config)
        return schemas.JudgeSampleResponse(
            sample_id=sample.sample_id,
            method=request.method,
            final=result.final.value,
            run1=schemas.OrderRunModel(**_order_run_dict(result.run1)),
            run2=schemas.OrderRunModel(**_order_run_dict(result.run2)),
        )

    @app.post("/storygen/sample", response_model=schemas.StorySampleResponse)
    def story_one(request: schemas.StorySampleRequest) -> schemas.StorySampleResponse:
        backend, _cache = build_backend(request.backend)
        concept_set = ConceptSet(
            id=request.id, concepts=tuple(c.strip().lower() for c in request.concepts)
        )
        config = StoryConfig(model_id=request.backend.model_id)
        result, _trace = run_story(concept_set, backend, config)
        response = schemas.StorySampleResponse(
            sample_id=concept_set.id,
            topic=result.plan.topic,
            subset_1=list(result.plan.subset_1),
            subset_2=list(result.plan.subset_2),
            substory_1=result.substory_1,
            substory_2=result.substory_2,
            final_story=result.final_story,
            missing=list(result.missing),
            attribution=result.stage_attribution,
        )
        if request.compare_zeroshot:
            baseline = zeroshot_story(concept_set, backend, config)
            judgment = judge_story_pair(
                concept_set, result.final_story, baseline, backend, config
            )
            response.zeroshot_story = baseline
            response.zeroshot_missing = list(missing_concepts(concept_set.concepts, baseline))
            response.preference = {"x": "bsm", "y": "zeroshot", "tie": "tie"}[judgment.preference]
        return response

    @app.post("/runs/judge", response_model=schemas.RunResponse)
    def run_judge(config: RunConfig) -> schemas.RunResponse:
        config = config.model_copy(update={"task": "judge"})
        manifest = run_suite(config)
        return schemas.RunResponse(manifest=manifest, output_dir=config.output_dir)

    @app.post("/runs/storygen", response_model=schemas.RunResponse)
    def run_storygen(config: RunConfig) -> schemas.RunResponse:
        config = config.model_copy(update={"task": "storygen"})
        manifest = run_suite(config)
        return schemas.RunResponse(manifest=manifest, output_dir=config.output_dir)

    @app.post("/datasets/validate", response_model=schemas.ValidateResponse)
    def validate(request: schemas.ValidateRequest) -> schemas.ValidateResponse:
        try:
            if request.task == "judge":
                for name in ("questions_path", "responses_path", "humans_path"):
                    if getattr(request, name) is None:
                        return schemas.ValidateResponse(
                            valid=False, errors=[f"missing {name}"]
                        )
                dataset = load_eval_dataset(
                    request.questions_path, request.responses_path, request.humans_path
                )
                return schemas.ValidateResponse(
                    valid=True,
                    counts={
                        "questions": dataset.n_questions,
                        "samples": len(dataset.samples),
                        "human_votes": len(dataset.humans),
                        "models": len(dataset.models),
                    },
                    category_counts=dataset.category_counts,
                )
            if request.concepts_path is None:
                return schemas.ValidateResponse(valid=False, errors=["missing concepts_path"])
            concept_sets, warnings = load_concept_sets(request.concepts_path)
            return schemas.ValidateResponse(
                valid=True,
                counts={"concept_sets": len(concept_sets), "dedupe_warnings": warnings},
            )
        except (SchemaError, JoinError, FileNotFoundError) as exc:
            return schemas.ValidateResponse(valid=False, errors=[str(exc)])

    @app.post("/reports/render", response_model=schemas.ReportResponse)
    def render_report(request: schemas.ReportRequest) -> schemas.ReportResponse:
        return schemas.ReportResponse(text=emit_report(request.manifest, request.format))

    return app


app = create_app()
