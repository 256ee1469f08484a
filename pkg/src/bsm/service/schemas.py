"""Pydantic request/response models for the HTTP API."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field

from bsm.backends.base import Decoding
from bsm.judge.types import EvalSample
from bsm.runner import BackendSpec, RunConfig, RunManifest


class HealthResponse(BaseModel):
    status: str = "ok"
    version: str


class DecodingModel(BaseModel):
    mode: Literal["greedy", "sample"] = "greedy"
    temperature: Optional[float] = None
    seed: Optional[int] = None

    def to_decoding(self) -> Decoding:
        if self.mode == "greedy":
            return Decoding.greedy()
        return Decoding.sample(self.temperature, self.seed)


class CompleteRequest(BaseModel):
    backend: BackendSpec = Field(default_factory=BackendSpec)
    prompt: str
    decoding: DecodingModel = Field(default_factory=DecodingModel)
    max_new_tokens: int = 512


class CompleteResponse(BaseModel):
    text: str
    backend_id: str
    cached: bool
    latency_ms: int


class EvalSampleModel(BaseModel):
    question_id: str
    category: str
    turn: int
    question_1: str
    model_a: str
    model_b: str
    response_a_1: str
    response_b_1: str
    question_2: Optional[str] = None
    response_a_2: Optional[str] = None
    response_b_2: Optional[str] = None
    reference_answer: Optional[str] = None

    def to_sample(self) -> EvalSample:
        return EvalSample(**self.model_dump())


class JudgeSampleRequest(BaseModel):
    backend: BackendSpec = Field(default_factory=BackendSpec)
    sample: EvalSampleModel
    method: Literal[
        "bsm",
        "zeroshot_relative",
        "zeroshot_absolute",
        "plan_and_solve",
        "self_consistency",
        "bsm_sc",
    ] = "bsm"
    scale: tuple[int, int] = (1, 5)
    max_k: int = 5
    merge: Literal["sum", "neural"] = "sum"
    n_samples: int = 5
    temperature: float = 0.7
    share_branch_plan: bool = False
    random_seed: int = 0


class ScoreEntry(BaseModel):
    criterion: str
    first: float
    second: float
    n_used: Optional[int] = None


class OrderRunModel(BaseModel):
    order: tuple[str, str]
    position: str
    preference: str
    total_first: Optional[float] = None
    total_second: Optional[float] = None
    scores: list[ScoreEntry] = Field(default_factory=list)
    dropped: int = 0


class JudgeSampleResponse(BaseModel):
    sample_id: str
    method: str
    final: str
    run1: OrderRunModel
    run2: OrderRunModel


class StorySampleRequest(BaseModel):
    backend: BackendSpec = Field(default_factory=BackendSpec)
    id: str = "adhoc"
    concepts: list[str]
    compare_zeroshot: bool = False


class StorySampleResponse(BaseModel):
    sample_id: str
    topic: str
    subset_1: list[str]
    subset_2: list[str]
    substory_1: str
    substory_2: str
    final_story: str
    missing: list[str]
    attribution: dict[str, str]
    zeroshot_story: Optional[str] = None
    zeroshot_missing: Optional[list[str]] = None
    preference: Optional[str] = None


class RunResponse(BaseModel):
    manifest: RunManifest
    output_dir: str


class ValidateRequest(BaseModel):
    task: Literal["judge", "storygen"]
    questions_path: Optional[str] = None
    responses_path: Optional[str] = None
    humans_path: Optional[str] = None
    concepts_path: Optional[str] = None


class ValidateResponse(BaseModel):
    valid: bool
    errors: list[str] = Field(default_factory=list)
    counts: dict[str, int] = Field(default_factory=dict)
    category_counts: dict[str, int] = Field(default_factory=dict)


class ReportRequest(BaseModel):
    manifest: RunManifest
    format: Literal["table", "records"] = "table"


class ReportResponse(BaseModel):
    text: str


__all__ = [
    "CompleteRequest",
    "CompleteResponse",
    "DecodingModel",
    "EvalSampleModel",
    "HealthResponse",
    "JudgeSampleRequest",
    "JudgeSampleResponse",
    "OrderRunModel",
    "ReportRequest",
    "ReportResponse",
    "RunConfig",
    "RunResponse",
    "ScoreEntry",
    "StorySampleRequest",
    "StorySampleResponse",
    "ValidateRequest",
    "ValidateResponse",
]
