"""Request/response schemas for the pipeline service."""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, Field


class LimitsModel(BaseModel):
    max_steps: int = Field(default=1_000_000, gt=0)
    max_allocs: int = Field(default=100_000, gt=0)
    max_call_depth: int = Field(default=128, gt=0)


class RunRequest(BaseModel):
    source: str
    args: list[int] = Field(default_factory=list)
    limits: LimitsModel = Field(default_factory=LimitsModel)


class RunResponse(BaseModel):
    output: list[str]
    status: str
    error: Optional[str] = None
    steps: int
    peak_live_nodes: int
    total_allocations: int


class EmbedRequest(BaseModel):
    source: str
    watermark: int = Field(ge=0)
    trigger: list[int] = Field(min_length=1)
    anchor: str = "wm_root"
    max_leaves: int = Field(default=64, gt=0)


class EmbedResponse(BaseModel):
    source: str


class ExtractRequest(BaseModel):
    source: str
    trigger: list[int] = Field(min_length=1)
    anchor: Optional[str] = None
    limits: LimitsModel = Field(default_factory=LimitsModel)


class ExtractResponse(BaseModel):
    found: bool
    watermark: Optional[int] = None


class ProtectRequest(BaseModel):
    source: str
    trigger: list[int] = Field(min_length=1)
    policy: str = "all"
    anchor: str = "wm_root"
    max_depth: int = Field(default=8, gt=0)
    limits: LimitsModel = Field(default_factory=LimitsModel)


class ProtectResponse(BaseModel):
    source: str
    plan: dict


class AttackRequest(BaseModel):
    source: str
    kind: str
    seed: int = 0


class AttackResponse(BaseModel):
    source: str


class BenchRequest(BaseModel):
    corpus: dict[str, str]
    watermark: int = Field(ge=0)
    trigger: list[int] = Field(min_length=1)
    policy: str = "all"
    inputs: dict[str, list[list[int]]]
    seed: int = 0
    limits: LimitsModel = Field(default_factory=LimitsModel)


class BenchResponse(BaseModel):
    report: dict


class ReportRequest(BaseModel):
    report: dict
    format: str = "json"


class ReportResponse(BaseModel):
    text: str
