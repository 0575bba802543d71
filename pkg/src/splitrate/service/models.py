"""Request/response models for the verification service."""

from __future__ import annotations

from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field

from ..experiments import ExperimentConfig


class HealthResponse(BaseModel):
    status: str
    version: str


class RegistryEntryInfo(BaseModel):
    name: str
    criterion: str
    runtime_class: str


class RegistryResponse(BaseModel):
    reproductions: List[RegistryEntryInfo]
    problems: List[str]


class CheckSummary(BaseModel):
    name: str
    kind: str
    passed: bool
    tolerance: float
    worst_margin: float
    first_violation: Optional[int] = None
    bound: Optional[float] = None
    measured: Optional[float] = None
    margin: Optional[float] = None


class ReproduceRequest(BaseModel):
    output_dir: Optional[str] = None


class ReproduceResponse(BaseModel):
    name: str
    criterion: str
    passed: bool
    exit_code: int
    checks: List[CheckSummary]
    values: Dict[str, Any] = Field(default_factory=dict)
    artifacts: List[str] = Field(default_factory=list)


class RunRequest(BaseModel):
    config: ExperimentConfig
    output_dir: Optional[str] = None


class RunResponse(BaseModel):
    passed: bool
    exit_code: int
    solver_failure: Optional[str] = None
    checks: List[CheckSummary]
    notes: List[str] = Field(default_factory=list)
    artifacts: List[str] = Field(default_factory=list)
    config: Dict[str, Any]


class ReportResponse(BaseModel):
    path: str
    report: Dict[str, Any]
