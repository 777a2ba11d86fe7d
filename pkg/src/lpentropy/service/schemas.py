"""Pydantic request/response models for the HTTP service."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field, model_validator


class ProcessSpec(BaseModel):
    """Innovation model plus coefficient scheme of a process to simulate."""

    family: Literal["gaussian", "logistic"] = "gaussian"
    scale: float = Field(default=1.0, gt=0)
    scheme: Literal["geometric", "finite", "hyperbolic"] = "geometric"
    rho: float = 0.5
    coefficients: list[float] = Field(default_factory=list)
    beta: float = 1.5
    truncation: Optional[int] = None
    tail_tolerance: float = Field(default=1e-12, gt=0)
    allow_long_memory: bool = False

    @model_validator(mode="after")
    def _check_scheme_params(self) -> "ProcessSpec":
        if self.scheme == "finite" and not self.coefficients:
            raise ValueError("scheme=finite requires a non-empty coefficients list")
        return self


class EstimatorSpec(BaseModel):
    """Kernel, bandwidth and threshold settings of the entropy estimator."""

    kernel: str = "epanechnikov"
    bandwidth_c: float = Field(default=1.0, gt=0)
    gamma_c: float = Field(default=1.0, gt=0)
    gamma_kappa: float = Field(default=0.8, gt=0, lt=1)
    grid_points_per_h: int = Field(default=8, ge=4)


class SimulateRequest(BaseModel):
    process: ProcessSpec = Field(default_factory=ProcessSpec)
    n: int = Field(ge=1)
    seed: int = Field(default=42, ge=0)
    stream: list[int] = Field(default_factory=list)


class SimulateResponse(BaseModel):
    values: list[float]
    provenance: list[tuple[str, str]]


class KdeRequest(BaseModel):
    values: list[float] = Field(min_length=1)
    kernel: str = "epanechnikov"
    bandwidth_c: float = Field(default=1.0, gt=0)
    grid_points_per_h: int = Field(default=8, ge=4)


class KdeResponse(BaseModel):
    x: list[float]
    density: list[float]
    bandwidth: float
    n: int
    kernel: str
    integral: float


class EntropyRequest(BaseModel):
    """Estimate entropy from explicit values or from an inline simulation."""

    values: Optional[list[float]] = None
    process: Optional[ProcessSpec] = None
    n: Optional[int] = Field(default=None, ge=1)
    seed: int = Field(default=42, ge=0)
    stream: list[int] = Field(default_factory=list)
    estimator: EstimatorSpec = Field(default_factory=EstimatorSpec)
    oracle: Optional[Literal["gaussian", "convolution"]] = None

    @model_validator(mode="after")
    def _check_source(self) -> "EntropyRequest":
        have_values = self.values is not None and len(self.values) > 0
        have_sim = self.process is not None and self.n is not None
        if have_values == have_sim:
            raise ValueError(
                "provide exactly one data source: either values, or process together with n"
            )
        if self.oracle is not None and not have_sim:
            raise ValueError(
                "oracles need the generating process; pass process and n instead of raw values"
            )
        return self


class LevelSetModel(BaseModel):
    intervals: list[tuple[float, float]]
    total_length: float
    mass: float


class EntropyResponse(BaseModel):
    entropy_estimate: float
    n: int
    bandwidth: float
    gamma: float
    gamma_exceeds_bandwidth: bool
    level_set: LevelSetModel
    interval_count: int
    oracle_entropy: Optional[float] = None
    abs_error: Optional[float] = None
    oracle_entropy_on_level_set: Optional[float] = None


class ValidateRequest(BaseModel):
    """Select kernels and/or innovation families to validate; empty = all."""

    kernels: Optional[list[str]] = None
    families: Optional[list[Literal["gaussian", "logistic"]]] = None
    scale: float = Field(default=1.0, gt=0)
    quadrature_points: int = Field(default=256, ge=64)
    grid_halfwidth: Optional[float] = Field(default=None, gt=0)
    grid_points: int = Field(default=4001, ge=100)


class CheckModel(BaseModel):
    name: str
    passed: bool
    observed: float
    requirement: str


class ConditionReportModel(BaseModel):
    subject: str
    passed: bool
    checks: list[CheckModel]


class ValidateResponse(BaseModel):
    reports: list[ConditionReportModel]
    all_passed: bool


class ConvergenceRequest(BaseModel):
    """Flat experiment configuration, mirroring the config-file keys."""

    sizes: list[int] = Field(min_length=1)
    family: Literal["gaussian", "logistic"] = "gaussian"
    scale: float = Field(default=1.0, gt=0)
    scheme: Literal["geometric", "finite", "hyperbolic"] = "geometric"
    rho: float = 0.5
    coefficients: list[float] = Field(default_factory=list)
    beta: float = 1.5
    truncation: Optional[int] = None
    tail_tolerance: float = Field(default=1e-12, gt=0)
    replicates: int = Field(default=50, ge=1)
    seed: int = Field(default=42, ge=0)
    bandwidth_c: float = Field(default=1.0, gt=0)
    gamma_c: float = Field(default=1.0, gt=0)
    gamma_kappa: float = Field(default=0.8, gt=0, lt=1)
    gamma_override: Optional[float] = Field(default=None, gt=0)
    kernel: str = "epanechnikov"
    grid_points_per_h: int = Field(default=8, ge=4)
    oracle: Literal["gaussian", "convolution"] = "gaussian"
    workers: int = Field(default=1, ge=1)
    rate_check: Optional[bool] = None


class VerdictModel(BaseModel):
    name: str
    value_at_smallest_n: float
    value_at_largest_n: float
    ratio: float
    bound: float
    passed: bool


class ConvergenceResponse(BaseModel):
    csv: str
    verdicts: Optional[list[VerdictModel]] = None
    all_verdicts_pass: Optional[bool] = None
    truncation_bias_vanishing: Optional[bool] = None


class HealthResponse(BaseModel):
    status: str
    version: str
