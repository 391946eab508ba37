#!/usr/bin/env python3
# chuk_memristor_ica/config/models.py
"""
Pydantic models for run configuration.

Every experiment is driven by one RunConfig; it round-trips through JSON
losslessly so the exact configuration of a run can be recorded and replayed.
"""

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..core.base import Algorithm, BackendKind
from ..devices.memristor import DeviceParams

VariedField = Literal["d", "r_on", "r_off"]

# ═══════════════════════════════════════════════════════════════════════════
# ALGORITHMS
# ═══════════════════════════════════════════════════════════════════════════

class IcaConfig(BaseModel):
    """Settings of one ICA run."""
    model_config = ConfigDict(extra="forbid")

    algorithm: Algorithm = Field(Algorithm.FASTICA, description="acy or fastica")
    backend: BackendKind = Field(BackendKind.IDEAL, description="ideal or crossbar")
    learning_rate: float = Field(1e-3, gt=0, description="ACY learning rate upper bound")
    max_step: float = Field(0.05, gt=0, description="ACY cap on relative weight change per iteration")
    max_iters: int = Field(100, ge=1, description="Iteration budget (per component for FastICA)")
    tol: float = Field(1e-6, gt=0, description="Convergence tolerance")
    seed: int = Field(0, description="Seed of the FastICA initial weights")
    batch_size: Optional[int] = Field(None, ge=1, description="ACY mini-batch size (full batch if unset)")

# ═══════════════════════════════════════════════════════════════════════════
# HARDWARE
# ═══════════════════════════════════════════════════════════════════════════

class CrossbarConfig(BaseModel):
    """Drive circuitry of the crossbar."""
    model_config = ConfigDict(extra="forbid")

    v_read: float = Field(0.5, description="Read amplitude (V)")
    v_write_pos: float = Field(2.0, gt=0, description="Positive write amplitude (V)")
    v_write_neg: float = Field(-2.0, lt=0, description="Negative write amplitude (V)")
    t0: float = Field(100e-6, gt=0, description="Pulse-width time constant (s per unit input)")
    verify_passes: int = Field(3, ge=0, description="Program-and-verify correction passes per cell")
    verify_tol: float = Field(1e-9, gt=0, description="Read-back error accepted without correction")
    fastica_scale: float = Field(100.0, gt=0, description="Storage scale of unit-norm FastICA rows")
    acy_scale: float = Field(1.0, gt=0, description="Storage scale of ACY weights")
    trace_sample: Optional[int] = Field(0, ge=0, description="Sample traced cell by cell every write cycle (null disables)")

class VariationSpec(BaseModel):
    """Device-to-device variation drawn for a Monte Carlo study."""
    model_config = ConfigDict(extra="forbid")

    sigma_fraction: float = Field(0.03, ge=0, lt=0.3, description="Std as a fraction of the mean")
    fields: list[VariedField] = Field(default_factory=lambda: ["d", "r_on", "r_off"],
                                      description="Device parameters that vary")
    means: dict[VariedField, float] = Field(default_factory=dict,
                                            description="Means overriding the base profile values")
    trials: int = Field(20, ge=1, description="Number of Monte Carlo trials")
    seed: int = Field(0, description="Root seed of the per-cell substreams")

    @field_validator("fields")
    @classmethod
    def _unique_fields(cls, value: list[str]) -> list[str]:
        if len(set(value)) != len(value):
            raise ValueError(f"Varied fields must be unique, got {value}")
        return value

    @field_validator("means")
    @classmethod
    def _positive_means(cls, value: dict[str, float]) -> dict[str, float]:
        for name, mean in value.items():
            if mean <= 0:
                raise ValueError(f"Mean of {name} must be positive, got {mean}")
        return value

# ═══════════════════════════════════════════════════════════════════════════
# METRICS
# ═══════════════════════════════════════════════════════════════════════════

class MetricsConfig(BaseModel):
    """Image-quality metric constants."""
    model_config = ConfigDict(extra="forbid")

    ssim_window: int = Field(11, ge=3, description="Gaussian window size (odd)")
    ssim_sigma: float = Field(1.5, gt=0, description="Gaussian window sigma")
    ssim_k1: float = Field(0.01, gt=0)
    ssim_k2: float = Field(0.03, gt=0)
    data_range: float = Field(255.0, gt=0, description="Peak intensity")
    gsm_c: float = Field(170.0, gt=0, description="Gradient-similarity stabilizer")

    @field_validator("ssim_window")
    @classmethod
    def _odd_window(cls, value: int) -> int:
        if value % 2 == 0:
            raise ValueError(f"SSIM window must be odd, got {value}")
        return value

# ═══════════════════════════════════════════════════════════════════════════
# RUN
# ═══════════════════════════════════════════════════════════════════════════

class RunConfig(BaseModel):
    """Complete configuration of an experiment run."""
    model_config = ConfigDict(extra="forbid")

    device_profile: str = Field("demo", description="Profile used by separate/compare")
    mc_profile: str = Field("montecarlo", description="Profile used by the Monte Carlo study")
    profiles: dict[str, DeviceParams] = Field(..., description="Named device parameter sets")
    crossbar: CrossbarConfig = Field(default_factory=CrossbarConfig)
    mixing_matrix: list[list[float]] = Field(default_factory=lambda: [[0.7, 0.3], [0.3, 0.7]])
    acy: IcaConfig = Field(default_factory=lambda: IcaConfig(algorithm=Algorithm.ACY))
    fastica: IcaConfig = Field(default_factory=lambda: IcaConfig(algorithm=Algorithm.FASTICA))
    metrics: MetricsConfig = Field(default_factory=MetricsConfig)
    variation: VariationSpec = Field(default_factory=VariationSpec)
    image_size: int = Field(64, ge=11, description="Side of the synthetic test images")
    paper_scale_size: int = Field(512, ge=11, description="Side used with --paper-scale")
    sources: Optional[list[str]] = Field(None, description="Source image paths (synthetic pair if unset)")
    output_dir: str = Field("results", description="Directory receiving every output file")
    seed: int = Field(0, description="Master seed")
    trace_every: int = Field(1, ge=1, description="Keep every k-th convergence-trace iteration")
    workers: int = Field(1, ge=1, description="Threads for Monte Carlo trials")
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = Field("WARNING")

    @model_validator(mode="after")
    def _check_consistency(self) -> "RunConfig":
        for name in (self.device_profile, self.mc_profile):
            if name not in self.profiles:
                raise ValueError(f"Unknown device profile '{name}' (known: {sorted(self.profiles)})")
        n = len(self.mixing_matrix)
        if n < 1 or any(len(row) != n for row in self.mixing_matrix):
            raise ValueError("Mixing matrix must be square")
        if self.acy.algorithm is not Algorithm.ACY or self.fastica.algorithm is not Algorithm.FASTICA:
            raise ValueError("The acy/fastica sections must name their own algorithm")
        if self.sources is not None and len(self.sources) != n:
            raise ValueError(f"{len(self.sources)} source images for a {n}x{n} mixing matrix")
        return self

    def ica_config(self, algorithm: Algorithm) -> IcaConfig:
        return self.acy if algorithm is Algorithm.ACY else self.fastica

    def device(self, profile: Optional[str] = None) -> DeviceParams:
        return self.profiles[profile or self.device_profile]
