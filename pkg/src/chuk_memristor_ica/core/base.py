#!/usr/bin/env python3
# chuk_memristor_ica/core/base.py
"""
Core base types and exceptions for the memristor ICA simulator.
Shared by the device models, the ICA algorithms and the experiment pipeline.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

# Algorithms
class Algorithm(Enum):
    ACY = "acy"
    FASTICA = "fastica"

# Weight backends
class BackendKind(Enum):
    IDEAL = "ideal"
    CROSSBAR = "crossbar"

# Signal roles
class SignalRole(Enum):
    SOURCES = "sources"
    MIXTURES = "mixtures"
    WHITENED = "whitened"
    OUTPUTS = "outputs"

# Data Models
@dataclass
class SignalMatrix:
    """Channels x samples real matrix tagged with its role in the pipeline."""
    data: np.ndarray
    role: SignalRole = SignalRole.MIXTURES

    def __post_init__(self):
        self.data = np.atleast_2d(np.asarray(self.data, dtype=np.float64))
        if self.data.ndim != 2:
            raise DimensionError(f"Signal matrix must be 2-D, got shape {self.data.shape}")
        if self.channels < 1 or self.samples < 1:
            raise DimensionError(f"Signal matrix needs >= 1 channel and sample, got {self.data.shape}")

    @property
    def channels(self) -> int:
        return self.data.shape[0]

    @property
    def samples(self) -> int:
        return self.data.shape[1]

    def with_data(self, data: np.ndarray, role: SignalRole | None = None) -> "SignalMatrix":
        """Return a new matrix carrying ``data`` and (optionally) a new role."""
        return SignalMatrix(data=data, role=role or self.role)

@dataclass
class TraceRow:
    """One convergence-trace entry (iteration metric for ACY or FastICA)."""
    component: int
    iteration: int
    value: float

@dataclass
class ConvergenceTrace:
    """Convergence history of an ICA run."""
    metric: str
    rows: list[TraceRow] = field(default_factory=list)

    def add(self, component: int, iteration: int, value: float) -> None:
        self.rows.append(TraceRow(component, iteration, float(value)))

    def subsample(self, every: int) -> "ConvergenceTrace":
        """Keep every ``every``-th iteration (the last one of each component is always kept)."""
        if every <= 1:
            return self
        kept: list[TraceRow] = []
        for idx, row in enumerate(self.rows):
            is_last = idx + 1 == len(self.rows) or self.rows[idx + 1].component != row.component
            if row.iteration % every == 0 or is_last:
                kept.append(row)
        return ConvergenceTrace(metric=self.metric, rows=kept)

# Exception Classes
class SimulatorError(Exception):
    """Base exception for all simulator errors."""
    pass

class DeviceError(SimulatorError):
    """Memristor device misuse."""
    pass

class WeightRangeError(DeviceError):
    """Weight or input magnitude outside its allowed range."""
    pass

class PulseError(DeviceError):
    """Invalid pulse definition."""
    pass

class DestructiveReadError(DeviceError):
    """Read voltage beyond a switching threshold."""
    pass

class ScheduleError(DeviceError):
    """Unsorted or overlapping pulse schedule."""
    pass

class CrossbarError(SimulatorError):
    """Crossbar construction or addressing error."""
    pass

class CrossbarIndexError(CrossbarError):
    """Cell index out of bounds."""
    pass

class DimensionError(CrossbarError):
    """Vector or matrix dimensions do not conform."""
    pass

class IcaError(SimulatorError):
    """ICA algorithm error."""
    pass

class DegeneracyError(IcaError):
    """Singular covariance or linearly dependent weight rows."""
    pass

class ConvergenceError(IcaError):
    """Degenerate (zero-norm) fixed-point update."""
    pass

class ImageError(SimulatorError):
    """Image handling error."""
    pass

class ImageFormatError(ImageError):
    """Malformed, truncated or unsupported image file."""
    pass

class MixingError(ImageError):
    """Invalid mixing matrix or mismatched source images."""
    pass

class AlignmentError(ImageError):
    """Outputs cannot be aligned to references."""
    pass

class MetricError(SimulatorError):
    """Image-quality metric precondition violated."""
    pass

class VariationSpecError(SimulatorError):
    """Monte Carlo variation specification cannot be sampled."""
    pass

class ConfigError(SimulatorError):
    """Invalid run configuration."""
    pass

class NoReferenceError(SimulatorError):
    """A comparison was requested without reference images."""
    pass

# Utility Functions
def pearson(a: np.ndarray, b: np.ndarray) -> float:
    """Pearson correlation of two equally long signals (0 when either is constant)."""
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    da = a - a.mean()
    db = b - b.mean()
    denom = np.sqrt(np.dot(da, da) * np.dot(db, db))
    if denom == 0.0:
        return 0.0
    return float(np.dot(da, db) / denom)
