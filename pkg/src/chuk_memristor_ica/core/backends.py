#!/usr/bin/env python3
# chuk_memristor_ica/core/backends.py
"""
Weight backends for the ICA algorithms.

A backend stores the m x n unmixing matrix and evaluates y = W c for a batch
of samples. The ideal backend does this in floating point; the crossbar
backend stores W transposed in a memristor array (inputs on rows, outputs on
columns) and computes the products from read charges.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from ..devices.crossbar import Crossbar
from ..devices.memristor import WEIGHT_MAX, resistance
from .base import DimensionError

logger = logging.getLogger(__name__)

@dataclass
class CellTraceRow:
    """State of one crossbar cell after a write cycle, seen through one traced sample."""
    cycle: int
    row: int
    col: int
    weight: float           # device units, -100..100
    resistance_ohm: float
    charge_c: float         # charge collected for the traced sample
    y: float                # output of the traced sample on this column

class WeightBackend(ABC):
    """Interface shared by the ideal and crossbar weight stores."""

    @abstractmethod
    def write_weights(self, weights: np.ndarray) -> None:
        """Store an m x n weight matrix."""
        pass

    @abstractmethod
    def read_weights(self) -> np.ndarray:
        """Return the stored m x n weight matrix as the backend sees it."""
        pass

    @abstractmethod
    def forward(self, inputs: np.ndarray) -> np.ndarray:
        """Compute W @ inputs for an n x samples batch."""
        pass

class IdealBackend(WeightBackend):
    """Floating-point weight store."""

    def __init__(self, n_outputs: int, n_inputs: int):
        self.shape = (n_outputs, n_inputs)
        self._weights = np.zeros(self.shape)

    def write_weights(self, weights: np.ndarray) -> None:
        weights = np.asarray(weights, dtype=np.float64)
        if weights.shape != self.shape:
            raise DimensionError(f"Expected {self.shape} weights, got {weights.shape}")
        self._weights = weights.copy()

    def read_weights(self) -> np.ndarray:
        return self._weights.copy()

    def forward(self, inputs: np.ndarray) -> np.ndarray:
        return self._weights @ np.atleast_2d(inputs)

class CrossbarBackend(WeightBackend):
    """
    Weight store backed by a memristor crossbar.

    Weights are multiplied by ``scale`` before programming and divided back on
    read, and clipped to the device range. Signed inputs are shifted by a
    per-channel offset so every pulse width is non-negative; the offset's
    contribution is read from the array and subtracted, which is exact because
    the read-out is linear in the inputs.

    With ``trace_sample`` set, the first forward pass after every write
    cycle records each cell's stored weight, resistance, the charge it
    collects for that sample and the sample's output (``cell_trace``).
    """

    def __init__(self, crossbar: Crossbar, scale: float = 1.0, trace_sample: Optional[int] = None):
        if scale <= 0:
            raise ValueError(f"Weight scale must be positive, got {scale}")
        self.crossbar = crossbar
        self.scale = scale
        self.shape = (crossbar.cols, crossbar.rows)
        self.clipped = 0
        self.writes = 0
        self.trace_sample = trace_sample
        self.cell_trace: list[CellTraceRow] = []
        self._traced_cycle = 0

    def write_weights(self, weights: np.ndarray) -> None:
        weights = np.asarray(weights, dtype=np.float64)
        if weights.shape != self.shape:
            raise DimensionError(f"Expected {self.shape} weights, got {weights.shape}")
        scaled = weights * self.scale
        if np.any(np.abs(scaled) > WEIGHT_MAX):
            self.clipped += 1
            logger.warning("Clipping %d weight(s) to the device range [-%g, %g]",
                           int(np.sum(np.abs(scaled) > WEIGHT_MAX)), WEIGHT_MAX, WEIGHT_MAX)
            scaled = np.clip(scaled, -WEIGHT_MAX, WEIGHT_MAX)
        self.crossbar.write_weights(scaled.T)
        self.writes += 1

    def read_weights(self) -> np.ndarray:
        return self.crossbar.read_weights().T / self.scale

    def forward(self, inputs: np.ndarray) -> np.ndarray:
        inputs = np.atleast_2d(np.asarray(inputs, dtype=np.float64))
        offsets = np.maximum(0.0, -inputs.min(axis=1))
        pulses = inputs + offsets[:, None]
        shifted = self.crossbar.read_outputs(pulses)
        if np.any(offsets > 0):
            shifted = shifted - self.crossbar.read_outputs(offsets[:, None])
        outputs = shifted / self.scale
        if self._tracing(inputs.shape[1]):
            self._record_cells(pulses[:, self.trace_sample], outputs[:, self.trace_sample])
        return outputs

    def _tracing(self, samples: int) -> bool:
        return (self.trace_sample is not None and self.trace_sample < samples
                and self.writes > self._traced_cycle)

    def _record_cells(self, pulses: np.ndarray, outputs: np.ndarray) -> None:
        weights = self.crossbar.read_weights()
        for i in range(self.crossbar.rows):
            for j in range(self.crossbar.cols):
                cell = self.crossbar.cells[i][j]
                self.cell_trace.append(CellTraceRow(
                    cycle=self.writes,
                    row=i,
                    col=j,
                    weight=float(weights[i, j]),
                    resistance_ohm=resistance(cell.state, cell.params),
                    charge_c=self.crossbar.cell_charge(i, j, float(pulses[i])),
                    y=float(outputs[j]),
                ))
        self._traced_cycle = self.writes

    def cell_trace_rows(self) -> list[dict]:
        return [asdict(row) for row in self.cell_trace]

def backend_forward(backend: WeightBackend, weights: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Store ``weights`` on ``backend`` and evaluate y = W c."""
    backend.write_weights(weights)
    return backend.forward(c)
