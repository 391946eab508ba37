#!/usr/bin/env python3
# src/chuk_memristor_ica/devices/crossbar.py
"""
Memristor crossbar array.

Rows carry pulse-width modulated inputs, columns collect charge. Every
operation addresses exactly one cell at a time, so no super-threshold voltage
ever reaches an unselected device (no sneak paths).

The array keeps two views of its devices:

- ``nominal``: the parameters the programming and read-out circuitry assume
  (weight mapping, charge-to-weight reconstruction, write pulse widths);
- per-cell parameters: what each physical device actually obeys.

Both are identical unless device-to-device variation has been sampled.
"""

import logging
from dataclasses import dataclass

import numpy as np

from ..core.base import (
    CrossbarError,
    CrossbarIndexError,
    DimensionError,
    WeightRangeError,
)
from .memristor import (
    WEIGHT_MAX,
    DeviceParams,
    MemristorState,
    Pulse,
    apply_pulse,
    read_charge,
    resistance,
    state_from_weight,
    state_rate,
    weight_from_resistance,
    weight_from_state,
)

logger = logging.getLogger(__name__)

@dataclass
class CrossbarCell:
    """One device at a row/column intersection."""
    state: MemristorState
    params: DeviceParams

class Crossbar:
    """
    n x m memristor array with PWM inputs, per-cell charge read-out and
    single-cell write pulses.
    """

    def __init__(self, rows: int, cols: int, nominal: DeviceParams,
                 cell_params: list[list[DeviceParams]] | None = None,
                 v_read: float = 0.5, v_write_pos: float = 2.0, v_write_neg: float = -2.0,
                 t0: float = 100e-6, verify_passes: int = 0, verify_tol: float = 1e-9):
        if rows < 1 or cols < 1:
            raise CrossbarError(f"Crossbar needs positive dimensions, got {rows}x{cols}")
        if t0 <= 0:
            raise CrossbarError(f"Pulse-width time constant must be positive, got {t0}")
        if cell_params is None:
            cell_params = [[nominal] * cols for _ in range(rows)]
        if len(cell_params) != rows or any(len(row) != cols for row in cell_params):
            raise DimensionError(f"Cell parameter grid does not match {rows}x{cols}")

        self.rows = rows
        self.cols = cols
        self.nominal = nominal
        self.v_read = v_read
        self.v_write_pos = v_write_pos
        self.v_write_neg = v_write_neg
        self.t0 = t0
        self.verify_passes = verify_passes
        self.verify_tol = verify_tol
        self.write_pulses = 0

        midpoint = state_from_weight(0.0, nominal)
        self.cells = [
            [CrossbarCell(MemristorState(min(midpoint.x, p.d)), p) for p in row]
            for row in cell_params
        ]
        self._check_voltages()

    def _check_voltages(self) -> None:
        params = [cell.params for row in self.cells for cell in row] + [self.nominal]
        if abs(self.v_read) >= min(p.read_margin for p in params):
            raise CrossbarError(f"Read voltage {self.v_read} V would disturb stored weights")
        if self.v_write_pos <= max(p.v_off for p in params):
            raise CrossbarError(f"Positive write voltage {self.v_write_pos} V is below v_off")
        if self.v_write_neg >= min(p.v_on for p in params):
            raise CrossbarError(f"Negative write voltage {self.v_write_neg} V is above v_on")

    def _cell(self, i: int, j: int) -> CrossbarCell:
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise CrossbarIndexError(f"Cell ({i}, {j}) outside {self.rows}x{self.cols} array")
        return self.cells[i][j]

    def _inputs(self, c) -> np.ndarray:
        c = np.asarray(c, dtype=np.float64)
        if c.shape[0] != self.rows:
            raise DimensionError(f"Input has {c.shape[0]} entries, crossbar has {self.rows} rows")
        if np.any(c < 0):
            raise WeightRangeError("Crossbar inputs must be non-negative pulse magnitudes")
        return c

    # ═══════════════════════════════════════════════════════════════════════
    # READ PATH
    # ═══════════════════════════════════════════════════════════════════════

    def pulse_width_for_input(self, c_i: float) -> float:
        """t_i = t0 * c_i."""
        if c_i < 0:
            raise WeightRangeError(f"Input magnitude must be >= 0, got {c_i}")
        return self.t0 * c_i

    def cell_charge(self, i: int, j: int, c_i: float) -> float:
        """Charge of a single selected cell driven at v_read for t0 * c_i."""
        cell = self._cell(i, j)
        return read_charge(cell.state, self.v_read, self.pulse_width_for_input(c_i), cell.params)

    def column_charge(self, j: int, c) -> float:
        """Column charge Q_j = sum_i v_read t_i / R_ij."""
        c = self._inputs(c)
        return float(sum(self.cell_charge(i, j, c[i]) for i in range(self.rows)))

    def _recovered_weight(self, charge: float, width: float) -> float:
        # charge -> resistance -> weight, with the nominal bounds of the read-out circuit
        return float(weight_from_resistance(self.v_read * width / charge, self.nominal))

    def read_output(self, j: int, c) -> float:
        """y_j = sum_i w_ij c_i, each w_ij reconstructed from its own cell charge."""
        c = self._inputs(c)
        y = 0.0
        for i in range(self.rows):
            if c[i] == 0:
                continue
            width = self.pulse_width_for_input(c[i])
            y += self._recovered_weight(self.cell_charge(i, j, c[i]), width) * c[i]
        return y

    def read_outputs(self, inputs: np.ndarray) -> np.ndarray:
        """
        Batch form of :meth:`read_output`: ``inputs`` is rows x samples,
        the result is cols x samples.
        """
        inputs = self._inputs(np.atleast_2d(inputs))
        widths = self.t0 * inputs
        span = self.nominal.r_off - self.nominal.r_on
        outputs = np.zeros((self.cols, inputs.shape[1]))
        for i in range(self.rows):
            active = inputs[i] > 0
            for j in range(self.cols):
                cell = self._cell(i, j)
                charge = self.v_read * widths[i] / resistance(cell.state, cell.params)
                r_seen = np.divide(self.v_read * widths[i], charge,
                                   out=np.full_like(charge, self.nominal.r_on), where=active)
                w = WEIGHT_MAX * (2.0 * (r_seen - self.nominal.r_on) / span - 1.0)
                outputs[j] += np.where(active, w * inputs[i], 0.0)
        return outputs

    def read_weights(self) -> np.ndarray:
        """Recovered n x m weight matrix (unit-input read of every cell)."""
        weights = np.empty((self.rows, self.cols))
        for i in range(self.rows):
            for j in range(self.cols):
                weights[i, j] = self._recovered_weight(self.cell_charge(i, j, 1.0), self.t0)
        return weights

    def weight_table(self) -> list[dict]:
        """
        Rows of ``row, col, weight, state_weight, resistance_ohm``: the weight the
        read-out recovers next to the one implied by the cell's own state.
        """
        weights = self.read_weights()
        state_weights = self.stored_weights()
        return [
            {
                'row': i,
                'col': j,
                'weight': float(weights[i, j]),
                'state_weight': float(state_weights[i, j]),
                'resistance_ohm': resistance(self.cells[i][j].state, self.cells[i][j].params),
            }
            for i in range(self.rows)
            for j in range(self.cols)
        ]

    # ═══════════════════════════════════════════════════════════════════════
    # WRITE PATH
    # ═══════════════════════════════════════════════════════════════════════

    def _drive(self, i: int, j: int, pulse: Pulse) -> None:
        # the only place a super-threshold pulse reaches a device: one cell per call
        cell = self.cells[i][j]
        cell.state = apply_pulse(cell.state, pulse, cell.params)
        self.write_pulses += 1

    def program_weight(self, i: int, j: int, target_w: float) -> Pulse | None:
        """
        Move cell (i, j) to ``target_w`` with one write pulse whose width
        inverts the state equation under the nominal device constants.
        Returns the applied pulse, or None when no pulse was needed.
        """
        cell = self._cell(i, j)
        target = state_from_weight(target_w, self.nominal)
        delta = target.x - cell.state.x
        if delta == 0.0:
            return None
        amplitude = self.v_write_pos if delta > 0 else self.v_write_neg
        width = abs(delta) / abs(state_rate(amplitude, self.nominal))
        pulse = Pulse(amplitude, width)
        self._drive(i, j, pulse)
        logger.debug("Programmed cell (%d, %d) to w=%.6f with %.3e s at %+.2f V",
                     i, j, target_w, width, amplitude)
        return pulse

    def verify_weight(self, i: int, j: int, target_w: float, command_w: float) -> float:
        """
        Program-and-verify: read the cell back and re-program with the
        command shifted by the read-back error, up to ``verify_passes`` times.
        Returns the last command issued.
        """
        for _ in range(self.verify_passes):
            error = target_w - self._recovered_weight(self.cell_charge(i, j, 1.0), self.t0)
            if abs(error) <= self.verify_tol:
                break
            command_w = min(max(command_w + error, -WEIGHT_MAX), WEIGHT_MAX)
            self.program_weight(i, j, command_w)
        return command_w

    def write_weights(self, weights) -> None:
        """Program every cell, one at a time."""
        weights = np.asarray(weights, dtype=np.float64)
        if weights.shape != (self.rows, self.cols):
            raise DimensionError(f"Weight matrix {weights.shape} does not match {self.rows}x{self.cols}")
        if np.any(np.abs(weights) > WEIGHT_MAX):
            raise WeightRangeError(f"Weights must lie in [-{WEIGHT_MAX:g}, {WEIGHT_MAX:g}]")
        for i in range(self.rows):
            for j in range(self.cols):
                target = float(weights[i, j])
                self.program_weight(i, j, target)
                if self.verify_passes:
                    self.verify_weight(i, j, target, target)

    def stored_weights(self) -> np.ndarray:
        """Weights implied by the physical states, each mapped with its own cell thickness."""
        return np.array([[weight_from_state(c.state, c.params) for c in row] for row in self.cells])
