#!/usr/bin/env python3
# src/chuk_memristor_ica/devices/memristor.py
"""
Voltage-controlled memristor (VTEAM) device model.

A device is a value: its internal state is the position X of the polarised
region (meters, 0 <= X <= D). Resistance and the stored neural-network weight
are both affine functions of X/D. Writes are constant-amplitude pulses, so the
state equation integrates in closed form over each pulse.
"""

import logging
from dataclasses import dataclass

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..core.base import (
    DestructiveReadError,
    PulseError,
    ScheduleError,
    WeightRangeError,
)

logger = logging.getLogger(__name__)

WEIGHT_MAX = 100.0
NS = 1e-9
# Tolerance for back-to-back pulses whose boundaries are computed in floating point.
SCHEDULE_TOLERANCE_S = 1e-15

# ═══════════════════════════════════════════════════════════════════════════
# CALIBRATION
# ═══════════════════════════════════════════════════════════════════════════

def calibrated_rate(d: float, v: float, v_threshold: float, alpha: float,
                    width: float, fraction: float) -> float:
    """
    Rate constant for which one pulse of amplitude ``v`` and duration ``width``
    moves X by ``fraction * d`` (signed like the threshold).
    """
    if v / v_threshold <= 1.0:
        raise PulseError(f"{v} V does not cross the {v_threshold} V threshold")
    magnitude = fraction * d / (width * (v / v_threshold - 1.0) ** alpha)
    return magnitude if v_threshold > 0 else -magnitude

# One 2 ns write pulse at the demo amplitudes moves X by D/10.
DEFAULT_D = 50e-9
DEFAULT_V_ON, DEFAULT_V_OFF = -1.2, 1.2
DEFAULT_ALPHA = 3.0
V_SET, V_RESET = 1.5, -1.3
CALIBRATION_WIDTH_S = 2 * NS
CALIBRATION_FRACTION = 0.1
DEFAULT_K_OFF = calibrated_rate(DEFAULT_D, V_SET, DEFAULT_V_OFF, DEFAULT_ALPHA,
                                CALIBRATION_WIDTH_S, CALIBRATION_FRACTION)
DEFAULT_K_ON = calibrated_rate(DEFAULT_D, V_RESET, DEFAULT_V_ON, DEFAULT_ALPHA,
                               CALIBRATION_WIDTH_S, CALIBRATION_FRACTION)

# ═══════════════════════════════════════════════════════════════════════════
# DEVICE TYPES
# ═══════════════════════════════════════════════════════════════════════════

class DeviceParams(BaseModel):
    """VTEAM constants and resistance bounds of one memristor."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    r_on: float = Field(..., gt=0, description="Low-resistance state (ohm)")
    r_off: float = Field(..., gt=0, description="High-resistance state (ohm)")
    d: float = Field(DEFAULT_D, gt=0, description="Active-layer thickness (m)")
    v_on: float = Field(DEFAULT_V_ON, lt=0, description="Negative threshold voltage (V)")
    v_off: float = Field(DEFAULT_V_OFF, gt=0, description="Positive threshold voltage (V)")
    k_on: float = Field(DEFAULT_K_ON, lt=0, description="State rate constant below v_on (m/s)")
    k_off: float = Field(DEFAULT_K_OFF, gt=0, description="State rate constant above v_off (m/s)")
    alpha_on: float = Field(DEFAULT_ALPHA, ge=0, description="Nonlinearity exponent below v_on")
    alpha_off: float = Field(DEFAULT_ALPHA, ge=0, description="Nonlinearity exponent above v_off")

    @model_validator(mode="after")
    def _check_resistance_order(self) -> "DeviceParams":
        if not self.r_off > self.r_on:
            raise ValueError(f"r_off ({self.r_off}) must exceed r_on ({self.r_on})")
        return self

    @property
    def read_margin(self) -> float:
        """Largest read amplitude that can never switch the device."""
        return min(self.v_off, -self.v_on)

@dataclass(frozen=True)
class MemristorState:
    """Position X (m) of the polarised region."""
    x: float

@dataclass(frozen=True)
class Pulse:
    """Constant-amplitude voltage pulse."""
    amplitude: float
    width: float

    def __post_init__(self):
        if not self.width >= 0:
            raise PulseError(f"Pulse width must be >= 0, got {self.width}")

@dataclass(frozen=True)
class TraceSample:
    """Device observation taken at the end of a pulse."""
    time_s: float
    resistance_ohm: float
    weight: float

# ═══════════════════════════════════════════════════════════════════════════
# STATE <-> RESISTANCE <-> WEIGHT
# ═══════════════════════════════════════════════════════════════════════════

def resistance(state: MemristorState, p: DeviceParams) -> float:
    """R = (Roff - Ron) * X/D + Ron."""
    return (p.r_off - p.r_on) * (state.x / p.d) + p.r_on

def weight_from_state(state: MemristorState, p: DeviceParams) -> float:
    """w = 100 * (2X/D - 1)."""
    return WEIGHT_MAX * (2.0 * state.x / p.d - 1.0)

def state_from_weight(w: float, p: DeviceParams) -> MemristorState:
    """Inverse of :func:`weight_from_state`."""
    if not -WEIGHT_MAX <= w <= WEIGHT_MAX:
        raise WeightRangeError(f"Weight {w} outside [-{WEIGHT_MAX:g}, {WEIGHT_MAX:g}]")
    return MemristorState(x=p.d * (w / WEIGHT_MAX + 1.0) / 2.0)

def weight_from_resistance(r: float | np.ndarray, p: DeviceParams) -> float | np.ndarray:
    """Weight implied by a measured resistance under the bounds of ``p``."""
    return WEIGHT_MAX * (2.0 * (r - p.r_on) / (p.r_off - p.r_on) - 1.0)

# ═══════════════════════════════════════════════════════════════════════════
# DYNAMICS
# ═══════════════════════════════════════════════════════════════════════════

def state_rate(v: float, p: DeviceParams) -> float:
    """dX/dt of the VTEAM model; zero between the thresholds."""
    if v > p.v_off:
        return p.k_off * (v / p.v_off - 1.0) ** p.alpha_off
    if v < p.v_on:
        return p.k_on * (v / p.v_on - 1.0) ** p.alpha_on
    return 0.0

def apply_pulse(state: MemristorState, pulse: Pulse, p: DeviceParams) -> MemristorState:
    """Integrate the state equation over one constant-amplitude pulse."""
    rate = state_rate(pulse.amplitude, p)
    if rate == 0.0 or pulse.width == 0.0:
        return state
    x = min(max(state.x + rate * pulse.width, 0.0), p.d)
    return MemristorState(x=x)

def read_charge(state: MemristorState, v_read: float, t: float, p: DeviceParams) -> float:
    """Charge collected during a non-destructive read of duration ``t``."""
    if not p.v_on < v_read < p.v_off:
        raise DestructiveReadError(
            f"Read voltage {v_read} V is outside the threshold window ({p.v_on}, {p.v_off}) V"
        )
    if t < 0:
        raise PulseError(f"Read duration must be >= 0, got {t}")
    return v_read * t / resistance(state, p)

# ═══════════════════════════════════════════════════════════════════════════
# PULSE SCHEDULES
# ═══════════════════════════════════════════════════════════════════════════

def run_schedule(state: MemristorState, schedule: list[tuple[float, Pulse]],
                 p: DeviceParams) -> list[TraceSample]:
    """
    Apply a sorted, non-overlapping pulse schedule and sample (t, R, w)
    after every pulse. The first sample is the initial state at t = 0.
    """
    samples = [TraceSample(0.0, resistance(state, p), weight_from_state(state, p))]
    previous_end = None
    for start, pulse in schedule:
        if previous_end is not None and start < previous_end - SCHEDULE_TOLERANCE_S:
            raise ScheduleError(
                f"Pulse starting at {start:.3e} s overlaps the previous pulse ending at {previous_end:.3e} s"
            )
        state = apply_pulse(state, pulse, p)
        previous_end = start + pulse.width
        samples.append(TraceSample(previous_end, resistance(state, p), weight_from_state(state, p)))
    logger.debug("Schedule of %d pulses applied, final X/D = %.4f", len(schedule), state.x / p.d)
    return samples

def demo_schedule(v_set: float = V_SET, v_reset: float = V_RESET, v_read: float = 0.08,
                  write_ns: int = 2, read_ns: int = 23, block_ns: int = 500,
                  end_ns: int = 2600) -> list[tuple[float, Pulse]]:
    """
    Write/read protocol of the device demo: a write pulse followed by a read
    pulse every ``write_ns + read_ns`` ns; the write polarity starts negative
    and alternates every ``block_ns``.
    """
    schedule: list[tuple[float, Pulse]] = []
    for start_ns in range(0, end_ns, write_ns + read_ns):
        amplitude = v_reset if (start_ns // block_ns) % 2 == 0 else v_set
        schedule.append((start_ns * NS, Pulse(amplitude, write_ns * NS)))
        schedule.append(((start_ns + write_ns) * NS, Pulse(v_read, read_ns * NS)))
    return schedule

def trace_segment(trace: list[TraceSample], t_start: float, t_end: float) -> list[TraceSample]:
    """Samples whose pulse ended in the window (t_start, t_end]."""
    lo = t_start + SCHEDULE_TOLERANCE_S
    hi = t_end + SCHEDULE_TOLERANCE_S
    return [s for s in trace if lo < s.time_s <= hi]
