"""Closed-form supercapacitor voltage dynamics.

A task is a resistive load R_eq = V_supply / I_task; together with a constant
harvest current I_H the voltage follows a first-order linear ODE whose exact
solution over a segment of length dt is

    V' = I_H R_eq + (V - I_H R_eq) exp(-dt / (R_eq C))

Everything here is built on that solution: stepping, analytic crossing times,
and closed-form energy integrals for the ledger.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .energy_model import CapacitorSpec


@dataclass
class CapacitorState:
    spec: CapacitorSpec
    voltage: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.voltage <= self.spec.v_max + 1e-12:
            raise ValueError(f"voltage {self.voltage} outside [0, {self.spec.v_max}]")


@dataclass(frozen=True)
class Segment:
    """Constant-condition stretch: harvest current, load resistance, duration."""

    harvest_current: float  # amperes
    equivalent_resistance: float  # ohms
    duration: float  # seconds

    def __post_init__(self) -> None:
        if self.duration < 0:
            raise ValueError(f"duration must be >= 0, got {self.duration}")
        if self.equivalent_resistance <= 0:
            raise ValueError(f"resistance must be positive, got {self.equivalent_resistance}")
        if self.harvest_current < 0:
            raise ValueError(f"harvest current must be >= 0, got {self.harvest_current}")


def equivalent_resistance(v_supply: float, task_current_ma: float) -> float:
    """Load resistance of a task in ohms, from its supply-referred current."""
    if task_current_ma <= 0:
        raise ValueError(f"task current must be positive, got {task_current_ma}")
    return v_supply / (task_current_ma * 1e-3)


def step_voltage(state: CapacitorState, segment: Segment) -> tuple[float, float | None]:
    """Advance one segment; returns (new voltage, clamp crossing time or None).

    The new voltage is capped at v_max. When the unclamped trajectory would
    cross v_max inside the segment, the crossing time (seconds from segment
    start) comes back so callers can account the discarded harvest.
    """
    v_max = state.spec.v_max
    asymptote = segment.harvest_current * segment.equivalent_resistance
    tau = segment.equivalent_resistance * state.spec.capacitance_f
    raw = asymptote + (state.voltage - asymptote) * math.exp(-segment.duration / tau)
    if raw <= v_max:
        return raw, None
    if state.voltage >= v_max:
        return v_max, 0.0
    crossing = tau * math.log((state.voltage - asymptote) / (v_max - asymptote))
    return v_max, crossing


def time_to_voltage(
    state: CapacitorState, harvest_current: float, resistance: float, target: float
) -> float | None:
    """Seconds until the trajectory reaches target, or None if it never does.

    The solution moves monotonically from V toward I_H R_eq, so the target is
    reachable iff it lies between the two (asymptote excluded).
    """
    if target <= 0:
        raise ValueError(f"target must be positive, got {target}")
    if resistance <= 0:
        raise ValueError(f"resistance must be positive, got {resistance}")
    v = state.voltage
    if target == v:
        return 0.0
    asymptote = harvest_current * resistance
    # Reachable only strictly between V and the asymptote.
    if not (min(v, asymptote) < target < max(v, asymptote)) :
        return None
    tau = resistance * state.spec.capacitance_f
    return tau * math.log((v - asymptote) / (target - asymptote))


def stored_energy(state: CapacitorState) -> float:
    """Energy held by the capacitor in joules: half C V squared."""
    return 0.5 * state.spec.capacitance_f * state.voltage**2


def integrate_segment(
    v0: float, harvest_current: float, resistance: float, capacitance: float, duration: float
) -> tuple[float, float, float]:
    """Exact energy bookkeeping over one unclamped segment.

    Returns (end voltage, harvested joules, consumed joules) where
    harvested = I_H * integral(V dt) and consumed = integral(V^2 / R dt),
    both in closed form. Their difference equals the stored-energy change,
    which is what makes the ledger a real check rather than bookkeeping
    that balances by construction.
    """
    if duration == 0.0:
        return v0, 0.0, 0.0
    tau = resistance * capacitance
    a = harvest_current * resistance  # asymptote
    b = v0 - a
    x = duration / tau
    em1 = -math.expm1(-x)  # 1 - exp(-x), stable for tiny x
    em2 = -math.expm1(-2.0 * x)
    v_end = a + b * math.exp(-x)
    integral_v = a * duration + b * tau * em1
    integral_v2 = a * a * duration + 2.0 * a * b * tau * em1 + b * b * (tau / 2.0) * em2
    return v_end, harvest_current * integral_v, integral_v2 / resistance
