"""Task power model and system configuration for the tracker simulator.

Currents come from per-component bench measurements. A task's system-level
current is its base component draw plus, where applicable, the MCU active-mode
base (0.091 mA), the GPS backup domain (0.028 mA), and the capacitor leakage
of the configured part. Energies are current x duration x supply voltage.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

MCU_ACTIVE_BASE_MA = 0.091
GPS_BACKUP_MA = 0.028

# Leakage pairing for the stocked capacitor sizes (farads -> mA).
LEAKAGE_BY_CAPACITANCE = {1.0: 0.010, 2.5: 0.016, 5.0: 0.030}

# Leakage of the 5 F part used when the system-level profiles were
# characterized; composing with it reproduces the published current table.
REFERENCE_LEAKAGE_MA = 0.030

DEFAULT_V_SUPPLY = 3.3
DEFAULT_V_MAX = 5.5


@dataclass(frozen=True)
class ComponentDraw:
    """One measured component draw: who draws, how much, for how long."""

    task: str  # profile key, "" for draws not tied to a schedulable task
    component: str
    label: str
    current_ma: float
    duration_s: float | None  # None = continuous draw
    current_std_ma: float = 0.0
    duration_std_s: float = 0.0


def builtin_component_table() -> tuple[ComponentDraw, ...]:
    """All measured component draws (means; deviations kept as metadata)."""
    return (
        ComponentDraw("HotStart", "GPS", "GPS hot start", 7.5, 1.0),
        ComponentDraw("WarmStart", "GPS", "GPS warm start", 7.5, 4.0),
        ComponentDraw("EphemerisDownload", "GPS", "GPS ephemeris download", 7.5, 30.0),
        ComponentDraw("ColdStart", "GPS", "GPS cold start", 8.0, 36.118, 0.0, 1.96),
        ComponentDraw("GpsI2cWrite", "GPS", "GPS I2C write", 2.0, 0.00038),
        ComponentDraw("", "GPS", "GPS hardware backup", GPS_BACKUP_MA, None),
        ComponentDraw("Sleep", "MCU", "MCU Sleep (standby)", 0.00065, None),
        ComponentDraw("NbIot", "NB-IoT", "NB-IoT", 20.65, 7.89, 2.78, 1.66),
        ComponentDraw("AdcRead", "MCU", "ADC read", 0.311, 0.00005),
        ComponentDraw("I2cReadCoulomb", "MCU", "I2C read Coulomb counter", 0.091, 0.00023),
        ComponentDraw("", "MCU", "MCU active base", MCU_ACTIVE_BASE_MA, None),
        ComponentDraw("", "Capacitor", "Capacitor leakage", 0.030, None),
    )


@dataclass(frozen=True)
class TaskSpec:
    """Composition recipe for one schedulable task."""

    base_ma: float
    duration_s: float | None  # None = continuous (sleep, off)
    mcu_active: bool
    gps_backup: bool
    base_std_ma: float = 0.0
    duration_std_s: float = 0.0


# The full task set the scheduler can issue. Flags say which always-on
# contributions ride along with the base draw.
TASKS: dict[str, TaskSpec] = {
    "HotStart": TaskSpec(7.5, 1.0, True, False),
    "WarmStart": TaskSpec(7.5, 4.0, True, False),
    "EphemerisDownload": TaskSpec(7.5, 30.0, True, False),
    "ColdStart": TaskSpec(8.0, 36.118, True, False, 0.0, 1.96),
    "GpsI2cWrite": TaskSpec(2.0, 0.00038, True, False),
    "Sleep": TaskSpec(0.00065, None, False, True),
    "NbIot": TaskSpec(20.65, 7.89, True, True, 2.78, 1.66),
    "AdcRead": TaskSpec(0.311, 0.00005, False, True),
    "I2cReadCoulomb": TaskSpec(0.091, 0.00023, False, True),
    "TurnedOff": TaskSpec(0.0, None, False, False),
}


def compose_task_current(task: str, leakage_ma: float, base_ma: float | None = None) -> float:
    """System-level current of a task in mA, for the given capacitor leakage.

    base_ma overrides the task's measured base draw (used for jittered runs).
    """
    if task not in TASKS:
        raise KeyError(f"unknown task {task!r}")
    if leakage_ma <= 0:
        raise ValueError(f"leakage must be positive, got {leakage_ma}")
    spec = TASKS[task]
    current = spec.base_ma if base_ma is None else base_ma
    if spec.mcu_active:
        current += MCU_ACTIVE_BASE_MA
    if spec.gps_backup:
        current += GPS_BACKUP_MA
    return current + leakage_ma


def task_energy(current_ma: float, duration_s: float, v_supply: float = DEFAULT_V_SUPPLY) -> float:
    """Energy of a timed task in mJ: current x duration x supply voltage."""
    if current_ma < 0 or duration_s < 0 or v_supply <= 0:
        raise ValueError("current and duration must be >= 0, v_supply > 0")
    return current_ma * duration_s * v_supply


def safe_voltage_threshold(task_energy_mj: float, capacitance_f: float, v_min: float) -> float:
    """Lowest start voltage that covers the task from stored energy alone.

    sqrt(v_min^2 + 2 E / C): the capacitor above v_min must hold the task's
    energy with no harvesting assumed.
    """
    if task_energy_mj < 0 or capacitance_f <= 0 or v_min <= 0:
        raise ValueError("energy >= 0, capacitance > 0, v_min > 0 required")
    return math.sqrt(v_min**2 + 2.0 * (task_energy_mj / 1000.0) / capacitance_f)


@dataclass(frozen=True)
class CapacitorSpec:
    capacitance_f: float
    leakage_ma: float
    v_max: float = DEFAULT_V_MAX

    @classmethod
    def from_capacitance(cls, capacitance_f: float, v_max: float = DEFAULT_V_MAX) -> "CapacitorSpec":
        """Build a spec for a stocked size, picking its paired leakage."""
        if capacitance_f not in LEAKAGE_BY_CAPACITANCE:
            known = sorted(LEAKAGE_BY_CAPACITANCE)
            raise ValueError(f"no leakage pairing for {capacitance_f} F; stocked sizes: {known}")
        return cls(capacitance_f, LEAKAGE_BY_CAPACITANCE[capacitance_f], v_max)


@dataclass(frozen=True)
class VoltageThresholds:
    """Gate voltages: hysteresis bounds plus per-task execution minimums."""

    v_min: float = 1.8
    v_turn_on: float = 2.2
    hot_start: float = 1.9
    hot_ephemeris: float = 2.0
    warm_ephemeris: float = 2.1
    nbiot: float = 2.0
    cold_start: float | None = None  # filled by validate_config when absent


@dataclass(frozen=True)
class SystemConfig:
    capacitor: CapacitorSpec = field(default_factory=lambda: CapacitorSpec.from_capacitance(2.5))
    thresholds: VoltageThresholds = field(default_factory=VoltageThresholds)
    v_supply: float = DEFAULT_V_SUPPLY
    sense_interval_s: int | None = 60
    fix_interval_s: int | None = 120
    transmit_interval_s: int | None = 3600
    ephemeris_hot_limit_s: int = 14400  # 4 h
    ephemeris_warm_limit_s: int = 172800  # 2 days
    ephemeris_refresh_age_s: int = 10800  # 3 h
    base_tick_s: int = 60
    initial_voltage: float = 5.5
    initial_ephemeris_age_s: int = 0
    initial_backup_valid: bool = True
    combiner_efficiency: float = 0.88
    random_seed: int = 42
    task_jitter: bool = False  # draw NB-IoT/cold durations and currents per event
    payload_scaling: bool = False  # scale transmit duration with buffered bytes

    def task_current_ma(self, task: str) -> float:
        return compose_task_current(task, self.capacitor.leakage_ma)


class ConfigError(ValueError):
    """Raised when validation finds one or more invariant violations."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("; ".join(errors))


def _cold_start_energy_mj(config: SystemConfig) -> float:
    current = compose_task_current("ColdStart", config.capacitor.leakage_ma)
    return task_energy(current, TASKS["ColdStart"].duration_s, config.v_supply)


def _worst_case_stack_s(config: SystemConfig) -> float:
    """Longest possible task stack in one tick, 3-sigma if jitter is on."""
    sigma = 3.0 if config.task_jitter else 0.0
    total = 0.0
    if config.sense_interval_s is not None:
        total += TASKS["AdcRead"].duration_s
    if config.fix_interval_s is not None:
        fix = TASKS["ColdStart"].duration_s + sigma * TASKS["ColdStart"].duration_std_s
        fix = max(fix, TASKS["WarmStart"].duration_s + TASKS["EphemerisDownload"].duration_s)
        total += fix + TASKS["GpsI2cWrite"].duration_s + TASKS["I2cReadCoulomb"].duration_s
    if config.transmit_interval_s is not None:
        total += TASKS["NbIot"].duration_s + sigma * TASKS["NbIot"].duration_std_s
    return total


def validate_config(config: SystemConfig) -> SystemConfig:
    """Check every invariant; return a config with the cold threshold filled.

    Violations raise ConfigError listing each offending field. Thresholds set
    below their analytic safe bound only warn: the bound assumes zero harvest,
    so lower values are aggressive rather than wrong.
    """
    errors: list[str] = []
    cap = config.capacitor
    thr = config.thresholds

    if cap.capacitance_f <= 0:
        errors.append(f"capacitance must be positive, got {cap.capacitance_f}")
    if cap.leakage_ma <= 0:
        errors.append(f"leakage_ma must be positive, got {cap.leakage_ma}")
    if cap.v_max <= 0:
        errors.append(f"v_max must be positive, got {cap.v_max}")
    if config.v_supply <= 0:
        errors.append(f"v_supply must be positive, got {config.v_supply}")
    if config.base_tick_s < 1:
        errors.append(f"base_tick_s must be >= 1, got {config.base_tick_s}")

    if not 0 < thr.v_min < thr.v_turn_on:
        errors.append(f"need 0 < v_min < v_turn_on, got {thr.v_min} / {thr.v_turn_on}")
    named = {
        "hot_start": thr.hot_start,
        "hot_ephemeris": thr.hot_ephemeris,
        "warm_ephemeris": thr.warm_ephemeris,
        "nbiot": thr.nbiot,
    }
    if thr.cold_start is not None:
        named["cold_start"] = thr.cold_start
    for name, value in named.items():
        if not thr.v_min <= value < cap.v_max:
            errors.append(f"threshold {name}={value} outside [v_min, v_max) = [{thr.v_min}, {cap.v_max})")
    if config.initial_voltage > cap.v_max:
        errors.append(f"initial_voltage {config.initial_voltage} exceeds v_max {cap.v_max}")
    if config.initial_voltage < 0:
        errors.append(f"initial_voltage must be >= 0, got {config.initial_voltage}")

    for name in ("sense_interval_s", "fix_interval_s", "transmit_interval_s"):
        value = getattr(config, name)
        if value is None:
            continue
        if value <= 0:
            errors.append(f"{name}={value} must be positive (or None to disable)")
        elif value % config.base_tick_s != 0:
            errors.append(f"{name}={value} not a multiple of base tick {config.base_tick_s}")

    if not 0 < config.ephemeris_refresh_age_s < config.ephemeris_hot_limit_s:
        errors.append(
            f"need 0 < refresh_age < hot_limit, got {config.ephemeris_refresh_age_s} / {config.ephemeris_hot_limit_s}"
        )
    if config.ephemeris_hot_limit_s >= config.ephemeris_warm_limit_s:
        errors.append(
            f"need hot_limit < warm_limit, got {config.ephemeris_hot_limit_s} / {config.ephemeris_warm_limit_s}"
        )
    if not 0 < config.combiner_efficiency <= 1:
        errors.append(f"combiner_efficiency must be in (0, 1], got {config.combiner_efficiency}")
    if config.initial_ephemeris_age_s < 0:
        errors.append(f"initial_ephemeris_age_s must be >= 0, got {config.initial_ephemeris_age_s}")

    if config.base_tick_s >= 1:
        stack = _worst_case_stack_s(config)
        if stack > config.base_tick_s:
            errors.append(
                f"worst-case task stack {stack:.3f} s exceeds base_tick_s {config.base_tick_s}"
            )

    if errors:
        raise ConfigError(errors)

    cold = thr.cold_start
    if cold is None:
        # Safe bound for the costliest start mode, rounded up to 0.01 V.
        bound = safe_voltage_threshold(_cold_start_energy_mj(config), cap.capacitance_f, thr.v_min)
        cold = math.ceil(bound * 100.0 - 1e-9) / 100.0
        if not thr.v_min <= cold < cap.v_max:
            raise ConfigError([f"derived cold_start threshold {cold} outside [v_min, v_max)"])

    validated = replace(config, thresholds=replace(thr, cold_start=cold))

    advisory = {
        "hot_start": ("HotStart", validated.thresholds.hot_start),
        "hot_ephemeris": ("HotStart+EphemerisDownload", validated.thresholds.hot_ephemeris),
        "warm_ephemeris": ("WarmStart+EphemerisDownload", validated.thresholds.warm_ephemeris),
        "nbiot": ("NbIot", validated.thresholds.nbiot),
        "cold_start": ("ColdStart", validated.thresholds.cold_start),
    }
    for name, (tasks, value) in advisory.items():
        energy = 0.0
        for part in tasks.split("+"):
            current = compose_task_current(part, cap.leakage_ma)
            energy += task_energy(current, TASKS[part].duration_s, validated.v_supply)
        bound = safe_voltage_threshold(energy, cap.capacitance_f, thr.v_min)
        if value < bound - 1e-12:
            warnings.warn(
                f"threshold {name}={value:.3f} V is below its safe bound {bound:.4f} V",
                stacklevel=2,
            )
    return validated
