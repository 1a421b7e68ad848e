"""Device behavior: GPS mode selection, task scheduling, power hysteresis.

The device sleeps between ticks and wakes for three periodic activities:
voltage sensing, GPS fixes (with attached Coulomb-counter read and position
write), and bulk NB-IoT uploads. Which GPS start mode a fix uses depends on
how stale the ephemeris is and whether the backup domain survived since the
last fix; every activity is gated on a minimum capacitor voltage.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .energy_model import SystemConfig, VoltageThresholds

SENSE = "sense"
FIX = "fix"
TRANSMIT = "transmit"


class Power(enum.Enum):
    ON = "On"
    OFF = "Off"


class GpsMode(enum.Enum):
    HOT = "Hot"
    HOT_EPHEMERIS = "HotWithEphemeris"
    WARM_EPHEMERIS = "WarmWithEphemeris"
    COLD = "Cold"


@dataclass(frozen=True)
class GpsDecision:
    """Outcome of mode selection: a mode to run, or a skip with its reason."""

    mode: GpsMode | None
    skip_reason: str | None = None

    @property
    def skipped(self) -> bool:
        return self.mode is None


@dataclass
class GpsContext:
    """Ephemeris freshness state. age_s is None whenever the backup domain
    (RTC + backup RAM) has lost power, which forces the next fix cold."""

    ephemeris_age_s: int | None = 0
    backup_valid: bool = True

    def __post_init__(self) -> None:
        if not self.backup_valid:
            self.ephemeris_age_s = None

    def invalidate(self) -> None:
        self.backup_valid = False
        self.ephemeris_age_s = None

    def advance(self, seconds: int) -> None:
        if self.ephemeris_age_s is not None:
            self.ephemeris_age_s += seconds


@dataclass(frozen=True)
class DataSample:
    """One buffered record: position plus the Coulomb delta since last fix."""

    POSITION_BYTES = 12  # 8 lon/lat + 4 GPS time
    COULOMB_BYTES = 4
    WIRE_BYTES = POSITION_BYTES + COULOMB_BYTES

    time_s: int
    coulomb_c: float


@dataclass
class DeviceState:
    power: Power
    gps: GpsContext
    buffer: list[DataSample] = field(default_factory=list)
    coulomb_accumulator: float = 0.0
    clock: int = 0

    @classmethod
    def initial(cls, config: SystemConfig, power_on: bool) -> "DeviceState":
        # An unpowered start means the backup domain never held state.
        if power_on and config.initial_backup_valid:
            gps = GpsContext(config.initial_ephemeris_age_s, True)
        else:
            gps = GpsContext(None, False)
        return cls(Power.ON if power_on else Power.OFF, gps)


def select_gps_mode(
    gps: GpsContext, voltage: float, thresholds: VoltageThresholds, config: SystemConfig
) -> GpsDecision:
    """Pick the start mode for a due fix, or skip it on low voltage.

    Stale-to-fresh: cold when the backup domain is gone or the ephemeris is
    older than the warm limit; warm (always with a download) in between; hot
    within the hot limit, upgraded to hot-with-download once the age passes
    the refresh age, falling back to plain hot if the download threshold is
    not met but the hot one is.
    """
    skip = GpsDecision(None, "low-voltage")
    age = gps.ephemeris_age_s
    if not gps.backup_valid or age is None or age > config.ephemeris_warm_limit_s:
        if voltage >= thresholds.cold_start:
            return GpsDecision(GpsMode.COLD)
        return skip
    if age <= config.ephemeris_hot_limit_s:
        if age >= config.ephemeris_refresh_age_s and voltage >= thresholds.hot_ephemeris:
            return GpsDecision(GpsMode.HOT_EPHEMERIS)
        if voltage >= thresholds.hot_start:
            return GpsDecision(GpsMode.HOT)
        return skip
    if voltage >= thresholds.warm_ephemeris:
        return GpsDecision(GpsMode.WARM_EPHEMERIS)
    return skip


def due_tasks(clock: int, config: SystemConfig) -> list[str]:
    """Activities due this tick, in execution order. Disabled intervals
    (None) never fire; everything fires at clock 0."""
    if clock % config.base_tick_s != 0:
        raise ValueError(f"clock {clock} not on the {config.base_tick_s} s tick grid")
    due = []
    for name, interval in (
        (SENSE, config.sense_interval_s),
        (FIX, config.fix_interval_s),
        (TRANSMIT, config.transmit_interval_s),
    ):
        if interval is not None and clock % interval == 0:
            due.append(name)
    return due


def on_fix_success(state: DeviceState, mode: GpsMode, coulomb_value: float) -> None:
    """Record the sample and refresh the ephemeris bookkeeping.

    Any successful fix revives the backup domain. Modes that download orbit
    data (and cold, which acquires it from scratch) reset the age; a plain
    hot fix leaves it running.
    """
    state.buffer.append(DataSample(state.clock, coulomb_value))
    state.gps.backup_valid = True
    if mode in (GpsMode.HOT_EPHEMERIS, GpsMode.WARM_EPHEMERIS, GpsMode.COLD):
        state.gps.ephemeris_age_s = 0
    elif state.gps.ephemeris_age_s is None:
        state.gps.ephemeris_age_s = 0


def read_coulomb(state: DeviceState) -> float:
    """Drain the charge accumulated since the previous read, in coulombs."""
    value = state.coulomb_accumulator
    state.coulomb_accumulator = 0.0
    return value


def payload_bytes(samples: int) -> int:
    """Upload size for a buffer of samples; 16 bytes each."""
    if samples < 0:
        raise ValueError(f"sample count must be >= 0, got {samples}")
    return DataSample.WIRE_BYTES * samples


def on_depletion(state: DeviceState) -> None:
    """Voltage fell below v_min: power down, backup domain lost, buffer kept."""
    state.power = Power.OFF
    state.gps.invalidate()


def on_recovery(state: DeviceState) -> None:
    """Voltage recovered to v_turn_on at a tick boundary: resume scheduling."""
    state.power = Power.ON
