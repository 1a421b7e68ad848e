"""Harvested-current sources: solar conversion, kinetic synthesis, combining.

Solar input is an irradiance trace (measured CSV or synthetic); the conversion
chain is panel area x efficiency x incidence factor / supply voltage x PMIC
efficiency. Kinetic input is a synthesized wolf-activity pattern calibrated so
every simulated day delivers a fixed energy budget. Both feed a combiner with
its own efficiency factor.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

from .energy_model import DEFAULT_V_SUPPLY

MINUTES_PER_DAY = 1440
DEFAULT_COMBINER_EFFICIENCY = 0.88

IRRADIANCE_HEADER = ["timestamp", "irradiance_wm2"]
HARVEST_HEADER = ["t_s", "solar_a", "kinetic_a", "combined_a"]


class TraceError(ValueError):
    """Malformed or inconsistent trace data."""


@dataclass
class IrradianceTrace:
    start_epoch_s: int
    resolution_s: int
    samples: np.ndarray  # W/m^2
    gaps_filled: int = 0  # hold-last repairs applied at load time

    def __post_init__(self) -> None:
        self.samples = np.asarray(self.samples, dtype=float)
        if self.resolution_s <= 0:
            raise TraceError(f"resolution must be positive, got {self.resolution_s}")
        if self.samples.size and float(self.samples.min()) < 0:
            index = int(np.argmin(self.samples))
            raise TraceError(f"negative irradiance {self.samples[index]} at index {index}")


@dataclass
class HarvestTrace:
    start_epoch_s: int
    resolution_s: int
    solar_a: np.ndarray
    kinetic_a: np.ndarray
    combined_a: np.ndarray

    def __post_init__(self) -> None:
        self.solar_a = np.asarray(self.solar_a, dtype=float)
        self.kinetic_a = np.asarray(self.kinetic_a, dtype=float)
        self.combined_a = np.asarray(self.combined_a, dtype=float)
        lengths = {self.solar_a.size, self.kinetic_a.size, self.combined_a.size}
        if len(lengths) != 1:
            raise TraceError(f"source series lengths differ: {sorted(lengths)}")
        for name, series in (("solar", self.solar_a), ("kinetic", self.kinetic_a), ("combined", self.combined_a)):
            if series.size and float(series.min()) < 0:
                raise TraceError(f"negative {name} current in trace")

    def __len__(self) -> int:
        return int(self.combined_a.size)

    @property
    def duration_s(self) -> int:
        return len(self) * self.resolution_s

    @classmethod
    def build(
        cls,
        solar_a: np.ndarray,
        kinetic_a: np.ndarray,
        efficiency: float = DEFAULT_COMBINER_EFFICIENCY,
        start_epoch_s: int = 0,
        resolution_s: int = 60,
    ) -> "HarvestTrace":
        combined = combine_sources(solar_a, kinetic_a, efficiency)
        return cls(start_epoch_s, resolution_s, np.asarray(solar_a, float), np.asarray(kinetic_a, float), combined)


@dataclass(frozen=True)
class SolarChain:
    """Irradiance-to-current conversion factors of the solar path."""

    panel_area_m2: float = 0.0016  # 40 x 40 mm
    panel_efficiency: float = 0.185
    cosine_factor: float = 0.5  # static stand-in for angle of incidence
    pmic_efficiency: float = 0.85
    v_supply: float = DEFAULT_V_SUPPLY

    @property
    def power_factor(self) -> float:
        """W of panel output per W/m^2 of irradiance."""
        return self.panel_area_m2 * self.panel_efficiency * self.cosine_factor

    @property
    def current_factor(self) -> float:
        """A of harvest current per W/m^2 of irradiance, PMIC included."""
        return self.power_factor / self.v_supply * self.pmic_efficiency


@dataclass(frozen=True)
class SolarProfile:
    """Synthetic clear-sky day: half-sine between sunrise and sunset.

    The winter defaults (08:30 sunrise, 16:45 sunset, 300 W/m^2 peak) are a
    short-day stand-in, not measured values. cloud_amplitude > 0 modulates the
    sky with a seeded AR(1) attenuation in [1 - amplitude, 1].
    """

    sunrise_min: int = 510
    sunset_min: int = 1005
    peak_wm2: float = 300.0
    cloud_amplitude: float = 0.0
    cloud_correlation_min: float = 120.0
    seed: int = 42


@dataclass(frozen=True)
class ActivityProfile:
    """Daily movement pattern: four periods, energy weights, bout texture.

    The weights are assumptions (crepuscular animal: most activity at dawn and
    dusk); only their sum is constrained. Period starts are local minutes; the
    last period wraps past midnight.
    """

    period_starts_min: tuple[int, int, int, int] = (300, 540, 1020, 1260)  # dawn/day/dusk/night
    weights: tuple[float, float, float, float] = (0.35, 0.15, 0.35, 0.15)
    daily_energy_j: float = 13.07
    mean_bout_min: float = 20.0
    duty: tuple[float, float, float, float] = (0.5, 0.2, 0.5, 0.15)
    seed: int = 42

    def __post_init__(self) -> None:
        if len(self.period_starts_min) != 4 or len(self.weights) != 4 or len(self.duty) != 4:
            raise ValueError("profile needs exactly four periods")
        if any(w < 0 for w in self.weights):
            raise ValueError(f"weights must be >= 0, got {self.weights}")
        if abs(sum(self.weights) - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1, got {sum(self.weights)}")
        starts = self.period_starts_min
        if sorted(starts) != list(starts) or len(set(starts)) != 4:
            raise ValueError(f"period starts must be strictly increasing, got {starts}")
        if not all(0 <= s < MINUTES_PER_DAY for s in starts):
            raise ValueError(f"period starts must be within a day, got {starts}")
        if self.daily_energy_j < 0:
            raise ValueError(f"daily energy must be >= 0, got {self.daily_energy_j}")
        if self.mean_bout_min < 1:
            raise ValueError(f"mean bout must be >= 1 minute, got {self.mean_bout_min}")
        if any(not 0 < d <= 1 for d in self.duty):
            raise ValueError(f"duty fractions must be in (0, 1], got {self.duty}")

    def period_of_minute(self, minute_of_day: int) -> int:
        """0..3 for the period containing this local minute."""
        starts = self.period_starts_min
        for p in range(3, -1, -1):
            if minute_of_day >= starts[p]:
                return p
        return 3  # before the first start: tail of the wrapped last period


def solar_current_from_irradiance(trace: IrradianceTrace, chain: SolarChain) -> np.ndarray:
    """Map each irradiance sample to harvest current through the chain."""
    samples = trace.samples
    if samples.size and float(samples.min()) < 0:
        index = int(np.argmin(samples))
        raise TraceError(f"negative irradiance {samples[index]} at index {index}")
    return samples * chain.current_factor


def generate_synthetic_irradiance(
    days: int, profile: SolarProfile = SolarProfile(), start_epoch_s: int = 0
) -> IrradianceTrace:
    """Per-minute synthetic irradiance: zero at night, attenuated half-sine by day."""
    if days < 1:
        raise ValueError(f"days must be >= 1, got {days}")
    if profile.sunrise_min >= profile.sunset_min:
        raise ValueError(f"sunrise {profile.sunrise_min} must precede sunset {profile.sunset_min}")
    if not 0.0 <= profile.cloud_amplitude <= 1.0:
        raise ValueError(f"cloud amplitude must be in [0, 1], got {profile.cloud_amplitude}")
    if profile.peak_wm2 < 0:
        raise ValueError(f"peak must be >= 0, got {profile.peak_wm2}")

    n = days * MINUTES_PER_DAY
    minute = np.arange(n) % MINUTES_PER_DAY
    span = profile.sunset_min - profile.sunrise_min
    phase = (minute - profile.sunrise_min) / span
    clear = np.where(
        (phase >= 0.0) & (phase < 1.0), profile.peak_wm2 * np.sin(np.pi * np.clip(phase, 0.0, 1.0)), 0.0
    )

    # AR(1) sky state mapped into [1 - amplitude, 1]; amplitude 0 = clear sky.
    rng = np.random.default_rng(profile.seed)
    rho = math.exp(-1.0 / profile.cloud_correlation_min)
    shocks = rng.standard_normal(n)
    state = np.empty(n)
    s = 0.0
    for i in range(n):
        s = rho * s + math.sqrt(1.0 - rho * rho) * shocks[i]
        state[i] = s
    attenuation = 1.0 - profile.cloud_amplitude * 0.5 * (1.0 + np.tanh(state))

    return IrradianceTrace(start_epoch_s, 60, clear * attenuation)


def generate_kinetic_trace(
    days: int, profile: ActivityProfile = ActivityProfile(), v_supply: float = DEFAULT_V_SUPPLY
) -> np.ndarray:
    """Per-minute kinetic harvest current, amperes.

    A two-state Markov chain places activity bouts minute by minute; each
    (day, period) then gets exactly weight x daily_energy spread evenly over
    its active minutes, so daily closure and period shares are exact by
    construction. A period with positive weight but no active minute gets one
    forced minute.
    """
    if days < 1:
        raise ValueError(f"days must be >= 1, got {days}")
    if v_supply <= 0:
        raise ValueError(f"v_supply must be positive, got {v_supply}")

    n = days * MINUTES_PER_DAY
    if profile.daily_energy_j == 0.0:
        return np.zeros(n)

    rng = np.random.default_rng(profile.seed)
    labels = np.array([profile.period_of_minute(m % MINUTES_PER_DAY) for m in range(n)])

    # Bout chain: stay-active prob fixes the mean bout length; activation prob
    # fixes the duty cycle of each period.
    p_stay = 1.0 - 1.0 / profile.mean_bout_min
    active = np.zeros(n, dtype=bool)
    is_active = bool(rng.random() < profile.duty[labels[0]])
    for i in range(n):
        duty = profile.duty[labels[i]]
        if is_active:
            is_active = bool(rng.random() < p_stay)
        else:
            p_activate = min(1.0, duty / (profile.mean_bout_min * max(1.0 - duty, 1e-9)))
            is_active = bool(rng.random() < p_activate)
        active[i] = is_active

    current = np.zeros(n)
    for day in range(days):
        sl = slice(day * MINUTES_PER_DAY, (day + 1) * MINUTES_PER_DAY)
        day_labels = labels[sl]
        day_active = active[sl].copy()
        for p in range(4):
            weight = profile.weights[p]
            in_period = day_labels == p
            if weight == 0.0 or not in_period.any():
                continue
            chosen = in_period & day_active
            if not chosen.any():
                indices = np.flatnonzero(in_period)
                chosen = np.zeros_like(in_period)
                chosen[rng.choice(indices)] = True
            energy_per_minute = profile.daily_energy_j * weight / int(chosen.sum())
            current[sl][chosen] = energy_per_minute / (60.0 * v_supply)
    return current


def combine_sources(solar: np.ndarray, kinetic: np.ndarray, efficiency: float) -> np.ndarray:
    """Elementwise combiner output: efficiency x (solar + kinetic)."""
    solar = np.asarray(solar, dtype=float)
    kinetic = np.asarray(kinetic, dtype=float)
    if solar.shape != kinetic.shape:
        raise TraceError(f"source length mismatch: {solar.shape} vs {kinetic.shape}")
    if not 0.0 < efficiency <= 1.0:
        raise ValueError(f"combiner efficiency must be in (0, 1], got {efficiency}")
    return efficiency * (solar + kinetic)


def _parse_timestamp(raw: str, line: int) -> int:
    raw = raw.strip()
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        stamp = datetime.fromisoformat(raw.replace("Z", "+00:00"))
    except ValueError as exc:
        raise TraceError(f"line {line}: unparseable timestamp {raw!r}") from exc
    if stamp.tzinfo is None:
        stamp = stamp.replace(tzinfo=timezone.utc)
    return int(stamp.timestamp())


def load_irradiance_csv(path: str, resolution_s: int = 60, max_gap_steps: int = 5) -> IrradianceTrace:
    """Read "timestamp,irradiance_wm2" rows into a trace.

    Timestamps may be epoch seconds or ISO-8601, strictly increasing on the
    declared resolution grid. Gaps of up to max_gap_steps missing rows are
    filled by holding the previous value (counted in gaps_filled); anything
    larger is an error.
    """
    try:
        handle = open(path, newline="")
    except OSError as exc:
        raise TraceError(f"cannot open {path}: {exc}") from exc
    with handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise TraceError(f"{path}: empty file") from None
        if [h.strip().lower() for h in header] != IRRADIANCE_HEADER:
            raise TraceError(f"{path}: expected header {','.join(IRRADIANCE_HEADER)!r}, got {','.join(header)!r}")

        samples: list[float] = []
        gaps = 0
        start = None
        previous = None
        for line, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != 2:
                raise TraceError(f"line {line}: expected 2 fields, got {len(row)}")
            stamp = _parse_timestamp(row[0], line)
            try:
                value = float(row[1])
            except ValueError:
                raise TraceError(f"line {line}: unparseable irradiance {row[1]!r}") from None
            if value < 0:
                raise TraceError(f"line {line}: negative irradiance {value}")
            if start is None:
                start = stamp
            elif stamp <= previous:
                raise TraceError(f"line {line}: timestamp not increasing ({stamp} after {previous})")
            else:
                spacing = stamp - previous
                if spacing % resolution_s != 0:
                    raise TraceError(f"line {line}: spacing {spacing} s off the {resolution_s} s grid")
                missing = spacing // resolution_s - 1
                if missing > max_gap_steps:
                    raise TraceError(f"line {line}: gap of {missing} steps exceeds limit {max_gap_steps}")
                if missing:
                    samples.extend([samples[-1]] * missing)
                    gaps += 1
            samples.append(value)
            previous = stamp
        if start is None:
            raise TraceError(f"{path}: no data rows")
    return IrradianceTrace(start, resolution_s, np.array(samples), gaps)


def save_irradiance_csv(trace: IrradianceTrace, path: str) -> None:
    """Write "timestamp,irradiance_wm2" rows with epoch-second timestamps."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(IRRADIANCE_HEADER)
        for i, value in enumerate(trace.samples):
            writer.writerow([trace.start_epoch_s + i * trace.resolution_s, f"{value:.6f}"])


def save_harvest_csv(trace: HarvestTrace, path: str) -> None:
    """Write "t_s,solar_a,kinetic_a,combined_a" rows, one per trace step."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(HARVEST_HEADER)
        for i in range(len(trace)):
            writer.writerow(
                [
                    i * trace.resolution_s,
                    f"{trace.solar_a[i]:.9e}",
                    f"{trace.kinetic_a[i]:.9e}",
                    f"{trace.combined_a[i]:.9e}",
                ]
            )


def load_harvest_csv(path: str) -> HarvestTrace:
    """Read a harvest CSV written by save_harvest_csv (or shaped like it)."""
    try:
        handle = open(path, newline="")
    except OSError as exc:
        raise TraceError(f"cannot open {path}: {exc}") from exc
    with handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise TraceError(f"{path}: empty file") from None
        if [h.strip().lower() for h in header] != HARVEST_HEADER:
            raise TraceError(f"{path}: expected header {','.join(HARVEST_HEADER)!r}, got {','.join(header)!r}")
        times: list[int] = []
        columns: list[list[float]] = [[], [], []]
        for line, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != 4:
                raise TraceError(f"line {line}: expected 4 fields, got {len(row)}")
            try:
                times.append(int(float(row[0])))
                for k in range(3):
                    columns[k].append(float(row[k + 1]))
            except ValueError:
                raise TraceError(f"line {line}: unparseable row {row!r}") from None
    if not times:
        raise TraceError(f"{path}: no data rows")
    if len(times) == 1:
        resolution = 60
    else:
        spacings = {b - a for a, b in zip(times, times[1:])}
        if len(spacings) != 1 or min(spacings) <= 0:
            raise TraceError(f"{path}: time column not uniformly spaced")
        resolution = spacings.pop()
    return HarvestTrace(0, resolution, np.array(columns[0]), np.array(columns[1]), np.array(columns[2]))
