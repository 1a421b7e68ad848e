"""Configuration and sweep-spec files.

Config files are YAML with one section per concern; every field is optional
and falls back to the built-in defaults. Unknown keys are errors so typos
cannot silently revert a field to its default.

    capacitor:
      capacitance_f: 2.5
      leakage_ma: 0.016        # omitted: paired by capacitance for stocked sizes
      v_max: 5.5
    thresholds:
      v_min: 1.8
      v_turn_on: 2.2
      hot_start: 1.9
      hot_ephemeris: 2.0
      warm_ephemeris: 2.1
      nbiot: 2.0
      cold_start: null         # null: derived from the safe-energy bound
    intervals:
      sense_s: 60              # null disables an activity
      fix_s: 120
      transmit_s: 3600
      base_tick_s: 60
    ephemeris:
      hot_limit_s: 14400
      warm_limit_s: 172800
      refresh_age_s: 10800
    harvest:
      combiner_efficiency: 0.88
    sim:
      v_supply: 3.3
      initial_voltage: 5.5
      initial_ephemeris_age_s: 0
      initial_backup_valid: true
      random_seed: 42
      task_jitter: false
      payload_scaling: false

A sweep spec lists capacitors and fix intervals to cross, a shared base
config, and one trace source (a file or generator parameters).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import yaml

from .energy_model import (
    LEAKAGE_BY_CAPACITANCE,
    CapacitorSpec,
    ConfigError,
    SystemConfig,
    VoltageThresholds,
    validate_config,
)
from .harvest import ActivityProfile, SolarProfile


def _require_mapping(node, name: str) -> dict:
    if node is None:
        return {}
    if not isinstance(node, dict):
        raise ConfigError([f"section {name!r} must be a mapping"])
    return node


def _check_keys(section: dict, allowed: set[str], name: str) -> None:
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError([f"unknown key(s) in {name!r}: {sorted(unknown)}"])


def _number(section: dict, key: str, default, name: str, optional: bool = False):
    value = section.get(key, default)
    if value is None:
        if optional:
            return None
        raise ConfigError([f"{name}.{key} must be a number"])
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError([f"{name}.{key} must be a number, got {value!r}"])
    return value


def config_from_dict(data: dict) -> SystemConfig:
    """Build an unvalidated SystemConfig from a parsed config mapping."""
    data = _require_mapping(data, "config")
    _check_keys(data, {"capacitor", "thresholds", "intervals", "ephemeris", "harvest", "sim"}, "config")

    cap_sec = _require_mapping(data.get("capacitor"), "capacitor")
    _check_keys(cap_sec, {"capacitance_f", "leakage_ma", "v_max"}, "capacitor")
    defaults = SystemConfig()
    capacitance = float(_number(cap_sec, "capacitance_f", defaults.capacitor.capacitance_f, "capacitor"))
    v_max = float(_number(cap_sec, "v_max", defaults.capacitor.v_max, "capacitor"))
    leakage = _number(cap_sec, "leakage_ma", None, "capacitor", optional=True)
    if leakage is None:
        if capacitance in LEAKAGE_BY_CAPACITANCE:
            leakage = LEAKAGE_BY_CAPACITANCE[capacitance]
        else:
            raise ConfigError(
                [f"capacitor.leakage_ma required for non-stocked capacitance {capacitance} F"]
            )
    capacitor = CapacitorSpec(capacitance, float(leakage), v_max)

    thr_sec = _require_mapping(data.get("thresholds"), "thresholds")
    _check_keys(
        thr_sec,
        {"v_min", "v_turn_on", "hot_start", "hot_ephemeris", "warm_ephemeris", "nbiot", "cold_start"},
        "thresholds",
    )
    thr_defaults = VoltageThresholds()
    thresholds = VoltageThresholds(
        v_min=float(_number(thr_sec, "v_min", thr_defaults.v_min, "thresholds")),
        v_turn_on=float(_number(thr_sec, "v_turn_on", thr_defaults.v_turn_on, "thresholds")),
        hot_start=float(_number(thr_sec, "hot_start", thr_defaults.hot_start, "thresholds")),
        hot_ephemeris=float(_number(thr_sec, "hot_ephemeris", thr_defaults.hot_ephemeris, "thresholds")),
        warm_ephemeris=float(_number(thr_sec, "warm_ephemeris", thr_defaults.warm_ephemeris, "thresholds")),
        nbiot=float(_number(thr_sec, "nbiot", thr_defaults.nbiot, "thresholds")),
        cold_start=(
            None
            if thr_sec.get("cold_start") is None
            else float(_number(thr_sec, "cold_start", None, "thresholds"))
        ),
    )

    int_sec = _require_mapping(data.get("intervals"), "intervals")
    _check_keys(int_sec, {"sense_s", "fix_s", "transmit_s", "base_tick_s"}, "intervals")

    def interval(key: str, default):
        if key in int_sec and int_sec[key] is None:
            return None
        value = _number(int_sec, key, default, "intervals", optional=True)
        return None if value is None else int(value)

    eph_sec = _require_mapping(data.get("ephemeris"), "ephemeris")
    _check_keys(eph_sec, {"hot_limit_s", "warm_limit_s", "refresh_age_s"}, "ephemeris")

    harv_sec = _require_mapping(data.get("harvest"), "harvest")
    _check_keys(harv_sec, {"combiner_efficiency"}, "harvest")

    sim_sec = _require_mapping(data.get("sim"), "sim")
    _check_keys(
        sim_sec,
        {"v_supply", "initial_voltage", "initial_ephemeris_age_s", "initial_backup_valid",
         "random_seed", "task_jitter", "payload_scaling"},
        "sim",
    )
    for key in ("initial_backup_valid", "task_jitter", "payload_scaling"):
        if key in sim_sec and not isinstance(sim_sec[key], bool):
            raise ConfigError([f"sim.{key} must be a boolean, got {sim_sec[key]!r}"])

    return SystemConfig(
        capacitor=capacitor,
        thresholds=thresholds,
        v_supply=float(_number(sim_sec, "v_supply", defaults.v_supply, "sim")),
        sense_interval_s=interval("sense_s", defaults.sense_interval_s),
        fix_interval_s=interval("fix_s", defaults.fix_interval_s),
        transmit_interval_s=interval("transmit_s", defaults.transmit_interval_s),
        ephemeris_hot_limit_s=int(_number(eph_sec, "hot_limit_s", defaults.ephemeris_hot_limit_s, "ephemeris")),
        ephemeris_warm_limit_s=int(_number(eph_sec, "warm_limit_s", defaults.ephemeris_warm_limit_s, "ephemeris")),
        ephemeris_refresh_age_s=int(_number(eph_sec, "refresh_age_s", defaults.ephemeris_refresh_age_s, "ephemeris")),
        base_tick_s=int(_number(int_sec, "base_tick_s", defaults.base_tick_s, "intervals")),
        initial_voltage=float(_number(sim_sec, "initial_voltage", defaults.initial_voltage, "sim")),
        initial_ephemeris_age_s=int(_number(sim_sec, "initial_ephemeris_age_s", defaults.initial_ephemeris_age_s, "sim")),
        initial_backup_valid=bool(sim_sec.get("initial_backup_valid", defaults.initial_backup_valid)),
        combiner_efficiency=float(_number(harv_sec, "combiner_efficiency", defaults.combiner_efficiency, "harvest")),
        random_seed=int(_number(sim_sec, "random_seed", defaults.random_seed, "sim")),
        task_jitter=bool(sim_sec.get("task_jitter", defaults.task_jitter)),
        payload_scaling=bool(sim_sec.get("payload_scaling", defaults.payload_scaling)),
    )


def _load_yaml(path: str, what: str) -> dict:
    try:
        with open(path) as handle:
            data = yaml.safe_load(handle)
    except OSError as exc:
        raise ConfigError([f"cannot read {what} {path}: {exc}"]) from exc
    except yaml.YAMLError as exc:
        raise ConfigError([f"unparseable {what} {path}: {exc}"]) from exc
    return {} if data is None else data


def load_config(path: str) -> SystemConfig:
    """Read and validate a YAML config file."""
    return validate_config(config_from_dict(_load_yaml(path, "config file")))


@dataclass(frozen=True)
class GeneratorSpec:
    """Trace synthesis parameters for runs without a trace file."""

    days: int = 14
    solar: SolarProfile = field(default_factory=SolarProfile)
    kinetic: ActivityProfile | None = field(default_factory=ActivityProfile)  # None = solar only


@dataclass(frozen=True)
class SweepSpec:
    """A capacitor x fix-interval grid over one shared trace and base config."""

    capacitors: tuple[CapacitorSpec, ...]
    fix_intervals_s: tuple[int, ...]
    base: SystemConfig
    trace_path: str | None = None
    generator: GeneratorSpec | None = None

    def combinations(self) -> list[SystemConfig]:
        """Validated config per grid cell; raises before any run on a bad cell."""
        configs = []
        errors = []
        for cap in self.capacitors:
            for interval in self.fix_intervals_s:
                candidate = replace(self.base, capacitor=cap, fix_interval_s=interval)
                try:
                    configs.append(validate_config(candidate))
                except ConfigError as exc:
                    errors.append(f"{cap.capacitance_f} F x {interval} s: {exc}")
        if errors:
            raise ConfigError(errors)
        return configs


def solar_profile_from_dict(data: dict, name: str = "solar") -> SolarProfile:
    data = _require_mapping(data, name)
    allowed = {"sunrise_min", "sunset_min", "peak_wm2", "cloud_amplitude", "cloud_correlation_min", "seed"}
    _check_keys(data, allowed, name)
    defaults = SolarProfile()
    try:
        return SolarProfile(
            sunrise_min=int(_number(data, "sunrise_min", defaults.sunrise_min, name)),
            sunset_min=int(_number(data, "sunset_min", defaults.sunset_min, name)),
            peak_wm2=float(_number(data, "peak_wm2", defaults.peak_wm2, name)),
            cloud_amplitude=float(_number(data, "cloud_amplitude", defaults.cloud_amplitude, name)),
            cloud_correlation_min=float(_number(data, "cloud_correlation_min", defaults.cloud_correlation_min, name)),
            seed=int(_number(data, "seed", defaults.seed, name)),
        )
    except ValueError as exc:
        raise ConfigError([f"{name}: {exc}"]) from exc


def activity_profile_from_dict(data: dict, name: str = "kinetic") -> ActivityProfile:
    data = _require_mapping(data, name)
    allowed = {"period_starts_min", "weights", "daily_energy_j", "mean_bout_min", "duty", "seed"}
    _check_keys(data, allowed, name)
    defaults = ActivityProfile()

    def quad(key: str, default, cast):
        value = data.get(key, default)
        if not isinstance(value, (list, tuple)) or len(value) != 4:
            raise ConfigError([f"{name}.{key} must be a list of four values"])
        return tuple(cast(v) for v in value)

    try:
        return ActivityProfile(
            period_starts_min=quad("period_starts_min", list(defaults.period_starts_min), int),
            weights=quad("weights", list(defaults.weights), float),
            daily_energy_j=float(_number(data, "daily_energy_j", defaults.daily_energy_j, name)),
            mean_bout_min=float(_number(data, "mean_bout_min", defaults.mean_bout_min, name)),
            duty=quad("duty", list(defaults.duty), float),
            seed=int(_number(data, "seed", defaults.seed, name)),
        )
    except ValueError as exc:
        raise ConfigError([f"{name}: {exc}"]) from exc


def generator_from_dict(data: dict) -> GeneratorSpec:
    data = _require_mapping(data, "generate")
    _check_keys(data, {"days", "solar", "kinetic"}, "generate")
    days = int(_number(data, "days", 14, "generate"))
    solar = solar_profile_from_dict(data.get("solar", {}))
    kinetic_sec = data.get("kinetic", {})
    if kinetic_sec is False:
        kinetic = None
    else:
        kinetic = activity_profile_from_dict(kinetic_sec or {})
    return GeneratorSpec(days, solar, kinetic)


def load_sweep_spec(path: str) -> SweepSpec:
    """Read a sweep spec: capacitor list, interval list, base config, trace."""
    data = _load_yaml(path, "sweep spec")
    data = _require_mapping(data, "sweep")
    _check_keys(data, {"capacitors", "fix_intervals_s", "base", "trace", "generate"}, "sweep")

    raw_caps = data.get("capacitors")
    if not isinstance(raw_caps, list) or not raw_caps:
        raise ConfigError(["sweep.capacitors must be a non-empty list"])
    capacitors = []
    for i, entry in enumerate(raw_caps):
        if isinstance(entry, (int, float)) and not isinstance(entry, bool):
            try:
                capacitors.append(CapacitorSpec.from_capacitance(float(entry)))
            except ValueError as exc:
                raise ConfigError([f"sweep.capacitors[{i}]: {exc}"]) from exc
        elif isinstance(entry, dict):
            _check_keys(entry, {"capacitance_f", "leakage_ma", "v_max"}, f"capacitors[{i}]")
            try:
                capacitors.append(
                    CapacitorSpec(
                        float(entry["capacitance_f"]),
                        float(entry["leakage_ma"]),
                        float(entry.get("v_max", SystemConfig().capacitor.v_max)),
                    )
                )
            except KeyError as exc:
                raise ConfigError([f"sweep.capacitors[{i}] missing {exc}"]) from exc
        else:
            raise ConfigError([f"sweep.capacitors[{i}] must be a size or a mapping"])

    raw_intervals = data.get("fix_intervals_s")
    if not isinstance(raw_intervals, list) or not raw_intervals:
        raise ConfigError(["sweep.fix_intervals_s must be a non-empty list"])
    intervals = tuple(int(v) for v in raw_intervals)

    base = config_from_dict(data.get("base") or {})

    trace_path = data.get("trace")
    generator = generator_from_dict(data["generate"]) if "generate" in data else None
    if trace_path is None and generator is None:
        generator = GeneratorSpec()
    if trace_path is not None and generator is not None:
        raise ConfigError(["sweep: give either trace or generate, not both"])

    return SweepSpec(tuple(capacitors), intervals, base, trace_path, generator)
