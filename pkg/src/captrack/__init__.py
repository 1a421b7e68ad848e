"""Energy-neutral wildlife tracker simulator.

A trace-driven model of a GPS collar powered by a supercapacitor charged
from solar and kinetic harvesters: closed-form capacitor dynamics, an
energy-aware task scheduler with GPS start-mode selection and power
hysteresis, harvest-trace generators, an exact energy ledger, and a CLI
for runs and parameter sweeps.
"""

from .capacitor import (
    CapacitorState,
    Segment,
    equivalent_resistance,
    integrate_segment,
    step_voltage,
    stored_energy,
    time_to_voltage,
)
from .configfile import GeneratorSpec, SweepSpec, load_config, load_sweep_spec
from .device import (
    DataSample,
    DeviceState,
    GpsContext,
    GpsDecision,
    GpsMode,
    Power,
    due_tasks,
    on_depletion,
    on_fix_success,
    on_recovery,
    payload_bytes,
    read_coulomb,
    select_gps_mode,
)
from .energy_model import (
    GPS_BACKUP_MA,
    LEAKAGE_BY_CAPACITANCE,
    MCU_ACTIVE_BASE_MA,
    TASKS,
    CapacitorSpec,
    ComponentDraw,
    ConfigError,
    SystemConfig,
    TaskSpec,
    VoltageThresholds,
    builtin_component_table,
    compose_task_current,
    safe_voltage_threshold,
    task_energy,
    validate_config,
)
from .engine import (
    EnergyLedger,
    SimEvent,
    SimMetrics,
    SimResult,
    compute_metrics,
    export_timeseries,
    integrate_tick,
    run_simulation,
)
from .harvest import (
    ActivityProfile,
    HarvestTrace,
    IrradianceTrace,
    SolarChain,
    SolarProfile,
    TraceError,
    combine_sources,
    generate_kinetic_trace,
    generate_synthetic_irradiance,
    load_harvest_csv,
    load_irradiance_csv,
    save_harvest_csv,
    save_irradiance_csv,
    solar_current_from_irradiance,
)

__version__ = "0.1.0"

__all__ = [
    "ActivityProfile", "CapacitorSpec", "CapacitorState", "ComponentDraw", "ConfigError",
    "DataSample", "DeviceState", "EnergyLedger", "GeneratorSpec", "GpsContext", "GpsDecision",
    "GpsMode", "HarvestTrace", "IrradianceTrace", "Power", "Segment", "SimEvent", "SimMetrics",
    "SimResult", "SolarChain", "SolarProfile", "SweepSpec", "SystemConfig", "TaskSpec",
    "TraceError", "VoltageThresholds",
    "GPS_BACKUP_MA", "LEAKAGE_BY_CAPACITANCE", "MCU_ACTIVE_BASE_MA", "TASKS",
    "builtin_component_table", "combine_sources", "compose_task_current", "compute_metrics",
    "due_tasks", "equivalent_resistance", "export_timeseries", "generate_kinetic_trace",
    "generate_synthetic_irradiance", "integrate_segment", "integrate_tick", "load_config",
    "load_harvest_csv", "load_irradiance_csv", "load_sweep_spec", "on_depletion",
    "on_fix_success", "on_recovery", "payload_bytes", "read_coulomb", "run_simulation",
    "safe_voltage_threshold", "save_harvest_csv", "save_irradiance_csv", "select_gps_mode",
    "solar_current_from_irradiance", "step_voltage", "stored_energy", "task_energy",
    "time_to_voltage", "validate_config",
]
