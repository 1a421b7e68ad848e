"""Simulate two winter weeks on the default 2.5 F build and read the results.

The run should be energy-neutral: full charge every day, no depletions, and
an energy ledger that closes to numerical precision.
"""

from captrack import (
    HarvestTrace,
    SolarChain,
    SystemConfig,
    generate_kinetic_trace,
    generate_synthetic_irradiance,
    run_simulation,
)

DAYS = 14

solar = generate_synthetic_irradiance(DAYS).samples * SolarChain().current_factor
kinetic = generate_kinetic_trace(DAYS)
trace = HarvestTrace.build(solar, kinetic)

config = SystemConfig()  # 2.5 F, 2-min fixes, hourly uploads
result = run_simulation(config, trace)
m = result.metrics

print(f"{DAYS} winter days, fix every {config.fix_interval_s} s, "
      f"upload every {config.transmit_interval_s} s")
print(f"fixes: {m.total_fixes} total = {m.hot_fixes} hot + {m.hot_ephemeris} hot+download "
      f"+ {m.warm_ephemeris} warm+download + {m.cold_starts} cold")
print(f"per day: {m.fixes_per_day_mean:.1f} +/- {m.fixes_per_day_std:.1f}; "
      f"skipped {m.skipped_fixes}, longest gap {m.longest_data_gap_s:.0f} s")
print(f"uploads: {m.transmissions} ({m.skipped_transmissions} skipped, {m.failed_transmissions} failed)")
print(f"depletions: {m.depletion_count}, time off {m.total_off_s:.0f} s, "
      f"minimum voltage {m.min_voltage:.3f} V")

led = result.ledger
print()
print("energy ledger (J)")
print(f"  harvested in      {led.harvested_in_j:10.2f}")
for task, joules in sorted(led.consumed_by_task_j.items(), key=lambda kv: -kv[1]):
    print(f"  {task:<17} {joules:10.2f}")
print(f"  leakage           {led.leakage_j:10.2f}")
print(f"  discarded at full {led.discarded_at_clamp_j:10.2f}")
print(f"  stored delta      {led.delta_stored_j:+10.2f}")
print(f"  closure error     {led.closure_error_j:10.2e}")

voltages = result.voltages
for day in (0, 7, 13):
    day_v = voltages[day * 1440 : (day + 1) * 1440 + 1]
    print(f"day {day:>2}: voltage {day_v.min():.3f} .. {day_v.max():.3f} V")
