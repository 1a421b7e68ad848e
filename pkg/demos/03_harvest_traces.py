"""Build the synthetic winter harvest: short solar days plus activity bouts.

Prints per-day insolation and kinetic energy, then the combined current the
simulator actually sees after the 88% combiner.
"""

import numpy as np

from captrack import (
    ActivityProfile,
    HarvestTrace,
    SolarChain,
    SolarProfile,
    generate_kinetic_trace,
    generate_synthetic_irradiance,
)

DAYS = 7
MINUTES = 1440

solar_profile = SolarProfile()  # 08:30 sunrise, 16:45 sunset, 300 W/m2 peak
irradiance = generate_synthetic_irradiance(DAYS, solar_profile)
chain = SolarChain()
solar = irradiance.samples * chain.current_factor

activity = ActivityProfile()  # crepuscular: dawn/dusk carry 70% of the energy
kinetic = generate_kinetic_trace(DAYS, activity)

trace = HarvestTrace.build(solar, kinetic)

print(f"solar chain: {chain.current_factor*1e6:.4f} uA per W/m2 "
      f"(panel {chain.panel_area_m2*1e4:.0f} cm2, {chain.panel_efficiency:.0%} cells, "
      f"{chain.pmic_efficiency:.0%} converter)")
print(f"{'day':>3} {'insolation J/m2':>16} {'solar in J':>11} {'kinetic J':>10} {'combined J':>11}")
for day in range(DAYS):
    sl = slice(day * MINUTES, (day + 1) * MINUTES)
    insolation = float(irradiance.samples[sl].sum()) * 60.0
    solar_j = float(solar[sl].sum()) * 60.0 * 3.3
    kinetic_j = float(kinetic[sl].sum()) * 60.0 * 3.3
    combined_j = float(trace.combined_a[sl].sum()) * 60.0 * 3.3
    print(f"{day:>3} {insolation:>16.0f} {solar_j:>11.2f} {kinetic_j:>10.2f} {combined_j:>11.2f}")

peak_minute = int(np.argmax(trace.combined_a)) % MINUTES
print(f"peak combined current {trace.combined_a.max()*1e3:.3f} mA "
      f"at {peak_minute//60:02d}:{peak_minute%60:02d} local")
active = kinetic > 0
print(f"activity bouts cover {active.mean():.0%} of all minutes; "
      f"a bout minute averages {kinetic[active].mean()*1e6:.1f} uA")
