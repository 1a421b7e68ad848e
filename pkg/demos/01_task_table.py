"""Print the component draws and the composed per-task current budget.

Every task current is base + MCU-active floor + GPS backup keep-alive +
capacitor leakage, so the same task costs slightly different amounts on
different capacitor builds.
"""

from captrack import TASKS, builtin_component_table, compose_task_current, task_energy

print("component bench table")
print(f"{'component':<26} {'mA':>9} {'s':>9}")
for row in builtin_component_table():
    duration = f"{row.duration_s:g}" if row.duration_s is not None else "-"
    print(f"{row.label:<26} {row.current_ma:>9.5f} {duration:>9}")

print()
print("composed task stacks per leakage figure")
print(f"{'task':<18} {'10 uA':>9} {'16 uA':>9} {'30 uA':>9} {'energy mJ @30uA':>16}")
for name, spec in TASKS.items():
    currents = [compose_task_current(name, leak) for leak in (0.010, 0.016, 0.030)]
    if spec.duration_s:
        energy = f"{task_energy(currents[2], spec.duration_s, 3.3):.4g}"
    else:
        energy = "-"
    print(f"{name:<18} {currents[0]:>9.5f} {currents[1]:>9.5f} {currents[2]:>9.5f} {energy:>16}")
