"""
Homeostatic recursion on three modalities
=========================================

Run the bundled three-clock scenario, follow the deficits clock by clock
and read the residual ledger once every modality is back to its starting
size.
"""

from __future__ import annotations

from collections import defaultdict

from egokernel.environment import load_scenario, run_scenario
from egokernel.selfcheck import scenario_path

report = run_scenario(load_scenario(scenario_path("three_modalities")))
engine = report.engine

for clock, deficits in enumerate(report.deficits, start=1):
    print(f"clock {clock}: deficits {deficits}")

# Which categories fed each rebuilt modality on the last clock.
fed = defaultdict(list)
for rec in engine.trace:
    if rec["op"] == "behave.consume":
        fed[rec["modality"]].append((rec["category_label"], -rec["delta"]))
for mid, uses in fed.items():
    print(mid, "consumed", uses)

print("status:", report.status.value)
for key, value in sorted(report.residuals.items(), key=lambda kv: report.residual_labels[kv[0]] or kv[0]):
    print(f"  {report.residual_labels[key] or key}: {value}")
