"""
Symbols and emotions
====================

A perturbation that keeps coming back is first handled by building a plan,
then by recalling it. Recalls on consecutive clocks couple the perturbation
category to the individual. Surplus left over once every modality is at
rest feeds emotional chains.
"""

from __future__ import annotations

from egokernel.environment import load_scenario, run_scenario
from egokernel.selfcheck import scenario_path

report = run_scenario(load_scenario(scenario_path("promotion")))
for clock, key, kind in report.promotions:
    print(f"clock {clock}: {key} -> {kind}")

for rec in report.engine.trace:
    if rec["op"] == "emotion.simulate":
        d = rec["detail"]
        print(f"clock {rec['clock']}: {d['kind']} emotion on {rec['category_label']} via {d['chain_labels']}")
    elif rec["op"] == "emotion.step":
        d = rec["detail"]
        print(f"  step {d['step']}: second factor index {d['second_factor_index']}, last={d['last']}")
