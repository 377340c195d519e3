#!/usr/bin/env python3
"""
Ten-trial evaluation
====================

Reproduces the full evaluation protocol: ten seeded trials over a five-AP
area, each with a walking culprit and a crowd of 30-62 observed devices.
Trials 4 and 9 model a culprit whose device is switched off; a correct run
enumerates nothing there while still finding the culprit in the other eight.

Equivalent CLI: `probesift experiment --trials 10`
"""
from probesift.experiment import run_experiment

summary = run_experiment(trials=10)
print(summary.render_text())
print()

for trial in summary.trials:
    if trial.culprit_emits and trial.table.rows:
        row = trial.table.rows[0]
        print(f"trial {trial.trial_index + 1}: top candidate {row.mac} "
              f"(rate sum {row.total:.1f} across {trial.aps_used} APs)")

print(f"\nwall time {summary.elapsed_s:.1f} s")
