"""
Paired statistics on a 2x2 outcome table
========================================

The accuracy comparison is a matched-pairs design: each task is its own
control. Shows the exact McNemar test, the bootstrap interval for the
accuracy delta, and the paired t-test used for latency.
"""

import numpy as np

from modalmesh import (
    ContingencyTable,
    PairedOutcome,
    bootstrap_ci,
    mcnemar_exact,
    paired_t,
    tca,
)

# 50 paired observations: a both-correct, b treatment-only, c baseline-only,
# d both-wrong. Only b and c carry signal about which arm is better.
table = ContingencyTable(a=15, b=11, c=1, d=23)
print(f"n = {table.n}, discordant pairs = {table.b + table.c}")

# The exact test enumerates the binomial tail instead of relying on the
# chi-square approximation, which is unsafe at 12 discordant pairs.
p = mcnemar_exact(table)
print(f"exact McNemar p = {p:.6f}")

# Reconstruct per-task outcomes carrying the same table, with synthetic
# latencies where the treatment arm is consistently slower.
rng = np.random.default_rng(7)
outcomes = []
cells = [(True, True)] * 15 + [(True, False)] * 11 + \
        [(False, True)] * 1 + [(False, False)] * 23
for i, (treatment_ok, baseline_ok) in enumerate(cells):
    outcomes.append(PairedOutcome(
        task_id=f"task_{i:02d}", category="demo",
        treatment_correct=treatment_ok, baseline_correct=baseline_ok,
        treatment_latency=float(rng.normal(0.125, 0.015)),
        baseline_latency=float(rng.normal(0.072, 0.010)),
    ))

print(f"treatment accuracy = {tca(outcomes, 'treatment'):.1%}")
print(f"baseline accuracy  = {tca(outcomes, 'baseline'):.1%}")

# The bootstrap resamples whole tasks, keeping each pair intact. The seed
# is mandatory: one seed, one interval, byte-for-byte.
lo, hi = bootstrap_ci(outcomes, resamples=10_000, seed=42)
print(f"95% bootstrap CI for the delta: [{lo:.1f}, {hi:.1f}] pp")

# Latency uses a paired t-test on per-task differences (baseline minus
# treatment), so a slower treatment arm shows up as a negative t.
t_stat, t_p = paired_t([o.baseline_latency for o in outcomes],
                       [o.treatment_latency for o in outcomes])
print(f"latency paired t = {t_stat:.2f}, p = {t_p:.2e}")
