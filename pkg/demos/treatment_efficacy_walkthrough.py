"""Walk through the three-outcome efficacy test on a made-up observational study.

The setting: patients chose treatment themselves, so confounding is on the
table and P(Y=1 | do(X=1)) is only partially identified.  The observable
bounds are [P(Y=1, X=1), P(Y=1, X=1) + P(X=0)].  Depending on where the
threshold c falls relative to that interval, the right answer is "efficacy
reaches c" (0), "it does not" (1), or "this data kind cannot tell" (2).
"""

import numpy as np

from tritest import ContingencyTable, manski_bounds, tec_ternary

# rows = X (0 untreated, 1 treated), columns = Y (0 failure, 1 success)
counts = np.array([[130, 70], [90, 710]])
table = ContingencyTable(counts)

bounds = manski_bounds(table)
print(f"n = {table.n} patients, treated share = {(counts[1].sum()) / table.n:.2f}")
print(f"efficacy bounds: [{bounds.lower:.3f}, {bounds.upper:.3f}] (width {bounds.width:.3f})")
print()

for c in (0.5, 0.71, 0.8, 0.93, 0.99):
    res = tec_ternary(table, c=c, alpha1=0.025, alpha2=0.025)
    names = {0: "reaches the threshold", 1: "falls short", 2: "cannot be settled"}
    print(f"c = {c:4}:  outcome {int(res.outcome)} ({names[int(res.outcome)]})")
    print(f"          stage 1 p = {res.stage1.p_value:.3g}", end="")
    if res.stage2 is not None:
        print(f", stage 2 p = {res.stage2.p_value:.3g}")
    else:
        print("  (stage 2 never ran: stage 1 already concluded)")

print()
print("Thresholds inside the bound interval land in outcome 2 once n is large:")
print("more data shrinks sampling noise but never shrinks the interval itself.")
