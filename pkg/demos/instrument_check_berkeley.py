"""Instrument-validity check on the bundled 1973 Berkeley admissions table.

Treats applicant sex as a candidate instrument, department as treatment and
admission as outcome, and tests the implied inequality
max_x sum_y max_z K(x, y | z) <= 1.
"""

import json

from tritest import berkeley_analysis, berkeley_table

table = berkeley_table()
print(f"bundled table: {table.z_card} x {table.x_card} x {table.y_card}, n = {table.n}")
print(f"applicants by sex: {dict(zip(table.labels[0], table.z_totals().tolist()))}")
print()

report = berkeley_analysis(alpha=0.05, bootstrap=2000, seed=20260816)
result = report["result"]
print(f"positivity: {result['positivity']['decision']} (p = {result['positivity']['p_value']})")
print(f"inequality statistic: {result['statistic']:.6f}")
print(f"bootstrap p-value: {result['iv']['p_value']}")
print(f"outcome: {result['outcome']}")
print()
print("Full machine-readable report:")
print(json.dumps(report, indent=2))
