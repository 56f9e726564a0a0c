"""Exactness of the level-1 projector relaxation on the weighted crown.

Scans the hub weight x of the n=4 crown, classifies every grid point with
the tolerance schedule and writes the curve to crown_n4.csv.
"""
import numpy as np

from qmcnpa import experiments as ex
from qmcnpa.graph import GraphFamilySpec, make_family

n = 4
grid = np.round(np.arange(0.0, 6.0001, 0.1), 10)
ws = ex.weight_scan(make_family(GraphFamilySpec("crown", n, x=0.0)), (n, n + 1), grid)
for r in ws.records:
    print(f"x={r.param:4.1f}  {r.verdict:12s}  error={r.abs_error:.2e}")
for t in ws.transitions:
    print(f"boundary between {t.x_exact} (exact) and {t.x_inexact}; local exponent {t.exponent}")
print("level-1 boundaries predicted at", (n + 2) ** 2 / (4 * (n + 1)), "and", n)
ex.write_csv(ws.records, "crown_n4.csv")
