"""Onset of inexactness when a star is turned into a Y graph.

A three-leaf star plus an isolated vertex attached to one leaf with weight
x: the relaxation is exact at x = 0 and the error grows like x^2.
"""
import numpy as np

from qmcnpa import experiments as ex
from qmcnpa.graph import WeightedGraph

base = WeightedGraph(5, {(0, 1): 1.0, (0, 2): 1.0, (0, 3): 1.0}, "star3+vertex")
grid = np.round(np.arange(0.0, 0.02501, 0.0025), 10)
ws = ex.weight_scan(base, (3, 4), grid)
for r in ws.records:
    print(f"x={r.param:.4f}  {r.verdict:12s}  error={r.abs_error:.3e}")
for t in ws.transitions:
    print(f"onset at x={t.x_exact}; fitted exponent {t.exponent:.3f} over {t.points_used} points")
