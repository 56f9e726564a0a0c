"""J1-J2 chain (L=12) and Shastry-Sutherland lattice (16 sites) scans.

Writes j1j2_L12.csv and ss_16.csv and reports where the relaxation is exact
and where its energy derivative is singular. The lattice scan takes a few
minutes.
"""
import numpy as np

from qmcnpa import experiments as ex

grid = np.round(np.arange(0.0, 1.0001, 0.05), 10)
recs = ex.model_scan("j1j2", 12, grid)
print("j1j2 L=12 exact at", [r.param for r in recs if r.verdict == "exact"])
ex.write_csv(recs, "j1j2_L12.csv")

grid = np.round(np.arange(0.5, 1.5001, 0.05), 10)
recs = ex.model_scan("shastry_sutherland", 16, grid)
print("Shastry-Sutherland exact at", [r.param for r in recs if r.verdict == "exact"])
print("derivative singularities (relaxation):",
      ex.singular_points(grid, [r.sdp_value for r in recs]))
print("derivative singularities (exact energy):",
      ex.singular_points(grid, [r.oracle_value for r in recs]))
ex.write_csv(recs, "ss_16.csv")
