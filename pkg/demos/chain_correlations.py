"""Spin correlations of the periodic Heisenberg chain from the level-1 optimum."""
from qmcnpa import experiments as ex

for L in (6, 10, 18, 28, 40):
    t = ex.chain_correlation(L)
    err = "n/a" if t.rel_error is None else f"{t.rel_error:.4f}"
    exp = "n/a" if t.exponent is None else f"{t.exponent:.3f}"
    print(f"L={L:3d}  energy/site={t.energy_density:.6f}  rel. error={err}  exponent={exp}")
    print("       C(r) =", " ".join(f"{v:.4f}" for v in t.C))
