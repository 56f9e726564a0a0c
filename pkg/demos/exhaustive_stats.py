"""Exactness statistics over all connected graphs with 5 and 6 vertices.

Writes a JSON summary per size with per-graph records ordered by error.
"""
from qmcnpa import experiments as ex

for n, bases in ((5, ("proj1", "pauli2r", "pauli2c")), (6, ("proj1",))):
    st = ex.exhaustive_scan(n, bases)
    for b in bases:
        print(f"n={n} {b}: {st.counts(b)}; smallest nonzero error "
              f"{st.smallest_nonzero_error(b)}; gap compliance {st.gap_compliance(b):.1%}")
    for r in st.table("proj1")[:12]:
        print(f"  {r.graph6:6s} bipartite={r.bipartite!s:5s} " +
              " ".join(f"{b}={r.errors[b]:.2e}" for b in bases))
    ex.write_json(st.to_dict(), f"exhaustive_n{n}.json")
