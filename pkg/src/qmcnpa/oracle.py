"""Exact diagonalization of QMaxCut Hamiltonians and closed-form reference values.

The Hamiltonian ``H = sum_e w_e h_e`` commutes with total spin, so every
eigenvalue appears in the sector of minimal ``|S_z|`` (magnetization
``n/2 - floor(n/2)``). The maximum eigenvalue is computed there by default;
``all_sectors=True`` scans every magnetization sector as a cross-check.

Within a sector with ``k`` up-spins the basis is the set of ``n``-bit
integers of popcount ``k``; bit ``n - 1 - i`` holds qubit ``i`` so that the
ordering agrees with ``algebra.to_matrix``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .graph import CapabilityError, GraphFamilySpec, WeightedGraph

MAX_ED_QUBITS = 20
DENSE_SECTOR_DIM = 1500
DEGENERACY_TOL = 1e-8


@dataclass
class SpectralResult:
    """Top of the spectrum of a QMaxCut Hamiltonian.

    Attributes
    ----------
    value : float
        Maximum eigenvalue.
    up_spins : int
        Number of up spins in the sector used.
    vectors : ndarray, shape (dim, d)
        Orthonormal basis of the (numerically) degenerate top eigenspace
        within the sector.
    states : ndarray
        Bit patterns of the sector basis.
    residual : float
        Largest ``||H v - value v||`` over the returned vectors.
    sector_values : dict
        Maximum eigenvalue per sector scanned.
    """

    value: float
    n: int
    up_spins: int
    vectors: np.ndarray = field(repr=False)
    states: np.ndarray = field(repr=False)
    residual: float
    sector_values: dict = field(default_factory=dict)

    @property
    def degeneracy(self) -> int:
        return self.vectors.shape[1]

    @property
    def magnetization(self) -> float:
        return self.up_spins - self.n / 2


@lru_cache(maxsize=64)
def sector_states(n: int, k: int) -> np.ndarray:
    """All n-bit integers with exactly k set bits, ascending."""
    if not 0 <= k <= n:
        raise ValueError("need 0 <= k <= n")
    if n <= 22:
        allv = np.arange(1 << n, dtype=np.int64)
        return allv[np.bitwise_count(allv) == k]
    raise CapabilityError(f"sector enumeration limited to n <= 22, got {n}")


def sector_swap(states: np.ndarray, n: int, i: int, j: int) -> tuple[np.ndarray, np.ndarray]:
    """Indices where qubits i and j differ and the index of the swapped state."""
    bi, bj = n - 1 - i, n - 1 - j
    diff = ((states >> bi) ^ (states >> bj)) & 1
    rows = np.flatnonzero(diff)
    flipped = states[rows] ^ ((1 << bi) | (1 << bj))
    return rows, np.searchsorted(states, flipped)


def sector_hamiltonian(g: WeightedGraph, k: int) -> tuple[sp.csr_matrix, np.ndarray]:
    """H restricted to the sector with k up spins, with its basis states.

    ``h_ij`` acts on computational states as ``(|s> - |swap_ij s>)/2`` when
    bits i and j differ and annihilates the state otherwise.
    """
    states = sector_states(g.n, k)
    dim = len(states)
    diag = np.zeros(dim)
    rows_all, cols_all, vals_all = [], [], []
    for (i, j), w in g.weights.items():
        rows, cols = sector_swap(states, g.n, i, j)
        diag[rows] += w / 2
        rows_all.append(rows)
        cols_all.append(cols)
        vals_all.append(np.full(len(rows), -w / 2))
    rows_all.append(np.arange(dim))
    cols_all.append(np.arange(dim))
    vals_all.append(diag)
    H = sp.csr_matrix((np.concatenate(vals_all), (np.concatenate(rows_all),
                                                  np.concatenate(cols_all))), shape=(dim, dim))
    H.sum_duplicates()
    return H, states


def _top_eigs(H: sp.csr_matrix) -> tuple[np.ndarray, np.ndarray]:
    dim = H.shape[0]
    if dim <= DENSE_SECTOR_DIM:
        vals, vecs = np.linalg.eigh(H.toarray())
        return vals[::-1], vecs[:, ::-1]
    k = min(8, dim - 2)
    rng = np.random.default_rng(12345)
    v0 = rng.standard_normal(dim)
    vals, vecs = spla.eigsh(H, k=k, which="LA", v0=v0, ncv=min(dim - 1, max(40, 3 * k)),
                            tol=1e-13, maxiter=20000)
    order = np.argsort(vals)[::-1]
    return vals[order], vecs[:, order]


def exact_max_eigenvalue(g: WeightedGraph, all_sectors: bool = False) -> SpectralResult:
    """Maximum eigenvalue of ``sum_e w_e h_e`` by exact diagonalization.

    Parameters
    ----------
    g : WeightedGraph
        Instance with at most 20 vertices.
    all_sectors : bool
        Also diagonalize every other magnetization sector and take the max.

    Returns
    -------
    SpectralResult
    """
    n = g.n
    if n > MAX_ED_QUBITS:
        raise CapabilityError(f"exact diagonalization supports n <= {MAX_ED_QUBITS}, got {n}; "
                              "use oracle.known_value or external reference data")
    k0 = n // 2
    sectors = range(0, n + 1) if all_sectors else [k0]
    found = {}
    for k in sectors:
        H, states = sector_hamiltonian(g, k)
        vals, vecs = _top_eigs(H)
        found[k] = (H, states, vals, vecs)
    values = {k: float(t[2][0]) for k, t in found.items()}
    top = max(values.values())
    # every SU(2) multiplet meets the minimal sector, so prefer it on ties
    k = k0 if values[k0] >= top - DEGENERACY_TOL * (1 + abs(top)) else max(values, key=values.get)
    H, states, vals, vecs = found[k]
    lam = float(vals[0])
    deg = int(np.sum(vals >= lam - 10 * DEGENERACY_TOL * (1 + abs(lam))))
    V = vecs[:, :deg]
    res = float(max(np.linalg.norm(H @ V[:, t] - lam * V[:, t]) for t in range(deg)))
    return SpectralResult(value=lam, n=n, up_spins=k, vectors=V, states=states, residual=res,
                          sector_values=values)


def expectation(g: WeightedGraph, pair: tuple[int, int],
                result: SpectralResult | None = None) -> float:
    """Ground-state expectation of ``h_pair`` for the maximal eigenvalue.

    Degenerate top eigenspaces are averaged (trace of ``h`` on the space
    divided by its dimension).
    """
    i, j = sorted(pair)
    if i == j or not 0 <= i < j < g.n:
        raise ValueError(f"invalid pair {pair} for n={g.n}")
    res = result if result is not None else exact_max_eigenvalue(g)
    rows, cols = sector_swap(res.states, g.n, i, j)
    V = res.vectors
    # <v|h|v> = sum over differing states of (|v_s|^2 - v_s v_swap(s)) / 2
    vals = 0.5 * np.sum(V[rows] * V[rows] - V[rows] * V[cols], axis=0)
    return float(np.mean(vals))


def expectations(g: WeightedGraph, pairs, result: SpectralResult | None = None) -> list[float]:
    res = result if result is not None else exact_max_eigenvalue(g)
    return [expectation(g, p, res) for p in pairs]


def known_value(spec: GraphFamilySpec) -> float | None:
    """Closed-form maximum eigenvalue for families that have one, else None."""
    f, n = spec.family, spec.n
    if f == "star":
        if spec.weights is None or len(set(spec.weights)) == 1:
            w = 1.0 if spec.weights is None else spec.weights[0]
            return w * (n + 1) / 2
        return None
    if f == "complete_bipartite":
        a, b = max(n, spec.m), min(n, spec.m)
        return b * (a + 1) / 2
    if f == "crown":
        return max(n + 1.0, spec.x + n / 2)
    if f in ("complete", "even_complete", "odd_complete"):
        return n * (n + 2) / 8 if n % 2 == 0 else (n + 3) * (n - 1) / 8
    if f == "triangle":
        return max(1.5, spec.alpha + 0.5)
    if f == "double_star":
        return (n + 2 + math.sqrt(n * (n + 2))) / 2
    if f == "path" and n == 2:
        return 1.0
    if f == "cycle" and n == 6:
        return 6 * (5 + math.sqrt(13)) / 12
    if f == "j1j2_chain":
        if spec.pbc and n % 2 == 0 and spec.J1 > 0 and abs(spec.J2 - spec.J1 / 2) <= 1e-15:
            return 3 * n * spec.J1 / 4
        return None
    if f == "shastry_sutherland":
        if spec.alpha >= spec.J:
            return (spec.alpha + spec.J / 2) * n * n
        return None
    return None


def swap_value(g: WeightedGraph, qmc_value: float) -> float:
    """Convert a QMaxCut value to the matching SWAP-objective value.

    Uses ``SWAP_ij = I - 2 h_ij``, so ``sum_e w_e SWAP_e = sum_e w_e - 2 H``.
    The maximum of ``H`` therefore maps to the minimum of the SWAP sum.
    """
    return float(sum(g.weights.values()) - 2.0 * qmc_value)
