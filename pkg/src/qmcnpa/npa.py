"""NPA moment-matrix relaxations of QMaxCut.

Builders return a ``MomentProblem``: the moment basis, the SDP and enough
bookkeeping to turn an ``SdpSolution`` back into the moment matrix.

Two SDP layouts are used.

* ``primal``: the moment matrix is the primal PSD variable ``X`` and the
  moment relations are equality constraints. Used for the level-1 projector
  program, whose relation count ``1 + C(n,2) + 3 C(n,3)`` is small.
* ``lmi``: the moment matrix is the dual slack ``Z = sum_k y_k A_k - C``,
  affine in one scalar per independent moment. Used for level 2 and for the
  Pauli and complex programs, where reduced words fix the variable set.
  The moment-side value is then ``c0 - dual_objective`` and the certified
  upper bound is ``c0 - primal_objective``.

Complex Hermitian moment matrices ``R + iS`` enter through the real
embedding ``[[R, -S], [S, R]]``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .algebra import (Edge, PauliTerm, ProjWord, _reduce_cached, pauli_reduce, word_label)
from .graph import CapabilityError, ParameterError, WeightedGraph
from .sdp import SdpProblem, SdpSolution

MAX_PROJ2_VERTICES = 8
MAX_PAULI2_VERTICES = 8


class ValidationError(ValueError):
    pass


@dataclass(frozen=True)
class MomentBasis:
    """Ordered monomial basis indexing the moment matrix (identity first)."""

    kind: str
    level: int
    words: tuple
    labels: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.words)

    def index(self, label: str) -> int:
        return self.labels.index(label)


@dataclass
class MomentProblem:
    """A moment relaxation together with its SDP.

    Attributes
    ----------
    graph : WeightedGraph
    basis : MomentBasis
    sdp : SdpProblem
    kind : str
        ``"proj"`` or ``"pauli"``.
    level : int
    mode : str
        ``"real"`` or ``"complex"``.
    form : str
        ``"primal"``, ``"primal-cyclic"`` or ``"lmi"``.
    """

    graph: WeightedGraph
    basis: MomentBasis
    sdp: SdpProblem
    kind: str
    level: int
    mode: str
    form: str
    total_spin_cut: bool = False
    symmetry: str | None = None
    objective_constant: float = 0.0
    _assemble: Callable[[SdpSolution], np.ndarray] | None = field(default=None, repr=False)
    _labeler: Callable[[int, int], str] | None = field(default=None, repr=False)

    # values ---------------------------------------------------------------
    def value(self, sol: SdpSolution) -> float:
        """Objective of the returned moment matrix (moment side)."""
        if self.form == "lmi":
            return self.objective_constant - sol.dual_objective
        return sol.primal_objective

    def bound(self, sol: SdpSolution) -> float:
        """Certificate-side value, an upper bound up to dual infeasibility."""
        if self.form == "lmi":
            return self.objective_constant - sol.primal_objective
        return sol.dual_objective

    def moment_matrix(self, sol: SdpSolution) -> np.ndarray:
        """Moment matrix in basis order (complex dtype in complex mode)."""
        return self._assemble(sol)

    def first_moments(self, sol: SdpSolution, M: np.ndarray | None = None) -> dict[Edge, float]:
        """``M(I, h_ij)`` for every vertex pair."""
        M = self.moment_matrix(sol) if M is None else M
        n = self.graph.n
        out = {}
        if self.kind == "proj":
            for t, e in enumerate(itertools.combinations(range(n), 2)):
                out[e] = float(np.real(M[0, 1 + t]))
        else:
            pos = {lab: t for t, lab in enumerate(self.basis.labels)}
            for i, j in itertools.combinations(range(n), 2):
                s = sum(float(np.real(M[pos[f"{a}{i}"], pos[f"{a}{j}"]])) for a in "XYZ")
                out[(i, j)] = (1 - s) / 4
        return out

    def entry_label(self, i: int, j: int) -> str:
        """Reduced monomial identity of entry (i, j)."""
        return self._labeler(i, j)

    @property
    def label_map(self) -> Callable[[int, int], str]:
        return self.entry_label

    def describe(self) -> dict:
        return {"kind": self.kind, "level": self.level, "mode": self.mode, "form": self.form,
                "basis_size": len(self.basis), "constraints": self.sdp.n_constraints,
                "blocks": list(self.sdp.block_sizes), "total_spin_cut": self.total_spin_cut,
                "symmetry": self.symmetry}


# ---------------------------------------------------------------------------
# bases


def _pairs(n: int) -> list[Edge]:
    return list(itertools.combinations(range(n), 2))


def proj_basis(n: int, level: int) -> MomentBasis:
    """``{I} + {h_e}`` (+ ``{h_e h_f : e < f}`` at level 2) over all vertex pairs."""
    pairs = _pairs(n)
    words: list[ProjWord] = [()] + [(e,) for e in pairs]
    if level >= 2:
        words += [(e, f) for e, f in itertools.combinations(pairs, 2)]
    if level > 2:
        raise CapabilityError("levels above 2 are not supported")
    return MomentBasis("proj", level, tuple(words), tuple(word_label(w) for w in words))


def pauli_basis(n: int, level: int) -> MomentBasis:
    """``{I} + {sigma_i}`` (+ ``{sigma_i gamma_j : i < j}`` at level 2)."""
    words = [PauliTerm()]
    words += [PauliTerm.single(i, a) for i in range(n) for a in "XYZ"]
    if level >= 2:
        words += [PauliTerm(0, ((i, a), (j, b))) for i, j in itertools.combinations(range(n), 2)
                  for a in "XYZ" for b in "XYZ"]
    if level > 2:
        raise CapabilityError("levels above 2 are not supported")
    return MomentBasis("pauli", level, tuple(words), tuple(w.label() for w in words))


# ---------------------------------------------------------------------------
# level-1 projector program in primal form


def _check_graph(g: WeightedGraph):
    if g.n < 2:
        raise ParameterError(f"moment programs need n >= 2 vertices, got {g.n}")


def total_spin_bound(n: int) -> float:
    """Largest eigenvalue of ``sum_{i<j} h_ij`` on n qubits."""
    return n * (n + 2) / 8 if n % 2 == 0 else (n + 3) * (n - 1) / 8


def _proj1_constraints(n: int, idx: dict[Edge, int], triples=None):
    """Yield (entries, rhs) for the level-1 relations; entries are (i, j, v), i <= j."""
    yield [(0, 0, 1.0)], 1.0
    for e, a in idx.items():
        yield [(a, a, 1.0), (0, a, -0.5)], 0.0
    for tri in (triples if triples is not None else itertools.combinations(range(n), 3)):
        for x in tri:
            y, z = (v for v in tri if v != x)
            e1, e2, e3 = idx[_e(x, y)], idx[_e(x, z)], idx[_e(y, z)]
            yield [(min(e1, e2), max(e1, e2), 0.5), (0, e1, -0.125), (0, e2, -0.125),
                   (0, e3, 0.125)], 0.0


def _e(i: int, j: int) -> Edge:
    return (i, j) if i < j else (j, i)


def build_proj_level1(g: WeightedGraph, total_spin_cut: bool = False,
                      mode: str = "real") -> MomentProblem:
    """Level-1 projector relaxation.

    Parameters
    ----------
    g : WeightedGraph
    total_spin_cut : bool
        For odd n add ``sum_{all pairs} M(I, h_e) <= (n+3)(n-1)/8`` as a
        linear cut (diagonal block).
    mode : {"real", "complex"}
        The real program is built in primal form; the complex one through
        the generic Hermitian builder (same optimum at this level).

    Returns
    -------
    MomentProblem
    """
    _check_graph(g)
    if mode == "complex":
        return _build_proj_lmi(g, 1, "complex", total_spin_cut)
    if mode != "real":
        raise ParameterError(f"mode must be real or complex, got {mode!r}")
    n = g.n
    pairs = _pairs(n)
    idx = {e: 1 + t for t, e in enumerate(pairs)}
    m = 1 + len(pairs)
    rows, b = [], []
    for k, (ents, rhs) in enumerate(_proj1_constraints(n, idx)):
        rows += [(k, 0, i, j, v) for i, j, v in ents]
        b.append(rhs)
    sizes = [m]
    cut = total_spin_cut and n % 2 == 1
    if cut:
        k = len(b)
        rows += [(k, 0, 0, a, 0.5) for a in idx.values()]
        rows.append((k, 1, 0, 0, 1.0))
        b.append(total_spin_bound(n))
        sizes.append(-1)
    c_rows = [(0, 0, idx[e], w / 2) for e, w in g.weights.items()]
    sdp = SdpProblem(sizes, np.array(b), np.array(c_rows).reshape(-1, 4),
                     np.array(rows).reshape(-1, 5), meta={"instance": g.name})
    basis = proj_basis(n, 1)

    def labeler(i, j):
        return _proj_entry_label(basis, i, j)

    return MomentProblem(g, basis, sdp, "proj", 1, "real", "primal", total_spin_cut=cut,
                         _assemble=lambda s: np.asarray(s.X[0]), _labeler=labeler)


def _proj_entry_label(basis: MomentBasis, i: int, j: int) -> str:
    u = tuple(reversed(basis.words[i])) + tuple(basis.words[j])
    terms = _reduce_cached(u)
    return " + ".join(f"{c}*{word_label(w)}" for w, c in terms) or "0"


# ---------------------------------------------------------------------------
# generic LMI assembly


@dataclass
class _LmiBlock:
    size: int
    positions: np.ndarray        # (P, 2) upper-triangle positions
    re: sp.csr_matrix            # P x K coefficients of the real part
    re0: np.ndarray              # constant real part
    im: sp.csr_matrix | None     # P x K coefficients of the imaginary part
    im0: np.ndarray | None
    index: np.ndarray            # basis indices of the block rows


def _assemble_lmi(blocks: list[_LmiBlock], c: np.ndarray, K: int):
    """SdpProblem with Z_b = sum_k y_k F_k - C equal to the moment blocks."""
    a_rows, c_rows, sizes = [], [], []
    for bi, blk in enumerate(blocks):
        s = blk.size
        ii, jj = blk.positions[:, 0], blk.positions[:, 1]
        re = blk.re.tocoo()
        if blk.im is None:
            sizes.append(s)
            a_rows.append(np.column_stack([re.col, np.full(re.nnz, bi), ii[re.row], jj[re.row],
                                           re.data]))
            nz = blk.re0 != 0
            c_rows.append(np.column_stack([np.full(nz.sum(), bi), ii[nz], jj[nz], -blk.re0[nz]]))
            continue
        sizes.append(2 * s)
        im = blk.im.tocoo()
        off = ii[im.row] != jj[im.row]
        imr, imc, imd = im.row[off], im.col[off], im.data[off]
        a_rows += [
            np.column_stack([re.col, np.full(re.nnz, bi), ii[re.row], jj[re.row], re.data]),
            np.column_stack([re.col, np.full(re.nnz, bi), s + ii[re.row], s + jj[re.row],
                             re.data]),
            np.column_stack([imc, np.full(len(imc), bi), ii[imr], s + jj[imr], -imd]),
            np.column_stack([imc, np.full(len(imc), bi), jj[imr], s + ii[imr], imd]),
        ]
        nz = blk.re0 != 0
        c_rows += [np.column_stack([np.full(nz.sum(), bi), ii[nz], jj[nz], -blk.re0[nz]]),
                   np.column_stack([np.full(nz.sum(), bi), s + ii[nz], s + jj[nz], -blk.re0[nz]])]
        if blk.im0 is not None:
            nz = (blk.im0 != 0) & (ii != jj)
            c_rows += [np.column_stack([np.full(nz.sum(), bi), ii[nz], s + jj[nz], blk.im0[nz]]),
                       np.column_stack([np.full(nz.sum(), bi), jj[nz], s + ii[nz], -blk.im0[nz]])]
    A = np.vstack(a_rows) if a_rows else np.zeros((0, 5))
    C = np.vstack(c_rows) if c_rows else np.zeros((0, 4))
    return SdpProblem(sizes, -np.asarray(c, dtype=float), C, A)


def _lmi_assembler(blocks: list[_LmiBlock], m: int, complex_mode: bool):
    def assemble(sol: SdpSolution) -> np.ndarray:
        M = np.zeros((m, m), dtype=complex if complex_mode else float)
        for blk, Z in zip(blocks, sol.Z):
            s = blk.size
            if complex_mode:
                R = (Z[:s, :s] + Z[s:, s:]) / 2
                S = (Z[s:, :s] - Z[:s, s:]) / 2
                B = R + 1j * S
            else:
                B = Z
            M[np.ix_(blk.index, blk.index)] = B
        return M
    return assemble


# ---------------------------------------------------------------------------
# projector programs in LMI form


def _involution(words: list[ProjWord], index: dict[ProjWord, int]) -> np.ndarray:
    """T[u', u] = coefficient of u' in the canonical form of u*."""
    t = 0
    cols = []
    while t < len(words):
        w = words[t]
        red = _reduce_cached(tuple(reversed(w)))
        for u, _ in red:
            if u not in index:
                index[u] = len(words)
                words.append(u)
        cols.append(red)
        t += 1
    N = len(words)
    T = np.zeros((N, N))
    for j, red in enumerate(cols):
        for u, c in red:
            T[index[u], j] = float(c)
    return T


def _eigen_columns(P: np.ndarray, first: int | None = None) -> np.ndarray:
    """Indices of a maximal independent set of columns of P (``first`` kept)."""
    if P.shape[1] == 0:
        return np.zeros(0, dtype=int)
    _, R, piv = sla.qr(P, pivoting=True, mode="economic")
    d = np.abs(np.diag(R))
    r = int(np.sum(d > 1e-9 * max(d[0], 1.0))) if d.size else 0
    cols = sorted(piv[:r].tolist())
    if first is not None and first not in cols:
        raise AssertionError("identity column unexpectedly dependent")
    return np.array(cols, dtype=int)


def _build_proj_lmi(g: WeightedGraph, level: int, mode: str,
                    total_spin_cut: bool = False) -> MomentProblem:
    n = g.n
    if n > MAX_PROJ2_VERTICES:
        raise CapabilityError(f"projector programs in LMI form support n <= "
                              f"{MAX_PROJ2_VERTICES}, got {n}")
    if total_spin_cut:
        raise CapabilityError("total_spin_cut is available for the real level-1 program only")
    complex_mode = mode == "complex"
    basis = proj_basis(n, level)
    B = basis.words
    m = len(B)
    iu, ju = np.triu_indices(m)
    words: list[ProjWord] = [()]
    index: dict[ProjWord, int] = {(): 0}
    coo_r, coo_c, coo_v = [], [], []
    for p, (a, b) in enumerate(zip(iu, ju)):
        for w, c in _reduce_cached(tuple(reversed(B[a])) + tuple(B[b])):
            t = index.get(w)
            if t is None:
                t = index[w] = len(words)
                words.append(w)
            coo_r.append(p)
            coo_c.append(t)
            coo_v.append(float(c))
    n_entry_words = len(words)
    T = _involution(words, index)
    NW = len(words)
    Cp = sp.csr_matrix((coo_v, (coo_r, coo_c)), shape=(len(iu), NW))
    Id = np.eye(NW)
    plus = _eigen_columns(Id + T.T, first=0)
    Nplus = (Id + T.T)[:, plus]
    Nplus[:, plus == 0] = Id[:, [0]]
    const_col = int(np.flatnonzero(plus == 0)[0])
    var_re = [t for t in range(len(plus)) if t != const_col]
    Re_all = (Cp @ sp.csr_matrix(Nplus)).tocsr()
    re0 = np.asarray(Re_all[:, const_col].todense()).ravel()
    Re = Re_all[:, var_re]
    K = len(var_re)
    Im = im0 = None
    if complex_mode:
        minus = _eigen_columns(Id - T.T)
        Nminus = (Id - T.T)[:, minus]
        Im = (Cp @ sp.csr_matrix(Nminus)).tocsr()
        # pad the real part, imaginary variables follow the real ones
        Re = sp.hstack([Re, sp.csr_matrix((Re.shape[0], Nminus.shape[1]))]).tocsr()
        Im = sp.hstack([sp.csr_matrix((Im.shape[0], K)), Im]).tocsr()
        im0 = np.zeros(len(iu))
        K += Nminus.shape[1]
    c = np.zeros(K)
    for e, w in g.weights.items():
        row = Nplus[index[(e,)], var_re]
        c[:len(var_re)] += w * row
    pos = np.column_stack([iu, ju])
    blk = _LmiBlock(m, pos, Re, re0, Im, im0, np.arange(m))
    # drop variables that never reach the moment matrix
    used = np.unique(np.concatenate([Re.tocoo().col] + ([Im.tocoo().col] if Im is not None
                                                         else [])))
    if len(used) < K:
        keep = np.zeros(K, dtype=bool)
        keep[used] = True
        if np.any(c[~keep] != 0):
            raise AssertionError("objective depends on a moment absent from the matrix")
        blk.re = Re[:, used]
        blk.im = Im[:, used] if Im is not None else None
        c = c[used]
        K = len(used)
    sdp = _assemble_lmi([blk], c, K)
    sdp.meta.update({"instance": g.name, "moment_words": n_entry_words})

    def labeler(i, j):
        return _proj_entry_label(basis, i, j)

    return MomentProblem(g, basis, sdp, "proj", level, mode, "lmi",
                         _assemble=_lmi_assembler([blk], m, complex_mode), _labeler=labeler)


def build_proj_level2(g: WeightedGraph, mode: str = "real") -> MomentProblem:
    """Level-2 projector relaxation (basis ``I, h_e, h_e h_f``), real or complex.

    Every entry ``M(u, v) = L(u* v)`` is reduced to canonical words; the
    functional ``L`` is parametrized by independent real moments compatible
    with ``L(w*) = conj(L(w))``. The real mode keeps real parts only.
    """
    _check_graph(g)
    if mode not in ("real", "complex"):
        raise ParameterError(f"mode must be real or complex, got {mode!r}")
    return _build_proj_lmi(g, 2, mode)


# ---------------------------------------------------------------------------
# Pauli programs


def _parity_class(t: PauliTerm) -> tuple[int, int]:
    nx = sum(1 for _, a in t.ops if a == "X")
    ny = sum(1 for _, a in t.ops if a == "Y")
    nz = sum(1 for _, a in t.ops if a == "Z")
    return ((ny + nz) % 2, (nx + ny) % 2)


_PHASE = {0: (1, 0), 1: (0, 1), 2: (-1, 0), 3: (0, -1)}


def build_pauli(g: WeightedGraph, level: int = 1, mode: str = "real") -> MomentProblem:
    """Pauli-basis relaxation with one real variable per Pauli string.

    Entry ``M(a, b) = i^k y_P`` for ``a b = i^k P`` (complex mode) or its real
    part (real mode). The program is invariant under the global spin flips
    ``X^n, Y^n, Z^n``; averaging over them zeroes strings of odd flip parity
    and splits the moment matrix into four parity blocks.
    """
    _check_graph(g)
    if level not in (1, 2):
        raise ParameterError("Pauli level must be 1 or 2")
    if mode not in ("real", "complex"):
        raise ParameterError(f"mode must be real or complex, got {mode!r}")
    n = g.n
    if level == 2 and n > MAX_PAULI2_VERTICES:
        raise CapabilityError(f"level-2 Pauli programs support n <= {MAX_PAULI2_VERTICES}")
    complex_mode = mode == "complex"
    basis = pauli_basis(n, level)
    classes: dict[tuple[int, int], list[int]] = {}
    for t, w in enumerate(basis.words):
        classes.setdefault(_parity_class(w), []).append(t)
    var: dict[str, int] = {}
    blocks = []
    for cls in sorted(classes):
        idx = np.array(classes[cls])
        s = len(idx)
        iu, ju = np.triu_indices(s)
        rr, rc, rv, ir, ic, iv = [], [], [], [], [], []
        re0 = np.zeros(len(iu))
        for p, (a, b) in enumerate(zip(iu, ju)):
            prod = pauli_reduce([basis.words[idx[a]], basis.words[idx[b]]])
            pr, pi = _PHASE[prod.k]
            if not prod.ops:
                re0[p] = pr
                continue
            key = prod.label()
            if pr == 0 and not complex_mode:
                continue
            v = var.get(key)
            if v is None:
                v = var[key] = len(var)
            if pr:
                rr.append(p), rc.append(v), rv.append(pr)
            if pi and complex_mode:
                ir.append(p), ic.append(v), iv.append(pi)
        blocks.append((s, np.column_stack([iu, ju]), (rr, rc, rv), re0, (ir, ic, iv), idx))
    K = len(var)
    lmi_blocks = []
    for s, pos, (rr, rc, rv), re0, (ir, ic, iv), idx in blocks:
        if s == 1 and not rr and not ir:
            continue  # constant 1x1 block (the identity), trivially PSD
        P = len(pos)
        Re = sp.csr_matrix((rv, (rr, rc)), shape=(P, K))
        Im = sp.csr_matrix((iv, (ir, ic)), shape=(P, K)) if complex_mode else None
        lmi_blocks.append(_LmiBlock(s, pos, Re, re0, Im, np.zeros(P) if complex_mode else None,
                                    idx))
    c = np.zeros(K)
    c0 = 0.0
    for (i, j), w in g.weights.items():
        c0 += w / 4
        for a in "XYZ":
            key = f"{a}{i}{a}{j}"
            if key not in var:
                raise AssertionError(f"moment {key} missing from the Pauli program")
            c[var[key]] -= w / 4
    sdp = _assemble_lmi(lmi_blocks, c, K)
    sdp.meta.update({"instance": g.name})
    m = len(basis)
    inner = _lmi_assembler(lmi_blocks, m, complex_mode)

    def assemble(sol):
        M = inner(sol)
        M[0, 0] = 1.0
        return M

    inv = {v: k for k, v in var.items()}

    def labeler(i, j):
        prod = pauli_reduce([basis.words[i], basis.words[j]])
        return f"i^{prod.k}*{prod.label()}"

    mp = MomentProblem(g, basis, sdp, "pauli", level, mode, "lmi", objective_constant=c0,
                       _assemble=assemble, _labeler=labeler)
    mp.sdp.meta["variables"] = [inv[t] for t in range(K)]
    return mp


# ---------------------------------------------------------------------------
# cyclic symmetry reduction


@dataclass
class _Fourier:
    n: int
    orbit_of: np.ndarray       # basis index -> orbit id (0 = identity, d = distance)
    pos_of: np.ndarray         # basis index -> position t in its orbit
    orbit_size: np.ndarray     # orbit id -> size
    momenta: list[int]
    block_orbits: list[list[int]]
    block_complex: list[bool]


def _fourier(n: int) -> _Fourier:
    pairs = _pairs(n)
    m = 1 + len(pairs)
    orbit_of = np.zeros(m, dtype=int)
    pos_of = np.zeros(m, dtype=int)
    half = n // 2
    sizes = np.zeros(half + 1, dtype=int)
    sizes[0] = 1
    for t, (i, j) in enumerate(pairs):
        d = j - i
        if d > n - d:
            d = n - d
            start = j      # pair is (j, j + d mod n)
        else:
            start = i
        if 2 * d == n:
            start = min(i, j)  # orbit of size n/2
        orbit_of[1 + t] = d
        pos_of[1 + t] = start
    for d in range(1, half + 1):
        sizes[d] = n // 2 if 2 * d == n else n
    momenta = list(range(0, half + 1))
    block_orbits, block_complex = [], []
    for k in momenta:
        orbs = ([0] if k == 0 else []) + [d for d in range(1, half + 1)
                                          if 2 * d != n or k % 2 == 0]
        block_orbits.append(orbs)
        block_complex.append(not (k == 0 or 2 * k == n))
    return _Fourier(n, orbit_of, pos_of, sizes, momenta, block_orbits, block_complex)


def _fourier_blocks(F: _Fourier, entries: list[tuple[int, int, float]]):
    """Hermitian momentum blocks U_k^* A U_k of a symmetric matrix given by upper entries."""
    n = F.n
    out = []
    for k, orbs in zip(F.momenta, F.block_orbits):
        loc = {d: t for t, d in enumerate(orbs)}
        B = np.zeros((len(orbs), len(orbs)), dtype=complex)
        for p, q, v in entries:
            dp, dq = F.orbit_of[p], F.orbit_of[q]
            if dp not in loc or dq not in loc:
                continue
            up = np.exp(2j * np.pi * k * F.pos_of[p] / n) / math.sqrt(F.orbit_size[dp])
            uq = np.exp(2j * np.pi * k * F.pos_of[q] / n) / math.sqrt(F.orbit_size[dq])
            B[loc[dp], loc[dq]] += np.conj(up) * v * uq
            if p != q:
                B[loc[dq], loc[dp]] += np.conj(uq) * v * up
        out.append(B)
    return out


def _realified_entries(B: np.ndarray, is_complex: bool, tol: float = 1e-14):
    """Upper-triangle entries of B (real block) or of [[Re, -Im], [Im, Re]]."""
    s = B.shape[0]
    if not is_complex:
        R = B.real
        iu, ju = np.triu_indices(s)
        v = R[iu, ju]
        nz = np.abs(v) > tol
        return list(zip(iu[nz], ju[nz], v[nz]))
    E = np.block([[B.real, -B.imag], [B.imag, B.real]])
    iu, ju = np.triu_indices(2 * s)
    v = E[iu, ju]
    nz = np.abs(v) > tol
    return list(zip(iu[nz], ju[nz], v[nz]))


def symmetry_reduce_circulant(p: MomentProblem, order: int | None = None) -> MomentProblem:
    """Block-diagonalize a level-1 projector problem on a circulant graph.

    The cyclic shift ``i -> i+1 mod n`` permutes the moment basis. Averaging
    an optimal moment matrix over the shift keeps it optimal, so the search
    can be restricted to shift-invariant matrices, which are block diagonal
    in the Fourier basis of each pair orbit. Momenta ``k`` and ``n-k`` carry
    complex-conjugate blocks; one realified block stands for both.

    Parameters
    ----------
    p : MomentProblem
        Output of ``build_proj_level1`` (real mode).
    order : int, optional
        Must equal ``p.graph.n`` when given (only the full rotation group is
        supported).
    """
    g = p.graph
    n = g.n
    if p.kind != "proj" or p.level != 1 or p.form != "primal":
        raise ParameterError("symmetry reduction needs a real level-1 projector problem")
    if order is not None and order != n:
        raise ParameterError(f"only the full cyclic group of order n={n} is supported")
    if not g.is_circulant():
        raise ParameterError("graph weights are not invariant under the cyclic shift")
    F = _fourier(n)
    pairs = _pairs(n)
    idx = {e: 1 + t for t, e in enumerate(pairs)}
    # one representative per constraint orbit: shared vertex 0 for the ties
    reps = [([(0, 0, 1.0)], 1.0)]
    reps += [([(idx[(0, d)], idx[(0, d)], 1.0), (0, idx[(0, d)], -0.5)], 0.0)
             for d in range(1, n // 2 + 1)]
    for y, z in itertools.combinations(range(1, n), 2):
        e1, e2, e3 = idx[(0, y)], idx[(0, z)], idx[(y, z)]
        reps.append(([(min(e1, e2), max(e1, e2), 0.5), (0, e1, -0.125), (0, e2, -0.125),
                      (0, e3, 0.125)], 0.0))
    nb = len(F.momenta)
    sizes = [(2 if cx else 1) * len(o) for o, cx in zip(F.block_orbits, F.block_complex)]
    rows, b = [], []
    for k, (ents, rhs) in enumerate(reps):
        for bi, B in enumerate(_fourier_blocks(F, ents)):
            rows += [(k, bi, i, j, v) for i, j, v in _realified_entries(B, F.block_complex[bi])]
        b.append(rhs)
    cut = p.total_spin_cut
    if cut:
        k = len(b)
        ents = [(0, a, 0.5) for a in idx.values()]
        for bi, B in enumerate(_fourier_blocks(F, ents)):
            rows += [(k, bi, i, j, v) for i, j, v in _realified_entries(B, F.block_complex[bi])]
        rows.append((k, nb, 0, 0, 1.0))
        b.append(total_spin_bound(n))
        sizes.append(-1)
    c_rows = []
    obj = [(0, idx[e], w / 2) for e, w in g.weights.items()]
    for bi, B in enumerate(_fourier_blocks(F, obj)):
        c_rows += [(bi, i, j, v) for i, j, v in _realified_entries(B, F.block_complex[bi])]
    sdp = SdpProblem(sizes, np.array(b), np.array(c_rows).reshape(-1, 4),
                     np.array(rows).reshape(-1, 5), meta={"instance": g.name,
                                                          "symmetry": "cyclic"})
    m = 1 + len(pairs)

    def assemble(sol: SdpSolution) -> np.ndarray:
        X = np.zeros((m, m))
        for bi, (k, orbs) in enumerate(zip(F.momenta, F.block_orbits)):
            Y = sol.X[bi]
            s = len(orbs)
            if F.block_complex[bi]:
                Bk = (Y[:s, :s] + Y[s:, s:]) / 2 + 1j * (Y[s:, :s] - Y[:s, s:]) / 2
            else:
                Bk = Y
            U = np.zeros((m, s), dtype=complex)
            for t, d in enumerate(orbs):
                rows_d = np.flatnonzero(F.orbit_of == d)
                U[rows_d, t] = np.exp(2j * np.pi * k * F.pos_of[rows_d] / n) / math.sqrt(
                    F.orbit_size[d])
            part = U @ Bk @ U.conj().T
            X += 2 * part.real if F.block_complex[bi] else part.real
        return X

    basis = p.basis
    return MomentProblem(g, basis, sdp, "proj", 1, "real", "primal-cyclic",
                         total_spin_cut=cut, symmetry="cyclic", _assemble=assemble,
                         _labeler=p._labeler)


def first_moments_cyclic(p: MomentProblem, sol: SdpSolution) -> dict[int, float]:
    """``M(I, h_{0,d})`` per distance d from the zero-momentum block alone."""
    if p.form != "primal-cyclic":
        raise ParameterError("needs a cyclically reduced problem")
    n = p.graph.n
    B0 = sol.X[0]
    return {d: float(B0[0, d]) / math.sqrt(n // 2 if 2 * d == n else n)
            for d in range(1, n // 2 + 1)}


# ---------------------------------------------------------------------------
# validation


@dataclass
class ValidationReport:
    """Structural checks of a solved moment problem.

    All residuals and violations are nonnegative magnitudes; margins are
    signed (negative means violated).
    """

    max_constraint_residual: float
    min_eigenvalue: float
    monogamy: list[tuple[tuple[int, int, int], float, float, float]]
    gram_cosines: list[tuple[Edge, Edge, float]]
    sdp_value: float
    oracle_value: float | None = None
    relaxation_ok: bool | None = None

    @property
    def monogamy_min_margin(self) -> float:
        if not self.monogamy:
            return math.inf
        return min(min(a, b, c) for _, a, b, c in self.monogamy)

    @property
    def gram_max_cos(self) -> float:
        return max((abs(c) for _, _, c in self.gram_cosines), default=0.0)

    def ok(self, tol: float = 1e-6) -> bool:
        good = (self.monogamy_min_margin >= -tol and self.gram_max_cos <= 0.5 + tol
                and self.min_eigenvalue >= -tol)
        return good and self.relaxation_ok is not False

    def to_dict(self) -> dict:
        return {"max_constraint_residual": self.max_constraint_residual,
                "min_eig": self.min_eigenvalue,
                "monogamy_min_margin": self.monogamy_min_margin,
                "gram_max_cos": self.gram_max_cos, "sdp_value": self.sdp_value,
                "oracle_value": self.oracle_value, "relaxation_ok": self.relaxation_ok}


def monogamy_margins(m: dict[Edge, float], n: int):
    """Per triple: (sum, 3/2 - sum, 2(ab+bc+ca) - (a^2+b^2+c^2))."""
    out = []
    for i, j, k in itertools.combinations(range(n), 3):
        a, b, c = m[(i, j)], m[(j, k)], m[(i, k)]
        s = a + b + c
        out.append(((i, j, k), s, 1.5 - s, 2 * (a * b + b * c + c * a) - (a * a + b * b + c * c)))
    return out


def validate_solution(p: MomentProblem, s: SdpSolution, oracle_value: float | None = None,
                      tol: float = 1e-7) -> ValidationReport:
    """Check monogamy, Gram-angle, PSD and relaxation properties of a solution."""
    if len(s.X) != len(p.sdp.block_sizes):
        raise ValidationError("solution blocks do not match the problem")
    M = p.moment_matrix(s)
    if M.shape[0] != len(p.basis):
        raise ValidationError("moment matrix size does not match the basis")
    if p.form == "lmi":
        ops_res = _lmi_residual(p, s)
    else:
        _, r = p.sdp.evaluate(s.X)
        ops_res = float(np.max(np.abs(r))) if r.size else 0.0
    H = (M + M.conj().T) / 2
    min_eig = float(np.linalg.eigvalsh(H)[0])
    m = p.first_moments(s, M)
    mono = monogamy_margins(m, p.graph.n)
    cosines = []
    if p.kind == "proj":
        n = p.graph.n
        pos = {e: 1 + t for t, e in enumerate(_pairs(n))}
        Mr = np.real(M)
        for j in range(n):
            others = [v for v in range(n) if v != j]
            for i, k in itertools.combinations(others, 2):
                e, f = _e(i, j), _e(j, k)
                den = math.sqrt(max(Mr[pos[e], pos[e]], 0) * max(Mr[pos[f], pos[f]], 0))
                cosines.append((e, f, float(Mr[pos[e], pos[f]] / den) if den > 1e-12 else 0.0))
    val = p.value(s)
    ok = None if oracle_value is None else bool(val >= oracle_value - tol * (1 + abs(val)))
    return ValidationReport(ops_res, min_eig, mono, cosines, val, oracle_value, ok)


def _lmi_residual(p: MomentProblem, s: SdpSolution) -> float:
    from .sdp import _Operators
    ops = _Operators(p.sdp)
    AT = ops.AT(s.y)
    worst = 0.0
    for a, c, z in zip(AT, ops.C, s.Z):
        worst = max(worst, float(np.max(np.abs(a - c - z))) if z.size else 0.0)
    return worst


def gram_vectors(M: np.ndarray, tol: float = 1e-6) -> np.ndarray:
    """Columns ``V[:, a]`` with ``V^T V = M`` (negative eigenvalues clipped).

    Parameters
    ----------
    M : ndarray
        Symmetric, numerically PSD matrix.
    tol : float
        Most negative eigenvalue tolerated before raising.

    Returns
    -------
    ndarray, shape (r, m)
        ``r`` is the numerical rank.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValidationError("gram_vectors needs a square matrix")
    lam, U = np.linalg.eigh((M + M.T) / 2)
    if lam[0] < -tol:
        raise ValidationError(f"matrix is indefinite (min eigenvalue {lam[0]:.3e})")
    keep = lam > max(1e-12 * max(lam[-1], 1.0), 0.0)
    return (U[:, keep] * np.sqrt(lam[keep])).T


def numerical_rank(M: np.ndarray, tol: float = 1e-6) -> int:
    lam = np.linalg.eigvalsh((M + M.conj().T) / 2)
    return int(np.sum(lam > tol))


def build(g: WeightedGraph, basis: str = "proj", level: int = 1, mode: str = "real",
          total_spin_cut: bool = False) -> MomentProblem:
    """Dispatch to the matching builder."""
    if basis == "proj":
        if level == 1:
            return build_proj_level1(g, total_spin_cut, mode)
        if total_spin_cut:
            raise CapabilityError("total_spin_cut is available for the real level-1 program only")
        return build_proj_level2(g, mode)
    if basis == "pauli":
        if total_spin_cut:
            raise CapabilityError("total_spin_cut is available for the projector basis only")
        return build_pauli(g, level, mode)
    raise ParameterError(f"basis must be proj or pauli, got {basis!r}")
