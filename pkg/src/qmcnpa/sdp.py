"""Semidefinite programs in standard form and a primal-dual interior-point solver.

The problem pair is::

    (P)  maximize  <C, X>    s.t.  <A_k, X> = b_k,  X >= 0 (block diagonal)
    (D)  minimize  b.y       s.t.  Z = sum_k y_k A_k - C >= 0

Blocks with positive size are dense symmetric PSD blocks; negative sizes denote
diagonal (nonnegative orthant) blocks, used for linear inequality cuts. This
is the convention of the sparse SDPA format, where (P) is SDPA's dual problem.

The solver is an infeasible-start path-following method with
Nesterov-Todd scaling and Mehrotra's predictor-corrector, solving a dense
Schur complement system by Cholesky factorization at every iteration.
"""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

log = logging.getLogger(__name__)


class SdpaParseError(ValueError):
    pass


@dataclass
class SdpProblem:
    """Sparse block-diagonal SDP in the (P)/(D) form above.

    Parameters
    ----------
    block_sizes : list of int
        Positive for dense PSD blocks, negative for diagonal blocks.
    b : array, shape (K,)
        Right-hand sides.
    c_entries : array, shape (E0, 4)
        Rows ``(blk, i, j, v)`` with ``i <= j`` (0-based) of the symmetric
        objective matrix.
    a_entries : array, shape (E, 5)
        Rows ``(k, blk, i, j, v)`` with ``i <= j`` of the constraint matrices.
    """

    block_sizes: list[int]
    b: np.ndarray
    c_entries: np.ndarray
    a_entries: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        self.block_sizes = [int(s) for s in self.block_sizes]
        self.b = np.asarray(self.b, dtype=float).reshape(-1)
        self.c_entries = np.asarray(self.c_entries, dtype=float).reshape(-1, 4)
        self.a_entries = np.asarray(self.a_entries, dtype=float).reshape(-1, 5)
        for name, ent, off in (("objective", self.c_entries, 0), ("constraint", self.a_entries, 1)):
            if len(ent) == 0:
                continue
            blk = ent[:, off].astype(int)
            i, j = ent[:, off + 1].astype(int), ent[:, off + 2].astype(int)
            if np.any(i > j):
                raise ValueError(f"{name} entries must use the upper triangle (i <= j)")
            if np.any(blk < 0) or np.any(blk >= len(self.block_sizes)):
                raise ValueError(f"{name} entry references an unknown block")
            sizes = np.abs(np.array(self.block_sizes))[blk]
            if np.any(j >= sizes) or np.any(i < 0):
                raise ValueError(f"{name} entry index outside its block")
            diag = np.array(self.block_sizes)[blk] < 0
            if np.any(diag & (i != j)):
                raise ValueError(f"{name} entry off the diagonal of a diagonal block")
        if len(self.a_entries) and (self.a_entries[:, 0].max() >= len(self.b)
                                    or self.a_entries[:, 0].min() < 0):
            raise ValueError("constraint index outside b")

    @property
    def n_constraints(self) -> int:
        return len(self.b)

    @property
    def m(self) -> int:
        """Side of the first (moment) block."""
        return abs(self.block_sizes[0])

    def canonical(self) -> "SdpProblem":
        """Copy with merged duplicate entries, zeros removed and rows sorted."""
        def merge(ent, ncols):
            if len(ent) == 0:
                return ent.reshape(0, ncols)
            keys = ent[:, :-1]
            order = np.lexsort(keys.T[::-1])
            keys, vals = keys[order], ent[order, -1]
            uniq, inv = np.unique(keys, axis=0, return_inverse=True)
            sums = np.zeros(len(uniq))
            np.add.at(sums, inv.reshape(-1), vals)
            keep = sums != 0
            return np.column_stack([uniq[keep], sums[keep]])
        return SdpProblem(list(self.block_sizes), self.b.copy(), merge(self.c_entries, 4),
                          merge(self.a_entries, 5), dict(self.meta))

    def structurally_equal(self, other: "SdpProblem", rtol: float = 1e-15) -> bool:
        a, b = self.canonical(), other.canonical()
        if a.block_sizes != b.block_sizes or a.b.shape != b.b.shape:
            return False
        if a.c_entries.shape != b.c_entries.shape or a.a_entries.shape != b.a_entries.shape:
            return False
        return (np.allclose(a.b, b.b, rtol=rtol, atol=0)
                and np.array_equal(a.c_entries[:, :-1], b.c_entries[:, :-1])
                and np.array_equal(a.a_entries[:, :-1], b.a_entries[:, :-1])
                and np.allclose(a.c_entries[:, -1], b.c_entries[:, -1], rtol=rtol, atol=0)
                and np.allclose(a.a_entries[:, -1], b.a_entries[:, -1], rtol=rtol, atol=0))

    # dense helpers -------------------------------------------------------
    def dense_blocks(self, entries: np.ndarray) -> list[np.ndarray]:
        """Materialize symmetric block matrices from (blk, i, j, v) rows."""
        out = [np.zeros((s, s)) if s > 0 else np.zeros(-s) for s in self.block_sizes]
        for blk, i, j, v in entries:
            blk, i, j = int(blk), int(i), int(j)
            if self.block_sizes[blk] < 0:
                out[blk][i] += v
            else:
                out[blk][i, j] += v
                if i != j:
                    out[blk][j, i] += v
        return out

    def objective_blocks(self) -> list[np.ndarray]:
        return self.dense_blocks(self.c_entries)

    def evaluate(self, X: list[np.ndarray]) -> tuple[float, np.ndarray]:
        """Objective <C, X> and constraint residual A(X) - b."""
        ops = _Operators(self)
        return float(ops.inner(ops.C, X)), ops.A(X) - self.b


@dataclass
class SdpSolution:
    """Result of ``solve``.

    ``X`` and ``Z`` are lists of blocks (2-D arrays for PSD blocks, 1-D for
    diagonal blocks). ``gap`` is ``|primal - dual| / (1 + |primal|)``.
    """

    X: list[np.ndarray]
    y: np.ndarray
    Z: list[np.ndarray]
    primal_objective: float
    dual_objective: float
    gap: float
    primal_infeasibility: float
    dual_infeasibility: float
    iterations: int
    status: str
    eps: float
    removed_rows: list[int] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def moment_block(self) -> np.ndarray:
        return self.X[0]

    def summary(self) -> dict:
        return {"status": self.status, "primal": self.primal_objective,
                "dual": self.dual_objective, "gap": self.gap,
                "pinf": self.primal_infeasibility, "dinf": self.dual_infeasibility,
                "iterations": self.iterations}


# ---------------------------------------------------------------------------
# operator plumbing


class _Operators:
    """Sparse operator views A: X -> (<A_k, X>)_k and its adjoint, per block."""

    def __init__(self, p: SdpProblem, rows: np.ndarray | None = None):
        self.sizes = p.block_sizes
        K = p.n_constraints
        ent = p.a_entries
        if rows is not None:
            remap = -np.ones(K, dtype=int)
            remap[rows] = np.arange(len(rows))
            kk = remap[ent[:, 0].astype(int)]
            ent = ent[kk >= 0]
            ent = np.column_stack([kk[kk >= 0], ent[:, 1:]])
            K = len(rows)
        self.K = K
        self.Avec: list[sp.csr_matrix] = []
        self.coo: list[tuple[np.ndarray, ...]] = []
        for blk, s in enumerate(self.sizes):
            e = ent[ent[:, 1] == blk]
            k, i, j, v = e[:, 0].astype(int), e[:, 2].astype(int), e[:, 3].astype(int), e[:, 4]
            if s > 0:
                off = i != j
                kf = np.concatenate([k, k[off]])
                if_ = np.concatenate([i, j[off]])
                jf = np.concatenate([j, i[off]])
                vf = np.concatenate([v, v[off]])
                M = sp.csr_matrix((vf, (kf, if_ * s + jf)), shape=(K, s * s))
                M.sum_duplicates()
                self.Avec.append(M)
                Mc = M.tocoo()
                self.coo.append((Mc.row, Mc.col // s, Mc.col % s, Mc.data))
            else:
                M = sp.csr_matrix((v, (k, i)), shape=(K, -s))
                M.sum_duplicates()
                self.Avec.append(M)
                self.coo.append(())
        self.C = p.dense_blocks(p.c_entries)

    def A(self, X: list[np.ndarray]) -> np.ndarray:
        out = np.zeros(self.K)
        for M, Xb in zip(self.Avec, X):
            out += M @ Xb.reshape(-1)
        return out

    def AT(self, y: np.ndarray) -> list[np.ndarray]:
        out = []
        for M, s in zip(self.Avec, self.sizes):
            v = M.T @ y
            out.append(v.reshape(s, s) if s > 0 else v)
        return out

    @staticmethod
    def inner(U: list[np.ndarray], V: list[np.ndarray]) -> float:
        return float(sum(np.vdot(u, v) for u, v in zip(U, V)))

    def gram(self) -> np.ndarray:
        G = np.zeros((self.K, self.K))
        for M in self.Avec:
            G += (M @ M.T).toarray()
        return G


def _schur_block(A: sp.csr_matrix, coo, W: np.ndarray, K: int) -> np.ndarray:
    """M[k, l] = <A_k, W A_l W> for one dense block."""
    s = W.shape[0]
    nnz = A.nnz
    if nnz == 0:
        return np.zeros((K, K))
    if s <= 40:
        T = np.asarray(A @ np.kron(W, W))  # K x s^2
        return np.asarray((A @ T.T).T)
    pair_cost = 3.0 * nnz * nnz
    gemm_cost = float(nnz) * (s * s) + float(nnz) * K
    if pair_cost < gemm_cost:
        k, i, j, v = coo
        S = sp.csr_matrix((np.ones(nnz), (np.arange(nnz), k)), shape=(nnz, K))
        M = np.zeros((K, K))
        step = max(1, int(4e7 // max(nnz, 1)))
        for a in range(0, nnz, step):
            sl = slice(a, a + step)
            T = W[np.ix_(i, i[sl])] * W[np.ix_(j, j[sl])]
            T *= v[:, None]
            T *= v[None, sl]
            # (S^T T) is K x chunk, then multiply by S[chunk] (chunk x K)
            ST = np.asarray(S.T @ T)
            M += np.asarray((S[sl].T @ ST.T).T)
        return M
    # per-constraint products W A_l W gathered through A
    M = np.zeros((K, K))
    indptr, cols, vals = A.indptr, A.indices, A.data
    chunk = max(1, int(2e7 // (s * s)))
    rows_with = np.flatnonzero(np.diff(indptr))
    for a in range(0, len(rows_with), chunk):
        ls = rows_with[a:a + chunk]
        G = np.empty((len(ls), s * s))
        for t, l in enumerate(ls):
            c = cols[indptr[l]:indptr[l + 1]]
            v = vals[indptr[l]:indptr[l + 1]]
            G[t] = (W[:, c // s] @ (v[:, None] * W[c % s, :])).reshape(-1)
        M[:, ls] = np.asarray(A @ G.T)
    return M


def _max_step(L: np.ndarray, D: np.ndarray) -> float:
    """Largest a with L L^T + a D >= 0 (inf if unbounded)."""
    T = sla.solve_triangular(L, D, lower=True)
    T = sla.solve_triangular(L, T.T, lower=True)
    lam = np.linalg.eigvalsh((T + T.T) / 2)[0]
    return math.inf if lam >= 0 else -1.0 / lam


def _max_step_diag(x: np.ndarray, dx: np.ndarray) -> float:
    neg = dx < 0
    if not np.any(neg):
        return math.inf
    return float(np.min(-x[neg] / dx[neg]))


def _well_conditioned(G: np.ndarray, tol: float = 1e-11) -> bool:
    if G.size == 0:
        return True
    try:
        L = np.linalg.cholesky(G)
    except np.linalg.LinAlgError:
        return False
    d = np.diag(L) ** 2
    return bool(d.min() > tol * max(d.max(), 1.0))


def _independent_rows(G: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Indices of a maximal independent set of constraint rows (Gram matrix G)."""
    _, R, piv = sla.qr(G, pivoting=True, mode="economic")
    d = np.abs(np.diag(R))
    r = int(np.sum(d > tol * max(d[0], 1.0))) if d.size else 0
    return np.sort(piv[:r])


def solve(p: SdpProblem, eps: float = 1e-8, max_iter: int = 100, verbose: bool = False,
          overshoot: float = 0.5, refine_steps: int = 2, stall_limit: int = 5) -> SdpSolution:
    """Solve ``p`` to relative accuracy ``eps``.

    Parameters
    ----------
    p : SdpProblem
    eps : float
        Target relative duality gap and relative primal/dual infeasibility,
        in [1e-10, 1e-2].
    max_iter : int
        Iteration cap.
    overshoot : float
        Centering never aims below ``overshoot * eps`` relative gap, so the
        returned gap tracks ``eps`` instead of collapsing far below it.

    Returns
    -------
    SdpSolution
    """
    if not 1e-12 <= eps <= 1e-2:
        raise ValueError(f"eps must lie in [1e-12, 1e-2], got {eps}")
    t0 = time.perf_counter()
    K0 = p.n_constraints
    ops = _Operators(p)
    removed: list[int] = []
    G = ops.gram()
    if not _well_conditioned(G):
        keep = _independent_rows(G)
        removed = sorted(set(range(K0)) - set(keep.tolist()))
        if removed:
            log.warning("removing %d linearly dependent constraint rows", len(removed))
            ops = _Operators(p, rows=keep)
    keep_rows = np.array(sorted(set(range(K0)) - set(removed)), dtype=int)
    b = p.b[keep_rows]
    sizes = p.block_sizes
    K = ops.K
    Cmin = [-c for c in ops.C]  # internal minimization objective
    ntot = sum(abs(s) for s in sizes)

    normA = [np.sqrt(np.asarray(M.multiply(M).sum(axis=1)).ravel()) for M in ops.Avec]
    X, Z = [], []
    for blk, s in enumerate(sizes):
        n = abs(s)
        nA = normA[blk]
        xi = max(10.0, math.sqrt(n), n * float(np.max((1 + np.abs(b)) / (1 + nA))) if K else 10.0)
        eta = max(10.0, math.sqrt(n), float(np.max(nA)) if K else 0.0,
                  float(np.linalg.norm(Cmin[blk])))
        if s > 0:
            X.append(xi * np.eye(n))
            Z.append(eta * np.eye(n))
        else:
            X.append(xi * np.ones(n))
            Z.append(eta * np.ones(n))
    y = np.zeros(K)
    normb = 1 + float(np.linalg.norm(b))
    normC = 1 + math.sqrt(sum(float(np.sum(c * c)) for c in Cmin))

    status = "max_iter"
    it = 0
    best = None
    stall = 0
    pobj = dobj = gap = pinf = dinf = math.inf

    def measures(X, y, Z):
        pobj = -ops.inner(Cmin, X)        # maximization value <C, X>
        dobj = -float(b @ y)              # b . y_external with y_external = -y
        Rp = b - ops.A(X)
        ATy = ops.AT(y)
        Rd = [c - z - a for c, z, a in zip(Cmin, Z, ATy)]
        pinf = float(np.linalg.norm(Rp)) / normb
        dinf = math.sqrt(sum(float(np.sum(r * r)) for r in Rd)) / normC
        gap = abs(pobj - dobj) / (1 + abs(pobj))
        return pobj, dobj, gap, pinf, dinf, Rp, Rd

    for it in range(1, max_iter + 1):
        pobj, dobj, gap, pinf, dinf, Rp, Rd = measures(X, y, Z)
        score = max(gap, pinf, dinf)
        if best is None or score < best[0]:
            best = (score, [x.copy() for x in X], y.copy(), [z.copy() for z in Z], it - 1)
            stall = 0
        else:
            stall += 1
        if verbose:
            print(f"{it - 1:3d} p={pobj:.10g} d={dobj:.10g} gap={gap:.2e} pinf={pinf:.2e} "
                  f"dinf={dinf:.2e}")
        if gap <= eps and pinf <= eps and dinf <= eps:
            status = "optimal"
            it -= 1
            break
        if stall >= stall_limit:
            status = "numerical_failure"
            it -= 1
            break
        mu = sum(ops.inner([x], [z]) for x, z in zip(X, Z)) / ntot

        # NT scaling per block
        scal = []
        try:
            for s, Xb, Zb in zip(sizes, X, Z):
                if s > 0:
                    Lx = np.linalg.cholesky(Xb)
                    Lz = np.linalg.cholesky(Zb)
                    U, d, Vt = np.linalg.svd(Lz.T @ Lx)
                    Gm = Lx @ Vt.T / np.sqrt(d)
                    Ginv = (np.sqrt(d)[:, None] * Vt) @ sla.solve_triangular(Lx, np.eye(s),
                                                                              lower=True)
                    scal.append((Gm, Ginv, d, Gm @ Gm.T, Lx, Lz))
                else:
                    scal.append((None, None, np.sqrt(Xb * Zb), Xb / Zb, None, None))
        except np.linalg.LinAlgError:
            status = "numerical_failure"
            break

        M = np.zeros((K, K))
        for blk, s in enumerate(sizes):
            W = scal[blk][3]
            if s > 0:
                M += _schur_block(ops.Avec[blk], ops.coo[blk], W, K)
            else:
                Ab = ops.Avec[blk]
                M += (Ab @ sp.diags(W) @ Ab.T).toarray()
        M = (M + M.T) / 2
        try:
            cho = sla.cho_factor(M)
        except np.linalg.LinAlgError:
            reg = 1e-12 * max(1.0, float(np.max(np.diag(M))))
            try:
                cho = sla.cho_factor(M + reg * np.eye(K))
            except np.linalg.LinAlgError:
                status = "numerical_failure"
                break

        WRdW = [sc[3] @ r @ sc[3] if s > 0 else sc[3] * r for s, sc, r in zip(sizes, scal, Rd)]

        def expand(Rc, dy):
            ATdy = ops.AT(dy)
            dZ = [r - a for r, a in zip(Rd, ATdy)]
            dX = []
            for s, sc, rc, dz in zip(sizes, scal, Rc, dZ):
                if s > 0:
                    dx = rc - sc[3] @ dz @ sc[3]
                    dX.append((dx + dx.T) / 2)
                else:
                    dX.append(rc - sc[3] * dz)
            return dX, dZ

        def direction(Rc):
            rhs = Rp - ops.A([rc - wrw for rc, wrw in zip(Rc, WRdW)])
            dy = sla.cho_solve(cho, rhs)
            dX, dZ = expand(Rc, dy)
            # refine against the exact operator rather than the factored Schur matrix
            scale = 1e-300 + float(np.linalg.norm(Rp)) + float(np.linalg.norm(rhs))
            for _ in range(refine_steps):
                r = Rp - ops.A(dX)
                if float(np.linalg.norm(r)) <= 1e-14 * scale:
                    break
                dy = dy + sla.cho_solve(cho, r)
                dX, dZ = expand(Rc, dy)
            return dX, dy, dZ

        def steps(dX, dZ):
            ap = ad = 1.0
            for s, sc, xb, zb, dx, dz in zip(sizes, scal, X, Z, dX, dZ):
                if s > 0:
                    ap = min(ap, _max_step(sc[4], dx))
                    ad = min(ad, _max_step(sc[5], dz))
                else:
                    ap = min(ap, _max_step_diag(xb, dx))
                    ad = min(ad, _max_step_diag(zb, dz))
            return ap, ad

        # predictor
        dXp, dyp, dZp = direction([-x for x in X])
        ap, ad = steps(dXp, dZp)
        mu_aff = sum(ops.inner([x + ap * dx], [z + ad * dz])
                     for x, dx, z, dz in zip(X, dXp, Z, dZp)) / ntot
        sigma = min(1.0, max(0.0, (mu_aff / mu) ** 3)) if mu > 0 else 0.0
        # do not aim far below the requested accuracy
        target = overshoot * eps * (1 + abs(pobj)) / ntot
        if pinf <= eps and dinf <= eps:
            sigma = max(sigma, min(1.0, target / mu))

        # corrector
        Rc = []
        for s, sc, dx, dz, zb in zip(sizes, scal, dXp, dZp, Z):
            Gm, Ginv, d = sc[0], sc[1], sc[2]
            if s > 0:
                dxs = Ginv @ dx @ Ginv.T
                dzs = Gm.T @ dz @ Gm
                prod = dxs @ dzs
                R = -(prod + prod.T) / 2
                R[np.diag_indices_from(R)] += sigma * mu - d * d
                R = 2 * R / (d[:, None] + d[None, :])
                Rc.append(Gm @ R @ Gm.T)
            else:
                Rc.append((sigma * mu - d * d - dx * dz) / zb)
        dX, dy, dZ = direction(Rc)
        ap, ad = steps(dX, dZ)
        gamma = 0.9 + 0.09 * min(ap, ad, 1.0)
        ap, ad = min(1.0, gamma * ap), min(1.0, gamma * ad)
        X = [x + ap * dx for x, dx in zip(X, dX)]
        y = y + ad * dy
        Z = [z + ad * dz for z, dz in zip(Z, dZ)]
        X = [(x + x.T) / 2 if x.ndim == 2 else x for x in X]
        Z = [(z + z.T) / 2 if z.ndim == 2 else z for z in Z]
    else:
        it = max_iter

    pobj, dobj, gap, pinf, dinf, _, _ = measures(X, y, Z)
    if status != "optimal" and best is not None:
        score = max(gap, pinf, dinf)
        if best[0] < score:
            _, X, y, Z, _ = best
            pobj, dobj, gap, pinf, dinf, _, _ = measures(X, y, Z)

    y_full = np.zeros(K0)
    y_full[keep_rows] = -y
    return SdpSolution(X=X, y=y_full, Z=Z, primal_objective=pobj, dual_objective=dobj, gap=gap,
                       primal_infeasibility=pinf, dual_infeasibility=dinf, iterations=it,
                       status=status, eps=eps, removed_rows=removed,
                       seconds=time.perf_counter() - t0)


def min_eigenvalue(X: list[np.ndarray] | np.ndarray) -> float:
    """Smallest eigenvalue over all blocks (diagonal blocks contribute entries)."""
    blocks = [X] if isinstance(X, np.ndarray) else X
    vals = []
    for B in blocks:
        if B.ndim == 2:
            vals.append(float(np.linalg.eigvalsh((B + B.T) / 2)[0]))
        elif B.size:
            vals.append(float(B.min()))
    return min(vals)


# ---------------------------------------------------------------------------
# SDPA sparse format


def export_sdpa(p: SdpProblem, path=None, comment: str = "") -> str:
    """Write ``p`` in sparse SDPA format (F0 = C, F_k = A_k, c = b).

    Values are written with 17 significant digits so that parsing
    reproduces the problem exactly.
    """
    q = p.canonical()
    lines = []
    for line in comment.splitlines():
        lines.append('"' + line)
    lines.append(f"{q.n_constraints} = mDIM")
    lines.append(f"{len(q.block_sizes)} = nBLOCK")
    lines.append(" ".join(str(s) for s in q.block_sizes) + " = bLOCKsTRUCT")
    lines.append(" ".join(repr(float(v)) for v in q.b))
    for blk, i, j, v in q.c_entries:
        lines.append(f"0 {int(blk) + 1} {int(i) + 1} {int(j) + 1} {float(v)!r}")
    for k, blk, i, j, v in q.a_entries:
        lines.append(f"{int(k) + 1} {int(blk) + 1} {int(i) + 1} {int(j) + 1} {float(v)!r}")
    text = "\n".join(lines) + "\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def parse_sdpa(text: str) -> SdpProblem:
    """Parse sparse SDPA text (as written by ``export_sdpa`` or other tools).

    Raises
    ------
    SdpaParseError
        With the 1-based line number of the first malformed line.
    """
    raw = text.splitlines()
    toks: list[tuple[int, str]] = []
    for ln, line in enumerate(raw, 1):
        s = line.strip()
        if not s or s[0] in '"*':
            continue
        toks.append((ln, s))
    if len(toks) < 4:
        raise SdpaParseError("SDPA input truncated: header needs mDIM, nBLOCK, block sizes and c")

    def numbers(ln, s, conv):
        s = s.split("=")[0]
        for ch in ",{}()":
            s = s.replace(ch, " ")
        try:
            return [conv(t) for t in s.split()]
        except ValueError as exc:
            raise SdpaParseError(f"line {ln}: {exc}") from None

    ln, s = toks[0]
    mdim = numbers(ln, s, int)
    ln2, s2 = toks[1]
    nblk = numbers(ln2, s2, int)
    if len(mdim) < 1 or len(nblk) < 1:
        raise SdpaParseError(f"line {ln}: expected mDIM and nBLOCK")
    mdim, nblk = mdim[0], nblk[0]
    ln, s = toks[2]
    sizes = numbers(ln, s, int)[:nblk]
    if len(sizes) != nblk or any(z == 0 for z in sizes):
        raise SdpaParseError(f"line {ln}: expected {nblk} nonzero block sizes")
    pos = 3
    cvals: list[float] = []
    while len(cvals) < mdim:
        if pos >= len(toks):
            raise SdpaParseError("SDPA input truncated inside the c vector")
        ln, s = toks[pos]
        cvals.extend(numbers(ln, s, float))
        pos += 1
    if len(cvals) != mdim:
        raise SdpaParseError(f"line {ln}: c vector has {len(cvals)} entries, expected {mdim}")
    c_rows, a_rows = [], []
    for ln, s in toks[pos:]:
        parts = s.split()
        if len(parts) != 5:
            raise SdpaParseError(f"line {ln}: expected 5 fields 'mat blk i j value'")
        try:
            k, blk, i, j = (int(t) for t in parts[:4])
            v = float(parts[4])
        except ValueError as exc:
            raise SdpaParseError(f"line {ln}: {exc}") from None
        if not (0 <= k <= mdim and 1 <= blk <= nblk):
            raise SdpaParseError(f"line {ln}: matrix or block index out of range")
        size = abs(sizes[blk - 1])
        if not (1 <= i <= size and 1 <= j <= size):
            raise SdpaParseError(f"line {ln}: entry index out of range for block {blk}")
        if i > j:
            i, j = j, i
        if sizes[blk - 1] < 0 and i != j:
            raise SdpaParseError(f"line {ln}: off-diagonal entry in diagonal block {blk}")
        if k == 0:
            c_rows.append((blk - 1, i - 1, j - 1, v))
        else:
            a_rows.append((k - 1, blk - 1, i - 1, j - 1, v))
    return SdpProblem(sizes, np.array(cvals), np.array(c_rows).reshape(-1, 4),
                      np.array(a_rows).reshape(-1, 5)).canonical()
