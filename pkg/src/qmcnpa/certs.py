"""Analytic sum-of-squares certificates and explicit feasible moment matrices.

A certificate is a shift ``lam`` together with polynomials ``psi_k`` in the
singlet projectors such that ``lam * I - H = sum_k psi_k^* psi_k`` holds as
an operator identity. Any positive prefactor of a square is absorbed into
``psi_k`` as its square root. Certificates are checked by building every
operator as a sparse matrix.

A fixture is an explicit level-1 projector moment matrix together with the
objective it attains. Fixtures certify *inexactness*: a feasible PSD moment
matrix whose objective exceeds the true maximum eigenvalue shows that the
relaxation cannot be tight.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
import scipy.sparse as sp

from .algebra import ProjPoly, edge, parse_word_label, to_matrix, word_label
from .graph import GraphFamilySpec, ParameterError, WeightedGraph, make_family, \
    shastry_sutherland_triangles
from .npa import MomentProblem, proj_basis
from .oracle import exact_max_eigenvalue, known_value
from .sdp import min_eigenvalue

MAX_CHECK_QUBITS = 16
CERT_TOL = 1e-9


class RegionError(ParameterError):
    """Parameters lie outside the region where a construction is valid."""


# ---------------------------------------------------------------------------
# certificates


@dataclass
class SosCertificate:
    """``shift * I - H = sum_k squares[k]^* squares[k]``.

    Attributes
    ----------
    family : str
    shift : float
        The certified upper bound on the maximum eigenvalue.
    squares : list of ProjPoly
        Polynomials of degree at most ``level``.
    level : int
    params : dict
        Construction parameters (sizes, weights, sign and branch choices).
    spec : GraphFamilySpec
        Instance whose Hamiltonian is certified.
    """

    family: str
    shift: float
    squares: list[ProjPoly]
    level: int
    params: dict
    spec: GraphFamilySpec = field(repr=False)

    @property
    def graph(self) -> WeightedGraph:
        return make_family(self.spec)

    def sum_of_squares(self, n: int) -> sp.csr_matrix:
        """Sparse matrix of ``sum_k psi_k^* psi_k`` on n qubits."""
        S = sp.csr_matrix((2 ** n, 2 ** n))
        for q in self.squares:
            P = to_matrix(q, n)
            S = S + (P.conj().T @ P)
        return S.tocsr()

    def to_dict(self) -> dict:
        return {"family": self.family, "shift": self.shift, "level": self.level,
                "params": self.params, "instance": self.spec.label(),
                "squares": [{word_label(w): float(c) for w, c in q.terms.items()}
                            for q in self.squares]}

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d: Mapping) -> "SosCertificate":
        c = make_certificate(d["family"], d["params"])
        squares = [ProjPoly({parse_word_label(lab): v for lab, v in q.items()})
                   for q in d["squares"]]
        return cls(d["family"], float(d["shift"]), squares, int(d["level"]), dict(d["params"]),
                   c.spec)


def _sq(poly: ProjPoly, weight: float) -> ProjPoly:
    """``psi`` with ``weight * poly^* poly = psi^* psi``."""
    if weight < 0:
        raise ValueError("square weights must be non-negative")
    return poly * math.sqrt(weight)


def _h(i: int, j: int, c: float = 1.0) -> ProjPoly:
    return ProjPoly({(edge(i, j),): c})


def _I(c: float = 1.0) -> ProjPoly:
    return ProjPoly({(): c})


def _sign(params: Mapping) -> int:
    s = params.get("sign", 1)
    if s not in (1, -1, "+", "-"):
        raise ParameterError(f"sign must be +1 or -1, got {s!r}")
    return -1 if s in (-1, "-") else 1


def strong_triangle_coefficients(alpha: float, J: float = 1.0, sign: int = 1
                                 ) -> tuple[float, float]:
    """Coefficients ``(c_J, c_alpha)`` of the strong-coupling triangle square.

    For the triangle ``J h_12 + J h_23 + alpha h_13`` with ``alpha >= J``,
    ``(alpha + J/2) I - H = (alpha + J/2) (I - c_J (h_12 + h_23) - c_alpha h_13)^2``.
    """
    disc = 2 * alpha * (2 * alpha - J) - 2 * J * J
    if disc < -1e-12 * max(1.0, alpha * alpha):
        raise RegionError(f"strong triangle square requires alpha >= J (alpha={alpha}, J={J})")
    r = math.sqrt(max(disc, 0.0))
    den = 3 * J + 6 * alpha
    return (4 * alpha + 2 * J - 2 * sign * r) / den, (4 * alpha + 2 * J + sign * r) / den


def weak_triangle_coefficients(alpha: float, sign: int = 1) -> tuple[float, float]:
    """Coefficients ``(c_1, c_alpha)`` of the weak-coupling triangle square.

    For ``h_12 + h_23 + alpha h_13`` with ``alpha <= 1``,
    ``3/2 I - H = 3/2 (I - c_1 (h_12 + h_23) - c_alpha h_13)^2``.
    """
    if alpha > 1 + 1e-12:
        raise RegionError(f"weak triangle square requires alpha <= 1 (alpha={alpha})")
    r = math.sqrt(max(6 * (1 - alpha), 0.0))
    return 2 / 3, (2 + sign * r) / 3


def _triangle_square(apex: int, p: int, q: int, alpha: float, J: float, sign: int,
                     scale: float = 1.0) -> tuple[float, ProjPoly]:
    """Square for ``scale * (J h_p,apex + J h_apex,q + alpha h_pq)``.

    Returns the shift it certifies and ``psi``.
    """
    if alpha >= J:
        cJ, ca = strong_triangle_coefficients(alpha, J, sign)
        lam = alpha + J / 2
    else:
        c1, ca = weak_triangle_coefficients(alpha / J, sign)
        cJ, lam = c1, 1.5 * J
    inner = _I() - _h(p, apex, cJ) - _h(apex, q, cJ) - _h(p, q, ca)
    return scale * lam, _sq(inner, scale * lam)


def _star(n: int) -> list[ProjPoly]:
    main = _I(math.sqrt((n + 1) / 2)) - sum((_h(0, i, math.sqrt(2 / (n + 1)))
                                             for i in range(1, n + 1)), ProjPoly())
    out = [main]
    out += [_h(j, k, math.sqrt(1 / (n + 1))) for j, k in itertools.combinations(range(1, n + 1), 2)]
    return out


def _complete_bipartite(n: int, m: int) -> list[ProjPoly]:
    # A = 0..n-1, B = n..n+m-1
    out = []
    for b in range(n, n + m):
        core = _I((n + 1) / 2) - sum((_h(i, b) for i in range(n)), ProjPoly())
        out.append(_sq(core, 2 / (n + 1)))
    out += [_sq(_h(i, j), m / (n + 1)) for i, j in itertools.combinations(range(n), 2)]
    return out


def crown_boundary(n: int) -> float:
    """Upper end ``(n+2)^2 / (4(n+1))`` of the small-x certificate region."""
    return (n + 2) ** 2 / (4 * (n + 1))


def _crown(n: int, x: float, sign: int, branch: str | None) -> tuple[float, list[ProjPoly], str]:
    a, b = n, n + 1
    bnd = crown_boundary(n)
    if branch is None:
        branch = "small_x" if x <= bnd else "triangles" if x >= n else None
    if branch == "small_x":
        disc = (n + 2) ** 2 - 4 * (n + 1) * x
        if disc < -1e-12:
            raise RegionError(f"crown small-x certificate requires x <= (n+2)^2/(4(n+1)) = {bnd}")
        cab = (2 + n + sign * math.sqrt(max(disc, 0.0))) / 4
        out = []
        for k in (a, b):
            core = _I((n + 1) / 2) - sum((_h(i, k) for i in range(n)), ProjPoly()) - _h(a, b, cab)
            out.append(_sq(core, 2 / (n + 1)))
        out += [_sq(_h(i, j), 2 / (n + 1)) for i, j in itertools.combinations(range(n), 2)]
        return n + 1.0, out, branch
    if branch == "triangles":
        if x < n - 1e-12:
            raise RegionError(f"crown triangle certificate requires x >= n = {n}")
        lam, out = 0.0, []
        for i in range(n):
            l_t, psi = _triangle_square(i, a, b, x / n, 1.0, sign)
            lam += l_t
            out.append(psi)
        return lam, out, branch
    if branch is None:
        raise RegionError(f"no crown certificate for {bnd} < x < {n}: the level-1 relaxation "
                          "is not tight there")
    raise ParameterError(f"unknown crown branch {branch!r}")


def _double_star_dssos(n: int) -> tuple[float, list[ProjPoly]]:
    s = math.sqrt(n * (n + 2))
    E = (n + 2 + s) / 2
    out = []
    for x, y, leaves in ((0, 1, range(2, n + 2)), (1, 0, range(n + 2, 2 * n + 2))):
        core = _I() - sum((_h(i, x, 2 / E) for i in leaves), ProjPoly()) - _h(0, 1, 1 / E)
        out.append(_sq(core, E / 2))
        out += [_sq(_h(i, j), 1 / E) for i, j in itertools.combinations(leaves, 2)]
        wt = math.sqrt(n / (n + 2)) / (2 * n + 1)
        for i in leaves:
            poly = _h(i, y) - _h(i, x, n + 1 - s) + _h(0, 1, 1 / (2 * E - 2))
            out.append(_sq(poly, wt))
    return E, out


def _double_star_lv2sos(n: int) -> tuple[float, list[ProjPoly]]:
    s = math.sqrt(n * (n + 2))
    S = math.sqrt(math.sqrt(1 + 2 / n) + s - n - 2)
    al = math.sqrt(n + 2 + s) / 2
    be = (2 * al + S) / (n + 2)
    ga = (2 * al - (n + s) * S / 2) / (n + 2)
    de = ((4 * al * al - 1) * S - 2 * al) / (n + 2)
    out = []
    for x, y, leaves in ((0, 1, range(2, n + 2)), (1, 0, range(n + 2, 2 * n + 2))):
        core = (_I(al) - sum((_h(i, x, be) for i in leaves), ProjPoly()) - _h(0, 1, ga)
                + sum((_h(i, y, de) for i in leaves), ProjPoly()))
        out.append(core)
        out += [_sq(_h(i, j), (be * be + de * de) / 2)
                for i, j in itertools.combinations(leaves, 2)]
        # h_ix and h_jy act on disjoint pairs, so their product is a projector
        out += [_sq(ProjPoly({tuple(sorted((edge(i, x), edge(j, y)))): 1.0}), 2 * be * de)
                for i, j in itertools.permutations(leaves, 2)]
    return (n + 2 + s) / 2, out


def _even_complete(n: int) -> list[ProjPoly]:
    out = []
    for i in range(n):
        out.append(_I(math.sqrt((n + 2) / 8))
                   - sum((_h(i, j, math.sqrt(2 / (n + 2))) for j in range(n) if j != i),
                         ProjPoly()))
    return out


def _majumdar_ghosh(L: int, J1: float) -> tuple[float, list[ProjPoly]]:
    lam, out = 0.0, []
    for k in range(L):
        l_t, psi = _triangle_square(k, (k - 1) % L, (k + 1) % L, 1.0, 1.0, 1, scale=J1 / 2)
        lam += l_t
        out.append(psi)
    return lam, out


def _shastry_sutherland(L: int, alpha: float, J: float, sign: int) -> tuple[float, list[ProjPoly]]:
    if alpha < J - 1e-12:
        raise RegionError(f"Shastry-Sutherland certificate requires alpha >= J (alpha={alpha}, "
                          f"J={J})")
    lam, out = 0.0, []
    for p, c, q in shastry_sutherland_triangles(L):
        l_t, psi = _triangle_square(c, p, q, alpha, J, sign)
        lam += l_t
        out.append(psi)
    return lam, out


CERTIFICATE_FAMILIES = ("star", "complete_bipartite", "crown", "triangle", "double_star",
                        "even_complete", "majumdar_ghosh", "shastry_sutherland")


def make_certificate(family: str, params: Mapping | None = None) -> SosCertificate:
    """Build an analytic certificate.

    Parameters
    ----------
    family : str
        One of ``CERTIFICATE_FAMILIES``.
    params : mapping
        ``n`` (leaves, vertices or linear size), ``m``, ``x``, ``alpha``,
        ``J``, ``J1``, ``sign`` (+1 or -1 root choice), ``branch`` (crown:
        ``small_x`` or ``triangles``), ``form`` (double star: ``dssos`` or
        ``lv2sos``; triangle: ``strong`` or ``weak``).

    Returns
    -------
    SosCertificate

    Raises
    ------
    RegionError
        If the parameters lie outside the certificate's validity region.
    """
    p = dict(params or {})
    sign = _sign(p)
    n = int(p.get("n", 0))
    level = 1
    if family == "star":
        if n < 1:
            raise ParameterError("star certificate needs n >= 1 leaves")
        spec = GraphFamilySpec("star", n)
        lam, squares = (n + 1) / 2, _star(n)
    elif family == "complete_bipartite":
        m = int(p.get("m", 1))
        if not n >= m >= 1:
            raise ParameterError("complete_bipartite certificate needs n >= m >= 1")
        spec = GraphFamilySpec("complete_bipartite", n, m)
        lam, squares = m * (n + 1) / 2, _complete_bipartite(n, m)
    elif family == "crown":
        if n < 2:
            raise ParameterError("crown certificate needs n >= 2")
        x = float(p.get("x", 1.0))
        lam, squares, branch = _crown(n, x, sign, p.get("branch"))
        p["branch"] = branch
        spec = GraphFamilySpec("crown", n, x=x)
    elif family == "triangle":
        alpha = float(p.get("alpha", 1.0))
        form = p.get("form", "strong" if alpha >= 1 else "weak")
        if form == "strong" and alpha < 1 - 1e-12:
            raise RegionError(f"strong triangle certificate requires alpha >= 1 (alpha={alpha})")
        if form == "weak" and alpha > 1 + 1e-12:
            raise RegionError(f"weak triangle certificate requires alpha <= 1 (alpha={alpha})")
        if form == "strong":
            cJ, ca = strong_triangle_coefficients(alpha, 1.0, sign)
            lam = alpha + 0.5
        elif form == "weak":
            cJ, ca = weak_triangle_coefficients(alpha, sign)
            lam = 1.5
        else:
            raise ParameterError(f"triangle form must be strong or weak, got {form!r}")
        p["form"] = form
        squares = [_sq(_I() - _h(0, 1, cJ) - _h(1, 2, cJ) - _h(0, 2, ca), lam)]
        spec = GraphFamilySpec("triangle", 3, alpha=alpha)
    elif family == "double_star":
        if n < 1:
            raise ParameterError("double_star certificate needs n >= 1")
        form = p.get("form", "dssos")
        if form == "dssos":
            lam, squares = _double_star_dssos(n)
        elif form == "lv2sos":
            lam, squares = _double_star_lv2sos(n)
            level = 2
        else:
            raise ParameterError(f"double_star form must be dssos or lv2sos, got {form!r}")
        p["form"] = form
        spec = GraphFamilySpec("double_star", n)
    elif family in ("even_complete", "complete"):
        if n < 2 or n % 2:
            raise RegionError(f"complete-graph certificate requires even n >= 2 (n={n}); odd "
                              "complete graphs are not tight at level 1")
        family = "even_complete"
        spec = GraphFamilySpec("complete", n)
        lam, squares = n * (n + 2) / 8, _even_complete(n)
    elif family in ("majumdar_ghosh", "j1j2_chain"):
        family = "majumdar_ghosh"
        J1 = float(p.get("J1", 1.0))
        if "J2" in p and abs(float(p["J2"]) - J1 / 2) > 1e-12:
            raise RegionError("Majumdar-Ghosh certificate requires J2 = J1/2")
        if n < 5 or J1 <= 0:
            raise ParameterError("Majumdar-Ghosh certificate needs a periodic chain with L >= 5 "
                                 "and J1 > 0")
        spec = GraphFamilySpec("j1j2_chain", n, J1=J1, J2=J1 / 2, pbc=True)
        lam, squares = _majumdar_ghosh(n, J1)
    elif family == "shastry_sutherland":
        alpha = float(p.get("alpha", 1.0))
        J = float(p.get("J", 1.0))
        spec = GraphFamilySpec("shastry_sutherland", n, alpha=alpha, J=J)
        make_family(spec)
        lam, squares = _shastry_sutherland(n, alpha, J, sign)
    else:
        raise ParameterError(f"unknown certificate family {family!r}; known: "
                             f"{', '.join(CERTIFICATE_FAMILIES)}")
    p["sign"] = sign
    return SosCertificate(family, float(lam), squares, level, p, spec)


@dataclass
class CertificateCheck:
    residual: float
    n_qubits: int
    annihilation: list[float] | None = None

    @property
    def accepted(self) -> bool:
        ok = self.residual <= CERT_TOL
        if self.annihilation is not None:
            ok = ok and max(self.annihilation, default=0.0) <= 1e-7
        return ok

    def to_dict(self) -> dict:
        return {"residual": self.residual, "n_qubits": self.n_qubits,
                "annihilation_max": (max(self.annihilation, default=0.0)
                                     if self.annihilation is not None else None),
                "accepted": self.accepted}


def verify_certificate(c: SosCertificate, g: WeightedGraph | None = None,
                       n_check: int | None = None) -> float:
    """``max |lam I - H - sum_k psi_k^* psi_k|`` over matrix entries.

    Parameters
    ----------
    c : SosCertificate
    g : WeightedGraph, optional
        Hamiltonian to check against; defaults to the certificate's instance.
    n_check : int, optional
        Qubits used for the matrices (at least the instance size, at most 16).

    Returns
    -------
    float
        The residual; the certificate is accepted iff it is at most 1e-9.
    """
    g = c.graph if g is None else g
    n = g.n if n_check is None else int(n_check)
    if n < g.n:
        raise ValueError(f"n_check={n} smaller than the instance ({g.n} qubits)")
    if n > MAX_CHECK_QUBITS:
        raise ParameterError(f"certificate checks are limited to {MAX_CHECK_QUBITS} qubits")
    H = to_matrix(ProjPoly({(e,): w for e, w in g.weights.items()}), n)
    R = sp.identity(2 ** n, format="csr") * c.shift - H - c.sum_of_squares(n)
    R = R.tocsr()
    R.eliminate_zeros()
    return float(np.max(np.abs(R.data))) if R.nnz else 0.0


def ground_space(g: WeightedGraph) -> np.ndarray:
    """Top eigenvectors of H embedded in the full 2^n space (columns)."""
    res = exact_max_eigenvalue(g)
    V = np.zeros((2 ** g.n, res.degeneracy))
    V[res.states] = res.vectors
    return V


def annihilation_norms(c: SosCertificate, g: WeightedGraph | None = None) -> list[float]:
    """``max_v ||psi_k v||`` over an orthonormal basis of the top eigenspace, per square.

    An exact certificate forces every square to annihilate the maximal
    eigenvectors.
    """
    g = c.graph if g is None else g
    V = ground_space(g)
    return [float(np.max(np.linalg.norm(to_matrix(q, g.n) @ V, axis=0))) for q in c.squares]


def check_certificate(c: SosCertificate, annihilation: bool = False) -> CertificateCheck:
    g = c.graph
    r = verify_certificate(c, g)
    ann = annihilation_norms(c, g) if annihilation else None
    return CertificateCheck(r, g.n, ann)


def certificate_known_gap(c: SosCertificate) -> float | None:
    """``shift - known_value`` for the certified instance, if a closed form exists."""
    kv = known_value(c.spec)
    return None if kv is None else c.shift - kv


# ---------------------------------------------------------------------------
# fixtures


@dataclass
class MomentFixture:
    """Explicit level-1 projector moment matrix.

    Attributes
    ----------
    kind : str
        ``odd_complete``, ``crown_failing`` or ``hexagon``.
    M : ndarray
        Symmetric matrix indexed by ``labels`` (identity first, then every
        vertex pair in lexicographic order).
    labels : tuple of str
    target : float
        Objective ``sum_e w_e M(I, h_e)`` the construction attains.
    params : dict
    spec : GraphFamilySpec
        Instance the objective refers to.
    expected_eigenvalues : list of float
        Closed-form eigenvalues that must appear in the spectrum of ``M``.
    """

    kind: str
    M: np.ndarray
    labels: tuple[str, ...]
    target: float
    params: dict
    spec: GraphFamilySpec
    expected_eigenvalues: list[float] = field(default_factory=list)

    @property
    def graph(self) -> WeightedGraph:
        return make_family(self.spec)

    def objective(self) -> float:
        pos = {lab: t for t, lab in enumerate(self.labels)}
        return float(sum(w * self.M[0, pos[word_label((e,))]]
                         for e, w in self.graph.weights.items()))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": self.params, "instance": self.spec.label(),
                "target": self.target, "labels": list(self.labels), "M": self.M.tolist(),
                "expected_eigenvalues": self.expected_eigenvalues}


def _pair_index(n: int) -> dict[tuple[int, int], int]:
    return {e: 1 + t for t, e in enumerate(itertools.combinations(range(n), 2))}


def _odd_complete(n: int) -> MomentFixture:
    if n < 5 or n % 2 == 0:
        raise RegionError(f"odd_complete fixture requires odd n >= 5 (n={n})")
    a = (n + 2) / (4 * (n - 1))
    b = n * (n + 2) / (16 * (n - 1) * (n - 3))
    idx = _pair_index(n)
    m = 1 + len(idx)
    M = np.zeros((m, m))
    M[0, 0] = 1.0
    for e, s in idx.items():
        M[0, s] = M[s, 0] = a
        for f, t in idx.items():
            shared = len(set(e) & set(f))
            M[s, t] = a if shared == 2 else a / 4 if shared == 1 else b
    # an/4 - (n-3)b (= 0), a/2 + b on alternating even cycles, and the
    # positive member of the (x, 1, ..., 1) pair
    eig = [a * n / 4 - (n - 3) * b, a / 2 + b, 1 + a * a * math.comb(n, 2)]
    return MomentFixture("odd_complete", M, proj_basis(n, 1).labels, n * (n + 2) / 8,
                         {"n": n, "a": a, "b": b}, GraphFamilySpec("complete", n), eig)


def odd_complete_conjecture(n: int, k: int) -> float:
    """Conjectured moment of ``k`` vertex-disjoint projectors on the complete graph.

    Evaluates ``prod_{l<k} (n + 2 - 2l) / (4 (n - 2l - 1))``, the even-complete
    formula with odd ``n`` substituted. Orders ``k = 1, 2`` reproduce the
    level-1 fixture entries ``a`` and ``b``. Higher orders are exploratory only
    and are not asserted anywhere.
    """
    if n < 2 or k < 0 or 2 * k > n:
        raise ParameterError(f"need 0 <= 2k <= n (n={n}, k={k})")
    return math.prod((n + 2 - 2 * l) / (4 * (n - 2 * l - 1)) for l in range(k))


def crown_eigenvalues(n: int) -> tuple[float, float]:
    """The two eigenvalues of the crown fixture on the ``(alpha, beta, 1, ..., 1, 0, ...)`` vectors."""
    r = math.sqrt(9 * n ** 4 + 24 * n ** 3 + 121 * n ** 2 - 368 * n + 592)
    base = 20 - 17 * n - 3 * n * n
    return (base + r) / (16 * (1 - n)), (base - r) / (16 * (1 - n))


def _crown_failing(n: int, x: float) -> MomentFixture:
    if n < 3 or not (n + 2) / 3 < x < n:
        raise RegionError(f"crown_failing fixture requires n >= 3 and (n+2)/3 < x < n "
                          f"(n={n}, x={x})")
    a, b = n, n + 1
    idx = _pair_index(n + 2)
    m = 1 + len(idx)
    M = np.zeros((m, m))
    d = n - 1
    v_ab = 3 * (n - 2) / (4 * d)
    v_leaf = 3 * n / (8 * d)
    first = {(a, b): v_ab}
    for i in range(n):
        first[(i, a)] = first[(i, b)] = v_leaf
    M[0, 0] = 1.0
    for e, v in first.items():
        M[0, idx[e]] = M[idx[e], 0] = M[idx[e], idx[e]] = v
    for i in range(n):
        s_ai, s_bi = idx[(i, a)], idx[(i, b)]
        M[s_ai, s_bi] = M[s_bi, s_ai] = 3 / (8 * d)
        for k in (s_ai, s_bi):
            M[k, idx[(a, b)]] = M[idx[(a, b)], k] = 3 * (n - 2) / (16 * d)
        for j in range(n):
            if j == i:
                continue
            M[s_ai, idx[(j, a)]] = M[s_bi, idx[(j, b)]] = 3 * n / (16 * d)
            M[s_ai, idx[(j, b)]] = M[idx[(j, b)], s_ai] = 3 * (n + 2) / (16 * d)
    target = (3 * n * n + 3 * (n - 2) * x) / (4 * d)
    return MomentFixture("crown_failing", M, proj_basis(n + 2, 1).labels, target,
                         {"n": n, "x": x}, GraphFamilySpec("crown", n, x=x),
                         list(crown_eigenvalues(n)) + [3 * n / (8 * d)])


def hexagon_gram_vectors() -> dict[tuple[int, int], np.ndarray]:
    """Five-dimensional Gram vectors of the exact level-1 moment matrix of C6.

    Coordinate 0 is the overlap with the identity vector ``(1, 0, 0, 0, 0)``.
    Coordinates 1-2 place every projector on an equilateral triangle (angle
    index ``k`` in {0, 1, 2}), coordinate 3 is the alternating height of the
    nearest-neighbour prism and coordinate 4 a constant fixing
    ``M(h, h) = M(I, h)``.
    """
    phi = 1 / math.sqrt(13)
    al, be, ga = (5 + math.sqrt(13)) / 12, (1 - 3 * phi) / 4, 2 * (1 - phi) / 3
    a1, b1, c1 = math.sqrt((5 + phi) / 2) / 6, math.sqrt((1 - 3 * phi) / 8), math.sqrt(1 + 2 * phi) / 3
    a2, b2, c2 = math.sqrt((1 + 2 * phi) / 12), phi / 2, phi

    def tri(k):
        t = 2 * math.pi * k / 3
        return math.cos(t), math.sin(t)

    vec = {}
    for i in range(6):
        cx, cy = tri(i % 3)
        vec[edge(i, (i + 1) % 6)] = np.array([al, a1 * cx, a1 * cy, (-1) ** i * a2, 0.0])
        cx, cy = tri((i + 2) % 3)
        vec[edge(i, (i + 2) % 6)] = np.array([be, b1 * cx, b1 * cy, 0.0, b2])
    for i in range(3):
        cx, cy = tri((i + 1) % 3)
        vec[edge(i, i + 3)] = np.array([ga, c1 * cx, c1 * cy, 0.0, -c2])
    return vec


def _hexagon() -> MomentFixture:
    vec = hexagon_gram_vectors()
    labels = proj_basis(6, 1).labels
    G = np.zeros((len(labels), 5))
    G[0, 0] = 1.0
    for e, s in _pair_index(6).items():
        G[s] = vec[e]
    M = G @ G.T
    return MomentFixture("hexagon", M, labels, 6 * (5 + math.sqrt(13)) / 12, {"n": 6},
                         GraphFamilySpec("cycle", 6))


FIXTURE_KINDS = ("odd_complete", "crown_failing", "hexagon")


def make_fixture(kind: str, params: Mapping | None = None) -> MomentFixture:
    """Build an explicit moment matrix.

    Parameters
    ----------
    kind : {"odd_complete", "crown_failing", "hexagon"}
    params : mapping
        ``n`` (odd_complete: odd n >= 5; crown_failing: leaves n >= 3) and
        ``x`` (crown_failing: (n+2)/3 < x < n).

    Raises
    ------
    RegionError
        Outside the region where the construction is proven feasible.
    """
    p = dict(params or {})
    if kind == "odd_complete":
        return _odd_complete(int(p.get("n", 5)))
    if kind == "crown_failing":
        return _crown_failing(int(p.get("n", 3)), float(p.get("x", 2.0)))
    if kind == "hexagon":
        return _hexagon()
    raise ParameterError(f"unknown fixture kind {kind!r}; known: {', '.join(FIXTURE_KINDS)}")


@dataclass
class FixtureReport:
    constraint_residual: float
    min_eigenvalue: float
    objective: float
    target: float
    eigenvalue_mismatch: float | None
    failures: list[str]

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {"constraint_residual": self.constraint_residual,
                "min_eigenvalue": self.min_eigenvalue, "objective": self.objective,
                "target": self.target, "eigenvalue_mismatch": self.eigenvalue_mismatch,
                "failures": self.failures, "ok": self.ok}


def verify_fixture(f: MomentFixture, p: MomentProblem) -> FixtureReport:
    """Check a fixture against the equality constraints of a primal level-1 program.

    Checks: every equality of ``p`` holds to 1e-10, the minimum eigenvalue
    is at least -1e-9, the objective equals the target to 1e-9 and every
    expected closed-form eigenvalue occurs in the spectrum to 1e-9.
    """
    if p.kind != "proj" or p.level != 1 or p.form != "primal":
        raise ParameterError("fixtures are checked against the real primal level-1 projector "
                             "program")
    if tuple(p.basis.labels) != tuple(f.labels):
        raise ParameterError("fixture and moment problem use different bases")
    if len(p.sdp.block_sizes) > 1:
        raise ParameterError("fixture checks require a program without extra cut blocks")
    obj, res = p.sdp.evaluate([f.M])
    cres = float(np.max(np.abs(res))) if len(res) else 0.0
    lam_min = min_eigenvalue(f.M)
    failures = []
    if cres > 1e-10:
        failures.append(f"equality constraints violated by {cres:.3e}")
    if lam_min < -1e-9:
        failures.append(f"moment matrix not PSD: min eigenvalue {lam_min:.3e}")
    if abs(obj - f.target) > 1e-9:
        failures.append(f"objective {obj!r} differs from target {f.target!r}")
    mism = None
    if f.expected_eigenvalues:
        spec = np.linalg.eigvalsh(f.M)
        mism = float(max(np.min(np.abs(spec - lam)) for lam in f.expected_eigenvalues))
        if mism > 1e-9:
            failures.append(f"closed-form eigenvalues missing from spectrum (mismatch {mism:.3e})")
    return FixtureReport(cres, float(lam_min), float(obj), f.target, mism, failures)
