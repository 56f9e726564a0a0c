"""Exact algebra of singlet projectors and Pauli strings.

Words in the projectors ``h_e`` are reduced to a canonical linear combination
of *basis words*. A basis word is a product of pairwise distinct edges in
strictly increasing lexicographic order; not every such product is a basis
word, because the algebra satisfies relations beyond pairwise reordering (a
product of three edges along a path, for instance, collapses to degree two).

The basis is fixed once and for all by a greedy rule. Candidate words are
visited in the order (largest vertex, degree, lexicographic) and a word joins
the basis when it is linearly independent of the words before it. Because
words on vertices ``0..m-1`` precede every word touching vertex ``m``, the
canonical form of an element does not depend on how many vertices the
surrounding instance has.

Independence and coordinates are computed in a faithful integer
representation: the algebra on ``m`` vertices acts faithfully on the
magnetization sector with ``floor(m/2)`` up spins, where ``2 h_ij = I - P_ij``
is an integer matrix. Coordinates are recovered in floating point, rounded to
rationals and then checked exactly with integer arithmetic, so every returned
coefficient is exact.
"""
from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Number
from typing import Iterable, Mapping, Sequence, Union

import numpy as np
import scipy.sparse as sp

from .graph import CapabilityError

Edge = tuple[int, int]
ProjWord = tuple[Edge, ...]

IDENTITY: ProjWord = ()


def edge(i: int, j: int) -> Edge:
    if i == j:
        raise ValueError(f"edge needs two distinct vertices, got ({i}, {j})")
    return (i, j) if i < j else (j, i)


def word(*edges) -> ProjWord:
    """Build a word from edge pairs, e.g. ``word((1, 2), (2, 3))``."""
    return tuple(edge(*e) for e in edges)


def _shares(e: Edge, f: Edge) -> bool:
    return e[0] in f or e[1] in f


def _third(e: Edge, f: Edge) -> Edge:
    """Edge closing the triangle spanned by two edges sharing a vertex."""
    (a, b), (c, d) = e, f
    common = ({a, b} & {c, d}).pop()
    u = a if b == common else b
    v = c if d == common else d
    return edge(u, v)


def word_vertices(w: ProjWord) -> int:
    """Number of vertices needed to host ``w`` (1 + largest index)."""
    return 1 + max((e[1] for e in w), default=-1)


def word_label(w: ProjWord) -> str:
    if not w:
        return "I"
    return "*".join(f"h{i}_{j}" for i, j in w)


def parse_word_label(label: str) -> ProjWord:
    if label == "I":
        return ()
    out = []
    for tok in label.split("*"):
        a, _, b = tok[1:].partition("_")
        out.append(edge(int(a), int(b)))
    return tuple(out)


Coeff = Union[Fraction, float]


class ProjPoly:
    """Linear combination of canonical words with rational coefficients.

    Float coefficients are accepted for numerically evaluated objects such as
    certificates; exact arithmetic is used whenever all inputs are rational.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[ProjWord, Coeff] | None = None):
        clean: dict[ProjWord, Coeff] = {}
        for w, c in (terms or {}).items():
            c = _as_coeff(c)
            if c != 0:
                clean[tuple(w)] = clean.get(tuple(w), 0) + c
        self.terms = {w: c for w, c in sorted(clean.items(), key=lambda t: _word_key(t[0]))
                      if c != 0}

    # constructors
    @classmethod
    def identity(cls, c: Coeff = 1) -> "ProjPoly":
        return cls({(): c})

    @classmethod
    def h(cls, i: int, j: int, c: Coeff = 1) -> "ProjPoly":
        return cls({(edge(i, j),): c})

    @classmethod
    def from_word(cls, w: Sequence[Edge]) -> "ProjPoly":
        """Canonical form of a (not necessarily canonical) word."""
        return reduce_word(tuple(edge(*e) for e in w))

    # arithmetic
    def __add__(self, other):
        other = _as_poly(other)
        out = dict(self.terms)
        for w, c in other.terms.items():
            out[w] = out.get(w, 0) + c
        return ProjPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return ProjPoly({w: -c for w, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-_as_poly(other))

    def __rsub__(self, other):
        return _as_poly(other) - self

    def __mul__(self, other):
        if isinstance(other, (Number, Fraction)):
            c = _as_coeff(other)
            return ProjPoly({w: c * v for w, v in self.terms.items()})
        return multiply(self, _as_poly(other))

    def __rmul__(self, other):
        if isinstance(other, (Number, Fraction)):
            return self * other
        return multiply(_as_poly(other), self)

    def __truediv__(self, other):
        return self * (Fraction(1) / _as_coeff(other))

    def __pow__(self, k: int):
        out = ProjPoly.identity()
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, ProjPoly):
            try:
                other = _as_poly(other)
            except TypeError:
                return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(tuple(self.terms.items()))

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        return max((len(w) for w in self.terms), default=0)

    def n_vertices(self) -> int:
        return max((word_vertices(w) for w in self.terms), default=1)

    def adjoint(self) -> "ProjPoly":
        """Reverse every word (h_e are Hermitian, coefficients are real)."""
        out = ProjPoly()
        for w, c in self.terms.items():
            out = out + reduce_word(tuple(reversed(w))) * c
        return out

    def max_abs_coeff(self) -> float:
        return max((abs(float(c)) for c in self.terms.values()), default=0.0)

    def to_labels(self) -> dict[str, float]:
        return {word_label(w): float(c) for w, c in self.terms.items()}

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for w, c in self.terms.items():
            parts.append(f"{c}*{word_label(w)}")
        return " + ".join(parts)


def _as_coeff(c) -> Coeff:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, (int, np.integer)):
        return Fraction(int(c))
    if isinstance(c, (float, np.floating)):
        return float(c)
    raise TypeError(f"unsupported coefficient type {type(c).__name__}")


def _as_poly(x) -> ProjPoly:
    if isinstance(x, ProjPoly):
        return x
    if isinstance(x, (Number, Fraction)):
        return ProjPoly.identity(_as_coeff(x))
    raise TypeError(f"cannot convert {type(x).__name__} to ProjPoly")


def _word_key(w: ProjWord):
    return (word_vertices(w), len(w), w)


# ---------------------------------------------------------------------------
# rewriting into increasing words


@functools.lru_cache(maxsize=200_000)
def _sort_word_cached(w: ProjWord) -> tuple[tuple[ProjWord, Fraction], ...]:
    # rightmost-innermost: find the last adjacent pair out of order and rewrite it
    for k in range(len(w) - 1, 0, -1):
        e, f = w[k - 1], w[k]
        if e == f:
            return _sort_terms({w[:k] + w[k + 1:]: Fraction(1)})
        if e > f:
            pre, post = w[:k - 1], w[k + 1:]
            if not _shares(e, f):
                return _sort_terms({pre + (f, e) + post: Fraction(1)})
            g = _third(e, f)
            half = Fraction(1, 2)
            return _sort_terms({pre + (f, e) + post: Fraction(-1),
                                pre + (f,) + post: half,
                                pre + (e,) + post: half,
                                pre + (g,) + post: -half})
    return ((w, Fraction(1)),)


def _sort_terms(terms: dict[ProjWord, Fraction]) -> tuple[tuple[ProjWord, Fraction], ...]:
    acc: dict[ProjWord, Fraction] = {}
    for w, c in terms.items():
        for u, d in _sort_word_cached(w):
            acc[u] = acc.get(u, 0) + c * d
    return tuple((u, c) for u, c in acc.items() if c != 0)


def sort_word(w: Sequence[Edge]) -> ProjPoly:
    """Rewrite ``w`` into increasing distinct-edge words.

    Uses idempotency, commutation of disjoint projectors and the substitution
    ``h_f h_e -> -h_e h_f + (h_e + h_f - h_g)/2`` for edges sharing a vertex
    (``g`` closes the triangle). The result equals ``w`` but is not unique;
    ``reduce_word`` applies the remaining relations.
    """
    return ProjPoly(dict(_sort_word_cached(tuple(edge(*e) for e in w))))


# ---------------------------------------------------------------------------
# faithful representation and canonical basis

_PRIME = 1_048_573  # < 2**20 so blocked float64 products stay exact


def algebra_dimension(m: int) -> int:
    """Dimension of the algebra generated by all h_ij on m vertices."""
    tot = 0
    for j in range(m // 2 + 1):
        f = math.comb(m, j) - (math.comb(m, j - 1) if j else 0)
        tot += f * f
    return tot


@functools.lru_cache(maxsize=None)
def _sector_swaps(m: int) -> tuple[np.ndarray, dict[Edge, np.ndarray]]:
    """Basis states of the floor(m/2) sector and the permutation for each swap."""
    k = m // 2
    states = np.array([sum(1 << b for b in c) for c in itertools.combinations(range(m), k)],
                      dtype=np.int64)
    index = {int(s): t for t, s in enumerate(states)}
    perms = {}
    for i, j in itertools.combinations(range(m), 2):
        bi = (states >> i) & 1
        bj = (states >> j) & 1
        swapped = states ^ ((bi ^ bj) * ((1 << i) | (1 << j)))
        perms[(i, j)] = np.array([index[int(s)] for s in swapped])
    return states, perms


def _image(w: ProjWord, m: int) -> np.ndarray:
    """Integer matrix of 2^deg(w) * w in the faithful sector representation."""
    states, perms = _sector_swaps(m)
    d = len(states)
    M = np.eye(d, dtype=np.int64)
    for e in w:
        # M <- M (I - P_e);  (M P)[:, c] = M[:, p^-1(c)], P is an involution
        M = M - M[:, perms[e]]
    return M


class _Basis:
    """Greedy canonical basis of the algebra on m vertices."""

    def __init__(self, m: int):
        self.m = m
        self.dim = algebra_dimension(m)
        prev = _basis(m - 1).words if m > 1 else [()]
        words = list(prev)
        if m == 1:
            self.words = words
        else:
            self.words = self._extend(words)
        if len(self.words) != self.dim:
            raise RuntimeError(f"basis construction for m={m} found {len(self.words)} words, "
                               f"expected {self.dim}")
        self.index = {w: t for t, w in enumerate(self.words)}
        imgs = np.stack([_image(w, m).ravel() / float(1 << len(w)) for w in self.words], axis=1)
        self._pinv = np.linalg.pinv(imgs)
        self._int_imgs = [_image(w, m).ravel() for w in self.words]

    def _extend(self, words: list[ProjWord]) -> list[ProjWord]:
        m, p = self.m, _PRIME
        R = np.zeros((0, 0))
        piv: list[int] = []
        R, piv = _echelon_add(R, piv, np.stack([_image(w, m).ravel() % p for w in words]), p,
                              keep_all=True)
        if len(piv) != len(words):
            raise RuntimeError("inherited basis words became dependent")
        edges = list(itertools.combinations(range(m), 2))
        top = m - 1
        for deg in range(1, len(edges) + 1):
            if len(words) == self.dim:
                break
            cands = [c for c in itertools.combinations(edges, deg)
                     if any(top in e for e in c)]
            for start in range(0, len(cands), 256):
                block = cands[start:start + 256]
                V = np.stack([_image(c, m).ravel() % p for c in block]).astype(np.float64)
                R, piv, chosen = _echelon_block(R, piv, V, p, self.dim - len(words))
                words.extend(block[t] for t in chosen)
                if len(words) == self.dim:
                    break
        return words

    def coords(self, w: ProjWord) -> dict[ProjWord, Fraction]:
        """Exact coordinates of the word ``w`` (vertices < m) in this basis."""
        if w in self.index:
            return {w: Fraction(1)}
        W = _image(w, self.m).ravel()
        scale = 1 << len(w)
        c = self._pinv @ (W / float(scale))
        fr = {}
        for t in np.flatnonzero(np.abs(c) > 1e-9):
            fr[t] = Fraction(float(c[t])).limit_denominator(1 << 16)
        if self._check(fr, W, scale):
            return {self.words[t]: v for t, v in fr.items() if v != 0}
        return self._exact_coords(W, scale)

    def _check(self, fr: dict[int, Fraction], W: np.ndarray, scale: int) -> bool:
        den = scale
        for t, v in fr.items():
            den = math.lcm(den, v.denominator << len(self.words[t]))
        big = den.bit_length() + 2 * len(self.words[-1]) + 24 > 62
        acc = np.zeros(W.shape, dtype=object if big else np.int64)
        for t, v in fr.items():
            k = v.numerator * (den // (v.denominator << len(self.words[t])))
            img = self._int_imgs[t]
            acc = acc + (img.astype(object) * k if big else img * k)
        target = (W.astype(object) if big else W) * (den // scale)
        return bool(np.all(acc == target))

    def _exact_coords(self, W: np.ndarray, scale: int) -> dict[ProjWord, Fraction]:
        # fallback: exact Gaussian elimination on the full system
        D = len(self.words)
        A = [[Fraction(int(self._int_imgs[t][r]), 1 << len(self.words[t])) for t in range(D)]
             + [Fraction(int(W[r]), scale)] for r in range(W.size)]
        rows, col_piv = [], []
        for row in A:
            for (pc, prow) in zip(col_piv, rows):
                if row[pc] != 0:
                    f = row[pc]
                    row = [a - f * b for a, b in zip(row, prow)]
            nz = next((t for t in range(D) if row[t] != 0), None)
            if nz is None:
                if row[D] != 0:
                    raise RuntimeError("word image outside the span of the basis")
                continue
            f = row[nz]
            row = [a / f for a in row]
            for r2, pc in enumerate(col_piv):
                if rows[r2][nz] != 0:
                    g = rows[r2][nz]
                    rows[r2] = [a - g * b for a, b in zip(rows[r2], row)]
            rows.append(row)
            col_piv.append(nz)
            if len(rows) == D:
                break
        sol = {self.words[pc]: rows[k][D] for k, pc in enumerate(col_piv)}
        return {w: v for w, v in sol.items() if v != 0}


def _echelon_add(R, piv, V, p, keep_all=False):
    R, piv, chosen = _echelon_block(R, piv, V.astype(np.float64), p, V.shape[0])
    return R, piv


def _echelon_block(R: np.ndarray, piv: list[int], V: np.ndarray, p: int, need: int):
    """Greedily add rows of V (mod p) that are independent of the rows of R.

    R is kept in reduced row echelon form with pivot columns ``piv``. Returns
    the updated (R, piv) and the indices of the accepted rows of V.
    """
    if R.size:
        V = np.mod(V - np.mod(V[:, piv] @ R, p), p)
    else:
        R = np.zeros((0, V.shape[1]))
    chosen = []
    V = V.copy()
    for t in range(V.shape[0]):
        if len(chosen) >= need:
            break
        row = V[t]
        nz = np.flatnonzero(row)
        if nz.size == 0:
            continue
        c = int(nz[0])
        inv = pow(int(row[c]), p - 2, p)
        row = np.mod(row * inv, p)
        if t + 1 < V.shape[0]:
            V[t + 1:] = np.mod(V[t + 1:] - np.outer(V[t + 1:, c], row), p)
        if R.shape[0]:
            R = np.mod(R - np.outer(R[:, c], row), p)
        R = np.vstack([R, row])
        piv.append(c)
        chosen.append(t)
    return R, piv, chosen


@functools.lru_cache(maxsize=None)
def _basis(m: int) -> _Basis:
    if m > 8:
        raise CapabilityError(f"canonical reduction supports words on at most 8 vertices (got {m})")
    return _Basis(m)


def basis_words(m: int) -> list[ProjWord]:
    """Canonical basis words of the algebra on m vertices, in basis order."""
    return list(_basis(m).words)


@functools.lru_cache(maxsize=500_000)
def _reduce_cached(w: ProjWord) -> tuple[tuple[ProjWord, Fraction], ...]:
    if len(w) <= 1:
        return ((w, Fraction(1)),)
    acc = _basis(word_vertices(w)).coords(w)
    return tuple((u, c) for u, c in sorted(acc.items(), key=lambda t: _word_key(t[0])) if c != 0)


def reduce_word(w: Sequence[Edge]) -> ProjPoly:
    """Canonical form of the product of projectors ``w``.

    Parameters
    ----------
    w : sequence of edges
        Edges ``(i, j)`` in either orientation.

    Returns
    -------
    ProjPoly
        The unique combination of canonical basis words equal to ``w``.
    """
    w = tuple(edge(*e) for e in w)
    return ProjPoly(dict(_reduce_cached(w)))


def reduce_poly(p: ProjPoly) -> ProjPoly:
    out: dict[ProjWord, Coeff] = {}
    for w, c in p.terms.items():
        for u, d in _reduce_cached(w):
            out[u] = out.get(u, 0) + c * d
    return ProjPoly(out)


def multiply(a: ProjPoly, b: ProjPoly) -> ProjPoly:
    """Canonical product of two polynomials."""
    out: dict[ProjWord, Coeff] = {}
    for u, c in a.terms.items():
        for v, d in b.terms.items():
            for w, e in _reduce_cached(u + v):
                out[w] = out.get(w, 0) + c * d * e
    return ProjPoly(out)


def commutator(a: ProjPoly, b: ProjPoly) -> ProjPoly:
    return multiply(a, b) - multiply(b, a)


# ---------------------------------------------------------------------------
# Pauli strings

_PAULI_MUL = {
    ("X", "X"): (0, None), ("Y", "Y"): (0, None), ("Z", "Z"): (0, None),
    ("X", "Y"): (1, "Z"), ("Y", "Z"): (1, "X"), ("Z", "X"): (1, "Y"),
    ("Y", "X"): (3, "Z"), ("Z", "Y"): (3, "X"), ("X", "Z"): (3, "Y"),
}


@dataclass(frozen=True)
class PauliTerm:
    """Phase ``i**k`` times a tensor product of single-site Pauli letters."""

    k: int = 0
    ops: tuple[tuple[int, str], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "k", self.k % 4)
        seen = {}
        for v, a in self.ops:
            if a not in "XYZ" or len(a) != 1:
                raise ValueError(f"invalid Pauli letter {a!r}")
            if v in seen:
                raise ValueError(f"site {v} appears twice; use pauli_reduce")
            seen[v] = a
        object.__setattr__(self, "ops", tuple(sorted(seen.items())))

    @classmethod
    def single(cls, v: int, a: str) -> "PauliTerm":
        return cls(0, ((v, a),))

    @classmethod
    def from_string(cls, s: str) -> "PauliTerm":
        """Parse ``"X0Y2"`` style strings; ``"I"`` is the identity."""
        if s in ("", "I"):
            return cls()
        ops, t = [], 0
        while t < len(s):
            a = s[t]
            t += 1
            start = t
            while t < len(s) and s[t].isdigit():
                t += 1
            ops.append((int(s[start:t]), a))
        return cls(0, tuple(ops))

    @property
    def string(self) -> dict[int, str]:
        return dict(self.ops)

    def label(self) -> str:
        return "".join(f"{a}{v}" for v, a in self.ops) or "I"

    def weight(self) -> int:
        return len(self.ops)

    def phase(self) -> complex:
        return 1j ** self.k

    def __mul__(self, other: "PauliTerm") -> "PauliTerm":
        return pauli_reduce([self, other])


def pauli_reduce(terms: Iterable[PauliTerm]) -> PauliTerm:
    """Product of Pauli terms with the phase tracked as a power of i."""
    k = 0
    acc: dict[int, str] = {}
    for t in terms:
        k += t.k
        for v, a in t.ops:
            if v in acc:
                dk, r = _PAULI_MUL[(acc[v], a)]
                k += dk
                if r is None:
                    del acc[v]
                else:
                    acc[v] = r
            else:
                acc[v] = a
    return PauliTerm(k % 4, tuple(acc.items()))


# ---------------------------------------------------------------------------
# matrix realization

MAX_MATRIX_QUBITS = 18

_P1 = {"I": sp.identity(2, format="csr", dtype=complex),
       "X": sp.csr_matrix(np.array([[0, 1], [1, 0]], dtype=complex)),
       "Y": sp.csr_matrix(np.array([[0, -1j], [1j, 0]])),
       "Z": sp.csr_matrix(np.array([[1, 0], [0, -1]], dtype=complex))}


def _pauli_string_matrix(ops: dict[int, str], n: int) -> sp.csr_matrix:
    # qubit 0 is the most significant tensor factor
    M = sp.identity(1, format="csr", dtype=complex)
    for q in range(n):
        M = sp.kron(M, _P1[ops.get(q, "I")], format="csr")
    return M


@functools.lru_cache(maxsize=4096)
def _h_matrix(i: int, j: int, n: int) -> sp.csr_matrix:
    M = sp.identity(2 ** n, format="csr", dtype=complex)
    for a in "XYZ":
        M = M - _pauli_string_matrix({i: a, j: a}, n)
    M = (M / 4.0).real.tocsr()
    M.eliminate_zeros()
    return M


def _check_n(n: int):
    if n > MAX_MATRIX_QUBITS:
        raise CapabilityError(f"matrix realization limited to {MAX_MATRIX_QUBITS} qubits (got {n})")


def word_matrix(w: Sequence[Edge], n: int) -> sp.csr_matrix:
    _check_n(n)
    M = sp.identity(2 ** n, format="csr")
    for e in w:
        i, j = edge(*e)
        if j >= n:
            raise ValueError(f"edge {e} outside {n} qubits")
        M = M @ _h_matrix(i, j, n)
    return M.tocsr()


def to_matrix(p: Union[ProjPoly, PauliTerm, Sequence[Edge]], n: int) -> sp.csr_matrix:
    """Sparse matrix of a polynomial, Pauli term, or raw word on n qubits.

    Uses ``h_ij = (I - X_i X_j - Y_i Y_j - Z_i Z_j)/4`` built from Kronecker
    products; qubit 0 is the most significant factor.
    """
    _check_n(n)
    if isinstance(p, PauliTerm):
        if any(v >= n for v, _ in p.ops):
            raise ValueError("Pauli term references a site outside n qubits")
        return (_pauli_string_matrix(p.string, n) * p.phase()).tocsr()
    if isinstance(p, ProjPoly):
        M = sp.csr_matrix((2 ** n, 2 ** n))
        for w, c in p.terms.items():
            M = M + word_matrix(w, n) * float(c)
        return M.tocsr()
    return word_matrix(p, n)


def hamiltonian_poly(weights: Mapping[Edge, float]) -> ProjPoly:
    """H = sum_e w_e h_e as a polynomial."""
    return ProjPoly({(edge(*e),): w for e, w in weights.items()})
