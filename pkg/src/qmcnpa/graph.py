"""Weighted interaction graphs: construction, graph6 I/O, enumeration.

Vertex labels follow fixed conventions so that moment-matrix labels are
reproducible:

* star: hub is vertex 0, leaves are 1..n.
* complete_bipartite(n, m): part A is 0..n-1, part B is n..n+m-1.
* crown(n, x): leaves 0..n-1, hubs a = n and b = n+1; edge (a, b) has weight x.
* double_star(n): hubs 0 and 1; leaves of hub 0 are 2..n+1, leaves of hub 1
  are n+2..2n+1.
* triangle(alpha): edges (0,1) and (1,2) of weight 1, edge (0,2) of weight alpha.
* shastry_sutherland(L): sites numbered row-major, site (x, y) -> y*L + x.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

import numpy as np


class ParameterError(ValueError):
    """Raised when a family parameter violates its bound."""


class Graph6Error(ValueError):
    """Raised on malformed graph6 input."""


class CapabilityError(RuntimeError):
    """Raised when a request exceeds what is supported in-process."""


Pair = tuple[int, int]


def _pair(i: int, j: int) -> Pair:
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class WeightedGraph:
    """Simple undirected graph with nonnegative edge weights.

    Parameters
    ----------
    n : int
        Number of vertices.
    weights : mapping
        Map from vertex pair to weight. Keys may be given in either order;
        they are stored with the smaller index first. Zero weights are dropped.
    name : str, optional
        Free-form label used in reports.
    """

    n: int
    weights: Mapping[Pair, float]
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if self.n < 1:
            raise ParameterError(f"vertex count must be >= 1, got {self.n}")
        clean: dict[Pair, float] = {}
        for (i, j), w in dict(self.weights).items():
            i, j = int(i), int(j)
            if i == j:
                raise ParameterError(f"self-loop at vertex {i}")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ParameterError(f"pair ({i}, {j}) outside [0, {self.n})")
            w = float(w)
            if not math.isfinite(w) or w < 0:
                raise ParameterError(f"weight on ({i}, {j}) must be finite and >= 0, got {w}")
            key = _pair(i, j)
            if key in clean:
                raise ParameterError(f"pair {key} given twice")
            if w > 0:
                clean[key] = w
        object.__setattr__(self, "weights", dict(sorted(clean.items())))

    def weight(self, i: int, j: int) -> float:
        return self.weights.get(_pair(i, j), 0.0)

    @property
    def edges(self) -> list[Pair]:
        return list(self.weights)

    def total_weight(self) -> float:
        return float(sum(self.weights.values()))

    def is_unit_weight(self) -> bool:
        return all(w == 1.0 for w in self.weights.values())

    def adjacency(self) -> np.ndarray:
        A = np.zeros((self.n, self.n))
        for (i, j), w in self.weights.items():
            A[i, j] = A[j, i] = w
        return A

    def degrees(self) -> np.ndarray:
        return (self.adjacency() > 0).sum(axis=1)

    def is_connected(self) -> bool:
        seen = {0}
        stack = [0]
        nbrs: dict[int, list[int]] = {v: [] for v in range(self.n)}
        for i, j in self.weights:
            nbrs[i].append(j)
            nbrs[j].append(i)
        while stack:
            v = stack.pop()
            for u in nbrs[v]:
                if u not in seen:
                    seen.add(u)
                    stack.append(u)
        return len(seen) == self.n

    def is_bipartite(self) -> bool:
        color = [-1] * self.n
        nbrs: dict[int, list[int]] = {v: [] for v in range(self.n)}
        for i, j in self.weights:
            nbrs[i].append(j)
            nbrs[j].append(i)
        for s in range(self.n):
            if color[s] >= 0:
                continue
            color[s] = 0
            stack = [s]
            while stack:
                v = stack.pop()
                for u in nbrs[v]:
                    if color[u] < 0:
                        color[u] = 1 - color[v]
                        stack.append(u)
                    elif color[u] == color[v]:
                        return False
        return True

    def relabel(self, perm: Iterable[int]) -> "WeightedGraph":
        """Return the graph with vertex v renamed to perm[v]."""
        perm = list(perm)
        return WeightedGraph(self.n, {(perm[i], perm[j]): w for (i, j), w in self.weights.items()},
                             self.name)

    def with_weight(self, i: int, j: int, w: float) -> "WeightedGraph":
        ws = dict(self.weights)
        ws[_pair(i, j)] = w
        return WeightedGraph(self.n, ws, self.name)

    def is_circulant(self, tol: float = 0.0) -> bool:
        """True if weights depend only on cyclic index distance."""
        for (i, j), w in self.weights.items():
            if abs(self.weight((i + 1) % self.n, (j + 1) % self.n) - w) > tol:
                return False
        return True

    def to_dict(self) -> dict:
        return {"n": self.n, "name": self.name,
                "edges": [[i, j, w] for (i, j), w in self.weights.items()]}


# ---------------------------------------------------------------------------
# families

FAMILIES = ("star", "complete", "even_complete", "odd_complete", "complete_bipartite",
            "crown", "double_star", "triangle", "cycle", "path", "j1j2_chain",
            "shastry_sutherland")


@dataclass(frozen=True)
class GraphFamilySpec:
    """Family tag plus parameters.

    Parameters used per family:

    * star: ``n`` leaves, optional ``weights`` (length n)
    * complete / even_complete / odd_complete: ``n``
    * complete_bipartite: ``n`` (part A), ``m`` (part B)
    * crown: ``n`` leaves, hub weight ``x``
    * double_star: ``n`` leaves per hub
    * triangle: ``alpha``
    * cycle, path: ``n``
    * j1j2_chain: ``n`` sites, ``J1``, ``J2``, ``pbc``
    * shastry_sutherland: linear size ``n`` (= L), ``J``, ``alpha``
    """

    family: str
    n: int = 0
    m: int = 0
    x: float = 1.0
    alpha: float = 1.0
    J: float = 1.0
    J1: float = 1.0
    J2: float = 0.0
    pbc: bool = True
    weights: tuple[float, ...] | None = None

    def label(self) -> str:
        f = self.family
        if f in ("star", "complete", "even_complete", "odd_complete", "cycle", "path",
                 "double_star"):
            s = f"{f}:{self.n}"
            if self.weights is not None:
                s += ":w=" + ",".join(f"{w:.12g}" for w in self.weights)
            return s
        if f == "complete_bipartite":
            return f"{f}:{self.n},{self.m}"
        if f == "crown":
            return f"crown:{self.n}:x={self.x:.12g}"
        if f == "triangle":
            return f"triangle:alpha={self.alpha:.12g}"
        if f == "j1j2_chain":
            return (f"j1j2_chain:{self.n}:J1={self.J1:.12g},J2={self.J2:.12g},"
                    f"{'pbc' if self.pbc else 'obc'}")
        if f == "shastry_sutherland":
            return f"shastry_sutherland:{self.n}:J={self.J:.12g},alpha={self.alpha:.12g}"
        return f


def _require(cond: bool, msg: str):
    if not cond:
        raise ParameterError(msg)


def make_family(spec: GraphFamilySpec) -> WeightedGraph:
    """Build the graph described by ``spec``."""
    f, n = spec.family, spec.n
    name = spec.label()
    if f == "star":
        _require(n >= 1, "star requires n >= 1 leaves")
        ws = spec.weights if spec.weights is not None else (1.0,) * n
        _require(len(ws) == n, f"star weights must have length n={n}")
        _require(all(w > 0 for w in ws), "star weights must be positive")
        return WeightedGraph(n + 1, {(0, i + 1): w for i, w in enumerate(ws)}, name)
    if f in ("complete", "even_complete", "odd_complete"):
        _require(n >= 2, "complete graph requires n >= 2")
        if f == "even_complete":
            _require(n % 2 == 0, "even_complete requires even n")
        if f == "odd_complete":
            _require(n % 2 == 1, "odd_complete requires odd n")
        return WeightedGraph(n, {e: 1.0 for e in itertools.combinations(range(n), 2)}, name)
    if f == "complete_bipartite":
        _require(n >= 1 and spec.m >= 1, "complete_bipartite requires n, m >= 1")
        return WeightedGraph(n + spec.m, {(i, n + j): 1.0 for i in range(n) for j in range(spec.m)},
                             name)
    if f == "crown":
        _require(n >= 2, "crown requires n >= 2")
        _require(spec.x >= 0, "crown hub weight x must be >= 0")
        a, b = n, n + 1
        ws = {(i, a): 1.0 for i in range(n)}
        ws.update({(i, b): 1.0 for i in range(n)})
        ws[(a, b)] = spec.x
        return WeightedGraph(n + 2, ws, name)
    if f == "double_star":
        _require(n >= 1, "double_star requires n >= 1")
        ws = {(0, 1): 1.0}
        ws.update({(0, 2 + i): 1.0 for i in range(n)})
        ws.update({(1, 2 + n + i): 1.0 for i in range(n)})
        return WeightedGraph(2 * n + 2, ws, name)
    if f == "triangle":
        _require(spec.alpha >= 0, "triangle alpha must be >= 0")
        return WeightedGraph(3, {(0, 1): 1.0, (1, 2): 1.0, (0, 2): spec.alpha}, name)
    if f == "cycle":
        _require(n >= 3, "cycle requires n >= 3")
        return WeightedGraph(n, {(i, (i + 1) % n): 1.0 for i in range(n)}, name)
    if f == "path":
        _require(n >= 2, "path requires n >= 2")
        return WeightedGraph(n, {(i, i + 1): 1.0 for i in range(n - 1)}, name)
    if f == "j1j2_chain":
        _require(n >= 3, "j1j2_chain requires L >= 3")
        _require(spec.J1 >= 0 and spec.J2 >= 0, "j1j2_chain couplings must be >= 0")
        if spec.pbc:
            _require(n >= 5, "periodic j1j2_chain requires L >= 5 so bonds are distinct")
        ws: dict[Pair, float] = {}
        for i in range(n):
            for d, J in ((1, spec.J1), (2, spec.J2)):
                j = i + d
                if j >= n:
                    if not spec.pbc:
                        continue
                    j -= n
                if J > 0:
                    ws[_pair(i, j)] = J
        return WeightedGraph(n, ws, name)
    if f == "shastry_sutherland":
        L = n
        _require(L >= 4 and L % 2 == 0, f"shastry_sutherland requires even L >= 4, got {L}")
        _require(spec.pbc, "shastry_sutherland requires periodic boundaries")
        _require(spec.J >= 0 and spec.alpha >= 0, "shastry_sutherland couplings must be >= 0")
        ws = {}
        for (i, j), kind in shastry_sutherland_bonds(L):
            w = spec.J if kind == "square" else 2.0 * spec.alpha
            if w > 0:
                ws[(i, j)] = w
        return WeightedGraph(L * L, ws, name)
    raise ParameterError(f"unknown family {f!r}; known: {', '.join(FAMILIES)}")


def _site(x: int, y: int, L: int) -> int:
    return (y % L) * L + (x % L)


def shastry_sutherland_bonds(L: int) -> list[tuple[Pair, str]]:
    """Square and diagonal bonds of the periodic L x L Shastry-Sutherland lattice.

    Diagonals sit on plaquettes whose lower-left corner (x, y) has x and y of
    equal parity: even plaquettes carry the (x,y)-(x+1,y+1) diagonal, odd ones
    the (x+1,y)-(x,y+1) diagonal, so every site belongs to exactly one dimer.
    """
    bonds: list[tuple[Pair, str]] = []
    for y in range(L):
        for x in range(L):
            s = _site(x, y, L)
            bonds.append((_pair(s, _site(x + 1, y, L)), "square"))
            bonds.append((_pair(s, _site(x, y + 1, L)), "square"))
    for (p, q) in shastry_sutherland_dimers(L):
        bonds.append((_pair(p, q), "diagonal"))
    return bonds


def shastry_sutherland_dimers(L: int) -> list[Pair]:
    out = []
    for y in range(L):
        for x in range(L):
            if x % 2 == 0 and y % 2 == 0:
                out.append(_pair(_site(x, y, L), _site(x + 1, y + 1, L)))
            elif x % 2 == 1 and y % 2 == 1:
                out.append(_pair(_site(x + 1, y, L), _site(x, y + 1, L)))
    return out


def shastry_sutherland_triangles(L: int) -> list[tuple[int, int, int]]:
    """Right triangles (corner, diagonal end 1, diagonal end 2) of the dimer plaquettes.

    Each triangle is returned as (p, c, q) where (p, q) is the diagonal and c
    the right-angle corner; every square bond lies in exactly one triangle.
    """
    tris = []
    for y in range(L):
        for x in range(L):
            if x % 2 == 0 and y % 2 == 0:
                p, q = _site(x, y, L), _site(x + 1, y + 1, L)
                corners = (_site(x + 1, y, L), _site(x, y + 1, L))
            elif x % 2 == 1 and y % 2 == 1:
                p, q = _site(x + 1, y, L), _site(x, y + 1, L)
                corners = (_site(x, y, L), _site(x + 1, y + 1, L))
            else:
                continue
            for c in corners:
                tris.append((p, c, q))
    return tris


def parse_family(text: str) -> GraphFamilySpec:
    """Parse a compact family string such as ``star:4`` or ``crown:4:x=2.5``.

    Accepted forms::

        star:N  complete:N  even_complete:N  odd_complete:N  cycle:N  path:N
        double_star:N  complete_bipartite:N,M  crown:N[:x=X]  triangle[:alpha=A]
        j1j2_chain:L[:J1=..,J2=..,obc]  shastry_sutherland:L[:J=..,alpha=..]
    """
    parts = text.strip().split(":")
    fam = parts[0]
    if fam not in FAMILIES:
        raise ParameterError(f"unknown family {fam!r}; known: {', '.join(FAMILIES)}")
    kw: dict = {"family": fam}
    rest = parts[1:]
    if rest and "=" not in rest[0]:
        size = rest.pop(0)
        if fam == "complete_bipartite":
            a, _, b = size.partition(",")
            kw["n"], kw["m"] = int(a), int(b)
        else:
            kw["n"] = int(size)
    for chunk in rest:
        for item in chunk.split(","):
            item = item.strip()
            if not item:
                continue
            if item in ("pbc", "obc"):
                kw["pbc"] = item == "pbc"
                continue
            key, _, val = item.partition("=")
            if key not in ("x", "alpha", "J", "J1", "J2", "m"):
                raise ParameterError(f"unknown family parameter {key!r} in {text!r}")
            kw[key] = int(val) if key == "m" else float(val)
    return GraphFamilySpec(**kw)


# ---------------------------------------------------------------------------
# graph6


def to_graph6(g: WeightedGraph) -> str:
    """Encode the unweighted adjacency of ``g`` (n <= 62)."""
    n = g.n
    if n > 62:
        raise CapabilityError("graph6 encoder supports n <= 62")
    bits = [1 if g.weight(i, j) > 0 else 0 for j in range(1, n) for i in range(j)]
    bits += [0] * (-len(bits) % 6)
    out = [chr(n + 63)]
    for k in range(0, len(bits), 6):
        v = 0
        for b in bits[k:k + 6]:
            v = (v << 1) | b
        out.append(chr(v + 63))
    return "".join(out)


def parse_graph6(text: str) -> WeightedGraph:
    """Decode one graph6 line into a unit-weight graph."""
    s = text.strip()
    if s.startswith(">>graph6<<"):
        s = s[len(">>graph6<<"):]
    if not s:
        raise Graph6Error("empty graph6 string at byte 0")
    for pos, ch in enumerate(s):
        if not 63 <= ord(ch) <= 126:
            raise Graph6Error(f"invalid graph6 byte {ch!r} at offset {pos}")
    if s[0] == "~":
        raise Graph6Error("graph6 sizes above 62 are not supported (byte 0)")
    n = ord(s[0]) - 63
    nbits = n * (n - 1) // 2
    nbytes = (nbits + 5) // 6
    body = s[1:]
    if len(body) != nbytes:
        raise Graph6Error(f"expected {nbytes} data bytes for n={n}, found {len(body)} "
                          f"(offset {1 + min(len(body), nbytes)})")
    bits = []
    for ch in body:
        v = ord(ch) - 63
        bits.extend((v >> (5 - k)) & 1 for k in range(6))
    if any(bits[nbits:]):
        raise Graph6Error(f"nonzero padding bits in final byte (offset {len(s) - 1})")
    ws = {}
    k = 0
    for j in range(1, n):
        for i in range(j):
            if bits[k]:
                ws[(i, j)] = 1.0
            k += 1
    return WeightedGraph(n, ws, s)


def read_graph6_file(path) -> Iterator[WeightedGraph]:
    """Yield graphs from a graph6 file, one per non-empty line."""
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                yield parse_graph6(line)
            except Graph6Error as exc:
                raise Graph6Error(f"line {lineno}: {exc}") from None


# ---------------------------------------------------------------------------
# canonical form and enumeration


def _canonical_perm(A: np.ndarray) -> np.ndarray:
    """Permutation minimizing the packed upper triangle, within degree classes."""
    n = A.shape[0]
    deg = A.sum(axis=1)
    # order classes by (degree desc, neighbour-degree multiset) which is invariant
    nbr_sig = [tuple(sorted(deg[A[v] > 0], reverse=True)) for v in range(n)]
    keys = sorted(set((-int(deg[v]), nbr_sig[v]) for v in range(n)))
    classes = [[v for v in range(n) if (-int(deg[v]), nbr_sig[v]) == k] for k in keys]
    iu = np.triu_indices(n, 1)
    best_code = None
    best_perm = None
    for choice in itertools.product(*(itertools.permutations(c) for c in classes)):
        perm = np.fromiter(itertools.chain.from_iterable(choice), dtype=int, count=n)
        code = A[np.ix_(perm, perm)][iu].tobytes()
        if best_code is None or code < best_code:
            best_code, best_perm = code, perm
    return best_perm


def canonical_form(g: WeightedGraph) -> bytes:
    """Isomorphism-invariant byte string for an unweighted graph (n <= 8)."""
    if not g.is_unit_weight():
        raise ParameterError("canonical_form is defined for unit-weight graphs only")
    if g.n > 8:
        raise CapabilityError("canonical_form supports n <= 8")
    A = (g.adjacency() > 0).astype(np.uint8)
    perm = _canonical_perm(A)
    inv = np.empty_like(perm)
    inv[perm] = np.arange(g.n)
    return to_graph6(g.relabel(inv)).encode("ascii")


def canonical_id(g: WeightedGraph) -> str:
    return canonical_form(g).decode("ascii")


def enumerate_connected(n: int) -> Iterator[WeightedGraph]:
    """Yield one representative per isomorphism class of connected graphs.

    Graphs on k vertices are grown from all classes on k-1 vertices by adding
    a vertex with every possible neighbourhood, deduplicating by
    ``canonical_form``. Order: edge count, then canonical id.
    """
    if not 1 <= n <= 7:
        raise CapabilityError(f"built-in enumeration covers 1 <= n <= 7 (got {n}); "
                              "load larger lists with read_graph6_file")
    layer = {canonical_form(WeightedGraph(1, {})): WeightedGraph(1, {})}
    for k in range(2, n + 1):
        nxt: dict[bytes, WeightedGraph] = {}
        for g in layer.values():
            for mask in range(1 << (k - 1)):
                ws = dict(g.weights)
                ws.update({(i, k - 1): 1.0 for i in range(k - 1) if mask >> i & 1})
                h = WeightedGraph(k, ws)
                key = canonical_form(h)
                if key not in nxt:
                    nxt[key] = h
        layer = nxt
    reps = []
    for key, g in layer.items():
        if g.is_connected():
            cid = key.decode("ascii")
            reps.append((len(g.weights), cid, parse_graph6(cid)))
    reps.sort(key=lambda t: (t[0], t[1]))
    for _, cid, g in reps:
        yield WeightedGraph(g.n, g.weights, cid)
