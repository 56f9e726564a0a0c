"""Numerical protocols built on the relaxations: exactness classification,
exhaustive small-graph statistics, weight interpolation scans, spin-model
scans and chain correlation functions.

Errors are always ``bound - E_max`` where ``bound`` is the certificate-side
objective of the solved SDP (an upper bound up to the solver tolerance) and
``E_max`` the exact maximum eigenvalue.
"""
from __future__ import annotations

import csv
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .graph import (CapabilityError, GraphFamilySpec, ParameterError, WeightedGraph,
                    canonical_id, enumerate_connected, make_family, read_graph6_file)
from .npa import (MomentProblem, build, first_moments_cyclic, symmetry_reduce_circulant)
from .oracle import MAX_ED_QUBITS, exact_max_eigenvalue, known_value
from .sdp import SdpSolution, solve

DEFAULT_SCHEDULE = (1e-4, 1e-5, 1e-6, 1e-7, 1e-8, 1e-9)
EXACT_SLOPE = 0.8
INEXACT_SLOPE = 0.2
EXACT_DELTA = 1e-6
INEXACT_DELTA = 1e-5
DELTA_FLOOR = 1e-15
BASES = {"proj1": ("proj", 1, "real"), "pauli2r": ("pauli", 2, "real"),
         "pauli2c": ("pauli", 2, "complex"), "proj2": ("proj", 2, "real"),
         "pauli1": ("pauli", 1, "real")}


def default_workers() -> int:
    """Worker count from the ``QMCNPA_THREADS`` environment variable (default 1)."""
    try:
        return max(1, int(os.environ.get("QMCNPA_THREADS", "1")))
    except ValueError:
        return 1


def _map(fn: Callable, items: Sequence, workers: int | None) -> list:
    """Ordered map, in a process pool when ``workers > 1``."""
    workers = default_workers() if workers is None else workers
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


# ---------------------------------------------------------------------------
# single relaxations


@dataclass
class Relaxation:
    """A solved moment relaxation.

    Attributes
    ----------
    problem : MomentProblem
    solution : SdpSolution
    value : float
        Certificate-side bound on the maximum eigenvalue.
    moment_value : float
        Objective of the returned moment matrix.
    """

    problem: MomentProblem
    solution: SdpSolution
    value: float
    moment_value: float
    seconds: float


def relax(g: WeightedGraph, basis: str = "proj", level: int = 1, mode: str = "real",
          eps: float = 1e-8, total_spin_cut: bool = False, symmetry: str | None = None,
          max_iter: int = 100) -> Relaxation:
    """Build and solve one relaxation.

    ``symmetry="cyclic"`` block-diagonalizes the real level-1 projector
    program of a circulant graph; the optimum is unchanged.
    """
    t0 = time.perf_counter()
    p = build(g, basis, level, mode, total_spin_cut)
    if symmetry == "cyclic":
        p = symmetry_reduce_circulant(p)
    elif symmetry not in (None, "none"):
        raise ParameterError(f"unknown symmetry {symmetry!r}; supported: cyclic")
    s = solve(p.sdp, eps=eps, max_iter=max_iter)
    return Relaxation(p, s, p.bound(s), p.value(s), time.perf_counter() - t0)


def oracle_value(g: WeightedGraph, spec: GraphFamilySpec | None = None) -> float:
    """Exact maximum eigenvalue from a closed form or exact diagonalization."""
    if spec is not None:
        kv = known_value(spec)
        if kv is not None:
            return kv
    if g.n > MAX_ED_QUBITS:
        raise CapabilityError(f"no oracle for n={g.n} > {MAX_ED_QUBITS} without a closed form")
    return exact_max_eigenvalue(g).value


# ---------------------------------------------------------------------------
# tolerance-slope classification


@dataclass
class Classification:
    """Verdict from the behaviour of the error across a tolerance schedule.

    ``exact`` needs slope >= 0.8 and final error < 1e-6, ``inexact`` slope
    <= 0.2 and final error > 1e-5; anything else is ``undetermined``.
    """

    verdict: str
    schedule: list[float]
    deltas: list[float | None]
    slope: float | None
    final_delta: float | None
    oracle_value: float
    sdp_values: list[float | None]
    gaps: list[float | None]
    statuses: list[str]
    diagnostics: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def fit_slope(x: Sequence[float], y: Sequence[float]) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    lx = np.log(np.asarray(x, dtype=float))
    ly = np.log(np.maximum(np.abs(np.asarray(y, dtype=float)), DELTA_FLOOR))
    if len(lx) < 2:
        raise ValueError("need at least two points to fit a slope")
    return float(np.polyfit(lx, ly, 1)[0])


def verdict_from(slope: float | None, final_delta: float | None) -> str:
    if slope is None or final_delta is None:
        return "undetermined"
    if slope >= EXACT_SLOPE and final_delta < EXACT_DELTA:
        return "exact"
    if slope <= INEXACT_SLOPE and final_delta > INEXACT_DELTA:
        return "inexact"
    return "undetermined"


def classify(g: WeightedGraph, schedule: Sequence[float] = DEFAULT_SCHEDULE,
             basis: str = "proj", level: int = 1, mode: str = "real",
             oracle: float | None = None, total_spin_cut: bool = False,
             symmetry: str | None = None) -> Classification:
    """Solve across a tolerance schedule and classify exactness.

    Parameters
    ----------
    g : WeightedGraph
    schedule : sequence of float
        Requested tolerances; the fit uses every successful solve.
    oracle : float, optional
        Exact maximum eigenvalue; computed by exact diagonalization if absent.

    Returns
    -------
    Classification
    """
    schedule = sorted((float(e) for e in schedule), reverse=True)
    ev = oracle_value(g) if oracle is None else float(oracle)
    p = build(g, basis, level, mode, total_spin_cut)
    if symmetry == "cyclic":
        p = symmetry_reduce_circulant(p)
    deltas, vals, gaps, stats, diag = [], [], [], [], []
    for eps in schedule:
        try:
            s = solve(p.sdp, eps=eps)
        except (np.linalg.LinAlgError, FloatingPointError) as exc:
            deltas.append(None), vals.append(None), gaps.append(None)
            stats.append("error")
            diag.append(f"eps={eps:g}: {exc}")
            continue
        v = p.bound(s)
        deltas.append(v - ev)
        vals.append(v)
        gaps.append(s.gap)
        stats.append(s.status)
        if s.status != "optimal":
            diag.append(f"eps={eps:g}: status {s.status}, gap {s.gap:.2e}")
    good = [i for i, st in enumerate(stats) if st == "optimal"]
    if 2 * len(good) <= len(schedule) or len(good) < 2:
        diag.append(f"only {len(good)} of {len(schedule)} solves succeeded")
        return Classification("undetermined", schedule, deltas, None, None, ev, vals, gaps,
                              stats, diag)
    slope = fit_slope([schedule[i] for i in good], [deltas[i] for i in good])
    final = abs(deltas[good[-1]])
    return Classification(verdict_from(slope, final), schedule, deltas, slope, final, ev, vals,
                          gaps, stats, diag)


# ---------------------------------------------------------------------------
# exhaustive statistics


@dataclass
class GraphRecord:
    graph6: str
    n: int
    edges: int
    bipartite: bool
    oracle_value: float
    verdicts: dict[str, str]
    errors: dict[str, float | None]
    slopes: dict[str, float | None]
    gap_violations: dict[str, int]
    solves: dict[str, int]


@dataclass
class ExhaustiveStats:
    """Per-graph records plus aggregate counts per basis."""

    source: str
    bases: list[str]
    records: list[GraphRecord]
    schedule: list[float]
    seconds: float

    def counts(self, basis: str) -> dict[str, int]:
        out = {"exact": 0, "inexact": 0, "undetermined": 0}
        for r in self.records:
            out[r.verdicts[basis]] += 1
        return out

    def table(self, basis: str) -> list[GraphRecord]:
        """Records in descending order of the final error."""
        return sorted(self.records, key=lambda r: -abs(r.errors[basis] or 0.0))

    def smallest_nonzero_error(self, basis: str) -> float | None:
        errs = [abs(r.errors[basis]) for r in self.records
                if r.verdicts[basis] == "inexact" and r.errors[basis] is not None]
        return min(errs) if errs else None

    def gap_compliance(self, basis: str) -> float:
        """Fraction of solves whose achieved gap met the requested tolerance."""
        tot = sum(r.solves[basis] for r in self.records)
        bad = sum(r.gap_violations[basis] for r in self.records)
        return 1.0 - bad / tot if tot else 1.0

    def to_dict(self) -> dict:
        return {"source": self.source, "bases": self.bases, "schedule": self.schedule,
                "seconds": self.seconds,
                "counts": {b: self.counts(b) for b in self.bases},
                "smallest_nonzero_error": {b: self.smallest_nonzero_error(b) for b in self.bases},
                "gap_compliance": {b: self.gap_compliance(b) for b in self.bases},
                "records": [asdict(r) for r in self.records]}


def _record(args) -> GraphRecord:
    g, bases, schedule = args
    ev = exact_max_eigenvalue(g).value
    verdicts, errors, slopes, viol, solves = {}, {}, {}, {}, {}
    for b in bases:
        basis, level, mode = BASES[b]
        c = classify(g, schedule, basis, level, mode, oracle=ev)
        verdicts[b] = c.verdict
        errors[b] = c.final_delta if c.final_delta is None else float(
            [d for d, s in zip(c.deltas, c.statuses) if s == "optimal"][-1])
        slopes[b] = c.slope
        viol[b] = sum(1 for gp, e in zip(c.gaps, c.schedule) if gp is None or gp > e)
        solves[b] = len(c.schedule)
    gid = canonical_id(g)
    return GraphRecord(gid, g.n, len(g.weights), g.is_bipartite(), ev, verdicts, errors, slopes,
                       viol, solves)


def exhaustive_scan(source: int | str | Path, bases: Sequence[str] = ("proj1",),
                    schedule: Sequence[float] = DEFAULT_SCHEDULE,
                    workers: int | None = None) -> ExhaustiveStats:
    """Classify every connected graph of a given size or from a graph6 file.

    Parameters
    ----------
    source : int or path
        Vertex count (built-in enumeration, n <= 7) or a graph6 file.
    bases : sequence of str
        Keys of ``BASES`` (``proj1``, ``pauli2r``, ``pauli2c``, ...).
    """
    for b in bases:
        if b not in BASES:
            raise ParameterError(f"unknown basis {b!r}; known: {', '.join(BASES)}")
    t0 = time.perf_counter()
    if isinstance(source, int):
        graphs = list(enumerate_connected(source))
        label = f"connected:{source}"
    else:
        graphs = [g for g in read_graph6_file(source) if g.is_connected()]
        label = str(source)
    schedule = sorted(schedule, reverse=True)
    recs = _map(_record, [(g, tuple(bases), tuple(schedule)) for g in graphs], workers)
    return ExhaustiveStats(label, list(bases), recs, list(schedule), time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# scans


@dataclass
class ScanRecord:
    """One grid point of a scan."""

    param: float
    sdp_value: float
    oracle_value: float
    rel_error: float
    derivative: float | None = None
    abs_error: float = 0.0
    verdict: str | None = None
    gap: float | None = None
    status: str | None = None
    oracle_derivative: float | None = None


@dataclass
class Transition:
    """Change of exactness between two adjacent grid points.

    ``x_exact`` is the exact-side point, ``x_inexact`` the inexact-side one.
    ``exponent`` is the fitted ``beta`` of ``error ~ |x - x_exact|^beta``
    over the inexact points next to the transition.
    """

    x_exact: float
    x_inexact: float
    exponent: float | None
    points_used: int


@dataclass
class WeightScan:
    records: list[ScanRecord]
    transitions: list[Transition]
    edge: tuple[int, int]
    base: str

    @property
    def onsets(self) -> list[float]:
        return [t.x_exact for t in self.transitions]

    def exact_params(self) -> list[float]:
        return [r.param for r in self.records if r.verdict == "exact"]

    def inexact_params(self) -> list[float]:
        return [r.param for r in self.records if r.verdict == "inexact"]

    def to_dict(self) -> dict:
        return {"base": self.base, "edge": list(self.edge),
                "records": [asdict(r) for r in self.records],
                "transitions": [asdict(t) for t in self.transitions]}


def _scan_point(args) -> ScanRecord:
    g, x, eps, schedule, basis, level, mode = args
    ev = exact_max_eigenvalue(g).value
    if schedule:
        c = classify(g, schedule, basis, level, mode, oracle=ev)
        ok = [i for i, s in enumerate(c.statuses) if s == "optimal"]
        i = ok[-1] if ok else len(c.schedule) - 1
        v = c.sdp_values[i] if c.sdp_values[i] is not None else float("nan")
        return ScanRecord(x, v, ev, (v - ev) / abs(ev) if ev else v - ev, abs_error=v - ev,
                          verdict=c.verdict, gap=c.gaps[i], status=c.statuses[i])
    r = relax(g, basis, level, mode, eps)
    err = r.value - ev
    verdict = "inexact" if err > 10 * eps * (1 + abs(ev)) else "exact"
    return ScanRecord(x, r.value, ev, err / abs(ev) if ev else err, abs_error=err,
                      verdict=verdict, gap=r.solution.gap, status=r.solution.status)


def fit_exponent(dx: Sequence[float], err: Sequence[float]) -> float:
    """Power-law exponent of ``err ~ dx^beta`` by a log-log least-squares fit."""
    return fit_slope(dx, err)


def find_transitions(records: Sequence[ScanRecord], fit_points: int = 5,
                     min_error: float = 0.0) -> list[Transition]:
    """Exact/inexact boundaries on a sorted grid with local exponent fits.

    Undetermined points are skipped when looking for neighbours.
    """
    pts = [r for r in records if r.verdict in ("exact", "inexact")]
    out = []
    for a, b in zip(pts, pts[1:]):
        if a.verdict == b.verdict:
            continue
        ex, inx = (a, b) if a.verdict == "exact" else (b, a)
        step = 1 if inx is b else -1
        start = pts.index(inx)
        fit = []
        k = start
        while 0 <= k < len(pts) and pts[k].verdict == "inexact" and len(fit) < fit_points:
            if pts[k].abs_error > min_error:
                fit.append(pts[k])
            k += step
        beta = None
        if len(fit) >= 2:
            beta = fit_exponent([abs(r.param - ex.param) for r in fit], [r.abs_error for r in fit])
        out.append(Transition(ex.param, inx.param, beta, len(fit)))
    return out


def weight_scan(base: WeightedGraph, edge: tuple[int, int], grid: Sequence[float],
                eps: float = 1e-8, schedule: Sequence[float] | None = DEFAULT_SCHEDULE,
                basis: str = "proj", level: int = 1, mode: str = "real",
                fit_points: int = 5, workers: int | None = None) -> WeightScan:
    """Vary the weight of one edge and track the relaxation error.

    Each grid point is classified with the tolerance schedule (or, with
    ``schedule=None``, by a single solve at ``eps`` where errors above
    ``10 eps (1 + |E|)`` count as inexact).

    Parameters
    ----------
    base : WeightedGraph
        Graph the edge is added to (it may already contain the edge).
    edge : (int, int)
    grid : sequence of float
        Sorted weights; a weight of 0 removes the edge.
    """
    grid = [float(x) for x in grid]
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise ParameterError("scan grid must be sorted")
    i, j = edge
    jobs = [(base.with_weight(i, j, x), x, eps, tuple(schedule or ()), basis, level, mode)
            for x in grid]
    recs = _map(_scan_point, jobs, workers)
    floor = 10 * (min(schedule) if schedule else eps)
    return WeightScan(recs, find_transitions(recs, fit_points, floor), (i, j), base.name)


def centered_derivative(x: Sequence[float], y: Sequence[float]) -> np.ndarray:
    """Centered finite differences (one-sided at the ends)."""
    return np.gradient(np.asarray(y, dtype=float), np.asarray(x, dtype=float))


def _quad_sse(x: np.ndarray, y: np.ndarray) -> float:
    if len(y) <= 3:
        return 0.0
    c = np.polyfit(x, y, 2)
    return float(np.sum((np.polyval(c, x) - y) ** 2))


def singular_points(x: Sequence[float], y: Sequence[float], ratio: float = 3.0,
                    min_points: int = 4, rel_noise: float = 1e-6) -> list[float]:
    """Grid points where the derivative of ``y`` stops being smooth.

    The one-sided slopes of ``y`` between neighbouring grid points are
    segmented recursively: a piece is split where two quadratic fits reduce
    the squared residual of one quadratic fit by at least ``ratio``. Both
    jumps and kinks of the derivative are found this way. Pieces keep at
    least ``min_points`` slopes, and pieces whose residual is below the
    noise level ``rel_noise * max|slope|`` are not split.

    Returns
    -------
    list of float
        Grid points separating the smooth pieces, ascending.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    s = np.diff(y) / np.diff(x)
    xm = (x[1:] + x[:-1]) / 2
    if len(s) < 2 * min_points:
        return []
    noise = (rel_noise * max(1.0, float(np.max(np.abs(s))))) ** 2
    cuts: list[int] = []

    def split(lo: int, hi: int) -> None:
        base = _quad_sse(xm[lo:hi], s[lo:hi])
        if hi - lo < 2 * min_points or base <= noise * (hi - lo):
            return
        best, cut = min((_quad_sse(xm[lo:b], s[lo:b]) + _quad_sse(xm[b:hi], s[b:hi]), b)
                        for b in range(lo + min_points, hi - min_points + 1))
        if base < ratio * best:
            return
        cuts.append(cut)
        split(lo, cut)
        split(cut, hi)

    split(0, len(s))
    return sorted(float(x[c]) for c in cuts)


def model_graph(model: str, size: int, param: float, **kw) -> tuple[WeightedGraph, GraphFamilySpec]:
    """Instance of a spin model at one scan parameter.

    ``j1j2``: periodic chain of ``size`` sites, ``J1=1``, ``J2=param``.
    ``shastry_sutherland``: ``L x L`` lattice with ``L=size`` (or
    ``size = L^2`` sites), ``J=1``, ``alpha=param``.
    """
    if model in ("j1j2", "j1j2_chain"):
        spec = GraphFamilySpec("j1j2_chain", size, J1=kw.get("J1", 1.0), J2=param,
                               pbc=kw.get("pbc", True))
    elif model in ("ss", "shastry_sutherland"):
        L = math.isqrt(size) if size > 8 and math.isqrt(size) ** 2 == size else size
        spec = GraphFamilySpec("shastry_sutherland", L, J=kw.get("J", 1.0), alpha=param)
    else:
        raise ParameterError(f"unknown model {model!r}; known: j1j2, shastry_sutherland")
    return make_family(spec), spec


def _model_point(args) -> ScanRecord:
    model, size, x, eps, kw = args
    g, spec = model_graph(model, size, x, **kw)
    ev = oracle_value(g)
    r = relax(g, eps=eps)
    err = r.value - ev
    return ScanRecord(x, r.value / g.n, ev / g.n, err / abs(ev), abs_error=err,
                      verdict="exact" if abs(err) <= 1e-6 * abs(ev) else "inexact",
                      gap=r.solution.gap, status=r.solution.status)


def model_scan(model: str, size: int, grid: Sequence[float], eps: float = 1e-8,
               workers: int | None = None, **kw) -> list[ScanRecord]:
    """Energy density of the level-1 projector relaxation along a model parameter.

    ``sdp_value`` and ``oracle_value`` are per-site values; ``rel_error`` is
    relative to the exact energy and a point counts as exact when it is at
    most 1e-6. Derivatives are centered differences on the grid.
    """
    grid = [float(x) for x in grid]
    recs = _map(_model_point, [(model, size, x, eps, kw) for x in grid], workers)
    d = centered_derivative(grid, [r.sdp_value for r in recs])
    de = centered_derivative(grid, [r.oracle_value for r in recs])
    for r, v, w in zip(recs, d, de):
        r.derivative, r.oracle_derivative = float(v), float(w)
    return recs


# ---------------------------------------------------------------------------
# chain correlations


@dataclass
class CorrelationTable:
    """Spin correlations ``C(r)`` of the level-1 optimum on a periodic chain."""

    L: int
    r: list[int]
    C: list[float]
    energy: float
    energy_density: float
    oracle_energy: float | None
    rel_error: float | None
    exponent: float | None
    fit_window: tuple[int, int]
    nn_moment: float
    gap: float
    status: str
    seconds: float

    def to_dict(self) -> dict:
        return asdict(self)


def correlation_from_moment(m: float, r: int) -> float:
    """``C(r) = (-1)^r (1 - 4 m) / 3`` from the first moment ``m = M(I, h_{i,i+r})``."""
    return (-1) ** r * (1 - 4 * m) / 3


def chain_correlation(L: int, eps: float = 1e-8, symmetry: str | None = "cyclic",
                      with_oracle: bool | None = None) -> CorrelationTable:
    """Correlation function of the periodic Heisenberg chain from the relaxation.

    Parameters
    ----------
    L : int
        Chain length (at least 4).
    symmetry : {"cyclic", None}
        Solve the cyclically reduced program (recommended above L ~ 12).
    with_oracle : bool, optional
        Compare with exact diagonalization (default: when L <= 20).

    Returns
    -------
    CorrelationTable
        ``C(r)`` for ``r = 1 .. L//2`` and the exponent of ``|C(r)| ~ r^p``
        fitted over ``2 <= r <= L/3``.
    """
    if L < 4:
        raise ParameterError("chain correlations need L >= 4")
    g = make_family(GraphFamilySpec("cycle", L))
    r = relax(g, eps=eps, symmetry=symmetry)
    if symmetry == "cyclic":
        m = first_moments_cyclic(r.problem, r.solution)
    else:
        fm = r.problem.first_moments(r.solution)
        m = {d: float(np.mean([fm[tuple(sorted((i, (i + d) % L)))] for i in range(L)]))
             for d in range(1, L // 2 + 1)}
    rs = list(range(1, L // 2 + 1))
    C = [correlation_from_moment(m[d], d) for d in rs]
    lo, hi = 2, L // 3
    win = [d for d in rs if lo <= d <= hi]
    exponent = fit_slope(win, [abs(C[d - 1]) for d in win]) if len(win) >= 2 else None
    if with_oracle is None:
        with_oracle = L <= MAX_ED_QUBITS
    ev = exact_max_eigenvalue(g).value if with_oracle else None
    rel = None if ev is None else (r.value - ev) / ev
    return CorrelationTable(L, rs, C, r.value, r.value / L, ev, rel, exponent, (lo, hi), m[1],
                            r.solution.gap, r.solution.status, r.seconds)


# ---------------------------------------------------------------------------
# output


CSV_FIELDS = ("param", "sdp_value", "oracle_value", "rel_error", "derivative")


def write_csv(records: Iterable[ScanRecord], path) -> None:
    """One row per record with the fixed header ``param, sdp_value, oracle_value, rel_error, derivative``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_FIELDS)
        for r in records:
            w.writerow([repr(r.param), repr(r.sdp_value), repr(r.oracle_value),
                        repr(r.rel_error), "" if r.derivative is None else repr(r.derivative)])


def write_json(obj, path) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
