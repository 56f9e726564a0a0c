"""Command-line interface.

Every successful run prints one JSON document on standard output (also
written to ``--out`` where that flag names a JSON destination). Wall-clock
data lives under the ``metadata`` key so that the rest of the document is
reproducible byte for byte.

Exit codes: 0 when every check of the invocation passes, 1 when a solve
failed numerically or a check did not pass (the JSON still records the
details), 2 for usage and input errors.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import asdict
from importlib.metadata import PackageNotFoundError, version
from typing import Sequence

import numpy as np

from . import experiments as ex
from .certs import (CERTIFICATE_FAMILIES, FIXTURE_KINDS, check_certificate, make_certificate,
                    make_fixture, verify_fixture)
from .graph import (CapabilityError, Graph6Error, GraphFamilySpec, ParameterError,
                    WeightedGraph, canonical_id, enumerate_connected, make_family, parse_family,
                    parse_graph6, read_graph6_file, to_graph6)
from .npa import build, validate_solution
from .oracle import MAX_ED_QUBITS, exact_max_eigenvalue, known_value
from .sdp import SdpaParseError, export_sdpa

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# helpers


def _clean(obj):
    """JSON-safe copy: tuples to lists, non-finite floats to None, numpy to Python."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    return obj


def _pkg_version() -> str:
    try:
        return version("qmcnpa")
    except PackageNotFoundError:
        return "unknown"


def parse_schedule(text: str) -> list[float]:
    """``1e-4..1e-9`` (every decade in between) or a comma-separated list."""
    text = text.strip()
    if ".." in text:
        a, _, b = text.partition("..")
        hi, lo = float(a), float(b)
        if hi <= 0 or lo <= 0:
            raise UsageError("schedule bounds must be positive")
        hi, lo = max(hi, lo), min(hi, lo)
        k0, k1 = math.log10(hi), math.log10(lo)
        if abs(k0 - round(k0)) > 1e-9 or abs(k1 - round(k1)) > 1e-9:
            raise UsageError("range schedules need powers of ten, e.g. 1e-4..1e-9")
        return [10.0 ** k for k in range(round(k0), round(k1) - 1, -1)]
    vals = [float(v) for v in text.split(",") if v.strip()]
    if len(vals) < 2:
        raise UsageError("a schedule needs at least two tolerances")
    return sorted(vals, reverse=True)


def parse_grid(text: str) -> list[float]:
    """``start:stop:step`` (inclusive stop) or a comma-separated list."""
    if ":" in text:
        parts = [float(v) for v in text.split(":")]
        if len(parts) != 3 or parts[2] <= 0 or parts[1] < parts[0]:
            raise UsageError("grid must be start:stop:step with step > 0 and stop >= start")
        a, b, h = parts
        k = int(math.floor((b - a) / h + 1e-9))
        return [round(a + i * h, 12) for i in range(k + 1)]
    return sorted(float(v) for v in text.split(",") if v.strip())


def _instances(args) -> list[tuple[WeightedGraph, GraphFamilySpec | None, str]]:
    got = [x for x in (args.family, args.graph6, args.file) if x]
    if len(got) != 1:
        raise UsageError("give exactly one of --family, --graph6, --file")
    if args.family:
        spec = parse_family(args.family)
        return [(make_family(spec), spec, spec.label())]
    if args.graph6:
        g = parse_graph6(args.graph6)
        return [(g, None, args.graph6.strip())]
    return [(g, None, to_graph6(g)) for g in read_graph6_file(args.file)]


def _oracle(g: WeightedGraph, spec: GraphFamilySpec | None) -> float | None:
    if spec is not None:
        kv = known_value(spec)
        if kv is not None:
            return kv
    if g.n <= MAX_ED_QUBITS:
        return exact_max_eigenvalue(g).value
    return None


def _workers(args) -> int:
    if getattr(args, "threads", None):
        return max(1, args.threads)
    return ex.default_workers()


# ---------------------------------------------------------------------------
# subcommands; each returns (document, passed)


def cmd_solve(args, meta):
    docs, passed = [], True
    for g, spec, label in _instances(args):
        r = ex.relax(g, args.basis, args.level, args.mode, args.eps, args.total_spin_cut,
                     args.symmetry)
        ev = _oracle(g, spec)
        s = r.solution
        doc = {"instance": label, "n": g.n, "basis": args.basis, "level": args.level,
               "mode": args.mode, "symmetry": args.symmetry,
               "total_spin_cut": args.total_spin_cut, "sdp_value": r.value,
               "moment_value": r.moment_value, "oracle_value": ev,
               "error": None if ev is None else r.value - ev, "gap": s.gap,
               "eps_requested": args.eps,
               "eps_achieved": max(s.gap, s.primal_infeasibility, s.dual_infeasibility),
               "status": s.status, "solver": s.summary()}
        if r.problem.form == "primal-cyclic":
            doc["validation"] = None
            ok = s.status == "optimal"
        else:
            v = validate_solution(r.problem, s, ev)
            d = v.to_dict()
            d["ok"] = v.ok()
            doc["validation"] = d
            ok = s.status == "optimal" and v.ok()
        meta.setdefault("seconds_per_instance", []).append(r.seconds)
        doc["passed"] = ok
        passed &= ok
        docs.append(doc)
    return (docs[0] if len(docs) == 1 else {"results": docs}), passed


def cmd_ed(args, meta):
    docs = []
    for g, spec, label in _instances(args):
        res = exact_max_eigenvalue(g, all_sectors=args.all_sectors)
        docs.append({"instance": label, "n": g.n, "oracle_value": res.value,
                     "closed_form": None if spec is None else known_value(spec),
                     "degeneracy_in_sector": res.degeneracy, "up_spins": res.up_spins,
                     "residual": res.residual,
                     "sector_values": {str(k): v for k, v in sorted(res.sector_values.items())}})
    return (docs[0] if len(docs) == 1 else {"results": docs}), True


def cmd_classify(args, meta):
    schedule = parse_schedule(args.eps_schedule)
    docs, passed = [], True
    for g, spec, label in _instances(args):
        c = ex.classify(g, schedule, args.basis, args.level, args.mode, _oracle(g, spec),
                        args.total_spin_cut, args.symmetry)
        ok = sum(st == "optimal" for st in c.statuses) * 2 > len(c.statuses)
        d = {"instance": label, "basis": args.basis, "level": args.level, "mode": args.mode}
        d.update(c.to_dict())
        docs.append(d)
        passed &= ok
    return (docs[0] if len(docs) == 1 else {"results": docs}), passed


def cmd_scan(args, meta):
    grid = parse_grid(args.grid)
    workers = _workers(args)
    if args.model:
        recs = ex.model_scan(args.model, args.size, grid, args.eps, workers)
        x = [r.param for r in recs]
        doc = {"model": args.model, "size": args.size, "grid": grid,
               "records": [asdict(r) for r in recs],
               "exact_params": [r.param for r in recs if r.verdict == "exact"],
               "singular_points_sdp": ex.singular_points(x, [r.sdp_value for r in recs]),
               "singular_points_oracle": ex.singular_points(x, [r.oracle_value for r in recs])}
    else:
        insts = _instances(args)
        if len(insts) != 1:
            raise UsageError("weight scans take a single base graph")
        g = insts[0][0]
        if not args.edge:
            raise UsageError("weight scans need --edge I,J (or use --model)")
        i, j = (int(v) for v in args.edge.split(","))
        schedule = None if args.single_eps else parse_schedule(args.eps_schedule)
        ws = ex.weight_scan(g, (i, j), grid, args.eps, schedule, args.basis, args.level,
                            args.mode, workers=workers)
        recs = ws.records
        errs = [r.rel_error for r in recs]
        derivs = ex.centered_derivative(grid, [r.sdp_value for r in recs]) if len(grid) > 1 else []
        for r, d in zip(recs, derivs):
            r.derivative = float(d)
        doc = {"instance": insts[0][2], "edge": [i, j], "grid": grid,
               "records": [asdict(r) for r in recs],
               "transitions": [asdict(t) for t in ws.transitions],
               "exact_params": ws.exact_params(), "max_rel_error": max(errs, default=None)}
    if args.csv:
        ex.write_csv(recs, args.csv)
        doc["csv"] = args.csv
    passed = all(r.status == "optimal" or r.status is None for r in recs)
    return doc, passed


def cmd_enumerate(args, meta):
    if (args.n is None) == (args.file is None):
        raise UsageError("give exactly one of --n and --file")
    if not args.classify:
        graphs = (list(enumerate_connected(args.n)) if args.n is not None
                  else [g for g in read_graph6_file(args.file) if g.is_connected()])
        return {"source": f"connected:{args.n}" if args.n is not None else args.file,
                "count": len(graphs),
                "graphs": [{"graph6": canonical_id(g), "edges": len(g.weights),
                            "bipartite": g.is_bipartite()} for g in graphs]}, True
    bases = [b.strip() for b in args.bases.split(",") if b.strip()]
    st = ex.exhaustive_scan(args.n if args.n is not None else args.file, bases,
                            parse_schedule(args.eps_schedule), _workers(args))
    meta["scan_seconds"] = st.seconds
    doc = st.to_dict()
    doc.pop("seconds")
    doc["table"] = {b: [r.graph6 for r in st.table(b)] for b in bases}
    return doc, True


_CERT_KEYS = {"x": float, "alpha": float, "J": float, "J1": float, "J2": float,
              "m": int, "sign": int, "branch": str, "form": str}


def parse_cert_family(text: str) -> tuple[str, dict]:
    """``name[:N[,M]][:key=val,...]`` into a family name and parameter dict."""
    parts = text.strip().split(":")
    name, params = parts[0], {}
    if name not in CERTIFICATE_FAMILIES + ("complete", "j1j2_chain"):
        raise ParameterError(f"unknown certificate family {name!r}; known: "
                             f"{', '.join(CERTIFICATE_FAMILIES)}")
    rest = parts[1:]
    if rest and "=" not in rest[0]:
        a, _, b = rest.pop(0).partition(",")
        params["n"] = int(a)
        if b:
            params["m"] = int(b)
    for chunk in rest:
        for item in chunk.split(","):
            if not item.strip():
                continue
            key, _, val = item.strip().partition("=")
            if key not in _CERT_KEYS:
                raise ParameterError(f"unknown certificate parameter {key!r}")
            params[key] = _CERT_KEYS[key](val)
    return name, params


def cmd_verify_cert(args, meta):
    name, params = parse_cert_family(args.family)
    if args.sign is not None:
        params["sign"] = args.sign
    cert = make_certificate(name, params)
    chk = check_certificate(cert, annihilation=args.annihilation)
    doc = {"instance": args.family, "family": cert.family, "shift": cert.shift,
           "level": cert.level, "squares": len(cert.squares), "params": cert.params}
    doc.update(chk.to_dict())
    if args.save:
        with open(args.save, "w") as fh:
            fh.write(cert.to_json())
        doc["saved"] = args.save
    return doc, chk.accepted


def cmd_verify_fixture(args, meta):
    params = {}
    if args.n is not None:
        params["n"] = args.n
    if args.x is not None:
        params["x"] = args.x
    f = make_fixture(args.kind, params)
    p = build(make_family(f.spec), "proj", 1)
    rep = verify_fixture(f, p)
    doc = {"kind": f.kind, "params": f.params, "instance": f.spec.label()}
    doc.update(rep.to_dict())
    return doc, rep.ok


def cmd_export_sdpa(args, meta):
    insts = _instances(args)
    if len(insts) != 1:
        raise UsageError("export-sdpa takes a single instance")
    g, _, label = insts[0]
    p = build(g, args.basis, args.level, args.mode, args.total_spin_cut)
    text = export_sdpa(p.sdp, comment=f"{label} basis={args.basis} level={args.level} "
                                     f"mode={args.mode} form={p.form}")
    doc = {"instance": label, "basis": args.basis, "level": args.level, "mode": args.mode,
           "form": p.form, "objective_constant": p.objective_constant,
           "constraints": len(p.sdp.b), "block_sizes": p.sdp.block_sizes}
    if args.sdpa:
        with open(args.sdpa, "w") as fh:
            fh.write(text)
        doc["path"] = args.sdpa
    else:
        doc["sdpa"] = text
    return doc, True


def cmd_correlate(args, meta):
    sym = None if args.symmetry in (None, "none") else args.symmetry
    t = ex.chain_correlation(args.L, args.eps, sym)
    meta["solve_seconds"] = t.seconds
    doc = t.to_dict()
    doc.pop("seconds")
    return doc, t.status == "optimal"


# ---------------------------------------------------------------------------
# parser


def _add_input(p: argparse.ArgumentParser) -> None:
    p.add_argument("--family", help="family string, e.g. star:4, crown:4:x=2.5")
    p.add_argument("--graph6", help="single graph in graph6 format")
    p.add_argument("--file", help="file with one graph6 string per line")


def _add_relax(p: argparse.ArgumentParser, eps: bool = True) -> None:
    p.add_argument("--basis", choices=("proj", "pauli"), default="proj")
    p.add_argument("--level", type=int, choices=(1, 2), default=1)
    p.add_argument("--mode", choices=("real", "complex"), default="real")
    p.add_argument("--total-spin-cut", action="store_true",
                   help="add the total-spin inequality to the level-1 projector program")
    p.add_argument("--symmetry", choices=("cyclic", "none"), default=None)
    if eps:
        p.add_argument("--eps", type=float, default=1e-8)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qmcnpa", description="Quantum Max Cut moment relaxations")
    ap.add_argument("--out", help="also write the JSON document to this path")
    ap.add_argument("--threads", type=int, default=None,
                    help="worker processes for multi-instance commands (default QMCNPA_THREADS)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve a relaxation")
    _add_input(p)
    _add_relax(p)

    p = sub.add_parser("ed", help="exact maximum eigenvalue")
    _add_input(p)
    p.add_argument("--all-sectors", action="store_true")

    p = sub.add_parser("classify", help="tolerance-slope exactness verdict")
    _add_input(p)
    _add_relax(p, eps=False)
    p.add_argument("--eps-schedule", default="1e-4..1e-9")

    p = sub.add_parser("scan", help="edge-weight or model-parameter scan")
    _add_input(p)
    _add_relax(p)
    p.add_argument("--model", choices=("j1j2", "shastry_sutherland"))
    p.add_argument("--size", type=int, help="model size (chain length or lattice side)")
    p.add_argument("--edge", help="edge I,J whose weight is scanned")
    p.add_argument("--grid", required=True, help="start:stop:step or comma list")
    p.add_argument("--eps-schedule", default="1e-4..1e-9")
    p.add_argument("--single-eps", action="store_true",
                   help="one solve per point at --eps instead of a classification")
    p.add_argument("--csv", help="write the scan curve as CSV")

    p = sub.add_parser("enumerate", help="list or classify all connected graphs")
    p.add_argument("--n", type=int)
    p.add_argument("--file")
    p.add_argument("--classify", action="store_true")
    p.add_argument("--bases", default="proj1", help="comma list of proj1,pauli2r,pauli2c,...")
    p.add_argument("--eps-schedule", default="1e-4..1e-9")

    p = sub.add_parser("verify-cert", help="check an analytic sum-of-squares certificate")
    p.add_argument("--family", required=True, help="e.g. even_complete:6, crown:4:x=5")
    p.add_argument("--sign", type=int, choices=(1, -1))
    p.add_argument("--annihilation", action="store_true",
                   help="also check that each square annihilates the top eigenspace")
    p.add_argument("--save", help="write the certificate as JSON")

    p = sub.add_parser("verify-fixture", help="check an explicit moment-matrix fixture")
    p.add_argument("--kind", required=True, choices=FIXTURE_KINDS)
    p.add_argument("--n", type=int)
    p.add_argument("--x", type=float)

    p = sub.add_parser("export-sdpa", help="write a relaxation in SDPA sparse format")
    _add_input(p)
    _add_relax(p, eps=False)
    p.add_argument("--sdpa", help="destination of the SDPA file (default: embed in JSON)")

    p = sub.add_parser("correlate", help="chain correlation function from the level-1 optimum")
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--eps", type=float, default=1e-8)
    p.add_argument("--symmetry", choices=("cyclic", "none"), default="cyclic")
    return ap


COMMANDS = {"solve": cmd_solve, "ed": cmd_ed, "classify": cmd_classify, "scan": cmd_scan,
            "enumerate": cmd_enumerate, "verify-cert": cmd_verify_cert,
            "verify-fixture": cmd_verify_fixture, "export-sdpa": cmd_export_sdpa,
            "correlate": cmd_correlate}


def run(argv: Sequence[str] | None = None) -> int:
    """Parse ``argv``, run the subcommand and print its JSON document."""
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.threads is not None:
        if args.threads < 1:
            ap.error("--threads must be >= 1")
        os.environ["QMCNPA_THREADS"] = str(args.threads)
    if args.command == "scan" and args.model and not args.size:
        ap.error("--model needs --size")
    meta = {"version": _pkg_version(), "started": time.strftime("%Y-%m-%dT%H:%M:%S%z")}
    t0 = time.perf_counter()
    try:
        doc, passed = COMMANDS[args.command](args, meta)
    except UsageError as exc:
        ap.error(str(exc))
    except (ParameterError, CapabilityError, Graph6Error, SdpaParseError, OSError) as exc:
        print(f"qmcnpa: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    meta["seconds"] = time.perf_counter() - t0
    out = _clean(dict(doc))
    out["command"] = args.command
    out["passed"] = bool(passed)
    out["metadata"] = _clean(meta)
    text = json.dumps(out, indent=2, sort_keys=True)
    print(text)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    return EXIT_OK if passed else EXIT_FAIL


def main() -> None:
    sys.exit(run())
