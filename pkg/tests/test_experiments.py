import csv

import numpy as np
import pytest

from qmcnpa import experiments as ex
from qmcnpa.graph import GraphFamilySpec, WeightedGraph, make_family


def test_classify_star_exact():
    c = ex.classify(make_family(GraphFamilySpec("star", 5)))
    assert c.verdict == "exact"
    assert c.slope >= 0.8 and c.final_delta < 1e-6


def test_classify_k5_plateau():
    c = ex.classify(make_family(GraphFamilySpec("complete", 5)), (1e-4, 1e-6, 1e-8))
    assert c.verdict == "inexact"
    assert c.final_delta == pytest.approx(0.375, abs=1e-5)


def test_classify_solver_failures_are_undetermined(monkeypatch):
    def broken(*a, **k):
        raise np.linalg.LinAlgError("singular")
    monkeypatch.setattr(ex, "solve", broken)
    c = ex.classify(make_family(GraphFamilySpec("star", 2)), (1e-4, 1e-5, 1e-6), oracle=1.5)
    assert c.verdict == "undetermined"
    assert c.diagnostics


def test_verdict_thresholds():
    assert ex.verdict_from(0.9, 1e-8) == "exact"
    assert ex.verdict_from(0.9, 2e-6) == "undetermined"
    assert ex.verdict_from(0.1, 1e-3) == "inexact"
    assert ex.verdict_from(0.5, 1e-3) == "undetermined"
    assert ex.verdict_from(None, None) == "undetermined"


def test_fit_slope_power_law():
    x = np.array([1e-4, 1e-5, 1e-6])
    assert ex.fit_slope(x, 3 * x) == pytest.approx(1.0)
    assert ex.fit_slope(x, x ** 2) == pytest.approx(2.0)


def test_singular_points_synthetic():
    x = np.round(np.arange(0.5, 1.5001, 0.05), 10)
    y = np.where(x < 1.0, 0.5 * x ** 2 + 0.5, x)
    assert ex.singular_points(x, y) == [pytest.approx(1.0)]
    assert ex.singular_points(x, x ** 2 + 3 * x) == []


def test_find_transitions_exponent():
    recs = [ex.ScanRecord(x, 0, 0, 0, abs_error=0.0 if x <= 1 else (x - 1) ** 2,
                          verdict="exact" if x <= 1 else "inexact")
            for x in np.round(np.arange(0.8, 1.61, 0.1), 10)]
    (t,) = ex.find_transitions(recs)
    assert t.x_exact == pytest.approx(1.0)
    assert t.exponent == pytest.approx(2.0, abs=1e-6)


def test_weight_scan_crown():
    g = make_family(GraphFamilySpec("crown", 3, x=0.0))
    ws = ex.weight_scan(g, (3, 4), [1.0, 1.2, 1.8, 2.6, 3.2], schedule=(1e-4, 1e-6, 1e-8))
    verdicts = [r.verdict for r in ws.records]
    # boundaries for n=3: (n+2)^2/(4(n+1)) = 25/16 and n = 3
    assert verdicts == ["exact", "exact", "inexact", "inexact", "exact"]
    assert [t.x_exact for t in ws.transitions] == [1.2, 3.2]
    assert all(r.rel_error >= -10 * 1e-8 for r in ws.records)


def test_weight_scan_rejects_unsorted_grid():
    g = make_family(GraphFamilySpec("star", 2))
    with pytest.raises(ValueError):
        ex.weight_scan(g, (1, 2), [1.0, 0.5])


def test_model_scan_j1j2_small():
    recs = ex.model_scan("j1j2", 8, [0.4, 0.5, 0.6])
    assert [r.verdict for r in recs] == ["inexact", "exact", "inexact"]
    assert recs[1].sdp_value == pytest.approx(0.75, abs=1e-7)
    assert all(r.derivative is not None for r in recs)


def test_chain_correlation_cyclic_matches_full():
    a = ex.chain_correlation(8, symmetry="cyclic")
    b = ex.chain_correlation(8, symmetry=None)
    assert np.allclose(a.C, b.C, atol=1e-5)
    assert a.C[0] == pytest.approx(-(1 - 4 * a.nn_moment) / 3)


def test_hexagon_correlation():
    t = ex.chain_correlation(6)
    assert t.nn_moment == pytest.approx((5 + np.sqrt(13)) / 12, abs=1e-6)
    assert t.C[0] == pytest.approx(0.6228, abs=1e-4)


def test_csv_header(tmp_path):
    recs = [ex.ScanRecord(0.1, 1.0, 1.0, 0.0, derivative=0.5), ex.ScanRecord(0.2, 1.1, 1.0, 0.1)]
    path = tmp_path / "s.csv"
    ex.write_csv(recs, path)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["param", "sdp_value", "oracle_value", "rel_error", "derivative"]
    assert rows[2][-1] == ""


def test_exhaustive_small_and_workers_agree():
    a = ex.exhaustive_scan(4, ("proj1",), (1e-4, 1e-6, 1e-8), workers=1)
    b = ex.exhaustive_scan(4, ("proj1",), (1e-4, 1e-6, 1e-8), workers=2)
    assert sum(a.counts("proj1").values()) == 6
    assert [r.verdicts for r in a.records] == [r.verdicts for r in b.records]
    ea = np.array([r.errors["proj1"] for r in a.records])
    eb = np.array([r.errors["proj1"] for r in b.records])
    assert np.max(np.abs(ea - eb)) <= 1e-10


def test_unknown_basis():
    with pytest.raises(ValueError):
        ex.exhaustive_scan(3, ("proj7",))
