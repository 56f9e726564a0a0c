import numpy as np
import pytest

from qmcnpa.graph import GraphFamilySpec, make_family
from qmcnpa.npa import build
from qmcnpa.sdp import (SdpaParseError, SdpProblem, export_sdpa, min_eigenvalue, parse_sdpa,
                        solve)


def _max_eig_problem(C: np.ndarray) -> SdpProblem:
    """max <C, X> s.t. tr X = 1, X psd; optimum is the largest eigenvalue of C."""
    n = len(C)
    c = [(0, i, j, C[i, j]) for i in range(n) for j in range(i, n) if C[i, j] != 0]
    a = [(0, 0, i, i, 1.0) for i in range(n)]
    return SdpProblem([n], [1.0], c, a)


def test_largest_eigenvalue():
    rng = np.random.default_rng(3)
    B = rng.standard_normal((5, 5))
    C = B + B.T
    s = solve(_max_eig_problem(C), eps=1e-9)
    assert s.status == "optimal"
    assert abs(s.dual_objective - np.linalg.eigvalsh(C)[-1]) < 1e-7
    assert s.gap <= 1e-9 * 10


def test_diagonal_block_lp():
    # max x1 + 2 x2 s.t. x1 + x2 = 1, x >= 0  -> 2
    p = SdpProblem([-2], [1.0], [(0, 0, 0, 1.0), (0, 1, 1, 2.0)],
                   [(0, 0, 0, 0, 1.0), (0, 0, 1, 1, 1.0)])
    s = solve(p, eps=1e-9)
    assert abs(s.primal_objective - 2) < 1e-7
    assert min_eigenvalue(s.X) >= -1e-12


def test_offdiagonal_entries_count_twice():
    p = _max_eig_problem(np.array([[0.0, 1.0], [1.0, 0.0]]))
    obj, res = p.evaluate([np.array([[0.5, 0.5], [0.5, 0.5]])])
    assert obj == pytest.approx(1.0)
    assert np.allclose(res, 0)


def test_gap_tracks_requested_tolerance():
    p = build(make_family(GraphFamilySpec("cycle", 5)), "proj", 1).sdp
    for eps in (1e-4, 1e-6, 1e-8):
        s = solve(p, eps=eps)
        assert s.status == "optimal"
        assert s.gap <= eps


def test_invalid_eps():
    with pytest.raises(ValueError):
        solve(_max_eig_problem(np.eye(2)), eps=0.5)


def test_lower_triangle_rejected():
    with pytest.raises(ValueError):
        SdpProblem([2], [1.0], [(0, 1, 0, 1.0)], [(0, 0, 0, 0, 1.0)])


def test_sdpa_round_trip(tmp_path):
    p = build(make_family(GraphFamilySpec("crown", 3, x=2.0)), "pauli", 1).sdp
    text = export_sdpa(p, tmp_path / "p.dat-s", comment="crown")
    q = parse_sdpa((tmp_path / "p.dat-s").read_text())
    assert q.structurally_equal(p)
    assert parse_sdpa(text).structurally_equal(p)


def test_sdpa_parse_foreign_layout():
    text = """* comment
    1 = mDIM
    2 = nBLOCK
    {2, -1} = bLOCKsTRUCT
    {1.0}
    0 1 1 2 1.0
    1 1 1 1 1.0
    1 1 2 2 1.0
    1 2 1 1 1.0
    """
    p = parse_sdpa(text)
    assert p.block_sizes == [2, -1]
    assert p.n_constraints == 1


def test_sdpa_parse_error_reports_line():
    text = "1 = mDIM\n1 = nBLOCK\n2 = bLOCKsTRUCT\n1.0\n0 1 1 x 1.0\n"
    with pytest.raises(SdpaParseError, match="line 5"):
        parse_sdpa(text)
