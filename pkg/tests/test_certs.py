import dataclasses
import json
import math

import numpy as np
import pytest

from qmcnpa.certs import (RegionError, SosCertificate, annihilation_norms,
                          certificate_known_gap, check_certificate, crown_boundary,
                          crown_eigenvalues, hexagon_gram_vectors, make_certificate,
                          make_fixture, strong_triangle_coefficients, verify_certificate,
                          verify_fixture, weak_triangle_coefficients)
from qmcnpa.graph import ParameterError, make_family
from qmcnpa.npa import build

CASES = [("star", {"n": 4}), ("complete_bipartite", {"n": 3, "m": 2}),
         ("crown", {"n": 3, "x": 0.0}), ("crown", {"n": 3, "x": 1.0}),
         ("crown", {"n": 4, "x": 6.0}), ("triangle", {"alpha": 0.5}),
         ("triangle", {"alpha": 2.0}), ("double_star", {"n": 2, "form": "dssos"}),
         ("double_star", {"n": 2, "form": "lv2sos"}), ("even_complete", {"n": 4}),
         ("majumdar_ghosh", {"n": 6})]


@pytest.mark.parametrize("family,params", CASES, ids=lambda v: str(v))
@pytest.mark.parametrize("sign", [1, -1])
def test_certificates_are_exact_identities(family, params, sign):
    c = make_certificate(family, dict(params, sign=sign))
    assert verify_certificate(c) < 1e-9
    gap = certificate_known_gap(c)
    assert gap is None or abs(gap) < 1e-9


def test_wrong_shift_is_detected():
    c = make_certificate("star", {"n": 3})
    bad = dataclasses.replace(c, shift=c.shift + 1e-6)
    assert verify_certificate(bad) > 1e-9


def test_wrong_hamiltonian_is_detected():
    c = make_certificate("crown", {"n": 3, "x": 1.0})
    other = make_family(c.spec).with_weight(3, 4, 1.1)
    assert verify_certificate(c, other) > 1e-3


def test_squares_annihilate_ground_space():
    c = make_certificate("majumdar_ghosh", {"n": 8})
    assert max(annihilation_norms(c)) < 1e-7
    assert check_certificate(c, annihilation=True).accepted


def test_json_round_trip():
    c = make_certificate("triangle", {"alpha": 2.0, "sign": -1})
    d = json.loads(c.to_json())
    c2 = SosCertificate.from_dict(d)
    assert c2.shift == c.shift
    assert verify_certificate(c2) < 1e-9


def test_region_errors():
    with pytest.raises(RegionError):
        make_certificate("crown", {"n": 4, "x": 3.0})
    with pytest.raises(RegionError):
        make_certificate("even_complete", {"n": 5})
    with pytest.raises(RegionError):
        make_certificate("triangle", {"alpha": 0.5, "form": "strong"})
    with pytest.raises(ParameterError):
        make_certificate("nosuch", {})


def test_crown_boundary_value():
    assert crown_boundary(4) == pytest.approx(36 / 20)
    c = make_certificate("crown", {"n": 4, "x": crown_boundary(4)})
    assert verify_certificate(c) < 1e-9


def test_triangle_coefficients_at_alpha_one():
    cJ, ca = strong_triangle_coefficients(1.0, 1.0, 1)
    assert cJ == pytest.approx(2 / 3) and ca == pytest.approx(2 / 3)
    w1, wa = weak_triangle_coefficients(1.0, 1)
    assert w1 == pytest.approx(2 / 3) and wa == pytest.approx(2 / 3)


@pytest.mark.parametrize("kind,params", [("odd_complete", {"n": 5}), ("hexagon", {}),
                                         ("crown_failing", {"n": 3, "x": 2.0})])
def test_fixtures_pass(kind, params):
    f = make_fixture(kind, params)
    rep = verify_fixture(f, build(make_family(f.spec), "proj", 1))
    assert rep.ok, rep.failures


def test_fixture_tampering_is_detected():
    f = make_fixture("hexagon", {})
    M = f.M.copy()
    M[0, 1] += 1e-6
    M[1, 0] += 1e-6
    bad = dataclasses.replace(f, M=M)
    rep = verify_fixture(bad, build(make_family(f.spec), "proj", 1))
    assert not rep.ok


def test_hexagon_gram_vectors_are_unit_norm_scaled():
    vecs = hexagon_gram_vectors()
    assert len(vecs) == 15
    norms = {e: float(np.linalg.norm(v)) for e, v in vecs.items()}
    assert all(n > 0 for n in norms.values())


def test_crown_eigenvalues_are_real_pair():
    lo, hi = crown_eigenvalues(3)
    assert math.isfinite(lo) and math.isfinite(hi) and lo <= hi


@pytest.mark.parametrize("n", [5, 7, 9])
def test_odd_complete_conjecture_matches_level1_entries(n):
    from qmcnpa.certs import odd_complete_conjecture
    f = make_fixture("odd_complete", {"n": n})
    assert odd_complete_conjecture(n, 1) == pytest.approx(f.params["a"], abs=1e-15)
    assert odd_complete_conjecture(n, 2) == pytest.approx(f.params["b"], abs=1e-15)
