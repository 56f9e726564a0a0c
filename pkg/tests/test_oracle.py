import itertools

import numpy as np
import pytest

from qmcnpa.algebra import hamiltonian_poly, to_matrix
from qmcnpa.graph import CapabilityError, GraphFamilySpec, WeightedGraph, make_family
from qmcnpa.oracle import exact_max_eigenvalue, expectation, known_value

CLOSED = [GraphFamilySpec("star", 5), GraphFamilySpec("complete_bipartite", 3, 2),
          GraphFamilySpec("crown", 3, x=1.0), GraphFamilySpec("crown", 3, x=5.0),
          GraphFamilySpec("complete", 6), GraphFamilySpec("complete", 5),
          GraphFamilySpec("triangle", 3, alpha=0.5), GraphFamilySpec("triangle", 3, alpha=2.0),
          GraphFamilySpec("double_star", 2), GraphFamilySpec("cycle", 6),
          GraphFamilySpec("j1j2_chain", 10, J1=1.0, J2=0.5),
          GraphFamilySpec("shastry_sutherland", 4, J=1.0, alpha=1.5)]


@pytest.mark.parametrize("spec", CLOSED, ids=lambda s: s.label())
def test_closed_forms_match_diagonalization(spec):
    g = make_family(spec)
    assert known_value(spec) == pytest.approx(exact_max_eigenvalue(g).value, abs=1e-9)


def test_against_dense_matrix():
    rng = np.random.default_rng(4)
    for _ in range(5):
        n = 6
        w = {e: float(rng.uniform(0.1, 2)) for e in itertools.combinations(range(n), 2)
             if rng.random() < 0.6}
        g = WeightedGraph(n, w)
        H = to_matrix(hamiltonian_poly(w), n).toarray()
        ref = np.linalg.eigvalsh(H)[-1]
        res = exact_max_eigenvalue(g, all_sectors=True)
        assert res.value == pytest.approx(ref, abs=1e-10)
        assert max(res.sector_values.values()) == pytest.approx(ref, abs=1e-10)


def test_expectations_sum_to_energy():
    g = make_family(GraphFamilySpec("cycle", 8))
    res = exact_max_eigenvalue(g)
    tot = sum(w * expectation(g, e, res) for e, w in g.weights.items())
    assert tot == pytest.approx(res.value, abs=1e-10)
    assert res.residual < 1e-9


def test_sparse_path_agrees():
    g = make_family(GraphFamilySpec("j1j2_chain", 14, J2=0.3))
    res = exact_max_eigenvalue(g)
    assert res.vectors.shape[0] == 3432
    assert res.residual < 1e-8


def test_too_many_qubits():
    with pytest.raises(CapabilityError):
        exact_max_eigenvalue(make_family(GraphFamilySpec("cycle", 21)))


def test_no_closed_form():
    assert known_value(GraphFamilySpec("cycle", 8)) is None
    assert known_value(GraphFamilySpec("shastry_sutherland", 4, alpha=0.5)) is None


def test_swap_value_conversion():
    from qmcnpa.oracle import swap_value
    g = make_family(GraphFamilySpec("star", 3))
    n = g.n
    total = np.zeros((2 ** n, 2 ** n))
    for (i, j), w in g.weights.items():
        # SWAP on (i, j) via permutation of basis states
        perm = np.zeros_like(total)
        for b in range(2 ** n):
            bi, bj = (b >> (n - 1 - i)) & 1, (b >> (n - 1 - j)) & 1
            c = b ^ ((bi ^ bj) << (n - 1 - i)) ^ ((bi ^ bj) << (n - 1 - j))
            perm[c, b] = 1
        total += w * perm
    e_max = exact_max_eigenvalue(g).value
    assert swap_value(g, e_max) == pytest.approx(np.linalg.eigvalsh(total)[0], abs=1e-9)
