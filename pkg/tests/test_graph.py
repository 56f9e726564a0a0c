import itertools

import numpy as np
import pytest

from qmcnpa.graph import (Graph6Error, GraphFamilySpec, ParameterError, WeightedGraph,
                          canonical_id, enumerate_connected, make_family, parse_family,
                          parse_graph6, read_graph6_file, shastry_sutherland_dimers,
                          shastry_sutherland_triangles, to_graph6)


def test_star_and_crown_layout():
    g = make_family(GraphFamilySpec("star", 4))
    assert g.n == 5 and set(g.weights) == {(0, i) for i in range(1, 5)}
    c = make_family(parse_family("crown:4:x=2.5"))
    assert c.n == 6
    assert c.weight(4, 5) == 2.5
    assert sum(1 for e, w in c.weights.items() if w == 1.0) == 8


def test_double_star_and_bipartite():
    g = make_family(GraphFamilySpec("double_star", 3))
    assert g.n == 8 and len(g.weights) == 7
    assert g.is_bipartite()
    assert not make_family(GraphFamilySpec("complete", 3)).is_bipartite()


def test_j1j2_chain_weights():
    g = make_family(GraphFamilySpec("j1j2_chain", 8, J1=1.0, J2=0.5))
    assert len(g.weights) == 16
    assert g.weight(0, 1) == 1.0 and g.weight(0, 2) == 0.5 and g.weight(0, 7) == 1.0
    obc = make_family(GraphFamilySpec("j1j2_chain", 8, J2=0.5, pbc=False))
    assert len(obc.weights) == 7 + 6


def test_shastry_sutherland_structure():
    g = make_family(GraphFamilySpec("shastry_sutherland", 4, J=1.0, alpha=2.0))
    assert g.n == 16
    dimers = shastry_sutherland_dimers(4)
    assert len(dimers) == 8
    assert sorted(v for d in dimers for v in d) == list(range(16))
    assert all(g.weight(*d) == 4.0 for d in dimers)
    assert sum(1 for w in g.weights.values() if w == 1.0) == 32
    tris = shastry_sutherland_triangles(4)
    for p, c, q in tris:
        assert g.weight(p, q) == 4.0 and g.weight(p, c) == 1.0 and g.weight(c, q) == 1.0


def test_family_errors():
    with pytest.raises(ParameterError):
        parse_family("nosuch:3")
    with pytest.raises(ParameterError):
        make_family(GraphFamilySpec("shastry_sutherland", 5))
    with pytest.raises(ParameterError):
        make_family(GraphFamilySpec("crown", 3, x=-1))
    with pytest.raises(ParameterError):
        parse_family("crown:3:q=1")


def test_graph6_round_trip():
    g = make_family(GraphFamilySpec("cycle", 7))
    s = to_graph6(g)
    h = parse_graph6(s)
    assert h.n == 7 and set(h.weights) == set(g.weights)
    with pytest.raises(Graph6Error):
        parse_graph6("D~~~~~~~")


def test_canonical_id_is_relabel_invariant():
    rng = np.random.default_rng(0)
    g = parse_graph6("E}U_")
    cid = canonical_id(g)
    for _ in range(10):
        perm = rng.permutation(g.n)
        assert canonical_id(g.relabel(perm)) == cid


@pytest.mark.parametrize("n,count", [(2, 1), (3, 2), (4, 6), (5, 21), (6, 112)])
def test_connected_graph_counts(n, count):
    graphs = list(enumerate_connected(n))
    assert len(graphs) == count
    assert len({canonical_id(g) for g in graphs}) == count
    assert all(g.is_connected() for g in graphs)


def test_read_graph6_file(tmp_path):
    f = tmp_path / "g.g6"
    f.write_text(">>graph6<<D~o\nD^o\n\n")
    gs = list(read_graph6_file(f))
    assert [len(g.weights) for g in gs] == [8, 7]  # bits set in the graph6 payload


def test_with_weight_zero_removes_edge():
    g = WeightedGraph(3, {(0, 1): 1.0, (1, 2): 1.0})
    assert (0, 2) in g.with_weight(2, 0, 0.5).weights
    assert (0, 1) not in g.with_weight(0, 1, 0.0).weights
