import pytest

from hypergraphon import Hypergraph, LabeledHypergraph, QuantumGraph, Signature, edge, path, triangle
from hypergraphon.errors import (
    ArityMismatch,
    BadRelationIndex,
    RepeatedVertexInTuple,
    TooLargeForExactIso,
    ValidationError,
    VertexOutOfRange,
)
from hypergraphon.graphs import (
    edge_labeled_derivative,
    index_orbit,
    isomorphic,
    orbit_size,
    validate_and_canonicalize,
    vertex_labeled_derivative,
)

G2 = Signature((2,))


def test_edges_are_sorted_and_deduplicated():
    F = Hypergraph.from_edges(G2, 3, [[(1, 0), (0, 2), (2, 1), (0, 1)]])
    assert F.edges == (((0, 1), (0, 2), (1, 2)),)
    assert validate_and_canonicalize(G2, 3, F.edges) == F.edges


def test_canonicalization_is_idempotent():
    raw = [[(2, 1), (1, 3)]]
    once = validate_and_canonicalize(G2, 4, raw)
    assert validate_and_canonicalize(G2, 4, once) == once


@pytest.mark.parametrize(
    "edges, error",
    [
        ([[(1, 1)]], RepeatedVertexInTuple),
        ([[(0, 5)]], VertexOutOfRange),
        ([[(0, 1, 2)]], ArityMismatch),
        ([[(0, 1)], [(0,)]], ValidationError),
    ],
)
def test_invalid_edges(edges, error):
    with pytest.raises(error):
        Hypergraph.from_edges(G2, 3, edges)


def test_empty_graph_is_valid():
    F = Hypergraph.from_edges(G2, 3, [[]])
    assert F.n_edges == 0 and F.n == 3


def test_signature_parameter_count():
    assert Signature((2,)).n_params(2) == 3
    assert Signature((2, 1)).n_params(3) == 6 + 3
    assert Signature((3,)).n_params(2) == 4
    with pytest.raises(ValidationError):
        Signature(())


def test_triangle_edge_derivative_has_three_cherries():
    terms = edge_labeled_derivative(triangle(), 0)
    assert len(terms) == 3
    for t in terms:
        assert t.base.n_edges == 2 and len(t.labels) == 2
        # the removed edge joins the two labeled vertices
        assert tuple(sorted(t.labels)) not in t.base.edges[0]


def test_edge_derivative_cases():
    (only,) = edge_labeled_derivative(edge(), 0)
    assert only.base.n_edges == 0 and only.labels == (0, 1)
    sig = Signature((2, 1))
    F = Hypergraph.from_edges(sig, 2, [[(0, 1)], []])
    assert edge_labeled_derivative(F, 1) == ()
    with pytest.raises(BadRelationIndex):
        edge_labeled_derivative(F, 2)


@pytest.mark.parametrize("F, count", [(edge(), 2), (triangle(), 3), (Hypergraph.empty(G2, 1), 1)])
def test_vertex_derivative_term_count(F, count):
    assert len(vertex_labeled_derivative(F)) == count


def test_index_orbits():
    assert index_orbit((0, 0)) == {(0, 0)}
    assert index_orbit((0, 1)) == {(0, 1), (1, 0)}
    assert len(index_orbit((0, 1, 1))) == 3 == orbit_size((0, 1, 1))
    assert orbit_size((0, 1, 2)) == 6


def test_isomorphism():
    relabeled = Hypergraph.from_edges(G2, 3, [[(0, 2), (1, 2), (0, 1)]])
    assert isomorphic(triangle(), relabeled)
    assert not isomorphic(path(3), triangle())
    four_cycle = Hypergraph.from_edges(G2, 4, [[(0, 1), (1, 2), (2, 3), (0, 3)]])
    chord = Hypergraph.from_edges(G2, 4, [[(0, 1), (1, 2), (2, 3), (0, 2)]])
    assert not isomorphic(four_cycle, chord)
    big = Hypergraph.empty(G2, 11)
    with pytest.raises(TooLargeForExactIso):
        isomorphic(big, big)


def test_isomorphism_respects_relations():
    sig = Signature((2, 1))
    a = Hypergraph.from_edges(sig, 2, [[(0, 1)], [(0,)]])
    b = Hypergraph.from_edges(sig, 2, [[(0, 1)], [(1,)]])
    c = Hypergraph.from_edges(sig, 2, [[(0, 1)], [(0,), (1,)]])
    assert isomorphic(a, b) and not isomorphic(a, c)


def test_linearity():
    assert triangle().is_linear()
    sig = Signature((3,))
    assert not Hypergraph.from_edges(sig, 4, [[(0, 1, 2), (0, 1, 3)]]).is_linear()
    assert Hypergraph.from_edges(sig, 5, [[(0, 1, 2), (2, 3, 4)]]).is_linear()


def test_labeled_hypergraph_validation():
    with pytest.raises(ValidationError):
        LabeledHypergraph(edge(), (0, 0))
    with pytest.raises(VertexOutOfRange):
        LabeledHypergraph(edge(), (2,))


def test_quantum_graph_merging():
    relabeled = Hypergraph.from_edges(G2, 3, [[(0, 1), (0, 2)]])
    Q = QuantumGraph(((1.0, path(3)), (2.0, relabeled)))
    assert len(Q.terms) == 2
    merged = Q.merge_isomorphic()
    assert len(merged.terms) == 1 and merged.terms[0][0] == 3.0
    cancelled = QuantumGraph.of(edge()) + QuantumGraph.of(edge(), -1.0)
    assert cancelled.terms[0][0] == 0.0
    assert (2 * QuantumGraph.of(edge())).terms[0][0] == 2.0


def test_quantum_graph_rejects_mixed_signatures():
    with pytest.raises(ValidationError):
        QuantumGraph(((1.0, edge()), (1.0, edge(Signature((2, 1))))))
    with pytest.raises(ValidationError):
        QuantumGraph(())
