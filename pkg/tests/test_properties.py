"""Invariants checked on generated inputs."""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corpus import counting_pairs, random_graph, random_signature, random_step_function
from hypergraphon import (
    Hypergraph,
    ObjectiveConfig,
    QuantumGraph,
    Signature,
    compile_formula,
    cut_distance_aligned,
    cut_norm,
    density,
    make_step_function,
    objective_value,
    parse,
    path,
    split,
)
from hypergraphon.graphs import validate_and_canonicalize
from hypergraphon.solver import project_simplex
from hypergraphon.stepfn import Mode, l1_distance, permute_blocks, symmetrize


seeds = st.integers(0, 2**32 - 1)
FAST = settings(max_examples=40, deadline=None)


def _case(seed, max_m=4):
    rng = np.random.default_rng(seed)
    sig = random_signature(rng)
    m = int(rng.integers(1, max_m + 1))
    return rng, sig, random_step_function(rng, sig, m), random_graph(rng, sig)


@FAST
@given(seeds)
def test_density_is_a_probability(seed):
    _, _, W, F = _case(seed)
    assert 0.0 <= density(F, W) <= 1.0 + 1e-12


@FAST
@given(seeds)
def test_density_ignores_block_order(seed):
    rng, _, W, F = _case(seed)
    V = permute_blocks(W, rng.permutation(W.m))
    assert density(F, V) == pytest.approx(density(F, W), rel=1e-12, abs=1e-15)


@FAST
@given(seeds, st.floats(0.05, 0.95))
def test_splits_change_nothing(seed, lam):
    rng, _, W, F = _case(seed)
    V = split(W, lam, int(rng.integers(W.m)))
    assert density(F, V) == pytest.approx(density(F, W), rel=1e-12, abs=1e-15)
    assert objective_value(ObjectiveConfig(), V) == pytest.approx(objective_value(ObjectiveConfig(), W), abs=1e-14)


@FAST
@given(seeds)
def test_density_ignores_vertex_labels(seed):
    rng, _, W, F = _case(seed)
    G = F.relabel(rng.permutation(F.n))
    assert density(G, W) == pytest.approx(density(F, W), rel=1e-12, abs=1e-15)


@FAST
@given(seeds)
def test_disjoint_union_multiplies(seed):
    rng, sig, W, F = _case(seed)
    G = random_graph(rng, sig, max_vertices=3)
    union = Hypergraph.from_edges(
        sig, F.n + G.n, [list(a) + [tuple(v + F.n for v in e) for e in b] for a, b in zip(F.edges, G.edges)]
    )
    assert density(union, W) == pytest.approx(density(F, W) * density(G, W), rel=1e-11, abs=1e-15)


@FAST
@given(seeds, st.floats(-3, 3), st.floats(-3, 3))
def test_quantum_density_is_linear(seed, a, b):
    rng, sig, W, F = _case(seed)
    G = random_graph(rng, sig)
    Q = QuantumGraph(((a, F), (b, G)))
    assert density(Q, W) == pytest.approx(a * density(F, W) + b * density(G, W), abs=1e-12)


@FAST
@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=10))
def test_simplex_projection_is_idempotent(values):
    p = project_simplex(np.array(values))
    assert p.sum() == pytest.approx(1.0) and p.min() >= 0
    assert np.allclose(project_simplex(p), p, atol=1e-12)


@FAST
@given(st.integers(2, 6), st.data())
def test_canonical_edges_are_a_fixed_point(n, data):
    pairs = list(itertools.combinations(range(n), 2))
    chosen = data.draw(st.lists(st.sampled_from(pairs), max_size=8))
    raw = [[tuple(reversed(e)) if i % 2 else e for i, e in enumerate(chosen)]]
    sig = Signature((2,))
    once = validate_and_canonicalize(sig, n, raw)
    assert validate_and_canonicalize(sig, n, once) == once


@FAST
@given(seeds)
def test_cut_norm_is_bounded_by_l1_and_subadditive(seed):
    rng = np.random.default_rng(seed)
    sig = Signature((2,))
    m = int(rng.integers(1, 6))
    pi = rng.dirichlet(np.ones(m))
    A, B = (make_step_function(sig, pi, [symmetrize(rng.uniform(-1, 1, (m, m)))], Mode.REAL) for _ in range(2))
    S = make_step_function(sig, pi, [A.arrays[0] + B.arrays[0]], Mode.REAL)
    zero = make_step_function(sig, pi, [np.zeros((m, m))], Mode.REAL)
    assert cut_norm(S).total <= cut_norm(A).total + cut_norm(B).total + 1e-12
    assert cut_norm(A).total <= l1_distance(A, zero) + 1e-12


@FAST
@given(seeds)
def test_cut_distance_is_symmetric(seed):
    rng = np.random.default_rng(seed)
    sig = Signature((2,))
    W = random_step_function(rng, sig, int(rng.integers(1, 4)))
    V = random_step_function(rng, sig, int(rng.integers(1, 4)))
    assert cut_distance_aligned(W, V).value == pytest.approx(cut_distance_aligned(V, W).value, abs=1e-12)


FORMULA_BANK = [
    "Sm(x)",
    "Friends(x, y)",
    "Sm(y)",
    "Friends(y, z)",
]


@FAST
@given(st.lists(st.sampled_from(FORMULA_BANK), min_size=2, max_size=3), st.sampled_from(["and", "or", "=>", "<=>"]), seeds)
def test_double_negation_and_de_morgan(atoms, op, seed):
    vocab = {"Friends": 2, "Sm": 1}
    rng = np.random.default_rng(seed)
    body = f" {op} ".join(atoms)
    plain = parse(f"forall x, y, z : {body}", vocab)
    doubled = parse(f"forall x, y, z : not not ({body})", vocab)
    W = random_step_function(rng, plain.sig, int(rng.integers(1, 4)))
    assert density(compile_formula(plain), W) == pytest.approx(density(compile_formula(doubled), W), abs=1e-12)
    left = parse(f"forall x, y, z : not ({atoms[0]} and {atoms[1]})", vocab)
    right = parse(f"forall x, y, z : not {atoms[0]} or not {atoms[1]}", vocab)
    assert density(compile_formula(left), W) == pytest.approx(density(compile_formula(right), W), abs=1e-12)


def test_counting_bound_holds_with_edge_count_factor():
    """``|t(F,W) - t(F,V)| <= |E(F)| * delta`` on the acceptance pairs."""
    for F, W, V in counting_pairs():
        gap = abs(density(F, W) - density(F, V))
        assert gap <= F.n_edges * cut_distance_aligned(W, V).value + 1e-12


def test_counting_bound_without_factor_fails_for_constants():
    sig = Signature((2,))
    W = make_step_function(sig, [1.0], [[[0.9]]])
    V = make_step_function(sig, [1.0], [[[0.8]]])
    gap = abs(density(path(3), W) - density(path(3), V))
    delta = cut_distance_aligned(W, V).value
    assert delta == pytest.approx(0.1)
    assert gap == pytest.approx(0.17) and gap > delta
