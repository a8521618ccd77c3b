"""Subgraph densities of step functions and their derivatives.

On an m-step function ``t(F, (A, pi))`` is a polynomial: the sum over all
maps ``V(F) -> [m]`` of the product of array entries over the edges times the
product of ``pi`` over the vertices. Each density is evaluated as a single
``einsum`` contraction with one index per vertex; :func:`density_bruteforce`
keeps the explicit enumeration for cross-checking.

Derivatives follow from the labeled-graph expansion: differentiating with
respect to one array entry deletes an edge and pins its endpoints
(:func:`hypergraphon.graphs.edge_labeled_derivative`); differentiating with
respect to ``pi_i`` pins one vertex at a time.
"""

from __future__ import annotations

import functools
import itertools
import string
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import IndexArityMismatch, TooManyTerms, ValidationError
from .graphs import (
    Hypergraph,
    LabeledHypergraph,
    QuantumGraph,
    as_quantum,
    edge_labeled_derivative,
    vertex_labeled_derivative,
)
from .stepfn import StepFunction, canonical_indices, canonical_map, cell_weights

TERM_LIMIT = 10**9

_PI, _ONE = -1, -2
_LETTERS = string.ascii_letters


def _check_terms(n: int, m: int):
    if float(m) ** n > TERM_LIMIT:
        raise TooManyTerms(f"{m}^{n} terms exceeds the limit {TERM_LIMIT}; use Monte Carlo")


@functools.lru_cache(maxsize=4096)
def _plan(F: Hypergraph, labels: tuple[int, ...]):
    ops = []
    for k, rel in enumerate(F.edges):
        for e in rel:
            ops.append((k, list(e)))
    for v in range(F.n):
        ops.append((_ONE if v in labels else _PI, [v]))
    return tuple(ops)


def _contract(F: Hypergraph, labels: tuple[int, ...], arrays, pi) -> np.ndarray:
    if F.n == 0:
        return np.array(1.0)
    ones = np.ones(len(pi))
    args = []
    for key, subs in _plan(F, labels):
        args.append(pi if key == _PI else ones if key == _ONE else arrays[key])
        args.append(subs)
    args.append(list(labels))
    return np.einsum(*args, optimize=F.n > 4)


def _check_sig(F, W):
    if F.sig != W.sig:
        raise ValidationError("graph and step function have different signatures")


def density(F: Hypergraph | QuantumGraph, W: StepFunction) -> float:
    """Homomorphism density ``t(F, W)``; linear in quantum graphs."""
    if isinstance(F, QuantumGraph):
        return quantum_density(F, W)
    _check_sig(F, W)
    _check_terms(F.n, W.m)
    return float(_contract(F, (), W.arrays, W.pi))


def quantum_density(Q: QuantumGraph, W: StepFunction) -> float:
    return float(sum(c * density(g, W) for c, g in Q.terms))


def marginal(Fset: Sequence, W: StepFunction) -> np.ndarray:
    """Vector of densities ``(t(F_1, W), .., t(F_n, W))``."""
    return np.array([density(F, W) for F in Fset])


def density_bruteforce(F: Hypergraph, W: StepFunction) -> float:
    """Direct enumeration of all ``m^|V(F)|`` vertex maps."""
    _check_sig(F, W)
    _check_terms(F.n, W.m)
    total = 0.0
    for x in itertools.product(range(W.m), repeat=F.n):
        term = 1.0
        for k, rel in enumerate(F.edges):
            for e in rel:
                term *= W.arrays[k][tuple(x[v] for v in e)]
        for v in range(F.n):
            term *= W.pi[x[v]]
        total += term
    return total


def partial_density_tensor(Fl: LabeledHypergraph, W: StepFunction) -> np.ndarray:
    """Partial densities for every assignment of the labels to blocks.

    Entry ``[i_1, .., i_j]`` pins label ``a_s`` to block ``i_s`` and sums over
    the unlabeled vertices only; labeled vertices carry no ``pi`` factor.
    """
    _check_sig(Fl.base, W)
    _check_terms(Fl.base.n - len(Fl.labels), W.m)
    return _contract(Fl.base, Fl.labels, W.arrays, W.pi)


def partial_density(Fl: LabeledHypergraph, idx: Sequence[int], W: StepFunction) -> float:
    idx = tuple(int(i) for i in idx)
    if len(idx) != len(Fl.labels):
        raise IndexArityMismatch(f"{len(Fl.labels)} labels but {len(idx)} block indices")
    if any(i < 0 or i >= W.m for i in idx):
        raise IndexArityMismatch(f"block indices {idx} outside [0, {W.m})")
    return float(partial_density_tensor(Fl, W)[idx])


@dataclass(frozen=True)
class GradientVector:
    """Gradient in canonical array coordinates and in ``pi``.

    ``a_part[k][c]`` is the derivative with respect to the canonical entry
    ``canonical_indices(m, d_k)[c]`` (all orbit copies move together).
    ``pi_part`` is the unconstrained derivative in each ``pi_i``;
    ``pi_reduced`` eliminates the last block through ``sum(pi) = 1``.
    """

    a_part: tuple
    pi_part: np.ndarray

    @property
    def pi_reduced(self) -> np.ndarray:
        return self.pi_part[:-1] - self.pi_part[-1]

    def flat(self) -> np.ndarray:
        """Concatenation of the canonical A coordinates and ``pi_reduced``."""
        return np.concatenate(list(self.a_part) + [self.pi_reduced])

    def __add__(self, other: "GradientVector") -> "GradientVector":
        return GradientVector(
            tuple(a + b for a, b in zip(self.a_part, other.a_part)), self.pi_part + other.pi_part
        )

    def __mul__(self, c: float) -> "GradientVector":
        return GradientVector(tuple(c * a for a in self.a_part), c * self.pi_part)

    __rmul__ = __mul__

    @classmethod
    def zeros(cls, W: StepFunction) -> "GradientVector":
        return cls(
            tuple(np.zeros(len(canonical_indices(W.m, d))) for d in W.sig.arities), np.zeros(W.m)
        )


@functools.lru_cache(maxsize=1024)
def _derivatives(F: Hypergraph):
    return (
        tuple(edge_labeled_derivative(F, k) for k in range(F.sig.r)),
        vertex_labeled_derivative(F),
    )


def canonical_from_full(full: np.ndarray, m: int) -> np.ndarray:
    """Sum a full-index array over each orbit, giving canonical coordinates."""
    d = full.ndim
    return np.bincount(canonical_map(m, d), weights=full.ravel(), minlength=len(canonical_indices(m, d)))


def _graph_gradient(F: Hypergraph, W: StepFunction) -> GradientVector:
    _check_sig(F, W)
    _check_terms(F.n, W.m)
    edge_terms, vertex_terms = _derivatives(F)
    a_part = []
    for k, d in enumerate(W.sig.arities):
        T = np.zeros((W.m,) * d)
        for Fl in edge_terms[k]:
            T = T + _contract(Fl.base, Fl.labels, W.arrays, W.pi)
        a_part.append(canonical_from_full(T * cell_weights(W.pi, d), W.m))
    pi_part = np.zeros(W.m)
    for Fl in vertex_terms:
        pi_part = pi_part + _contract(Fl.base, Fl.labels, W.arrays, W.pi)
    return GradientVector(tuple(a_part), pi_part)


def gradient(F: Hypergraph | QuantumGraph, W: StepFunction) -> GradientVector:
    """Analytic gradient of ``t(F, W)`` in canonical coordinates and ``pi``."""
    out = GradientVector.zeros(W)
    for c, g in as_quantum(F).terms:
        out = out + c * _graph_gradient(g, W)
    return out


@dataclass(frozen=True)
class JacobianResult:
    matrix: np.ndarray  # one row per constraint, columns = free coordinates
    singular_values: np.ndarray
    rank: int


def jacobian(Fset: Sequence, W: StepFunction, rtol: float = 1e-8) -> JacobianResult:
    """Jacobian of the marginal map with its numerical rank.

    Singular values below ``rtol * sigma_max`` count as zero.
    """
    J = np.array([gradient(F, W).flat() for F in Fset]).reshape(len(Fset), -1)
    if J.size == 0:
        return JacobianResult(J, np.zeros(0), 0)
    sv = np.linalg.svd(J, compute_uv=False)
    rank = int(np.sum(sv > rtol * sv[0])) if sv[0] > 0 else 0
    return JacobianResult(J, sv, rank)


class DensityProgram:
    """Precompiled densities and gradients for a fixed list of quantum graphs.

    Optimizers evaluate the same constraints thousands of times; this class
    builds the contraction list once, shares contractions between
    constraints, and recovers each density from its vertex derivative through
    ``sum_i pi_i dt/dpi_i = |V(F)| t`` instead of a separate contraction.
    """

    def __init__(self, graphs: Sequence, m: int):
        self.graphs = tuple(as_quantum(g) for g in graphs)
        if not self.graphs:
            raise ValidationError("a density program needs at least one graph")
        self.sig = self.graphs[0].sig
        self.m = m
        self._index: dict[tuple, int] = {}
        self._ops: list[tuple] = []
        self.const = np.zeros(len(self.graphs))
        self.vertex_terms: list[tuple[int, float, int, int]] = []  # (row, coeff, |V|, op)
        self.edge_terms: list[tuple[int, int, float, int]] = []  # (row, relation, coeff, op)
        for i, Q in enumerate(self.graphs):
            if Q.sig != self.sig:
                raise ValidationError("graphs must share one signature")
            for c, g in Q.terms:
                if g.n == 0:
                    self.const[i] += c
                    continue
                _check_terms(g.n, m)
                edge_terms, vertex_terms = _derivatives(g)
                for Fl in vertex_terms:
                    self.vertex_terms.append((i, c, g.n, self._op(Fl)))
                for k, terms in enumerate(edge_terms):
                    for Fl in terms:
                        self.edge_terms.append((i, k, c, self._op(Fl)))

    def _op(self, Fl: LabeledHypergraph) -> int:
        key = (Fl.base, Fl.labels)
        if key not in self._index:
            r = self.sig.r
            letters = lambda vs: "".join(_LETTERS[v] for v in vs)  # noqa: E731
            operands, subs = [], []
            for kind, sub in _plan(Fl.base, Fl.labels):
                operands.append(r if kind == _PI else r + 1 if kind == _ONE else kind)
                subs.append(letters(sub))
            spec = ",".join(subs) + "->" + letters(Fl.labels)
            self._index[key] = len(self._ops)
            self._ops.append((spec, tuple(operands), Fl.base.n > 4))
        return self._index[key]

    def evaluate(self, arrays, pi):
        """Return ``(values, a_grads, pi_grads)``: the densities, one matrix of
        canonical array derivatives per relation and the unreduced ``pi``
        derivatives, with one row per graph."""
        m, n = self.m, len(self.graphs)
        pool = list(arrays) + [pi, np.ones(m)]
        res = [np.einsum(spec, *[pool[o] for o in operands], optimize=opt) for spec, operands, opt in self._ops]
        values = self.const.copy()
        pi_grads = np.zeros((n, m))
        for i, c, nv, op in self.vertex_terms:
            pi_grads[i] += c * res[op]
            values[i] += c * (pi @ res[op]) / nv
        T = [[None] * n for _ in arrays]
        for i, k, c, op in self.edge_terms:
            T[k][i] = c * res[op] if T[k][i] is None else T[k][i] + c * res[op]
        a_grads = []
        for k, d in enumerate(self.sig.arities):
            cw = cell_weights(pi, d)
            size = len(canonical_indices(m, d))
            a_grads.append(
                np.array([np.zeros(size) if t is None else canonical_from_full(t * cw, m) for t in T[k]])
            )
        return values, a_grads, pi_grads


def fd_gradient(fun, W: StepFunction, h: float = 1e-5) -> np.ndarray:
    """Central differences of ``fun(W)`` in the free coordinates (canonical
    array entries, then ``pi_1 .. pi_{m-1}`` with ``pi_m`` absorbing the change)."""
    from .stepfn import from_free_vector

    x = W.free_vector()
    out = np.empty(len(x))
    for j in range(len(x)):
        e = np.zeros(len(x))
        e[j] = h
        plus = from_free_vector(W.sig, W.m, x + e, W.mode)
        minus = from_free_vector(W.sig, W.m, x - e, W.mode)
        out[j] = (fun(plus) - fun(minus)) / (2 * h)
    return out


def gradient_check(F, W: StepFunction, h: float = 1e-5, floor: float = 1e-2) -> float:
    """Largest ``|analytic - fd| / max(|fd|, floor)`` over the free coordinates.

    With the default floor a value below 1e-6 means every coordinate agrees
    to 1e-6 relative or 1e-8 absolute.
    """
    analytic = gradient(F, W).flat()
    numeric = fd_gradient(lambda V: density(F, V), W, h)
    return float(np.max(np.abs(analytic - numeric) / np.maximum(np.abs(numeric), floor), initial=0.0))
