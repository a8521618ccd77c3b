"""Finite multi-relational hypergraphs, labeled hypergraphs and quantum graphs.

Vertices are ``0 .. n-1``. A hyperedge of relation ``k`` is an unordered set
of ``arities[k]`` distinct vertices, stored as a sorted tuple. All objects are
immutable and hashable, so they can key caches.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from .errors import (
    ArityMismatch,
    BadRelationIndex,
    RepeatedVertexInTuple,
    TooLargeForExactIso,
    ValidationError,
    VertexOutOfRange,
)

ISO_MAX_VERTICES = 10


@dataclass(frozen=True)
class Signature:
    """Relational schema: one arity per relation symbol."""

    arities: tuple[int, ...]

    def __post_init__(self):
        arities = tuple(int(a) for a in self.arities)
        if len(arities) < 1:
            raise ValidationError("a signature needs at least one relation")
        if any(a < 1 for a in arities):
            raise ValidationError(f"arities must be positive, got {arities}")
        object.__setattr__(self, "arities", arities)

    @property
    def r(self) -> int:
        return len(self.arities)

    def n_params(self, m: int) -> int:
        """Canonical array entries of an m-step function, sum_k C(m+d_k-1, d_k)."""
        return sum(math.comb(m + d - 1, d) for d in self.arities)


def validate_and_canonicalize(sig: Signature, n: int, edges) -> tuple:
    """Check raw edge lists against ``sig`` and return the canonical edge tuple.

    ``edges`` holds one iterable of vertex tuples per relation. Each tuple is
    sorted, each relation's set is deduplicated and sorted.
    """
    n = int(n)
    if n < 0:
        raise ValidationError("vertex count must be non-negative")
    edges = list(edges)
    if len(edges) != sig.r:
        raise ArityMismatch(f"expected {sig.r} edge lists, got {len(edges)}")
    out = []
    for k, (d, rel) in enumerate(zip(sig.arities, edges)):
        canon = set()
        for e in rel:
            e = tuple(int(v) for v in e)
            if len(e) != d:
                raise ArityMismatch(f"relation {k} has arity {d}, got tuple {e}")
            if any(v < 0 or v >= n for v in e):
                raise VertexOutOfRange(f"tuple {e} outside vertex range [0, {n})")
            if len(set(e)) != d:
                raise RepeatedVertexInTuple(f"tuple {e} repeats a vertex")
            canon.add(tuple(sorted(e)))
        out.append(tuple(sorted(canon)))
    return tuple(out)


@dataclass(frozen=True)
class Hypergraph:
    """A finite (r, d)-hypergraph. Build with :meth:`from_edges`."""

    sig: Signature
    n: int
    edges: tuple[tuple[tuple[int, ...], ...], ...]

    def __post_init__(self):
        canon = validate_and_canonicalize(self.sig, self.n, self.edges)
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "edges", canon)

    @classmethod
    def from_edges(cls, sig: Signature, n: int, edges) -> "Hypergraph":
        return cls(sig, n, tuple(tuple(rel) for rel in edges))

    @classmethod
    def _trusted(cls, sig: Signature, n: int, edges) -> "Hypergraph":
        """Skip validation; ``edges`` must already be canonical."""
        G = object.__new__(cls)
        object.__setattr__(G, "sig", sig)
        object.__setattr__(G, "n", int(n))
        object.__setattr__(G, "edges", edges)
        return G

    @classmethod
    def empty(cls, sig: Signature, n: int = 0) -> "Hypergraph":
        return cls(sig, n, tuple(() for _ in sig.arities))

    @property
    def n_edges(self) -> int:
        return sum(len(rel) for rel in self.edges)

    def is_linear(self) -> bool:
        """True when any two hyperedges share at most one vertex."""
        flat = [set(e) for rel in self.edges for e in rel]
        return all(len(a & b) <= 1 for a, b in itertools.combinations(flat, 2))

    def relabel(self, perm: Sequence[int]) -> "Hypergraph":
        """Image under the vertex map ``v -> perm[v]``."""
        return Hypergraph(
            self.sig,
            self.n,
            tuple(tuple(tuple(perm[v] for v in e) for e in rel) for rel in self.edges),
        )

    def __str__(self):
        rels = "; ".join(
            f"R{k}:" + ",".join("".join(map(str, e)) for e in rel)
            for k, rel in enumerate(self.edges)
        )
        return f"Hypergraph(n={self.n}, {rels})"


@dataclass(frozen=True)
class LabeledHypergraph:
    """A hypergraph with an ordered vector of distinct labeled vertices."""

    base: Hypergraph
    labels: tuple[int, ...]

    def __post_init__(self):
        labels = tuple(int(v) for v in self.labels)
        if len(set(labels)) != len(labels):
            raise ValidationError(f"labels must be distinct, got {labels}")
        if any(v < 0 or v >= self.base.n for v in labels):
            raise VertexOutOfRange(f"labels {labels} outside [0, {self.base.n})")
        object.__setattr__(self, "labels", labels)

    @property
    def sig(self) -> Signature:
        return self.base.sig


def edge_labeled_derivative(F: Hypergraph, k: int) -> tuple[LabeledHypergraph, ...]:
    """Terms of the edge derivative of ``F`` in relation ``k``.

    One term per hyperedge of relation ``k``: the edge is deleted and its
    vertices labeled in (sorted) tuple order.
    """
    if not 0 <= k < F.sig.r:
        raise BadRelationIndex(f"relation index {k} not in [0, {F.sig.r})")
    terms = []
    for e in F.edges[k]:
        edges = list(F.edges)
        edges[k] = tuple(x for x in F.edges[k] if x != e)
        terms.append(LabeledHypergraph(Hypergraph(F.sig, F.n, tuple(edges)), e))
    return tuple(terms)


def vertex_labeled_derivative(F: Hypergraph) -> tuple[LabeledHypergraph, ...]:
    return tuple(LabeledHypergraph(F, (a,)) for a in range(F.n))


def index_orbit(idx: Sequence[int]) -> set[tuple[int, ...]]:
    """All distinct reorderings of a multi-index."""
    return set(itertools.permutations(tuple(idx)))


def orbit_size(idx: Sequence[int]) -> int:
    counts = Counter(idx)
    size = math.factorial(len(idx))
    for c in counts.values():
        size //= math.factorial(c)
    return size


def _invariants(F: Hypergraph):
    degs = []
    for v in range(F.n):
        degs.append(tuple(sum(v in e for e in rel) for rel in F.edges))
    return tuple(len(rel) for rel in F.edges), tuple(sorted(degs))


def isomorphic(F: Hypergraph, G: Hypergraph) -> bool:
    """Exact isomorphism test by backtracking over vertex bijections.

    Candidates are restricted to vertices with equal per-relation degrees and
    every fully mapped edge is checked as soon as its last vertex is placed.
    """
    if F.sig != G.sig or F.n != G.n:
        return False
    if F.n > ISO_MAX_VERTICES:
        raise TooLargeForExactIso(f"{F.n} vertices exceeds the limit {ISO_MAX_VERTICES}")
    if _invariants(F) != _invariants(G):
        return False
    n = F.n
    deg_f = [tuple(sum(v in e for e in rel) for rel in F.edges) for v in range(n)]
    deg_g = [tuple(sum(v in e for e in rel) for rel in G.edges) for v in range(n)]
    target = [set(rel) for rel in G.edges]
    # edges of F grouped by the vertex that completes them in order 0..n-1
    closing = [[] for _ in range(n)]
    for k, rel in enumerate(F.edges):
        for e in rel:
            closing[max(e)].append((k, e))
    perm = [-1] * n
    used = [False] * n

    def extend(v):
        if v == n:
            return True
        for w in range(n):
            if used[w] or deg_g[w] != deg_f[v]:
                continue
            perm[v] = w
            if all(tuple(sorted(perm[x] for x in e)) in target[k] for k, e in closing[v]):
                used[w] = True
                if extend(v + 1):
                    return True
                used[w] = False
        perm[v] = -1
        return False

    return extend(0)


@dataclass(frozen=True)
class QuantumGraph:
    """Finite real combination of hypergraphs over one signature.

    Constituents that are identical in canonical form are merged at
    construction; zero coefficients are dropped. A combination that cancels
    completely is stored as ``0 * (empty graph)`` so the term list is never
    empty.
    """

    terms: tuple[tuple[float, Hypergraph], ...]

    def __post_init__(self):
        terms = list(self.terms)
        if not terms:
            raise ValidationError("a quantum graph needs at least one term")
        sig = terms[0][1].sig
        merged: dict[Hypergraph, float] = {}
        for coeff, graph in terms:
            coeff = float(coeff)
            if not math.isfinite(coeff):
                raise ValidationError(f"non-finite coefficient {coeff}")
            if graph.sig != sig:
                raise ValidationError("constituents must share one signature")
            merged[graph] = merged.get(graph, 0.0) + coeff
        out = tuple((c, g) for g, c in merged.items() if c != 0.0)
        if not out:
            out = ((0.0, Hypergraph.empty(sig)),)
        object.__setattr__(self, "terms", out)

    @classmethod
    def of(cls, graph: Hypergraph, coeff: float = 1.0) -> "QuantumGraph":
        return cls(((coeff, graph),))

    @property
    def sig(self) -> Signature:
        return self.terms[0][1].sig

    @property
    def constituents(self) -> tuple[Hypergraph, ...]:
        return tuple(g for _, g in self.terms)

    def is_linear(self) -> bool:
        return all(g.is_linear() for g in self.constituents)

    def merge_isomorphic(self) -> "QuantumGraph":
        """Merge isomorphic constituents (brute force; small graphs only)."""
        groups: list[list] = []
        for coeff, graph in self.terms:
            for group in groups:
                if isomorphic(group[1], graph):
                    group[0] += coeff
                    break
            else:
                groups.append([coeff, graph])
        return QuantumGraph(tuple((c, g) for c, g in groups))

    def __add__(self, other: "QuantumGraph") -> "QuantumGraph":
        return QuantumGraph(self.terms + other.terms)

    def __mul__(self, scalar: float) -> "QuantumGraph":
        return QuantumGraph(tuple((scalar * c, g) for c, g in self.terms))

    __rmul__ = __mul__


def as_quantum(F) -> QuantumGraph:
    return F if isinstance(F, QuantumGraph) else QuantumGraph.of(F)


# -- small constructors used throughout tests and demos ---------------------

def edge(sig: Signature | None = None, k: int = 0) -> Hypergraph:
    sig = sig or Signature((2,))
    d = sig.arities[k]
    edges = [()] * sig.r
    edges[k] = (tuple(range(d)),)
    return Hypergraph.from_edges(sig, d, edges)


def triangle(sig: Signature | None = None, k: int = 0) -> Hypergraph:
    sig = sig or Signature((2,))
    edges = [()] * sig.r
    edges[k] = ((0, 1), (1, 2), (0, 2))
    return Hypergraph.from_edges(sig, 3, edges)


def path(n: int, sig: Signature | None = None, k: int = 0) -> Hypergraph:
    sig = sig or Signature((2,))
    edges = [()] * sig.r
    edges[k] = tuple((i, i + 1) for i in range(n - 1))
    return Hypergraph.from_edges(sig, n, edges)
