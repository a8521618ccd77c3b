"""Universally quantified formulas over symmetric relations, compiled to
quantum graphs.

Grammar (ASCII or Unicode connectives)::

    formula  := FORALL var ("," var)* ":" iff
    iff      := implies ("<=>" implies)*
    implies  := or ("=>" implies)?          right-associative
    or       := and ("or" and)*
    and      := unary ("and" unary)*
    unary    := "not" unary | "(" iff ")" | atom
    atom     := NAME "(" var ("," var)* ")"

The matrix is arithmetized with ``not p = 1 - p``, ``p and q = pq``,
``p or q = p + q - pq``, ``p => q = 1 - p + pq`` and ``p <=> q`` as the
product of both implications, then reduced with ``a^2 = a`` (atoms are 0/1 on
possible worlds). Each monomial becomes one constituent hypergraph whose
vertices are the variables it mentions.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .density import quantum_density
from .errors import (
    ArityError,
    EmptySolutionSet,
    FormulaSyntaxError,
    RepeatedVariableInAtom,
    UnknownRelation,
    UnquantifiedVariable,
    ValidationError,
)
from .graphs import Hypergraph, QuantumGraph, Signature
from .stepfn import StepFunction


@dataclass(frozen=True)
class Vocabulary:
    """Relation names in signature order."""

    names: tuple[str, ...]
    sig: Signature

    def __post_init__(self):
        if len(self.names) != self.sig.r or len(set(self.names)) != len(self.names):
            raise ValidationError("one distinct name per relation is required")

    @classmethod
    def of(cls, arities: Mapping[str, int]) -> "Vocabulary":
        return cls(tuple(arities), Signature(tuple(arities.values())))

    def lookup(self, name: str) -> int:
        return self.names.index(name)


# -- syntax tree ----------------------------------------------------------------

@dataclass(frozen=True)
class Atom:
    rel: int
    args: tuple[str, ...]
    pos: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Not:
    arg: "Node"


@dataclass(frozen=True)
class Binary:
    op: str  # "and", "or", "=>", "<=>"
    left: "Node"
    right: "Node"


Node = Atom | Not | Binary


@dataclass(frozen=True)
class Formula:
    variables: tuple[str, ...]
    matrix: Node
    vocab: Vocabulary
    text: str = ""

    @property
    def sig(self) -> Signature:
        return self.vocab.sig


# -- tokenizer and parser --------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<iff><=>|⇔|<->)|(?P<imp>=>|⇒|->)|(?P<punct>[(),:])"
    r"|(?P<sym>[¬~!∧&∨|∀])|(?P<name>[A-Za-z_][A-Za-z0-9_]*))"
)
_SYMBOLS = {"¬": "not", "~": "not", "!": "not", "∧": "and", "&": "and", "∨": "or", "|": "or", "∀": "forall"}
_KEYWORDS = {"not", "and", "or", "forall"}


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens, pos = [], 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos == len(text):
            break
        mt = _TOKEN.match(text, pos)
        if mt is None or mt.end() == pos:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", pos)
        start = mt.start(mt.lastgroup)
        kind, value = mt.lastgroup, mt.group(mt.lastgroup)
        if kind == "iff":
            tokens.append(("<=>", value, start))
        elif kind == "imp":
            tokens.append(("=>", value, start))
        elif kind == "punct":
            tokens.append((value, value, start))
        elif kind == "sym":
            tokens.append((_SYMBOLS[value], value, start))
        elif value.lower() in _KEYWORDS:
            tokens.append((value.lower(), value, start))
        else:
            tokens.append(("name", value, start))
        pos = mt.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, vocab: Vocabulary):
        self.tokens = _tokenize(text)
        self.i = 0
        self.vocab = vocab
        self.bound: tuple[str, ...] = ()

    def peek(self) -> str:
        return self.tokens[self.i][0]

    def take(self, kind: str):
        tok = self.tokens[self.i]
        if tok[0] != kind:
            found = tok[1] or "end of input"
            raise FormulaSyntaxError(f"expected {kind!r}, found {found!r}", tok[2])
        self.i += 1
        return tok

    def formula(self) -> tuple[tuple[str, ...], Node]:
        self.take("forall")
        names = [self.take("name")]
        while self.peek() == ",":
            self.take(",")
            names.append(self.take("name"))
        self.take(":")
        seen = set()
        for _, v, pos in names:
            if v in seen:
                raise FormulaSyntaxError(f"variable {v!r} quantified twice", pos)
            seen.add(v)
        self.bound = tuple(v for _, v, _ in names)
        node = self.iff()
        self.take("end")
        return self.bound, node

    def iff(self) -> Node:
        node = self.implies()
        while self.peek() == "<=>":
            self.take("<=>")
            node = Binary("<=>", node, self.implies())
        return node

    def implies(self) -> Node:
        node = self.disjunction()
        if self.peek() == "=>":
            self.take("=>")
            return Binary("=>", node, self.implies())
        return node

    def disjunction(self) -> Node:
        node = self.conjunction()
        while self.peek() == "or":
            self.take("or")
            node = Binary("or", node, self.conjunction())
        return node

    def conjunction(self) -> Node:
        node = self.unary()
        while self.peek() == "and":
            self.take("and")
            node = Binary("and", node, self.unary())
        return node

    def unary(self) -> Node:
        kind = self.peek()
        if kind == "not":
            self.take("not")
            return Not(self.unary())
        if kind == "(":
            self.take("(")
            node = self.iff()
            self.take(")")
            return node
        return self.atom()

    def atom(self) -> Atom:
        _, name, pos = self.take("name")
        if name not in self.vocab.names:
            raise UnknownRelation(f"unknown relation {name!r}", pos)
        rel = self.vocab.lookup(name)
        self.take("(")
        args = [self.take("name")]
        while self.peek() == ",":
            self.take(",")
            args.append(self.take("name"))
        self.take(")")
        arity = self.vocab.sig.arities[rel]
        if len(args) != arity:
            raise ArityError(f"{name} has arity {arity}, got {len(args)} arguments", pos)
        for _, v, vpos in args:
            if v not in self.bound:
                raise UnquantifiedVariable(f"variable {v!r} is not quantified", vpos)
        names = [v for _, v, _ in args]
        if len(set(names)) != len(names):
            raise RepeatedVariableInAtom(f"{name}({', '.join(names)}) repeats a variable", pos)
        return Atom(rel, tuple(names), pos)


def parse(text: str, vocab: Vocabulary | Mapping[str, int]) -> Formula:
    if not isinstance(vocab, Vocabulary):
        vocab = Vocabulary.of(vocab)
    variables, matrix = _Parser(text, vocab).formula()
    return Formula(variables, matrix, vocab, text)


# -- arithmetization -----------------------------------------------------------------

# an atom is (relation, sorted variable indices); a monomial is a set of atoms
Monomial = frozenset


@dataclass(frozen=True)
class MultilinearPoly:
    """Polynomial in 0/1 atoms with every atom of degree at most one."""

    terms: Mapping[Monomial, float]

    @classmethod
    def constant(cls, c: float) -> "MultilinearPoly":
        return cls({frozenset(): float(c)} if c else {})

    @classmethod
    def atom(cls, rel: int, args: tuple[int, ...]) -> "MultilinearPoly":
        return cls({frozenset({(rel, tuple(sorted(args)))}): 1.0})

    def __add__(self, other: "MultilinearPoly") -> "MultilinearPoly":
        out = dict(self.terms)
        for mono, c in other.terms.items():
            out[mono] = out.get(mono, 0.0) + c
        return MultilinearPoly({k: v for k, v in out.items() if v != 0.0})

    def __mul__(self, other):
        if not isinstance(other, MultilinearPoly):
            return MultilinearPoly({k: v * other for k, v in self.terms.items() if v * other != 0.0})
        out: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                mono = m1 | m2  # idempotence: a * a = a
                out[mono] = out.get(mono, 0.0) + c1 * c2
        return MultilinearPoly({k: v for k, v in out.items() if v != 0.0})

    __rmul__ = __mul__

    def __sub__(self, other: "MultilinearPoly") -> "MultilinearPoly":
        return self + other * -1.0

    def sorted_terms(self) -> list[tuple[Monomial, float]]:
        return sorted(self.terms.items(), key=lambda kv: (len(kv[0]), sorted(kv[0])))


def arithmetize(f: Formula) -> MultilinearPoly:
    index = {v: i for i, v in enumerate(f.variables)}
    one = MultilinearPoly.constant(1.0)

    def go(node: Node) -> MultilinearPoly:
        if isinstance(node, Atom):
            return MultilinearPoly.atom(node.rel, tuple(index[v] for v in node.args))
        if isinstance(node, Not):
            return one - go(node.arg)
        p, q = go(node.left), go(node.right)
        if node.op == "and":
            return p * q
        if node.op == "or":
            return p + q - p * q
        if node.op == "=>":
            return one - p + p * q
        return (one - p + p * q) * (one - q + q * p)

    return go(f.matrix)


def monomial_graph(mono: Monomial, sig: Signature) -> Hypergraph:
    """Constituent of one monomial: its variables, relabeled 0..k-1 in
    quantifier order, with one hyperedge per atom."""
    used = sorted({v for _, args in mono for v in args})
    relabel = {v: i for i, v in enumerate(used)}
    edges = [[] for _ in sig.arities]
    for rel, args in mono:
        edges[rel].append(tuple(relabel[v] for v in args))
    return Hypergraph.from_edges(sig, len(used), edges)


def compile_formula(f: Formula, merge: bool = True) -> QuantumGraph:
    """Quantum graph whose density is the probability of ``f``.

    Isomorphic constituents are merged unless ``merge`` is false.
    """
    poly = arithmetize(f)
    terms = [(c, monomial_graph(mono, f.sig)) for mono, c in poly.sorted_terms()]
    if not terms:
        return QuantumGraph(((0.0, Hypergraph.empty(f.sig)),))
    Q = QuantumGraph(tuple(terms))
    return Q.merge_isomorphic() if merge else Q


compile = compile_formula  # noqa: A001  (public name of the operation)


def query_probability(f: Formula, solutions: Sequence[StepFunction]) -> float:
    """Mean compiled density of ``f`` over a set of solutions."""
    if not solutions:
        raise EmptySolutionSet("query_probability needs at least one solution")
    Q = compile_formula(f)
    return float(np.mean([quantum_density(Q, W) for W in solutions]))
