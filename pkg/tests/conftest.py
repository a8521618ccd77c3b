import time

import numpy as np
import pytest

from hypergraphon import ConstraintSet, Signature, SolverConfig, edge, solve, triangle
from hypergraphon.graphs import Hypergraph
from hypergraphon.logic import Vocabulary, compile_formula, parse

from oracles import RHO, TAU

SMOKERS = Vocabulary.of({"Friends": 2, "Sm": 1})
SMOKER_AXIOMS = (
    "forall x : Sm(x)",
    "forall x, y : Friends(x, y)",
    "forall x, y, z : Friends(x, y) and Friends(y, z) and Friends(z, x)",
    "forall x, y : Friends(x, y) => (Sm(x) <=> Sm(y))",
)
SMOKER_TARGETS = (0.4, 0.3, 0.02, 0.8)


def _cherry_instance():
    sig = Signature((3,))
    single = Hypergraph.from_edges(sig, 3, [[(0, 1, 2)]])
    pair = Hypergraph.from_edges(sig, 4, [[(0, 1, 2), (0, 1, 3)]])
    return ConstraintSet.of([(single, 0.4), (pair, 0.18)])


def fixture_instances():
    """Name -> (constraints, solver config). Every target vector lies
    strictly inside the attainable region."""
    smokers = [compile_formula(parse(f, SMOKERS)) for f in SMOKER_AXIOMS]
    return {
        "edge": (ConstraintSet.of([(edge(), RHO)]), SolverConfig(m=2, restarts=4)),
        "edge_triangle": (ConstraintSet.of([(edge(), RHO), (triangle(), TAU)]), SolverConfig(m=2, restarts=32)),
        "friends_smokers": (ConstraintSet.of(list(zip(smokers, SMOKER_TARGETS))), SolverConfig(m=2, restarts=6)),
        "three_uniform": (_cherry_instance(), SolverConfig(m=2, restarts=6)),
    }


class Solved:
    def __init__(self, cs, cfg):
        start = time.perf_counter()
        self.cs = cs
        self.cfg = cfg
        self.report = solve(cs, cfg)
        self.seconds = time.perf_counter() - start


@pytest.fixture(scope="session")
def solved():
    """All fixture instances, solved once per session."""
    return {name: Solved(cs, cfg) for name, (cs, cfg) in fixture_instances().items()}


@pytest.fixture(scope="session")
def edge_triangle(solved):
    return solved["edge_triangle"]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# -- acceptance summary ----------------------------------------------------------

_ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def acceptance():
    """``acceptance(n, ok, detail)`` records the verdict for criterion n."""

    def record(n: int, ok: bool, detail: str):
        _ACCEPTANCE[n] = (bool(ok), detail)
        print(f"\nACCEPTANCE {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        ok, detail = _ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
