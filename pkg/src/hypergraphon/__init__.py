"""Maximum-entropy multi-relational hypergraphons under density constraints.

The main entry points are :func:`solve` and :func:`escalate`; the other
modules provide the objects they work on (hypergraphs, quantum graphs, step
functions), densities and their gradients, sampling, and a small logic that
compiles formulas to quantum graphs.
"""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"

from .density import density, gradient, jacobian, partial_density
from .graphs import Hypergraph, LabeledHypergraph, QuantumGraph, Signature, edge, path, triangle
from .logic import compile_formula, parse, query_probability
from .objective import ObjectiveConfig, entropy, objective_gradient, objective_value, quadratic
from .sampler import SampleConfig, convergence_report, empirical_density, sample_w_random
from .solver import (
    ConstraintSet,
    SolverConfig,
    escalate,
    find_m0,
    fit_multipliers,
    interior_check,
    kkt_residual,
    solve,
)
from .stepfn import Mode, StepFunction, cut_distance_aligned, cut_norm, make_step_function, split

__all__ = [
    "ConstraintSet", "Hypergraph", "LabeledHypergraph", "Mode", "ObjectiveConfig", "QuantumGraph",
    "SampleConfig", "Signature", "SolverConfig", "StepFunction", "compile_formula", "convergence_report",
    "cut_distance_aligned", "cut_norm", "density", "edge", "empirical_density", "entropy", "escalate",
    "find_m0", "fit_multipliers", "gradient", "interior_check", "jacobian", "kkt_residual",
    "make_step_function", "objective_gradient", "objective_value", "parse", "partial_density", "path",
    "quadratic", "query_probability", "sample_w_random", "solve", "split", "triangle",
]
