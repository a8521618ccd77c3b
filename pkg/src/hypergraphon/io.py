"""JSON forms of every object that crosses a file boundary.

Step-function arrays are stored flattened in row-major (lexicographic
multi-index) order. Graphs may carry their own ``"arities"``; otherwise the
caller supplies the signature.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

import numpy as np

from .errors import HypergraphonError, ValidationError
from .graphs import Hypergraph, QuantumGraph, Signature
from .logic import Vocabulary, compile_formula, parse
from .objective import ObjectiveConfig, entropy, quadratic, tabulated
from .solver import (
    ConstraintSet,
    EscalationReport,
    Solution,
    SolveReport,
    SolverConfig,
)
from .stepfn import Mode, StepFunction, make_step_function


class InputError(HypergraphonError):
    """Unreadable or malformed input file (exit code 1)."""


def _floats(a) -> list:
    return [float(x) for x in np.ravel(a)]


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def read_json(path: str | Path) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc


def write_json(path: str | Path, obj: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(obj), encoding="utf-8")
    return path


def _field(d: dict, key: str, what: str):
    if not isinstance(d, dict) or key not in d:
        raise ValidationError(f"{what} JSON needs a {key!r} field")
    return d[key]


# -- core objects ---------------------------------------------------------------

def signature_to_json(sig: Signature) -> dict:
    return {"arities": list(sig.arities)}


def signature_from_json(d: dict) -> Signature:
    return Signature(tuple(_field(d, "arities", "signature")))


def _sig_of(d: dict, sig: Signature | None, what: str) -> Signature:
    if isinstance(d, dict) and "arities" in d:
        own = Signature(tuple(d["arities"]))
        if sig is not None and own != sig:
            raise ValidationError(f"{what} arities {own.arities} differ from {sig.arities}")
        return own
    if sig is None:
        raise ValidationError(f"{what} JSON needs 'arities' when no signature is given")
    return sig


def hypergraph_to_json(G: Hypergraph, with_sig: bool = True) -> dict:
    out = {"n": G.n, "edges": [[list(e) for e in rel] for rel in G.edges]}
    if with_sig:
        out["arities"] = list(G.sig.arities)
    return out


def hypergraph_from_json(d: dict, sig: Signature | None = None) -> Hypergraph:
    sig = _sig_of(d, sig, "hypergraph")
    return Hypergraph.from_edges(sig, _field(d, "n", "hypergraph"), _field(d, "edges", "hypergraph"))


def quantum_to_json(Q: QuantumGraph) -> dict:
    return {
        "arities": list(Q.sig.arities),
        "terms": [{"coeff": c, "graph": hypergraph_to_json(g, False)} for c, g in Q.terms],
    }


def quantum_from_json(d: dict, sig: Signature | None = None) -> QuantumGraph:
    sig = _sig_of(d, sig, "quantum graph")
    terms = _field(d, "terms", "quantum graph")
    if not terms:
        raise ValidationError("a quantum graph needs at least one term")
    return QuantumGraph(tuple((float(t["coeff"]), hypergraph_from_json(t["graph"], sig)) for t in terms))


def graph_from_json(d: dict, sig: Signature | None = None) -> Hypergraph | QuantumGraph:
    """Either form; a dict with ``"terms"`` is a quantum graph."""
    return quantum_from_json(d, sig) if isinstance(d, dict) and "terms" in d else hypergraph_from_json(d, sig)


def graph_to_json(F: Hypergraph | QuantumGraph) -> dict:
    return quantum_to_json(F) if isinstance(F, QuantumGraph) else hypergraph_to_json(F)


def stepfn_to_json(W: StepFunction) -> dict:
    return {
        "arities": list(W.sig.arities),
        "pi": _floats(W.pi),
        "arrays": [_floats(a) for a in W.arrays],
        "mode": W.mode.value,
    }


def stepfn_from_json(d: dict) -> StepFunction:
    sig = signature_from_json(d)
    return make_step_function(
        sig, _field(d, "pi", "step function"), _field(d, "arrays", "step function"), d.get("mode", Mode.UNIT)
    )


# -- constraints and configuration ---------------------------------------------------

def constraints_from_json(d: dict) -> ConstraintSet:
    """``{"arities" | "relations", "constraints": [{graph|quantum|formula, target}]}``.

    ``"relations"`` maps relation names to arities (in signature order) and
    is required for formula constraints.
    """
    vocab = Vocabulary.of(d["relations"]) if "relations" in d else None
    sig = vocab.sig if vocab else (Signature(tuple(d["arities"])) if "arities" in d else None)
    pairs = []
    for i, c in enumerate(_field(d, "constraints", "constraint set")):
        if "target" not in c:
            raise ValidationError(f"constraint {i} has no target")
        if "formula" in c:
            if vocab is None:
                raise ValidationError("formula constraints need a 'relations' vocabulary")
            graph = compile_formula(parse(c["formula"], vocab))
        elif "quantum" in c:
            graph = quantum_from_json(c["quantum"], sig)
        elif "graph" in c:
            graph = graph_from_json(c["graph"], sig)
        else:
            raise ValidationError(f"constraint {i} needs 'graph', 'quantum' or 'formula'")
        pairs.append((graph, float(c["target"])))
    return ConstraintSet.of(pairs)


def constraints_to_json(cs: ConstraintSet) -> dict:
    return {
        "arities": list(cs.sig.arities),
        "constraints": [{"quantum": quantum_to_json(g), "target": u} for g, u in zip(cs.graphs, cs.targets)],
    }


def objective_from_json(d: dict | None) -> ObjectiveConfig:
    if not d:
        return ObjectiveConfig()
    name = d.get("name", "entropy")
    params = d.get("params", {})
    if name == "entropy":
        fn = entropy()
    elif name == "quadratic":
        fn = quadratic(**params)
    elif name == "tabulated":
        fn = tabulated(params["x"], params["y"])
    else:
        raise ValidationError(f"unknown objective {name!r}")
    weights = d.get("weights")
    return ObjectiveConfig(fn, None if weights is None else tuple(weights))


_CONFIG_FIELDS = set(SolverConfig.__dataclass_fields__)


def solver_config_from_json(d: dict | None) -> tuple[SolverConfig, ObjectiveConfig]:
    """Solver fields at top level plus an optional ``"objective"`` block."""
    d = dict(d or {})
    obj = objective_from_json(d.pop("objective", None))
    unknown = set(d) - _CONFIG_FIELDS
    if unknown:
        raise ValidationError(f"unknown solver config fields {sorted(unknown)}")
    if d.get("fixed_pi") is not None:
        d["fixed_pi"] = tuple(d["fixed_pi"])
    return SolverConfig(**d), obj


# -- reports ------------------------------------------------------------------------

def _num(x: float) -> float | None:
    x = float(x)
    return x if math.isfinite(x) else None


def solution_to_json(s: Solution) -> dict:
    return {
        "stepfn": stepfn_to_json(s.W),
        "objective": s.objective,
        "beta": _floats(s.beta),
        "beta_fit": _floats(s.beta_fit),
        "fit_residual": s.fit_residual,
        "kkt_residual": s.kkt_residual,
        "constraint_residual": s.constraint_residual,
        "jacobian_rank": s.jacobian_rank,
        "restart": s.restart,
        "iterations": s.iterations,
        "interior": s.interior,
        "min_entry_gap": s.min_entry_gap,
    }


def report_to_json(rep: SolveReport) -> dict:
    return {
        "m": rep.m,
        "seed": rep.seed,
        "converged": rep.converged,
        "best_index": 0,
        "n_starts": rep.n_starts,
        "n_feasible": rep.n_feasible,
        "n_converged": rep.n_converged,
        "iterations": list(rep.iterations),
        "config": rep.config,
        "objective": rep.objective,
        "warnings": list(rep.warnings),
        "solutions": [solution_to_json(s) for s in rep.solutions],
    }


def escalation_to_json(rep: EscalationReport) -> dict:
    return {
        "objective_tol": rep.objective_tol,
        "l1_tol": rep.l1_tol,
        "pod_holds": rep.pod_holds,
        "levels": [
            {
                "m": lv.m,
                "best_objective": lv.best_objective,
                "objective_change": None if lv.objective_change is None else _num(lv.objective_change),
                "l1_gap": None if lv.l1_gap is None else _num(lv.l1_gap),
                "pod_holds": lv.pod_holds,
                "report": report_to_json(lv.report),
            }
            for lv in rep.levels
        ],
    }


def solutions_from_json(d: dict) -> list[StepFunction]:
    """Step functions from a solve report, an escalation report, a list of
    step functions or a single one."""
    if isinstance(d, list):
        return [stepfn_from_json(x) for x in d]
    if "solutions" in d:
        return [stepfn_from_json(s["stepfn"]) for s in d["solutions"]]
    if "levels" in d:
        return [stepfn_from_json(s["stepfn"]) for s in d["levels"][-1]["report"]["solutions"]]
    return [stepfn_from_json(d)]

