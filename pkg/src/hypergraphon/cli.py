"""Command line: ``hypergraphon <command> [options]``.

Every command writes its result file(s) and a ``manifest.json`` into
``--out-dir``. Exit codes: 0 success, 1 usage or I/O error, 2 infeasible,
3 non-convergent, 4 validation error; failures print a JSON object on stderr.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from . import io
from .density import density, gradient_check
from .errors import HypergraphonError, NonConvergent
from .logic import Vocabulary, compile_formula, parse, query_probability
from .sampler import SampleConfig, convergence_report, empirical_density, sample_w_random
from .solver import escalate, find_m0, fit_multipliers, solve
from .stepfn import cut_distance_aligned


class UsageError(HypergraphonError):
    exit_code = 1


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _relations(text: str) -> Vocabulary:
    """``Friends=2,Sm=1`` -> vocabulary in the given order."""
    pairs = {}
    for item in text.split(","):
        name, _, arity = item.partition("=")
        if not name.strip() or not arity.strip().isdigit():
            raise UsageError(f"bad relation spec {item!r}; expected NAME=ARITY")
        pairs[name.strip()] = int(arity)
    return Vocabulary.of(pairs)


class _Run:
    """Collects inputs and outputs of one command for the manifest."""

    def __init__(self, args):
        self.args = args
        self.out_dir = Path(args.out_dir)
        self.inputs: dict[str, str] = {}
        self.outputs: list[str] = []
        self.started = datetime.now(timezone.utc).isoformat()

    def load(self, path: str):
        data = io.read_json(path)
        self.inputs[str(path)] = hashlib.sha256(Path(path).read_bytes()).hexdigest()
        return data

    def write(self, name: str, obj) -> Path:
        path = io.write_json(self.out_dir / name, obj)
        self.outputs.append(str(path))
        return path

    def manifest(self, argv, extra=None):
        body = {
            "command": self.args.command,
            "argv": list(argv),
            "seed": self.args.seed,
            "threads": self.args.threads,
            "version": __version__,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "started": self.started,
            "finished": datetime.now(timezone.utc).isoformat(),
        }
        if extra:
            body.update(extra)
        io.write_json(self.out_dir / "manifest.json", body)


def _solver_config(run: _Run, args):
    cfg, obj = io.solver_config_from_json(run.load(args.config) if args.config else None)
    changes = {"seed": args.seed, "threads": args.threads}
    if getattr(args, "m", None) is not None:
        changes["m"] = args.m
    if getattr(args, "restarts", None) is not None:
        changes["restarts"] = args.restarts
    return cfg.replace(**changes), obj


def cmd_solve(run: _Run, args):
    cs = io.constraints_from_json(run.load(args.constraints))
    cfg, obj = _solver_config(run, args)
    try:
        rep = solve(cs, cfg, obj)
    except NonConvergent as exc:
        if exc.report is not None:
            run.write("report.json", io.report_to_json(exc.report))
        raise
    run.write("report.json", io.report_to_json(rep))
    best = rep.best
    return {"objective": best.objective, "kkt_residual": best.kkt_residual, "solutions": len(rep.solutions)}


def cmd_escalate(run: _Run, args):
    cs = io.constraints_from_json(run.load(args.constraints))
    cfg, obj = _solver_config(run, args)
    rep = escalate(cs, cfg, obj, args.m_from, args.m_to, args.objective_tol, args.l1_tol)
    run.write("escalation.json", io.escalation_to_json(rep))
    return {"pod_holds": rep.pod_holds, "objectives": [lv.best_objective for lv in rep.levels]}


def cmd_eval(run: _Run, args):
    W = io.stepfn_from_json(run.load(args.stepfn))
    F = io.graph_from_json(run.load(args.graph), W.sig)
    value = density(F, W)
    run.write("density.json", {"density": value})
    return {"density": value}


def cmd_grad_check(run: _Run, args):
    W = io.stepfn_from_json(run.load(args.stepfn))
    errors = [gradient_check(io.graph_from_json(run.load(g), W.sig), W, args.h) for g in args.graphs]
    out = {"max_relative_error": max(errors), "per_graph": errors, "h": args.h}
    run.write("grad_check.json", out)
    return {"max_relative_error": max(errors)}


def cmd_sample(run: _Run, args):
    W = io.stepfn_from_json(run.load(args.stepfn))
    G = sample_w_random(W, SampleConfig(args.n, args.seed))
    run.write("graph.json", io.hypergraph_to_json(G))
    out = {"n": G.n, "edges": [len(rel) for rel in G.edges]}
    if args.graphs:
        out["densities"] = [
            empirical_density(io.graph_from_json(run.load(g), W.sig), G, seed=args.seed).value for g in args.graphs
        ]
    return out


def cmd_convergence(run: _Run, args):
    W = io.stepfn_from_json(run.load(args.stepfn))
    graphs = [io.graph_from_json(run.load(g), W.sig) for g in args.graphs]
    rows = convergence_report(W, graphs, args.n_list, SampleConfig(max(args.n_list), args.seed, args.trials))
    table = {"columns": list(rows[0].as_dict()), "rows": [r.as_dict() for r in rows]}
    run.write("table.json", table)
    return {"rows": len(rows), "max_abs_z": max(abs(r.z_gap) for r in rows)}


def cmd_cut_distance(run: _Run, args):
    W = io.stepfn_from_json(run.load(args.a))
    V = io.stepfn_from_json(run.load(args.b))
    res = cut_distance_aligned(W, V, refine=not args.no_refine)
    out = {
        "value": res.value,
        "perm": [int(p) for p in res.perm],
        "subsets": [[[int(i) for i in s] for s in sets] for sets in res.subsets],
        "per_relation": [float(v) for v in res.per_relation],
        "bound": "minimum over pi-preserving block permutations (an upper bound on the cut distance)",
    }
    run.write("cut_distance.json", out)
    return {"value": res.value}


def cmd_compile(run: _Run, args):
    Q = compile_formula(parse(args.formula, _relations(args.relations)))
    run.write("quantum.json", io.quantum_to_json(Q))
    return {"terms": len(Q.terms)}


def cmd_query(run: _Run, args):
    f = parse(args.formula, _relations(args.relations))
    solutions = [W for path in args.solutions for W in io.solutions_from_json(run.load(path))]
    p = query_probability(f, solutions)
    run.write("query.json", {"probability": p, "solutions": len(solutions)})
    return {"probability": p}


def cmd_fit_beta(run: _Run, args):
    W = io.stepfn_from_json(run.load(args.stepfn))
    cs = io.constraints_from_json(run.load(args.constraints))
    _, obj = io.solver_config_from_json(run.load(args.config) if args.config else None)
    beta, residual = fit_multipliers(W, cs, obj)
    run.write("beta.json", {"beta": [float(b) for b in beta], "residual": residual})
    return {"beta": [float(b) for b in beta], "residual": residual}


def cmd_m0(run: _Run, args):
    cs = io.constraints_from_json(run.load(args.constraints))
    m0 = find_m0(cs, args.m_max, args.restarts, args.seed)
    run.write("m0.json", {"m0": m0})
    return {"m0": m0}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--out-dir", default=".")

    parser = _Parser(prog="hypergraphon", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.set_defaults(func=func)
        return p

    p = add("solve", cmd_solve, "minimize f_s under density constraints")
    p.add_argument("constraints")
    p.add_argument("--config")
    p.add_argument("--m", type=int)
    p.add_argument("--restarts", type=int)

    p = add("escalate", cmd_escalate, "solve at increasing m with split seeding")
    p.add_argument("constraints")
    p.add_argument("--config")
    p.add_argument("--m-from", type=int, required=True)
    p.add_argument("--m-to", type=int, required=True)
    p.add_argument("--restarts", type=int)
    p.add_argument("--objective-tol", type=float, default=1e-6)
    p.add_argument("--l1-tol", type=float, default=1e-4)

    p = add("eval", cmd_eval, "density of a graph or quantum graph in a step function")
    p.add_argument("graph")
    p.add_argument("stepfn")

    p = add("grad-check", cmd_grad_check, "analytic gradients against central differences")
    p.add_argument("stepfn")
    p.add_argument("graphs", nargs="+")
    p.add_argument("--h", type=float, default=1e-5)

    p = add("sample", cmd_sample, "draw a W-random hypergraph")
    p.add_argument("stepfn")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--graphs", nargs="*", default=[], help="also report empirical densities")

    p = add("convergence", cmd_convergence, "empirical densities of samples against t(F, W)")
    p.add_argument("stepfn")
    p.add_argument("graphs", nargs="+")
    p.add_argument("--n-list", type=int, nargs="+", required=True)
    p.add_argument("--trials", type=int, default=20)

    p = add("cut-distance", cmd_cut_distance, "block-aligned cut distance of two step functions")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--no-refine", action="store_true", help="require permutable partitions")

    p = add("compile", cmd_compile, "compile a formula to a quantum graph")
    p.add_argument("formula")
    p.add_argument("--relations", required=True, help="e.g. Friends=2,Sm=1")

    p = add("query", cmd_query, "probability of a formula over solutions")
    p.add_argument("formula")
    p.add_argument("solutions", nargs="+", help="reports or step-function files")
    p.add_argument("--relations", required=True)

    p = add("fit-beta", cmd_fit_beta, "least-squares Lagrange multipliers at a step function")
    p.add_argument("stepfn")
    p.add_argument("constraints")
    p.add_argument("--config")

    p = add("m0", cmd_m0, "smallest feasible block count")
    p.add_argument("constraints")
    p.add_argument("--m-max", type=int, default=6)
    p.add_argument("--restarts", type=int, default=16)
    return parser


def run(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    job = None
    try:
        args = build_parser().parse_args(argv)
        job = _Run(args)
        summary = args.func(job, args)
        job.manifest(argv, {"summary": summary})
        print(json.dumps(summary, sort_keys=True))
        return 0
    except (HypergraphonError, np.linalg.LinAlgError) as exc:
        code = getattr(exc, "exit_code", 1)
        err = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
        print(json.dumps(err), file=sys.stderr)
        if job is not None:
            try:
                job.manifest(argv, {"error": err})
            except OSError:
                pass
        return code


def main():  # console script entry point
    sys.exit(run())


if __name__ == "__main__":
    main()
