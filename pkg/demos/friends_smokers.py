"""Friends and smokers: four axioms with target probabilities, then a query.

Each axiom is compiled to a quantum graph, the maximum-entropy model on two
blocks is solved, and the probability that every friendship triangle is a
smoking triangle is read off the solutions.
"""

import numpy as np

from hypergraphon import ConstraintSet, SolverConfig, compile_formula, parse, query_probability, solve

VOCAB = {"Friends": 2, "Sm": 1}
AXIOMS = {
    "forall x : Sm(x)": 0.4,
    "forall x, y : Friends(x, y)": 0.3,
    "forall x, y, z : Friends(x, y) and Friends(y, z) and Friends(x, z)": 0.02,
    "forall x, y : Friends(x, y) => (Sm(x) <=> Sm(y))": 0.8,
}
QUERY = "forall x, y, z : Friends(x, y) and Friends(y, z) and Friends(x, z) => Sm(x) and Sm(y) and Sm(z)"


def main():
    pairs = []
    for text, u in AXIOMS.items():
        Q = compile_formula(parse(text, VOCAB))
        print(f"{u:4}  {text}\n      -> {len(Q.terms)} term(s): {[c for c, _ in Q.terms]}")
        pairs.append((Q, u))
    report = solve(ConstraintSet.of(pairs), SolverConfig(m=2, restarts=6))
    best = report.best
    friends, smokes = best.W.arrays
    print(f"\n{len(report.solutions)} solution(s); best f_s = {best.objective:.10f}")
    print("pi      =", np.round(best.W.pi, 6))
    print("Friends =\n", np.round(friends, 6))
    print("Sm      =", np.round(smokes, 6))
    print(f"\nP[every friendship triangle smokes] = {query_probability(parse(QUERY, VOCAB), [s.W for s in report.solutions]):.6f}")


if __name__ == "__main__":
    main()
