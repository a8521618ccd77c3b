"""Empirical densities of W-random graphs drawn from the edge-triangle optimum.

Homomorphism densities of a finite graph count maps that send two vertices
to the same point, and those never land on an edge. The expected edge and
triangle densities of an n-vertex sample are therefore slightly below
t(F, W); the last column shows the size of that shortfall.
"""

from hypergraphon import ConstraintSet, SampleConfig, SolverConfig, convergence_report, edge, solve, triangle


def main():
    cs = ConstraintSet.of([(edge(), 0.3), (triangle(), 0.02)])
    W = solve(cs, SolverConfig(m=2, restarts=8)).best.W
    graphs = [edge(), triangle()]
    shrink = [lambda n: (n - 1) / n, lambda n: (n - 1) * (n - 2) / n**2]
    rows = convergence_report(W, graphs, [50, 100, 200, 400], SampleConfig(400, seed=0, trials=20))
    print("    n  graph     mean     stderr    t(F,W)   z_gap   expected mean")
    for r in rows:
        expected = r.target * shrink[r.graph](r.n)
        name = ("edge", "triangle")[r.graph]
        print(f"{r.n:5d}  {name:8s} {r.mean:.5f}  {r.stderr:.5f}  {r.target:.5f}  {r.z_gap:6.2f}  {expected:.5f}")


if __name__ == "__main__":
    main()
