"""Edge density 0.3 and triangle density 0.02, solved on two blocks.

For these targets the optimum is a symmetric bipodal step function with
equal parts, diagonal 0.3 - z and off-diagonal 0.3 + z, with z fixed by
the triangle target. The script compares the solver output with it.
"""

import numpy as np
from scipy.optimize import brentq

from hypergraphon import ConstraintSet, density, ObjectiveConfig, SolverConfig, edge, objective_value, solve, triangle
from hypergraphon.stepfn import aligned_l1, make_step_function

RHO, TAU = 0.3, 0.02


def bipodal(z):
    a, b = RHO - z, RHO + z
    return make_step_function(edge().sig, [0.5, 0.5], [[[a, b], [b, a]]])


def main():
    cs = ConstraintSet.of([(edge(), RHO), (triangle(), TAU)])
    report = solve(cs, SolverConfig(m=2, restarts=32))
    best = report.best
    print(f"{report.n_converged}/{report.n_starts} starts converged, {len(report.solutions)} distinct solution(s)")
    print("pi   =", np.round(best.W.pi, 6))
    print("W    =\n", np.round(best.W.arrays[0], 6))
    print(f"f_s  = {best.objective:.12f}   beta = {np.round(best.beta, 6)}")

    z = brentq(lambda z: density(triangle(), bipodal(z)) - TAU, 0.0, RHO)
    exact = bipodal(z)
    print(f"closed form z = {z:.15f}, f_s = {objective_value(ObjectiveConfig(), exact):.12f}")
    print(f"block-aligned L1 gap to the closed form: {aligned_l1(best.W, exact):.2e}")


if __name__ == "__main__":
    main()
