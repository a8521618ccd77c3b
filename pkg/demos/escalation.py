"""Grow the block count from 2 to 4 and watch the optimum stay put.

Each level is seeded by splitting the previous optimum, so a level that
finds nothing better reports a zero objective change and an L1 gap near 0.
"""

from hypergraphon import ConstraintSet, ObjectiveConfig, SolverConfig, edge, escalate, triangle


def main():
    cs = ConstraintSet.of([(edge(), 0.3), (triangle(), 0.02)])
    rep = escalate(cs, SolverConfig(restarts=8), ObjectiveConfig(), 2, 4)
    print(" m  objective          change     L1 gap")
    for lv in rep.levels:
        change = "" if lv.objective_change is None else f"{lv.objective_change:.1e}"
        gap = "" if lv.l1_gap is None else f"{lv.l1_gap:.1e}"
        print(f"{lv.m:2d}  {lv.best_objective:.12f}  {change:>9}  {gap:>9}")
    print("optimum unchanged across levels:", rep.pod_holds)


if __name__ == "__main__":
    main()
