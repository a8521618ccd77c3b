"""How far apart can t(F, W) and t(F, V) be, given the cut distance?

Two constant graphons 0.9 and 0.8 sit at cut distance 0.1, yet their
two-edge-path densities differ by 0.81 - 0.64 = 0.17. A bound of the form
|t(F,W) - t(F,V)| <= delta therefore needs a factor of |E(F)|; this script
prints both ratios on random pairs over a shared partition.
"""

import numpy as np

from hypergraphon import Signature, cut_distance_aligned, density, make_step_function, path
from hypergraphon.stepfn import symmetrize

SIG = Signature((2,))


def pair(rng):
    m = int(rng.integers(1, 7))
    pi = rng.dirichlet(np.ones(m))
    return [make_step_function(SIG, pi, [symmetrize(rng.random((m, m)))]) for _ in range(2)]


def main():
    W = make_step_function(SIG, [1.0], [[[0.9]]])
    V = make_step_function(SIG, [1.0], [[[0.8]]])
    F = path(3)
    print(f"constants: gap {abs(density(F, W) - density(F, V)):.4f}, delta {cut_distance_aligned(W, V).value:.4f}")

    rng = np.random.default_rng(7)
    plain, scaled = [], []
    for _ in range(50):
        W, V = pair(rng)
        F = path(int(rng.integers(2, 5)))
        delta = cut_distance_aligned(W, V).value
        gap = abs(density(F, W) - density(F, V))
        plain.append(gap / delta)
        scaled.append(gap / (F.n_edges * delta))
    print(f"50 random pairs: max gap/delta {max(plain):.3f}, max gap/(|E| delta) {max(scaled):.3f}")


if __name__ == "__main__":
    main()
