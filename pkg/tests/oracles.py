"""Reference computations written without the package's algorithms.

Everything here is loops over explicit index tuples; nothing calls the
einsum contractions, the labeled-derivative machinery or the optimizer.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

RHO, TAU = 0.3, 0.02


def h_half(x):
    x = np.asarray(x, float)
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(x > 0, x * np.log(2 * np.where(x > 0, x, 1)), 0.0)
        b = np.where(x < 1, (1 - x) * np.log(2 * np.where(x < 1, 1 - x, 1)), 0.0)
    return a + b


def density(F, arrays, pi):
    """``t(F, W)`` by summing over every map of V(F) into the blocks."""
    total = 0.0
    for phi in itertools.product(range(len(pi)), repeat=F.n):
        term = math.prod(pi[i] for i in phi)
        for a, rel in zip(arrays, F.edges):
            for e in rel:
                term *= a[tuple(phi[v] for v in e)]
        total += term
    return total


def quantum_density(Q, arrays, pi):
    return sum(c * density(g, arrays, pi) for c, g in Q.terms)


def _orbit(idx):
    return set(itertools.permutations(idx))


def free_gradient(fun, arrays, pi, h=1e-5):
    """Central differences of ``fun(arrays, pi)`` in the free coordinates:
    sorted multi-indices of every array (all orbit entries moved together),
    then ``pi_1 .. pi_{m-1}`` with the last weight absorbing the change."""
    m = len(pi)
    out = []
    for k, a in enumerate(arrays):
        for idx in itertools.combinations_with_replacement(range(m), a.ndim):
            vals = []
            for sgn in (1, -1):
                b = [x.copy() for x in arrays]
                for o in _orbit(idx):
                    b[k][o] += sgn * h
                vals.append(fun(b, pi))
            out.append((vals[0] - vals[1]) / (2 * h))
    for i in range(m - 1):
        vals = []
        for sgn in (1, -1):
            p = np.array(pi, float)
            p[i] += sgn * h
            p[-1] -= sgn * h
            vals.append(fun(arrays, p))
        out.append((vals[0] - vals[1]) / (2 * h))
    return np.array(out)


def objective(arrays, pi, weights=None):
    """Rate function ``sum_k w_k * integral h_{1/2}(W_k)``."""
    total = 0.0
    for k, a in enumerate(arrays):
        w = 1 / math.factorial(a.ndim) if weights is None else weights[k]
        for idx in itertools.product(range(len(pi)), repeat=a.ndim):
            total += w * float(h_half(a[idx])) * math.prod(pi[i] for i in idx)
    return total


# -- the bipodal edge-triangle optimum ------------------------------------------------

def bipodal_triangle(z, rho=RHO):
    return (rho - z) * ((rho - z) ** 2 + 3 * (rho + z) ** 2) / 4


def bipodal_z(rho=RHO, tau=TAU, iters=200):
    """Bisection on ``z in (0, rho)``; the triangle density falls from rho^3 to 0."""
    lo, hi = 0.0, rho
    for _ in range(iters):
        mid = (lo + hi) / 2
        if bipodal_triangle(mid, rho) > tau:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def bipodal_arrays(z, rho=RHO):
    return np.array([[rho - z, rho + z], [rho + z, rho - z]])


def bipodal_rate(z, rho=RHO):
    return 0.5 * (0.5 * h_half(rho - z) + 0.5 * h_half(rho + z))


# -- cut norm -----------------------------------------------------------------------

def cut_norm_2d(B):
    """``max |sum_{S x T} B|`` over all pairs of row and column subsets."""
    m = B.shape[0]
    best = 0.0
    for s in range(1 << m):
        rows = [i for i in range(m) if s >> i & 1]
        for t in range(1 << m):
            cols = [j for j in range(m) if t >> j & 1]
            best = max(best, abs(B[np.ix_(rows, cols)].sum()) if rows and cols else 0.0)
    return best


# -- logic --------------------------------------------------------------------------

def truth_fraction(predicate, n_vars, arrays, pi):
    """Probability that ``predicate(world, phi)`` holds when the variables go
    to blocks independently with weights ``pi``; ``world`` is the tuple of
    0/1 arrays, so atoms read ``world[k][phi[x], phi[y]]``."""
    total = 0.0
    for phi in itertools.product(range(len(pi)), repeat=n_vars):
        if predicate(arrays, phi):
            total += math.prod(pi[i] for i in phi)
    return total


def u4_integrand(friends, smokes, pi):
    """``sum_ij pi_i pi_j [1 - F_ij (S_i + S_j - 2 S_i S_j)]``."""
    total = 0.0
    for i, j in itertools.product(range(len(pi)), repeat=2):
        s_i, s_j = smokes[i], smokes[j]
        total += pi[i] * pi[j] * (1 - friends[i, j] * (s_i + s_j - 2 * s_i * s_j))
    return total


def smokers_triangle_query(friends, smokes, pi):
    """Probability of: if x, y, z are pairwise friends then all of them smoke."""
    total = 0.0
    for i, j, k in itertools.product(range(len(pi)), repeat=3):
        tri = friends[i, j] * friends[j, k] * friends[i, k]
        total += pi[i] * pi[j] * pi[k] * (1 - tri + tri * smokes[i] * smokes[j] * smokes[k])
    return total


# -- finite graphs ----------------------------------------------------------------------

def hom_fraction(F, G):
    """Fraction of all maps V(F) -> V(G) sending every edge to an edge."""
    hits = 0
    edge_sets = [set(map(frozenset, rel)) for rel in G.edges]
    for phi in itertools.product(range(G.n), repeat=F.n):
        ok = True
        for rel, edges in zip(F.edges, edge_sets):
            for e in rel:
                img = frozenset(phi[v] for v in e)
                if len(img) < len(e) or img not in edges:
                    ok = False
                    break
            if not ok:
                break
        hits += ok
    return hits / G.n**F.n
