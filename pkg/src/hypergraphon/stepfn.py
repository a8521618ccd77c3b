"""Finitely parameterized hypergraphons (step functions).

An m-step function is a pair ``(A, pi)``: ``pi`` is a point of the
m-simplex giving the widths of the intervals ``S_1 .. S_m`` that partition
[0, 1], and ``A`` holds, for every relation ``k``, a fully symmetric array of
shape ``(m,) * d_k``. Relation ``k`` takes the value ``A[k][i_1, .., i_d]`` on
the box ``S_{i_1} x .. x S_{i_d}``.

Arrays are stored densely. The free coordinates used by the optimizer are the
entries at sorted multi-indices ``i_1 <= .. <= i_d`` (the *canonical*
coordinates) followed by ``pi_1 .. pi_{m-1}``.
"""

from __future__ import annotations

import enum
import functools
import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    BadBlockIndex,
    EmptyGraph,
    ExactBoundExceeded,
    PartitionsNotPermutable,
    RangeViolation,
    SimplexViolation,
    SymmetryViolation,
    ValidationError,
)
from .graphs import Hypergraph, Signature

SIMPLEX_TOL = 1e-12
SYMMETRY_TOL = 1e-9
EXACT_CUT_MAX_M = 10
ALIGN_MAX_M = 8
TWIN_TOL = 1e-7


class Mode(str, enum.Enum):
    """Admissible value range of the arrays."""

    REAL = "real"
    UNIT = "unit"  # entries in [0, 1]
    INTERIOR = "interior"  # entries in (0, 1)


# -- canonical multi-index bookkeeping --------------------------------------

@functools.lru_cache(maxsize=None)
def canonical_indices(m: int, d: int) -> np.ndarray:
    """Sorted multi-indices of an ``(m,)*d`` symmetric array, lexicographic."""
    idx = list(itertools.combinations_with_replacement(range(m), d))
    out = np.array(idx, dtype=np.intp).reshape(len(idx), d)
    out.setflags(write=False)
    return out


@functools.lru_cache(maxsize=None)
def canonical_map(m: int, d: int) -> np.ndarray:
    """For each flat (row-major) full index, the position of its canonical index."""
    pos = {tuple(t): i for i, t in enumerate(canonical_indices(m, d).tolist())}
    out = np.array(
        [pos[tuple(sorted(t))] for t in itertools.product(range(m), repeat=d)],
        dtype=np.intp,
    )
    out.setflags(write=False)
    return out


@functools.lru_cache(maxsize=None)
def orbit_sizes(m: int, d: int) -> np.ndarray:
    out = np.bincount(canonical_map(m, d), minlength=len(canonical_indices(m, d)))
    out.setflags(write=False)
    return out


def cell_weights(pi: np.ndarray, d: int) -> np.ndarray:
    """Outer product ``pi x .. x pi`` (d factors): the measure of each box."""
    w = np.ones(())
    for _ in range(d):
        w = np.multiply.outer(w, pi)
    return w


def symmetrize(a: np.ndarray) -> np.ndarray:
    d = a.ndim
    if d <= 1:
        return a.copy()
    perms = list(itertools.permutations(range(d)))
    return sum(np.transpose(a, p) for p in perms) / len(perms)


# -- the step function type -------------------------------------------------

@dataclass(frozen=True, eq=False)
class StepFunction:
    """An m-step function ``(A, pi)``. Build with :func:`make_step_function`.

    The constructor performs no validation; it is used directly only by code
    that already guarantees the invariants (splits, optimizer iterates).
    """

    sig: Signature
    pi: np.ndarray
    arrays: tuple
    mode: Mode = Mode.UNIT

    def __post_init__(self):
        self.pi.setflags(write=False)
        for a in self.arrays:
            a.setflags(write=False)

    @property
    def m(self) -> int:
        return len(self.pi)

    @property
    def n_params(self) -> int:
        """Free parameters with pi varying: n(m, r, d) + m - 1."""
        return self.sig.n_params(self.m) + self.m - 1

    def canonical(self, k: int) -> np.ndarray:
        """Canonical-coordinate view of relation ``k``."""
        idx = canonical_indices(self.m, self.sig.arities[k])
        return self.arrays[k][tuple(idx.T)]

    def free_vector(self) -> np.ndarray:
        parts = [self.canonical(k) for k in range(self.sig.r)]
        parts.append(self.pi[:-1])
        return np.concatenate(parts)

    def with_mode(self, mode: Mode) -> "StepFunction":
        return make_step_function(self.sig, self.pi, self.arrays, mode)

    def __repr__(self):
        arrs = ", ".join(np.array2string(a, precision=4) for a in self.arrays)
        return f"StepFunction(m={self.m}, pi={np.array2string(self.pi, precision=4)}, A=[{arrs}])"


def free_layout(sig: Signature, m: int) -> list[slice]:
    """Slices of the free vector: one per relation, then the reduced pi block."""
    out, start = [], 0
    for d in sig.arities:
        n = math.comb(m + d - 1, d)
        out.append(slice(start, start + n))
        start += n
    out.append(slice(start, start + m - 1))
    return out


def from_free_vector(sig: Signature, m: int, x: np.ndarray, mode: Mode = Mode.UNIT) -> StepFunction:
    """Inverse of :meth:`StepFunction.free_vector` (no validation)."""
    layout = free_layout(sig, m)
    arrays = []
    for k, d in enumerate(sig.arities):
        can = np.asarray(x[layout[k]], dtype=float)
        arrays.append(can[canonical_map(m, d)].reshape((m,) * d))
    pi_head = np.asarray(x[layout[-1]], dtype=float)
    pi = np.append(pi_head, 1.0 - pi_head.sum())
    return StepFunction(sig, pi, tuple(arrays), mode)


def _check_range(arrays, mode: Mode):
    for k, a in enumerate(arrays):
        if not np.all(np.isfinite(a)):
            raise RangeViolation(f"relation {k} has non-finite entries")
        if mode is Mode.UNIT and (a.min() < 0 or a.max() > 1):
            raise RangeViolation(f"relation {k} has entries outside [0, 1]")
        if mode is Mode.INTERIOR and (a.min() <= 0 or a.max() >= 1):
            raise RangeViolation(f"relation {k} has entries outside (0, 1)")


def make_step_function(sig: Signature, pi, arrays, mode: Mode | str = Mode.UNIT) -> StepFunction:
    """Validated constructor.

    Arrays are symmetrized by averaging over coordinate permutations; the
    input must already be symmetric to within ``1e-9``.
    """
    mode = Mode(mode)
    pi = np.array(pi, dtype=float).ravel()
    m = len(pi)
    if m < 1:
        raise ValidationError("a step function needs at least one block")
    if np.any(pi < 0) or abs(pi.sum() - 1.0) > SIMPLEX_TOL or not np.all(np.isfinite(pi)):
        raise SimplexViolation(f"pi must be a probability vector, got {pi}")
    arrays = list(arrays)
    if len(arrays) != sig.r:
        raise ValidationError(f"expected {sig.r} arrays, got {len(arrays)}")
    out = []
    for k, (d, a) in enumerate(zip(sig.arities, arrays)):
        a = np.array(a, dtype=float)
        if a.size == m**d and a.shape != (m,) * d:
            a = a.reshape((m,) * d)
        if a.shape != (m,) * d:
            raise ValidationError(f"relation {k}: expected shape {(m,) * d}, got {a.shape}")
        s = symmetrize(a)
        if np.max(np.abs(s - a), initial=0.0) > SYMMETRY_TOL:
            raise SymmetryViolation(f"relation {k} array is not symmetric")
        out.append(s)
    _check_range(out, mode)
    return StepFunction(sig, pi, tuple(out), mode)


def constant(sig: Signature, value, mode: Mode | str = Mode.UNIT) -> StepFunction:
    """The 1-step function equal to ``value`` (scalar or one per relation)."""
    values = np.broadcast_to(np.asarray(value, dtype=float), (sig.r,))
    arrays = [np.full((1,) * d, v) for d, v in zip(sig.arities, values)]
    return make_step_function(sig, [1.0], arrays, mode)


# -- evaluation and reparameterizations -------------------------------------

def cell_of(pi: np.ndarray, x) -> np.ndarray:
    """Block index of points in [0, 1] with right-closed cells, 0 -> first cell."""
    bounds = np.cumsum(pi)
    bounds[-1] = 1.0
    idx = np.searchsorted(bounds, np.asarray(x, dtype=float), side="left")
    return np.minimum(idx, len(pi) - 1)


def value_at(W: StepFunction, k: int, x) -> float:
    x = np.asarray(x, dtype=float).ravel()
    if len(x) != W.sig.arities[k]:
        raise ValidationError(f"relation {k} takes {W.sig.arities[k]} coordinates")
    return float(W.arrays[k][tuple(cell_of(W.pi, x))])


def reindex(W: StepFunction, block_map, new_pi) -> StepFunction:
    """Step function whose block ``j`` copies old block ``block_map[j]``.

    The caller is responsible for ``new_pi`` summing to one.
    """
    block_map = np.asarray(block_map, dtype=np.intp)
    arrays = []
    for a in W.arrays:
        b = a
        for axis in range(a.ndim):
            b = np.take(b, block_map, axis=axis)
        arrays.append(np.ascontiguousarray(b))
    return StepFunction(W.sig, np.asarray(new_pi, dtype=float), tuple(arrays), W.mode)


def split(W: StepFunction, lam: float, k: int) -> StepFunction:
    """Split block ``k`` into two adjacent blocks of widths ``lam*pi_k`` and
    ``(1-lam)*pi_k``. The step function is unchanged as a function."""
    if not 0 <= k < W.m:
        raise BadBlockIndex(f"block {k} not in [0, {W.m})")
    if not 0.0 <= lam <= 1.0:
        raise ValidationError(f"split weight must lie in [0, 1], got {lam}")
    block_map = list(range(k + 1)) + list(range(k, W.m))
    pi = np.concatenate([W.pi[:k], [lam * W.pi[k], (1.0 - lam) * W.pi[k]], W.pi[k + 1:]])
    return reindex(W, block_map, pi)


def permute_blocks(W: StepFunction, perm) -> StepFunction:
    """Reorder blocks: new block ``j`` is old block ``perm[j]``."""
    perm = np.asarray(perm, dtype=np.intp)
    return reindex(W, perm, W.pi[perm])


def drop_empty_blocks(W: StepFunction, tol: float = 0.0) -> StepFunction:
    """Remove blocks of weight ``<= tol`` and renormalize pi."""
    keep = np.flatnonzero(W.pi > tol)
    if len(keep) == W.m:
        return W
    pi = W.pi[keep] / W.pi[keep].sum()
    return reindex(W, keep, pi)


def merge_twin_blocks(W: StepFunction, tol: float = TWIN_TOL) -> StepFunction:
    """Merge blocks whose slices agree in every array to within ``tol``.

    Merged entries are pi-weighted averages, so the function moves by at most
    ``tol`` pointwise. Splits of one block become one block again.
    """
    groups: list[list[int]] = []
    for i in range(W.m):
        for g in groups:
            j = g[0]
            if all(np.max(np.abs(np.take(a, i, 0) - np.take(a, j, 0)), initial=0.0) <= tol for a in W.arrays):
                g.append(i)
                break
        else:
            groups.append([i])
    if len(groups) == W.m:
        return W
    pi = np.array([W.pi[g].sum() for g in groups])
    # average over each group along every axis
    arrays = []
    for a in W.arrays:
        b = a
        for axis in range(a.ndim):
            parts = []
            for g in groups:
                w = W.pi[g] / W.pi[g].sum() if W.pi[g].sum() > 0 else np.full(len(g), 1 / len(g))
                parts.append(np.tensordot(np.take(b, g, axis=axis), w, axes=([axis], [0])))
            b = np.stack(parts, axis=axis)
        arrays.append(b)
    return StepFunction(W.sig, pi, tuple(arrays), W.mode)


def reduced_form(W: StepFunction, tol: float = TWIN_TOL) -> StepFunction:
    """Drop empty blocks, then merge twins."""
    return merge_twin_blocks(drop_empty_blocks(W), tol)


def common_refinement(W: StepFunction, V: StepFunction, tol: float = 1e-12):
    """Express ``W`` and ``V`` on the overlay of their cell boundaries."""
    if W.sig != V.sig:
        raise ValidationError("step functions have different signatures")
    bw, bv = np.cumsum(W.pi), np.cumsum(V.pi)
    bounds = np.unique(np.concatenate([bw[:-1], bv[:-1]]))
    bounds = bounds[(bounds > tol) & (bounds < 1.0 - tol)]
    if len(bounds):
        keep = np.concatenate([[True], np.diff(bounds) > tol])
        bounds = bounds[keep]
    bounds = np.append(bounds, 1.0)
    lower = np.concatenate([[0.0], bounds[:-1]])
    pi = bounds - lower
    mids = 0.5 * (lower + bounds)
    Wr = reindex(W, cell_of(W.pi, mids), pi)
    Vr = reindex(V, cell_of(V.pi, mids), pi)
    return Wr, Vr


def subtract(W: StepFunction, V: StepFunction) -> StepFunction:
    """``W - V`` as a real-valued step function on the common refinement."""
    Wr, Vr = common_refinement(W, V)
    return StepFunction(W.sig, Wr.pi.copy(), tuple(a - b for a, b in zip(Wr.arrays, Vr.arrays)), Mode.REAL)


def l1_distance(W: StepFunction, V: StepFunction) -> float:
    """Sum over relations of the integral of ``|W_k - V_k|``."""
    D = subtract(W, V)
    return float(sum(np.sum(np.abs(a) * cell_weights(D.pi, a.ndim)) for a in D.arrays))


# -- cut norm ---------------------------------------------------------------

@dataclass(frozen=True)
class CutNormResult:
    values: tuple[float, ...]
    subsets: tuple  # per relation, one tuple of block indices per axis

    @property
    def total(self) -> float:
        return float(sum(self.values))


@functools.lru_cache(maxsize=None)
def _subset_masks(m: int) -> np.ndarray:
    masks = (np.arange(2**m)[:, None] >> np.arange(m)[None, :]) & 1
    out = masks.astype(float)
    out.setflags(write=False)
    return out


def _last_axis(v: np.ndarray):
    """Best last-axis selection for a vector of box sums along that axis."""
    pos, neg = v[v > 0].sum(), -v[v < 0].sum()
    if pos >= neg:
        return pos, np.flatnonzero(v > 0)
    return neg, np.flatnonzero(v < 0)


def _exact_box(B: np.ndarray):
    if B.ndim == 1:
        val, last = _last_axis(B)
        return float(val), (tuple(last.tolist()),)
    m = B.shape[0]
    masks = _subset_masks(m)
    if B.ndim == 2:
        V = masks @ B
        pos = np.clip(V, 0, None).sum(axis=1)
        neg = -np.clip(V, None, 0).sum(axis=1)
        best = np.maximum(pos, neg)
        i = int(np.argmax(best))
        val, last = _last_axis(V[i])
        return float(val), (tuple(np.flatnonzero(masks[i]).tolist()), tuple(last.tolist()))
    best_val, best_sets = -1.0, None
    for mask in masks:
        val, sets = _exact_box(np.tensordot(mask, B, axes=(0, 0)))
        if val > best_val:
            best_val, best_sets = val, (tuple(np.flatnonzero(mask).tolist()),) + sets
    return best_val, best_sets


def _contract_except(B: np.ndarray, masks, axis: int) -> np.ndarray:
    out = B
    # contract the highest axes first so lower axis numbers stay valid
    for a in sorted((a for a in range(B.ndim) if a != axis), reverse=True):
        out = np.tensordot(out, masks[a], axes=(a, 0))
    return out


def _heuristic_box(B: np.ndarray, restarts: int, rng: np.random.Generator):
    d, m = B.ndim, B.shape[0]
    if d == 1:
        val, last = _last_axis(B)
        return float(val), (tuple(last.tolist()),)
    best_val, best_sets = -1.0, None
    starts = []
    for sign in (1.0, -1.0):
        for i in range(m):
            starts.append((sign, [np.eye(m)[i]] + [None] * (d - 1)))
        for _ in range(restarts):
            starts.append((sign, [rng.integers(0, 2, m).astype(float) for _ in range(d)]))
    for sign, masks in starts:
        S = sign * B
        masks = [np.ones(m) if mk is None else mk for mk in masks]
        val = -np.inf
        for _ in range(100):
            prev = val
            for a in range(d):
                v = _contract_except(S, masks, a)
                masks[a] = (v > 0).astype(float)
                val = float(v @ masks[a])
            if val <= prev + 1e-15:
                break
        if val > best_val:
            best_val = val
            best_sets = tuple(tuple(np.flatnonzero(mk).tolist()) for mk in masks)
    return max(best_val, 0.0), best_sets


def cut_norm(
    W: StepFunction,
    method: str = "exact",
    restarts: int = 32,
    seed: int = 0,
    max_exact_m: int = EXACT_CUT_MAX_M,
) -> CutNormResult:
    """Per-relation cut norm ``sup_boxes |integral of W_k over the box|``.

    For a step function the supremum is attained on unions of cells, so the
    search runs over cell subsets. ``method="exact"`` enumerates subsets of
    all axes but the last (whose optimum is the positive or negative part);
    ``method="heuristic"`` runs alternating best-response ascent from random
    and singleton starts.
    """
    if method not in ("exact", "heuristic"):
        raise ValidationError(f"unknown cut norm method {method!r}")
    if method == "exact" and W.m > max_exact_m:
        raise ExactBoundExceeded(f"m={W.m} exceeds the exact cut norm bound {max_exact_m}")
    rng = np.random.default_rng(seed)
    values, subsets = [], []
    for a in W.arrays:
        B = a * cell_weights(W.pi, a.ndim)
        if method == "exact":
            val, sets = _exact_box(B)
        else:
            val, sets = _heuristic_box(B, restarts, rng)
        values.append(val)
        subsets.append(sets)
    return CutNormResult(tuple(values), tuple(subsets))


def _pi_preserving_perms(target: np.ndarray, source: np.ndarray, tol: float):
    """Permutations ``s`` with ``source[s] == target`` (within tol), deduplicated."""
    m = len(target)
    choices = [[j for j in range(m) if abs(source[j] - target[i]) <= tol] for i in range(m)]

    def rec(i, used, acc):
        if i == m:
            yield tuple(acc)
            return
        for j in choices[i]:
            if j not in used:
                used.add(j)
                acc.append(j)
                yield from rec(i + 1, used, acc)
                acc.pop()
                used.discard(j)

    yield from rec(0, set(), [])


@dataclass(frozen=True)
class CutDistanceResult:
    value: float
    perm: tuple[int, ...]  # block permutation applied to the second argument
    subsets: tuple
    per_relation: tuple[float, ...]


def cut_distance_aligned(
    W: StepFunction, V: StepFunction, refine: bool = True, max_m: int = ALIGN_MAX_M, tol: float = 1e-12
) -> CutDistanceResult:
    """Minimum over block permutations of ``||W - V^sigma||_cut``.

    Only permutations preserving the (shared) partition are considered, so
    the value is an upper bound on the cut distance. Both the direct pairing
    (when the two partitions are permutations of each other) and the pairing
    on the common refinement are tried.
    """
    if W.sig != V.sig:
        raise ValidationError("step functions have different signatures")
    routes = []
    if W.m == V.m and np.allclose(np.sort(W.pi), np.sort(V.pi), atol=tol, rtol=0):
        routes.append((W, V))
    elif not refine:
        raise PartitionsNotPermutable("partitions are not permutations of each other")
    if refine:
        routes.append(common_refinement(W, V))
    best = None
    for A, B in routes:
        if A.m > max_m:
            raise ExactBoundExceeded(f"m={A.m} exceeds the alignment bound {max_m}")
        seen = set()
        for perm in _pi_preserving_perms(A.pi, B.pi, tol):
            Bp = permute_blocks(B, perm)
            key = tuple(b.tobytes() for b in Bp.arrays)
            if key in seen:
                continue
            seen.add(key)
            D = StepFunction(A.sig, A.pi.copy(), tuple(a - b for a, b in zip(A.arrays, Bp.arrays)), Mode.REAL)
            res = cut_norm(D, max_exact_m=max_m)
            if best is None or res.total < best.value:
                best = CutDistanceResult(res.total, perm, res.subsets, res.values)
    return best


def aligned_l1(W: StepFunction, V: StepFunction, max_m: int = ALIGN_MAX_M) -> float:
    """L1 distance as functions, minimized over block orderings of the larger one.

    Both arguments are first put in :func:`reduced_form`, so any two splits of
    one step function are at distance zero.
    """
    W, V = reduced_form(W), reduced_form(V)
    if W.m < V.m:
        W, V = V, W
    if W.m > max_m:
        raise ExactBoundExceeded(f"m={W.m} exceeds the alignment bound {max_m}")
    perms = list(itertools.permutations(range(W.m)))
    best = min(l1_distance(permute_blocks(W, p), V) for p in perms)
    if W.m == V.m:  # the refinement pairing depends on which side is permuted
        best = min(best, min(l1_distance(W, permute_blocks(V, p)) for p in perms))
    return best


def canonical_form(W: StepFunction) -> StepFunction:
    """Blocks sorted by descending weight, ties broken by sorted row values."""
    def key(i):
        rows = tuple(v for a in W.arrays for v in np.sort(a[i].ravel()).round(12))
        return (-round(float(W.pi[i]), 12), rows)

    return permute_blocks(W, sorted(range(W.m), key=key))


def from_finite_graph(G: Hypergraph) -> StepFunction:
    """Graphon representation: n equal blocks, indicator arrays, zero diagonal."""
    if G.n < 1:
        raise EmptyGraph("the graphon representation needs at least one vertex")
    n = G.n
    arrays = []
    for d, rel in zip(G.sig.arities, G.edges):
        a = np.zeros((n,) * d)
        if rel:
            E = np.array(rel, dtype=np.intp)
            for p in itertools.permutations(range(d)):
                a[tuple(E[:, list(p)].T)] = 1.0
        arrays.append(a)
    return StepFunction(G.sig, np.full(n, 1.0 / n), tuple(arrays), Mode.UNIT)
