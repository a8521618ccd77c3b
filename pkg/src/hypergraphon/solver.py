"""Constrained minimization of density functionals over m-step functions.

The problem solved at block count ``m`` is::

    minimize   f_s(A, pi)
    subject to t(F_i, (A, pi)) = u_i     for every constraint i
               A entries in [eps, 1 - eps] (graphon modes),  pi in the simplex

Each restart runs an augmented Lagrangian outer loop (multipliers updated as
``beta <- beta - mu * (t - u)``) around a projected gradient inner loop with
Barzilai-Borwein steps and Armijo backtracking. Converged iterates are then
polished by Newton's method on the first-order system
``grad f - sum beta_i grad t_i = 0, t = u``.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import least_squares

from .density import DensityProgram, GradientVector, density, gradient, jacobian
from .errors import Infeasible, InfeasibleUpToMax, NonConvergent, ValidationError
from .graphs import QuantumGraph, Signature, as_quantum
from .objective import ObjectiveConfig, objective_gradient, objective_terms, objective_value
from .stepfn import (
    ALIGN_MAX_M,
    Mode,
    StepFunction,
    aligned_l1,
    canonical_form,
    canonical_indices,
    canonical_map,
    orbit_sizes,
    free_layout,
    from_free_vector,
    l1_distance,
    split,
)

log = logging.getLogger(__name__)

SPLIT_WEIGHTS = (0.25, 0.5, 0.75)


@dataclass(frozen=True)
class ConstraintSet:
    """Density constraints ``t(F_i, W) = u_i`` over one signature."""

    graphs: tuple[QuantumGraph, ...]
    targets: tuple[float, ...]

    def __post_init__(self):
        graphs = tuple(as_quantum(g) for g in self.graphs)
        targets = tuple(float(u) for u in self.targets)
        if len(graphs) != len(targets):
            raise ValidationError("one target per constraint graph is required")
        if not graphs:
            raise ValidationError("a constraint set needs at least one constraint")
        if any(g.sig != graphs[0].sig for g in graphs):
            raise ValidationError("constraint graphs must share one signature")
        if not all(math.isfinite(u) for u in targets):
            raise ValidationError("targets must be finite")
        object.__setattr__(self, "graphs", graphs)
        object.__setattr__(self, "targets", targets)

    @classmethod
    def of(cls, pairs: Sequence[tuple]) -> "ConstraintSet":
        return cls(tuple(g for g, _ in pairs), tuple(u for _, u in pairs))

    @property
    def sig(self) -> Signature:
        return self.graphs[0].sig

    @property
    def u(self) -> np.ndarray:
        return np.array(self.targets)

    def __len__(self):
        return len(self.graphs)

    def nonlinear_constituents(self) -> list[int]:
        """Indices of constraints with a non-linear constituent."""
        return [i for i, g in enumerate(self.graphs) if not g.is_linear()]


@dataclass(frozen=True)
class SolverConfig:
    m: int = 2
    restarts: int = 8
    seed: int = 0
    mu0: float = 1e3
    mu_growth: float = 10.0
    mu_max: float = 1e8
    max_outer: int = 40
    max_inner: int = 500
    inner_tol: float = 1e-7
    constraint_tol: float = 1e-9
    eps: float = 1e-6
    eps_pi: float = 1e-6
    mode: Mode = Mode.INTERIOR
    fixed_pi: tuple[float, ...] | None = None
    polish: bool = True
    polish_from: float = 1e-3  # constraint violation below which Newton is tried
    patience: int = 2  # outer iterations without halving the violation
    max_kicks: int = 5
    cluster_tol: float = 1e-6
    threads: int = 1

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        if self.m < 1 or self.restarts < 0:
            raise ValidationError("m must be positive and restarts non-negative")
        if min(self.inner_tol, self.constraint_tol) <= 0:
            raise ValidationError("tolerances must be positive")
        if not 0 < self.eps < 0.5:
            raise ValidationError("eps must lie in (0, 0.5)")
        if self.fixed_pi is not None:
            fp = tuple(float(p) for p in self.fixed_pi)
            if len(fp) != self.m or abs(sum(fp) - 1) > 1e-12 or min(fp) < 0:
                raise ValidationError("fixed_pi must be a probability vector of length m")
            object.__setattr__(self, "fixed_pi", fp)

    @property
    def kkt_tol(self) -> float:
        return 10 * self.inner_tol

    def replace(self, **changes) -> "SolverConfig":
        return dataclasses.replace(self, **changes)


@dataclass
class Solution:
    W: StepFunction
    objective: float
    beta: np.ndarray  # multipliers from the optimizer
    kkt_residual: float
    constraint_residual: float
    jacobian_rank: int
    beta_fit: np.ndarray  # least-squares multipliers at W
    fit_residual: float
    restart: int
    iterations: int
    interior: bool
    min_entry_gap: float  # distance of the closest entry to {0, 1}


@dataclass
class SolveReport:
    solutions: list[Solution]
    m: int
    seed: int
    n_starts: int
    n_feasible: int
    n_converged: int
    iterations: list[int]
    config: dict
    objective: dict
    warnings: list[str] = field(default_factory=list)
    converged: bool = True

    @property
    def best(self) -> Solution:
        return self.solutions[0]

    best_index = 0


# -- the finite-dimensional problem -------------------------------------------

def project_simplex(v: np.ndarray, floor: float = 0.0) -> np.ndarray:
    """Euclidean projection onto ``{p : p_i >= floor, sum p = 1}``."""
    n = len(v)
    total = 1.0 - n * floor
    # shifting by the maximum leaves the projection unchanged and keeps the
    # first partial sum exact, so at least one coordinate is always active
    y = v - floor - np.max(v)
    u = np.sort(y)[::-1]
    css = np.cumsum(u) - total
    k = np.arange(1, n + 1)
    rho = np.nonzero(u - css / k > 0)[0][-1]
    theta = css[rho] / (rho + 1)
    return np.maximum(y - theta, 0.0) + floor


class _Problem:
    """Free-coordinate view of one solve: canonical A entries, then pi head."""

    def __init__(self, cs: ConstraintSet, obj: ObjectiveConfig, cfg: SolverConfig, m: int):
        self.cs, self.obj, self.cfg, self.m = cs, obj, cfg, m
        self.sig = cs.sig
        self.layout = free_layout(self.sig, m)
        self.n_a = self.layout[-1].start
        self.fixed_pi = None if cfg.fixed_pi is None else np.array(cfg.fixed_pi)
        self.n = self.n_a + (0 if self.fixed_pi is not None else m - 1)
        self.u = cs.u
        self.bounded = cfg.mode is not Mode.REAL
        self.program = DensityProgram(cs.graphs, m)

    def step_function(self, x: np.ndarray) -> StepFunction:
        if self.fixed_pi is not None:
            x = np.concatenate([x, self.fixed_pi[:-1]])
        W = from_free_vector(self.sig, self.m, x, self.cfg.mode)
        if self.fixed_pi is not None:
            W = StepFunction(W.sig, self.fixed_pi.copy(), W.arrays, W.mode)
        return W

    def free(self, W: StepFunction) -> np.ndarray:
        return W.free_vector()[: self.n]

    def _flat(self, g: GradientVector) -> np.ndarray:
        return g.flat()[: self.n]

    def project(self, x: np.ndarray) -> np.ndarray:
        x = x.copy()
        if self.bounded:
            x[: self.n_a] = np.clip(x[: self.n_a], self.cfg.eps, 1 - self.cfg.eps)
        if self.n > self.n_a:
            head = x[self.n_a:]
            x[self.n_a:] = project_simplex(np.append(head, 1 - head.sum()), self.cfg.eps_pi)[:-1]
        return x

    def unpack(self, x: np.ndarray):
        arrays = []
        for k, d in enumerate(self.sig.arities):
            arrays.append(x[self.layout[k]][canonical_map(self.m, d)].reshape((self.m,) * d))
        if self.fixed_pi is not None:
            return arrays, self.fixed_pi
        head = x[self.n_a:]
        return arrays, np.append(head, 1.0 - head.sum())

    def evaluate(self, x: np.ndarray):
        """Objective, its gradient, constraint residuals and their Jacobian."""
        arrays, pi = self.unpack(x)
        f, fa, fpi = objective_terms(self.obj, self.sig, arrays, pi)
        t, ta, tpi = self.program.evaluate(arrays, pi)
        gf = np.concatenate(list(fa) + [fpi[:-1] - fpi[-1]])[: self.n]
        J = np.hstack(list(ta) + [tpi[:, :-1] - tpi[:, -1:]])[:, : self.n]
        return f, gf, t - self.u, J

    def scales(self, x: np.ndarray) -> np.ndarray:
        """Per-coordinate scale ``1/sqrt(|orbit| * prod pi)`` for array entries."""
        pi = self.step_function(x).pi
        out = []
        for d in self.sig.arities:
            mass = orbit_sizes(self.m, d) * np.prod(pi[canonical_indices(self.m, d)], axis=1)
            out.append(1.0 / np.sqrt(np.maximum(mass, 1e-6)))
        out.append(np.ones(self.n - self.n_a))
        return np.concatenate(out)

    def random_start(self, rng: np.random.Generator) -> np.ndarray:
        a = rng.uniform(0.2, 0.8, self.n_a)
        if self.n == self.n_a:
            return a
        pi = rng.dirichlet(np.ones(self.m))
        return self.project(np.concatenate([a, pi[:-1]]))

    def in_domain(self, x: np.ndarray) -> bool:
        if self.bounded and (np.any(x[: self.n_a] <= 0) or np.any(x[: self.n_a] >= 1)):
            return False
        if self.n > self.n_a:
            head = x[self.n_a:]
            if np.any(head <= 0) or head.sum() >= 1:
                return False
        return True


def _projected_gradient(fun, project, x, tol, max_iter, memory=10):
    """Spectral projected gradient: BB step lengths, nonmonotone Armijo
    backtracking (c = 1e-4, halving) along the projected direction."""
    x = project(x)
    f, g = fun(x)
    history = [f]
    alpha = 1.0 / max(1.0, np.linalg.norm(g))
    it = 0
    for it in range(1, max_iter + 1):
        if np.linalg.norm(project(x - g) - x) < tol:
            break
        d = project(x - alpha * g) - x
        slope = g @ d
        f_ref = max(history[-memory:])
        lam = 1.0
        while True:
            xn = x + lam * d
            fn, gn = fun(xn)
            if fn <= f_ref + 1e-4 * lam * slope or lam < 1e-12:
                break
            lam *= 0.5
        s, y = xn - x, gn - g
        if not np.any(s):
            break
        sy = s @ y
        alpha = float(np.clip(s @ s / sy, 1e-10, 1e10)) if sy > 0 else 1e10
        x, f, g = xn, fn, gn
        history.append(f)
    return x, it


def _scaled(p: "_Problem", fun, x, tol, max_iter):
    """Run SPG in coordinates ``y = x / s`` with ``s`` fixed at the start.

    Array coordinates are scaled by ``1/sqrt(cell mass)``; without this the
    ``pi`` coordinates, whose gradients do not shrink with the cell masses,
    dominate the steps and empty blocks can never recover.
    """
    s = p.scales(x)

    def fun_y(y):
        f, g = fun(y * s)
        return f, g * s

    y, its = _projected_gradient(fun_y, lambda y: p.project(y * s) / s, x / s, tol, max_iter)
    return y * s, its


def _kick(p: "_Problem", x, rng):
    """Perturb the arrays and pull ``pi`` halfway back to uniform, so that
    blocks that lost their mass get a chance to recover."""
    x = x.copy()
    x[: p.n_a] += rng.normal(0, 0.05, p.n_a)
    if p.n > p.n_a:
        x[p.n_a:] = 0.5 * x[p.n_a:] + 0.5 / p.m + rng.normal(0, 0.05, p.n - p.n_a)
    return p.project(x)


def _augmented_lagrangian(p: "_Problem", x0: np.ndarray, rng: np.random.Generator, beta_max: float = 1e6):
    """Outer loop ``beta <- beta - mu c`` around scaled SPG.

    Every constant step function is a stationary point of the augmented
    Lagrangian (all density gradients are then parallel), and a block whose
    mass hits the floor behaves the same way. Starts that stop reducing the
    violation are therefore kicked by a random perturbation; the penalty keeps
    growing, which turns such points into saddles the iterate can leave. Once the violation is small a Newton polish is tried;
    it is accepted only at a certified local minimizer.
    """
    cfg = p.cfg
    beta = np.zeros(len(p.u))
    mu = cfg.mu0
    x = p.project(x0)
    total = 0
    prev = best = np.inf
    stalled = kicks = 0

    for outer in range(cfg.max_outer):
        bbar = np.clip(beta, -beta_max, beta_max)

        def fun(z, bbar=bbar, mu=mu):
            f, gf, c, J = p.evaluate(z)
            return f - bbar @ c + 0.5 * mu * c @ c, gf - J.T @ (bbar - mu * c)

        omega = max(cfg.inner_tol, 1e-3 * 0.1**outer)
        x, its = _scaled(p, fun, x, omega, cfg.max_inner)
        total += its
        _, gf, c, J = p.evaluate(x)
        beta = bbar - mu * c
        cnorm = float(np.max(np.abs(c)))
        pg = np.linalg.norm(p.project(x - (gf - J.T @ beta)) - x)
        if cnorm < cfg.constraint_tol and pg < cfg.inner_tol:
            return x, beta, total, True
        if cfg.polish and cnorm < cfg.polish_from:
            xp, bp, ok = _newton_polish(p, x, beta)
            if ok:
                return xp, bp, total, True
        if cnorm < 0.5 * best:
            best, stalled = cnorm, 0
        else:
            stalled += 1
        if stalled >= cfg.patience:
            if kicks >= cfg.max_kicks:
                break
            kicks += 1
            x = _kick(p, x, rng)
            best = np.inf
            stalled = 0
            continue
        if cnorm > 0.25 * prev:
            mu = min(mu * cfg.mu_growth, cfg.mu_max)
        prev = cnorm
    return x, beta, total, False


def _kkt_vector(p: _Problem, x, beta):
    _, gf, c, J = p.evaluate(x)
    return np.concatenate([gf - J.T @ beta, c]), J


def _lagrangian_hessian(p: _Problem, x, beta, h):
    H = np.empty((p.n, p.n))
    for j in range(p.n):
        e = np.zeros(p.n)
        e[j] = h
        if not (p.in_domain(x + e) and p.in_domain(x - e)):
            return None
        gp = _kkt_vector(p, x + e, beta)[0][: p.n]
        gm = _kkt_vector(p, x - e, beta)[0][: p.n]
        H[:, j] = (gp - gm) / (2 * h)
    return 0.5 * (H + H.T)


def _newton_polish(p: _Problem, x, beta, max_iter=30, h=1e-6):
    """Newton's method on the first-order system with a finite-difference
    Hessian of the Lagrangian; minimum-norm steps handle degenerate minima.

    Returns ``(x, beta, ok)``; ``ok`` certifies the tolerances and a reduced
    Hessian without negative curvature on the tangent space of the
    constraints (so saddles and maxima are rejected).
    """
    cfg = p.cfg
    R, J = _kkt_vector(p, x, beta)
    rnorm = np.linalg.norm(R)
    k = len(beta)
    x0, beta0 = x, beta
    for _ in range(max_iter):
        H = _lagrangian_hessian(p, x, beta, h)
        if H is None:
            return x0, beta0, False
        if rnorm < 1e-13:
            break
        K = np.block([[H, -J.T], [J, np.zeros((k, k))]])
        step = np.linalg.lstsq(K, -R, rcond=1e-13)[0]
        t = 1.0
        while t > 1e-4:
            xn, bn = x + t * step[: p.n], beta + t * step[p.n:]
            if p.in_domain(xn):
                Rn, Jn = _kkt_vector(p, xn, bn)
                if np.linalg.norm(Rn) < rnorm:
                    break
            t *= 0.5
        else:
            break
        x, beta, R, J, rnorm = xn, bn, Rn, Jn, np.linalg.norm(Rn)
    else:
        H = _lagrangian_hessian(p, x, beta, h)
        if H is None:
            return x0, beta0, False
    c = R[p.n:]
    if np.max(np.abs(c), initial=0) >= cfg.constraint_tol or np.linalg.norm(R[: p.n]) >= cfg.inner_tol:
        return x0, beta0, False
    # tangent space of the constraints: null space of J
    _, sv, vt = np.linalg.svd(J)
    rank = int(np.sum(sv > 1e-8 * sv[0])) if len(sv) and sv[0] > 0 else 0
    Z = vt[rank:].T
    if Z.shape[1]:
        curv = np.linalg.eigvalsh(Z.T @ H @ Z)
        if curv[0] < -1e-6 * max(1.0, np.abs(curv).max()):
            return x0, beta0, False
    return x, beta, True


# -- public entry points ------------------------------------------------------

def fit_multipliers(W: StepFunction, cs: ConstraintSet, obj: ObjectiveConfig, fixed_pi: bool = False):
    """Least-squares multipliers ``argmin_beta ||grad f - sum beta_i grad t_i||``.

    Singular values below ``1e-10 * sigma_max`` are cut, so rank-deficient
    constraint sets get the minimum-norm solution. Returns ``(beta, residual)``.
    """
    n = W.sig.n_params(W.m) if fixed_pi else None
    g = objective_gradient(obj, W).flat()[:n]
    J = np.array([gradient(F, W).flat()[:n] for F in cs.graphs])
    beta = np.linalg.lstsq(J.T, g, rcond=1e-10)[0]
    return beta, float(np.linalg.norm(g - J.T @ beta))


def kkt_residual(W: StepFunction, beta, cs: ConstraintSet, obj: ObjectiveConfig, fixed_pi: bool = False) -> float:
    """Norm of ``grad f - sum beta_i grad t_i`` over canonical A and reduced pi."""
    n = W.sig.n_params(W.m) if fixed_pi else None
    g = objective_gradient(obj, W).flat()[:n]
    for b, F in zip(np.asarray(beta, float), cs.graphs):
        g = g - b * gradient(F, W).flat()[:n]
    return float(np.linalg.norm(g))


def constraint_residual(W: StepFunction, cs: ConstraintSet) -> float:
    return float(max(abs(density(F, W) - u) for F, u in zip(cs.graphs, cs.targets)))


def interior_check(W: StepFunction, delta: float) -> bool:
    """True iff every array entry lies in ``(delta, 1 - delta)``."""
    return all(a.min() > delta and a.max() < 1 - delta for a in W.arrays)


def _min_entry_gap(W):
    return float(min(min(a.min(), 1 - a.max()) for a in W.arrays))


def _run_start(p: _Problem, x0: np.ndarray, restart: int, rng: np.random.Generator):
    x, beta, iters, _ = _augmented_lagrangian(p, x0, rng)
    return x, beta, iters, restart


def _distinct(solutions: list[Solution], tol: float) -> list[Solution]:
    kept: list[Solution] = []
    for s in solutions:
        W = s.W
        for k in kept:
            d = aligned_l1(W, k.W) if max(W.m, k.W.m) <= ALIGN_MAX_M else l1_distance(
                canonical_form(W), canonical_form(k.W)
            )
            if d < tol:
                break
        else:
            kept.append(s)
    return kept


def solve(
    cs: ConstraintSet,
    cfg: SolverConfig = SolverConfig(),
    obj: ObjectiveConfig = ObjectiveConfig(),
    initial: Sequence[StepFunction] = (),
) -> SolveReport:
    """Multistart minimization of ``f_s`` over m-step functions.

    ``initial`` supplies extra starting points (for instance splits of a
    lower-level optimum); they run before the ``cfg.restarts`` random starts,
    which use generators seeded with ``cfg.seed + restart``.

    Raises :class:`Infeasible` if no start meets the constraint tolerance and
    :class:`NonConvergent` (carrying the partial report) if none also meets
    the stationarity tolerance ``10 * inner_tol``.
    """
    m = cfg.m
    p = _Problem(cs, obj, cfg, m)
    warnings = []
    if cs.sig.n_params(m) < len(cs):
        warnings.append(f"n(m,r,d)={cs.sig.n_params(m)} is smaller than the {len(cs)} constraints")
    nonlinear = cs.nonlinear_constituents()
    if nonlinear:
        warnings.append(f"constraints {nonlinear} have non-linear constituents; counting-lemma checks do not apply")

    starts = []
    for j, W0 in enumerate(initial):
        if W0.m != m:
            raise ValidationError(f"initial point has m={W0.m}, expected {m}")
        rng = np.random.default_rng(cfg.seed + cfg.restarts + j)
        starts.append((p.free(W0), -1 - j, rng))
    for i in range(cfg.restarts):
        rng = np.random.default_rng(cfg.seed + i)
        starts.append((p.random_start(rng), i, rng))

    if cfg.threads > 1:
        with ThreadPoolExecutor(cfg.threads) as pool:
            runs = list(pool.map(lambda s: _run_start(p, *s), starts))
    else:
        runs = [_run_start(p, *s) for s in starts]

    candidates, iterations = [], []
    for x, beta, iters, restart in runs:
        iterations.append(iters)
        W = p.step_function(x)
        fixed = cfg.fixed_pi is not None
        beta_fit, fit_res = fit_multipliers(W, cs, obj, fixed)
        candidates.append(
            Solution(
                W=W,
                objective=objective_value(obj, W),
                beta=beta,
                kkt_residual=kkt_residual(W, beta, cs, obj, fixed),
                constraint_residual=constraint_residual(W, cs),
                jacobian_rank=jacobian(cs.graphs, W).rank,
                beta_fit=beta_fit,
                fit_residual=fit_res,
                restart=restart,
                iterations=iters,
                interior=interior_check(W, 0.0),
                min_entry_gap=_min_entry_gap(W),
            )
        )

    key = lambda s: (s.objective, s.restart)  # noqa: E731
    feasible = sorted((s for s in candidates if s.constraint_residual < cfg.constraint_tol), key=key)
    converged = [s for s in feasible if s.kkt_residual < cfg.kkt_tol]
    report = SolveReport(
        solutions=_distinct(converged, cfg.cluster_tol),
        m=m,
        seed=cfg.seed,
        n_starts=len(starts),
        n_feasible=len(feasible),
        n_converged=len(converged),
        iterations=iterations,
        config=config_echo(cfg),
        objective=objective_echo(obj, cs.sig),
        warnings=warnings,
    )
    for s in report.solutions:
        if s.jacobian_rank < len(cs):
            report.warnings.append(f"rank-deficient constraint Jacobian ({s.jacobian_rank} < {len(cs)})")
            break
    if not feasible:
        raise Infeasible(f"no start reached the constraint tolerance {cfg.constraint_tol}")
    if not converged:
        report.solutions = _distinct(feasible, cfg.cluster_tol)
        report.converged = False
        raise NonConvergent(f"no feasible start reached the KKT tolerance {cfg.kkt_tol}", report)
    return report


def config_echo(cfg: SolverConfig) -> dict:
    d = dataclasses.asdict(cfg)
    d["mode"] = cfg.mode.value
    d["fixed_pi"] = None if cfg.fixed_pi is None else list(cfg.fixed_pi)
    return d


def objective_echo(obj: ObjectiveConfig, sig: Signature) -> dict:
    return {
        "name": obj.scalar_fn.name,
        "params": obj.scalar_fn.params,
        "weights": list(obj.weights_for(sig.arities)),
    }


# -- base size ----------------------------------------------------------------

def _feasibility_residual(cs: ConstraintSet, m: int, restarts: int, seed: int):
    """Smallest max-residual of ``t(F, W) = u`` found over m-step functions.

    Uses a softmax parameterization of pi so that the subproblem is a
    bound-constrained least-squares problem.
    """
    sig = cs.sig
    n_a = sig.n_params(m)
    lo, hi = np.zeros(n_a), np.ones(n_a)

    def unpack(z):
        theta = z[n_a:]
        w = np.exp(theta - theta.max())
        pi = w / w.sum()
        W = from_free_vector(sig, m, np.concatenate([z[:n_a], pi[:-1]]))
        return StepFunction(sig, pi, W.arrays, Mode.UNIT)

    def fun(z):
        W = unpack(z)
        return np.array([density(F, W) for F in cs.graphs]) - cs.u

    def jac(z):
        W = unpack(z)
        dpi = np.diag(W.pi) - np.outer(W.pi, W.pi)
        rows = []
        for F in cs.graphs:
            g = gradient(F, W)
            rows.append(np.concatenate(list(g.a_part) + [g.pi_part @ dpi]))
        return np.array(rows)

    best = np.inf
    for i in range(restarts):
        rng = np.random.default_rng(seed + i)
        z0 = np.concatenate([rng.uniform(0.05, 0.95, n_a), rng.normal(0, 0.5, m)])
        res = least_squares(
            fun, z0, jac=jac, bounds=(np.append(lo, [-np.inf] * m), np.append(hi, [np.inf] * m)),
            xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=500,
        )
        best = min(best, float(np.max(np.abs(res.fun))))
        if best < 1e-10:
            break
    return best


def find_m0(cs: ConstraintSet, m_max: int = 6, restarts: int = 16, seed: int = 0, tol: float = 1e-8) -> int:
    """Smallest m with ``n(m, r, d) > |F|`` whose m-step functions reach the targets."""
    for m in range(1, m_max + 1):
        if cs.sig.n_params(m) <= len(cs):
            continue
        res = _feasibility_residual(cs, m, restarts, seed)
        log.debug("m=%d feasibility residual %.3g", m, res)
        if res < tol:
            return m
    raise InfeasibleUpToMax(f"targets not reached by any m-step function with m <= {m_max}")


# -- split escalation -----------------------------------------------------------

@dataclass
class EscalationLevel:
    m: int
    best_objective: float
    objective_change: float | None  # relative to the previous level
    l1_gap: float | None  # best solution vs best previous solution, block-aligned
    pod_holds: bool | None
    report: SolveReport


@dataclass
class EscalationReport:
    levels: list[EscalationLevel]
    objective_tol: float
    l1_tol: float

    @property
    def pod_holds(self) -> bool:
        return all(lv.pod_holds for lv in self.levels if lv.pod_holds is not None)


def split_seeds(W: StepFunction, weights=SPLIT_WEIGHTS) -> list[StepFunction]:
    return [split(W, lam, k) for k in range(W.m) for lam in weights]


def escalate(
    cs: ConstraintSet,
    cfg: SolverConfig,
    obj: ObjectiveConfig,
    m_from: int,
    m_to: int,
    objective_tol: float = 1e-6,
    l1_tol: float = 1e-4,
) -> EscalationReport:
    """Solve at ``m_from .. m_to``, seeding each level with splits of the
    previous optimum, and test whether new levels only reproduce splits.

    A level's verdict holds iff its best objective is not above the previous
    best by more than ``objective_tol`` and its best solution lies within
    ``l1_tol`` (as a function, after block alignment) of the previous one.
    """
    if cfg.fixed_pi is not None:
        raise ValidationError("escalation varies m and cannot use a fixed partition")
    levels = []
    prev: Solution | None = None
    for m in range(m_from, m_to + 1):
        seeds = split_seeds(prev.W) if prev is not None else []
        rep = solve(cs, cfg.replace(m=m), obj, initial=seeds)
        best = rep.best
        if prev is None:
            levels.append(EscalationLevel(m, best.objective, None, None, None, rep))
        else:
            change = best.objective - prev.objective
            gap = aligned_l1(best.W, prev.W)
            holds = change <= objective_tol and gap < l1_tol
            levels.append(EscalationLevel(m, best.objective, change, gap, holds, rep))
        prev = best
    return EscalationReport(levels, objective_tol, l1_tol)
