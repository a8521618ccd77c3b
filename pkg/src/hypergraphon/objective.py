"""Density functionals ``f_s(W) = sum_k w_k * integral f0(W_k)``.

The default functional is the rate function of the uniform random
hypergraph: ``f0 = h_{1/2}`` with weights ``1/d_k!``. Minimizing it under
density constraints gives the most typical (maximum entropy) hypergraphon.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .density import GradientVector, canonical_from_full
from .errors import DomainViolation, ValidationError
from .stepfn import StepFunction, cell_weights

CLAMP_EPS = 1e-12


@dataclass(frozen=True)
class ScalarDensityFn:
    """A scalar function ``f0`` with its derivative and open domain."""

    name: str
    f0: Callable[[np.ndarray], np.ndarray]
    df0: Callable[[np.ndarray], np.ndarray]
    domain: tuple[float, float] = (-math.inf, math.inf)
    params: dict = field(default_factory=dict)

    def check(self, a: np.ndarray):
        lo, hi = self.domain
        if np.any(a <= lo) or np.any(a >= hi) or not np.all(np.isfinite(a)):
            raise DomainViolation(f"entries outside the open domain {self.domain} of {self.name}")


def _h_half(x):
    return x * np.log(2 * x) + (1 - x) * np.log(2 * (1 - x))


def _h_half_limit(x):
    # continuous extension with 0 log 0 = 0
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(x > 0, x * np.log(2 * np.where(x > 0, x, 1)), 0.0)
        b = np.where(x < 1, (1 - x) * np.log(2 * np.where(x < 1, 1 - x, 1)), 0.0)
    return a + b


def entropy() -> ScalarDensityFn:
    """``h_{1/2}(x) = x log 2x + (1-x) log 2(1-x)`` on (0, 1)."""
    return ScalarDensityFn("entropy", _h_half, lambda x: np.log(x / (1 - x)), (0.0, 1.0))


def quadratic(c: float = 1.0, center: float = 0.0) -> ScalarDensityFn:
    """``c (x - center)^2`` on the real line."""
    return ScalarDensityFn(
        "quadratic",
        lambda x: c * (x - center) ** 2,
        lambda x: 2 * c * (x - center),
        params={"c": c, "center": center},
    )


def tabulated(xs: Sequence[float], ys: Sequence[float]) -> ScalarDensityFn:
    """Cubic-spline interpolant of user-supplied samples, open on their range."""
    from scipy.interpolate import CubicSpline

    xs, ys = np.asarray(xs, float), np.asarray(ys, float)
    if len(xs) < 4 or np.any(np.diff(xs) <= 0):
        raise ValidationError("tabulated f0 needs at least 4 strictly increasing abscissae")
    spline = CubicSpline(xs, ys)
    return ScalarDensityFn(
        "tabulated",
        spline,
        spline.derivative(),
        (float(xs[0]), float(xs[-1])),
        params={"x": xs.tolist(), "y": ys.tolist()},
    )


@dataclass(frozen=True)
class ObjectiveConfig:
    """A scalar function plus one positive weight per relation.

    ``weights=None`` means ``1/d_k!``, the rate-function weights.
    """

    scalar_fn: ScalarDensityFn = field(default_factory=entropy)
    weights: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.weights is not None:
            w = tuple(float(x) for x in self.weights)
            if any(x <= 0 for x in w):
                raise ValidationError("relation weights must be positive")
            object.__setattr__(self, "weights", w)

    def weights_for(self, arities: Sequence[int]) -> tuple[float, ...]:
        if self.weights is None:
            return tuple(1.0 / math.factorial(d) for d in arities)
        if len(self.weights) != len(arities):
            raise ValidationError(f"{len(self.weights)} weights for {len(arities)} relations")
        return self.weights


def rate_function() -> ObjectiveConfig:
    return ObjectiveConfig(entropy())


def relation_values(cfg: ObjectiveConfig, W: StepFunction, clamped: bool = False) -> np.ndarray:
    """Per-relation contributions ``w_k * sum f0(A_k) * prod(pi)``."""
    fn = cfg.scalar_fn
    out = []
    for w, a in zip(cfg.weights_for(W.sig.arities), W.arrays):
        if clamped:
            lo, hi = fn.domain
            vals = fn.f0(np.clip(a, lo + CLAMP_EPS, hi - CLAMP_EPS)) if fn.name != "entropy" else _h_half_limit(a)
        else:
            fn.check(a)
            vals = fn.f0(a)
        out.append(w * float(np.sum(vals * cell_weights(W.pi, a.ndim))))
    return np.array(out)


def objective_value(cfg: ObjectiveConfig, W: StepFunction, clamped: bool = False) -> float:
    """``f_s(W)``. Strict mode raises on entries at or outside the domain;
    clamped mode is for diagnostics (for the entropy it uses the continuous
    extension ``h(0) = h(1) = log 2``)."""
    return float(relation_values(cfg, W, clamped).sum())


def objective_terms(cfg: ObjectiveConfig, sig, arrays, pi):
    """Value, canonical array gradients and unreduced ``pi`` gradient in one
    pass (strict domain). Used by the optimizer's inner loop."""
    fn = cfg.scalar_fn
    m = len(pi)
    value = 0.0
    a_part = []
    pi_part = np.zeros(m)
    for w, d, a in zip(cfg.weights_for(sig.arities), sig.arities, arrays):
        fn.check(a)
        f0 = fn.f0(a)
        lower = cell_weights(pi, d - 1)
        cw = np.multiply.outer(lower, pi)
        value += w * float(np.sum(f0 * cw))
        a_part.append(w * canonical_from_full(fn.df0(a) * cw, m))
        # by symmetry every coordinate contributes the same marginal
        pi_part += w * d * (f0 * lower[None, ...] if d > 1 else f0).reshape(m, -1).sum(axis=1)
    return value, tuple(a_part), pi_part


def objective_gradient(cfg: ObjectiveConfig, W: StepFunction) -> GradientVector:
    _, a_part, pi_part = objective_terms(cfg, W.sig, W.arrays, W.pi)
    return GradientVector(a_part, pi_part)
