"""W-random hypergraphs and empirical subgraph densities.

A W-random hypergraph on n vertices draws a block label for every vertex
from ``pi`` and then includes each d-subset of vertices as a hyperedge of
relation k independently with probability ``A_k`` at the labels' cell.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .density import TERM_LIMIT, density
from .errors import TooManyTerms, ValidationError
from .graphs import Hypergraph, QuantumGraph, as_quantum
from .stepfn import Mode, StepFunction, from_finite_graph


@dataclass(frozen=True)
class SampleConfig:
    n: int
    seed: int = 0
    trials: int = 1
    mc_samples: int = 100_000  # vertex maps per Monte Carlo estimate

    def __post_init__(self):
        if self.n < 1 or self.trials < 1 or self.mc_samples < 2:
            raise ValidationError("n and trials must be positive, mc_samples at least 2")


def _subsets(n: int, d: int) -> np.ndarray:
    if d > n:
        return np.zeros((0, d), dtype=np.intp)
    count = math.comb(n, d)
    flat = np.fromiter(itertools.chain.from_iterable(itertools.combinations(range(n), d)), np.intp, count * d)
    return flat.reshape(count, d)


def sample_w_random(W: StepFunction, cfg: SampleConfig | int, seed: int | None = None) -> Hypergraph:
    """One W-random hypergraph. ``cfg`` may be a plain vertex count."""
    if isinstance(cfg, int):
        cfg = SampleConfig(cfg, 0 if seed is None else seed)
    if W.mode is Mode.REAL or any(a.min() < 0 or a.max() > 1 for a in W.arrays):
        raise ValidationError("sampling needs a graphon (entries in [0, 1])")
    rng = np.random.default_rng(cfg.seed)
    labels = rng.choice(W.m, size=cfg.n, p=W.pi / W.pi.sum())
    edges = []
    for d, a in zip(W.sig.arities, W.arrays):
        subsets = _subsets(cfg.n, d)
        p = a[tuple(labels[subsets].T)] if len(subsets) else np.zeros(0)
        keep = subsets[rng.random(len(subsets)) < p]
        edges.append(tuple(map(tuple, keep.tolist())))
    # combinations come out sorted, so the edge sets are already canonical
    return Hypergraph._trusted(W.sig, cfg.n, tuple(edges))


@dataclass(frozen=True)
class DensityEstimate:
    value: float
    stderr: float  # 0 for exact evaluation
    method: str  # "exact" or "monte-carlo"
    samples: int = 0


def _mc_density(F: Hypergraph, G: Hypergraph, samples: int, rng) -> tuple[float, float]:
    # ordered vertex maps with repetition, as in the integral defining t
    x = rng.integers(0, G.n, size=(samples, F.n))
    hits = np.ones(samples, dtype=bool)
    for rel_f, rel_g in zip(F.edges, G.edges):
        present = set(rel_g)
        for e in rel_f:
            img = np.sort(x[:, list(e)], axis=1)
            hits &= np.fromiter((tuple(r) in present for r in img.tolist()), bool, samples)
    return float(hits.mean()), float(hits.std(ddof=1) / math.sqrt(samples))


def empirical_density(
    F: Hypergraph | QuantumGraph,
    G: Hypergraph,
    method: str = "auto",
    samples: int = 100_000,
    seed: int = 0,
) -> DensityEstimate:
    """``t(F, f^G)`` where ``f^G`` is the graphon representation of ``G``.

    ``auto`` evaluates exactly when ``n^|V(F)|`` is within the term limit and
    falls back to Monte Carlo otherwise.
    """
    Q = as_quantum(F)
    if method not in ("auto", "exact", "monte-carlo"):
        raise ValidationError(f"unknown method {method!r}")
    big = max(g.n for g in Q.constituents)
    fits = float(G.n) ** big <= TERM_LIMIT
    if method == "exact" and not fits:
        raise TooManyTerms(f"{G.n}^{big} terms exceeds the limit {TERM_LIMIT}")
    if method == "exact" or (method == "auto" and fits):
        return DensityEstimate(density(Q, from_finite_graph(G)), 0.0, "exact")
    rng = np.random.default_rng(seed)
    value = var = 0.0
    for c, g in Q.terms:
        if g.n == 0:
            value += c
            continue
        mean, se = _mc_density(g, G, samples, rng)
        value += c * mean
        var += (c * se) ** 2
    return DensityEstimate(value, math.sqrt(var), "monte-carlo", samples)


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    graph: int  # index into the graph list
    trials: int
    mean: float
    std: float
    stderr: float
    target: float
    z_gap: float  # (mean - target) / stderr; 0 when both vanish

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def trial_seed(seed: int, n: int, trial: int) -> int:
    """Seed of one trial, derived from the run seed, n and the trial index."""
    return int(np.random.SeedSequence([seed, n, trial]).generate_state(1, np.uint64)[0])


def convergence_report(
    W: StepFunction, graphs: Sequence, n_list: Sequence[int], cfg: SampleConfig
) -> list[ConvergenceRow]:
    """Empirical densities of W-random samples against ``t(F, W)``."""
    targets = [density(F, W) for F in graphs]
    rows = []
    for n in n_list:
        values = np.empty((cfg.trials, len(graphs)))
        for trial in range(cfg.trials):
            G = sample_w_random(W, SampleConfig(n, trial_seed(cfg.seed, n, trial)))
            for j, F in enumerate(graphs):
                values[trial, j] = empirical_density(F, G, samples=cfg.mc_samples, seed=trial_seed(cfg.seed, n, trial)).value
        for j, target in enumerate(targets):
            col = values[:, j]
            std = float(col.std(ddof=1)) if cfg.trials > 1 else 0.0
            se = std / math.sqrt(cfg.trials)
            gap = float(col.mean()) - target
            z = gap / se if se > 0 else (0.0 if gap == 0 else math.copysign(math.inf, gap))
            rows.append(ConvergenceRow(n, j, cfg.trials, float(col.mean()), std, se, target, z))
    return rows
