"""Whole-graph optimization drivers built on the parameterized solvers.

A driver orchestrates independent simulator runs: exponential doubling over k
to bracket the optimum, then binary search inside the bracket. Modes differ in
which parameterized solver answers each probe and how many refinement steps
run; `hybrid` switches to a registered global fallback once k crosses a
threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from . import algorithms as alg
from .algorithms import NodeOutput, Verdict
from .engine import Model, id_width, run
from .oracles import Problem
from .primitives import (broadcast_records, collect_graph, leader_and_bfs,
                         record_capacity, upcast_duration)


class FallbackNotRegistered(LookupError):
    pass


class DuplicateFallback(ValueError):
    pass


@dataclass(frozen=True)
class SearchConfig:
    problem: Problem
    mode: str = "exact"  # exact | one_plus_eps | two_minus_eps | adaptive_sqrt | hybrid
    eps: Fraction | None = None
    alpha: Fraction = Fraction(2)  # fallback ratio consulted by hybrid
    model: Model = Model.CONGEST
    beta: int = 8
    seed: int = 0
    randomized: bool = False
    fingerprint_c: int = 3

    MODES = ("exact", "one_plus_eps", "two_minus_eps", "adaptive_sqrt", "hybrid")

    def __post_init__(self):
        if self.mode not in self.MODES:
            raise ValueError(f"unknown search mode {self.mode!r}")
        if self.problem not in (Problem.MVC, Problem.MAXM):
            raise ValueError(f"search drivers handle MVC and MaxM, not {self.problem}")
        if self.mode == "one_plus_eps" and not (0 < Fraction(self.eps) < 1):
            raise ValueError("one_plus_eps needs eps in (0,1)")
        if self.mode == "two_minus_eps" and not (0 < Fraction(self.eps) <= Fraction(1, 2)):
            raise ValueError("two_minus_eps needs eps in (0,1/2]")


@dataclass
class Probe:
    k: int
    eps: Fraction | None
    verdict: Verdict
    size: int
    rounds: int
    budget: int


@dataclass
class SearchMetrics:
    probes: list = field(default_factory=list)
    total_rounds: int = 0
    budget_sum: int = 0
    kbar: int | None = None
    naive_used: bool = False
    fallback_used: bool = False

    @property
    def visited_ks(self):
        return [p.k for p in self.probes]


@dataclass
class SearchResult:
    size: int
    solution: frozenset
    metrics: SearchMetrics


# ---------------------------------------------------------------------------
# Fallback registry (hybrid mode)

_FALLBACKS: dict = {}


def register_fallback(problem: Problem, alpha, program_factory, round_formula,
                      replace: bool = False) -> None:
    """`program_factory(g)` must return an engine-runnable node program whose
    outputs are NodeOutput; `round_formula(n, max_degree)` gives the k
    threshold at which hybrid switches over."""
    key = (problem, Fraction(alpha))
    if key in _FALLBACKS and not replace:
        raise DuplicateFallback(f"fallback for {key} already registered")
    _FALLBACKS[key] = (program_factory, round_formula)


def fallback_maximal_matching(problem: Problem):
    """Default global fallback: greedy local-minimum maximal matching.
    2-approximate for MaxM directly; its endpoints 2-approximate MVC."""

    def factory(g):
        iters = g.n // 2 + 1

        def prog(ctx):
            me = ctx.node_id
            mate = yield from alg.greedy_matching_iterations(ctx, iters)
            if problem is Problem.MAXM:
                members = frozenset({tuple(sorted((me, mate)))}) \
                    if mate is not None else frozenset()
            else:
                members = frozenset({me}) if mate is not None else frozenset()
            return NodeOutput(Verdict.ACCEPT, members)

        return prog

    return factory


def _default_threshold(n: int, max_degree: int) -> int:
    return max(1, math.isqrt(n))


register_fallback(Problem.MVC, 2, fallback_maximal_matching(Problem.MVC),
                  _default_threshold)
register_fallback(Problem.MAXM, 2, fallback_maximal_matching(Problem.MAXM),
                  _default_threshold)


# ---------------------------------------------------------------------------
# Probe plumbing


def _solver_and_budget(cfg: SearchConfig, n: int, k: int, eps):
    r, c = cfg.randomized, cfg.fingerprint_c
    if eps is None:
        if cfg.problem is Problem.MVC:
            return (alg.congest_kmvc_exact(k, r, c),
                    alg.kmvc_exact_budget(n, k, cfg.beta, cfg.model, r, c))
        return (alg.congest_kmaxm_exact(k, r, c),
                alg.kmaxm_exact_budget(n, k, cfg.beta, cfg.model, r, c))
    if cfg.problem is Problem.MVC:
        return (alg.congest_kmvc_2eps(k, eps, r, c),
                alg.kmvc_2eps_budget(n, k, eps, cfg.beta, cfg.model))
    return (alg.congest_kmaxm_2eps(k, eps, r, c),
            alg.kmaxm_2eps_budget(n, k, eps, cfg.beta, cfg.model))


def _clamp_eps(eps, k: int):
    if eps is None or k < 1:
        return eps
    return min(max(Fraction(eps), Fraction(1, k)), Fraction(1))


def _probe(g, cfg: SearchConfig, k: int, eps, metrics: SearchMetrics):
    eps = _clamp_eps(eps, k)
    prog, budget = _solver_and_budget(cfg, g.n, k, eps)
    res = run(g, prog, model=cfg.model, beta=cfg.beta, seed=cfg.seed)
    v = alg.unanimous_verdict(res.outputs)
    if v is None:
        raise RuntimeError(f"non-unanimous verdict at k={k}")
    sol = alg.combined_solution(res.outputs)
    metrics.probes.append(Probe(k, eps, v, len(sol), res.rounds, budget))
    metrics.total_rounds += res.rounds
    metrics.budget_sum += budget
    return v, sol


def _better(problem: Problem, new: frozenset, old: frozenset | None):
    if old is None:
        return new
    if problem.sense == "min":
        return new if len(new) < len(old) else old
    return new if len(new) > len(old) else old


def _doubling(g, cfg: SearchConfig, eps, metrics: SearchMetrics,
              k_cap: int | None = None):
    """Double k until the bracketing verdict appears (Accept for minimization,
    NoKSolution for maximization) or k passes k_cap. Returns
    (kbar, best solution seen, capped?)."""
    want_accept = cfg.problem.sense == "min"
    k = 1
    best = None
    while True:
        v, sol = _probe(g, cfg, k, eps, metrics)
        if v is Verdict.ACCEPT:
            best = _better(cfg.problem, sol, best)
        if want_accept and v is Verdict.ACCEPT:
            return k, best, False
        if not want_accept and v is Verdict.NO_K:
            return k, best, False
        if k_cap is not None and k >= k_cap:
            return k, best, True
        if k > 4 * g.n:  # safety net; the verdicts above must fire by k ~ n
            raise RuntimeError("doubling failed to bracket the optimum")
        k *= 2


def _binary_refine(g, cfg: SearchConfig, eps, metrics: SearchMetrics,
                   kbar: int, best, iters: int | None, probe_hi: bool):
    """Binary search inside (kbar/2, kbar]. iters=None runs to exhaustion
    (exact); otherwise exactly `iters` bisections. Returns best solution."""
    if cfg.problem.sense == "min":
        lo, hi = kbar // 2, kbar  # NoKSolution known at lo (or lo == 0)
        if probe_hi and kbar >= 1:
            v, sol = _probe(g, cfg, kbar, eps, metrics)
            if v is Verdict.ACCEPT:
                best = _better(cfg.problem, sol, best)
        steps = 0
        while hi - lo > 1 and (iters is None or steps < iters):
            mid = (lo + hi + 1) // 2
            v, sol = _probe(g, cfg, mid, eps, metrics)
            steps += 1
            if v is Verdict.ACCEPT:
                hi = mid
                best = _better(cfg.problem, sol, best)
            else:
                lo = mid
        return best
    # maximization: Accept known at kbar/2, NoKSolution at kbar
    lo, hi = kbar // 2, kbar
    if probe_hi and lo >= 1:
        v, sol = _probe(g, cfg, lo, eps, metrics)
        if v is Verdict.ACCEPT:
            best = _better(cfg.problem, sol, best)
    steps = 0
    while hi - lo > 1 and (iters is None or steps < iters):
        mid = (lo + hi) // 2
        v, sol = _probe(g, cfg, mid, eps, metrics)
        steps += 1
        if v is Verdict.ACCEPT:
            lo = mid
            best = _better(cfg.problem, sol, best)
        else:
            hi = mid
    return best


# ---------------------------------------------------------------------------
# Naive whole-graph fallback for one_plus_eps


def naive_collect_solve(problem: Problem, diam: int, m: int):
    """Leader collects the entire graph and solves it outright."""

    def prog(ctx):
        me = ctx.node_id
        if ctx.n == 1:
            from . import oracles
            from .graphs import Graph
            g1 = Graph.build({me}, [])
            sol = oracles.opt_solution(g1, problem)
            return NodeOutput(Verdict.ACCEPT, frozenset(sol))
        d = max(diam, 1)
        tree = yield from leader_and_bfs(ctx, d)
        cap2 = record_capacity(ctx, 2 * id_width(ctx.n))
        g = yield from collect_graph(ctx, tree, upcast_duration(d, m, cap2))
        payload = []
        if tree.is_root:
            from . import oracles
            sol = oracles.opt_solution(g, problem)
            payload = sorted(sol) if problem.solution_kind == "edge" \
                else sorted((x,) for x in sol)
        arity = 2 if problem.solution_kind == "edge" else 1
        mem = yield from broadcast_records(
            ctx, tree, payload, arity,
            upcast_duration(d, m + 1, record_capacity(ctx, arity * id_width(ctx.n))))
        if arity == 1:
            members = frozenset({me}) if (me,) in mem else frozenset()
        else:
            members = frozenset(e for e in mem if me in e)
        return NodeOutput(Verdict.ACCEPT, members)

    return prog


def naive_budget(n: int, diam: int, m: int, beta: int,
                 model: Model = Model.CONGEST) -> int:
    d = max(diam, 1)
    cap = alg._cap(n, beta, model, 2 * id_width(n))
    return 2 * (2 * d + 2 + 2 * upcast_duration(d, m + 1, cap))


# ---------------------------------------------------------------------------
# Driver entry point


def solve(g, cfg: SearchConfig) -> SearchResult:
    metrics = SearchMetrics()
    problem = cfg.problem

    def finish(best):
        sol = best if best is not None else frozenset()
        return SearchResult(len(sol), frozenset(sol), metrics)

    if cfg.mode == "exact":
        kbar, best, _ = _doubling(g, cfg, None, metrics)
        metrics.kbar = kbar
        best = _binary_refine(g, cfg, None, metrics, kbar, best, None, False)
        return finish(best)

    if cfg.mode == "one_plus_eps":
        eps = Fraction(cfg.eps)
        kbar, best, _ = _doubling(g, cfg, None, metrics)
        metrics.kbar = kbar
        diam = g.diameter() if g.n > 1 else 0
        _, budget_kbar = _solver_and_budget(cfg, g.n, kbar, None)
        if budget_kbar > g.m + 2 * diam:
            metrics.naive_used = True
            res = run(g, naive_collect_solve(problem, diam, g.m),
                      model=cfg.model, beta=cfg.beta, seed=cfg.seed)
            metrics.total_rounds += res.rounds
            metrics.budget_sum += naive_budget(g.n, diam, g.m, cfg.beta, cfg.model)
            return finish(alg.combined_solution(res.outputs))
        t = math.ceil(math.log2(1 / eps)) + 1
        best = _binary_refine(g, cfg, None, metrics, kbar, best, t, False)
        return finish(best)

    if cfg.mode == "two_minus_eps":
        eps = Fraction(cfg.eps)
        kbar, best, _ = _doubling(g, cfg, 2 * eps, metrics)
        metrics.kbar = kbar
        t = math.ceil(math.log2(1 / eps)) + 2
        best = _binary_refine(g, cfg, 2 * eps, metrics, kbar, best, t, True)
        return finish(best)

    if cfg.mode == "adaptive_sqrt":
        # doubling with the sharpest per-k ratio, 2 - 1/k
        want_accept = problem.sense == "min"
        k, best = 1, None
        while True:
            v, sol = _probe(g, cfg, k, Fraction(1, k), metrics)
            if v is Verdict.ACCEPT:
                best = _better(problem, sol, best)
            if (want_accept and v is Verdict.ACCEPT) or \
                    (not want_accept and v is Verdict.NO_K):
                break
            if k > 4 * g.n:
                raise RuntimeError("doubling failed to bracket the optimum")
            k *= 2
        kbar = k
        metrics.kbar = kbar
        eps_t = Fraction(1, 2 * max(1, math.isqrt(kbar)))
        t = math.ceil(math.log2(1 / eps_t)) + 2
        best = _binary_refine(g, cfg, 2 * eps_t, metrics, kbar, best, t, True)
        return finish(best)

    if cfg.mode == "hybrid":
        key = (problem, Fraction(cfg.alpha))
        if key not in _FALLBACKS:
            raise FallbackNotRegistered(f"no fallback registered for {key}")
        factory, round_formula = _FALLBACKS[key]
        max_deg = max((len(g.adjacency()[v]) for v in g.nodes), default=0)
        threshold = round_formula(g.n, max_deg)
        # doubling probes use the 2-approximate solver (eps clamps to 1/k)
        kbar, best, capped = _doubling(g, cfg, Fraction(0), metrics,
                                       k_cap=threshold)
        metrics.kbar = kbar
        if capped:
            metrics.fallback_used = True
            res = run(g, factory(g), model=cfg.model, beta=cfg.beta,
                      seed=cfg.seed)
            metrics.total_rounds += res.rounds
            metrics.budget_sum += 2 * (2 * (g.n // 2 + 1))
            return finish(alg.combined_solution(res.outputs))
        return finish(best)

    raise ValueError(f"unknown search mode {cfg.mode!r}")
