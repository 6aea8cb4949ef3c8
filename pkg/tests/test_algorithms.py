"""Solver contracts on small graphs. The exhaustive corpus sweep lives in
test_acceptance; these are fast targeted checks plus property-based spot
checks of the verdict contracts and round budgets."""

from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import corpus as C
from distparam import algorithms as A, graphs
from distparam.algorithms import Verdict
from distparam.engine import Model, run
from distparam.oracles import Problem

SETTINGS = settings(max_examples=40, deadline=None)

random_graph = st.builds(
    lambda n, seed: graphs.make_random_connected(n, 0.4, seed=seed),
    st.integers(2, 8), st.integers(0, 300))


def test_verdict_helpers():
    outs = {0: A.NodeOutput(Verdict.ACCEPT, frozenset({0})),
            1: A.NodeOutput(Verdict.ACCEPT, frozenset({2}))}
    assert A.unanimous_verdict(outs) is Verdict.ACCEPT
    assert A.combined_solution(outs) == {0, 2}
    outs[1] = A.NodeOutput(Verdict.NO_K)
    assert A.unanimous_verdict(outs) is None


def test_fraction_rounding_helpers():
    assert A.frac_ceil(Fraction(7, 2)) == 4
    assert A.frac_ceil(3) == 3
    assert A.frac_floor(Fraction(7, 2)) == 3
    assert A.frac_floor(Fraction(-1, 2)) == -1


def test_fingerprint_widths_grow_with_k_and_c():
    assert A.mvc_fp_bits(4, 3) == 7 * 2 + 1
    assert A.maxm_fp_bits(4, 3) == 5 * 2 + 4
    assert A.mvc_fp_bits(8, 3) > A.mvc_fp_bits(4, 3)
    assert A.mvc_fp_bits(4, 5) > A.mvc_fp_bits(4, 3)


# ---------------------------------------------------------------------------
# Exact solvers


@given(random_graph, st.integers(0, 8), st.booleans())
@SETTINGS
def test_kmvc_exact_contract(g, k, randomized):
    res = run(g, A.congest_kmvc_exact(k, randomized, 3), seed=3)
    verdict, sol = C.run_outcome(res)
    C.check_exact(g, Problem.MVC, k, verdict, sol)
    assert res.rounds <= A.kmvc_exact_budget(g.n, k, randomized=randomized)


@given(random_graph, st.integers(0, 8), st.booleans())
@SETTINGS
def test_kmaxm_exact_contract(g, k, randomized):
    res = run(g, A.congest_kmaxm_exact(k, randomized, 3), seed=3)
    verdict, sol = C.run_outcome(res)
    C.check_exact(g, Problem.MAXM, k, verdict, sol)
    assert res.rounds <= A.kmaxm_exact_budget(g.n, k, randomized=randomized)


def test_single_node_graph_short_circuits():
    g = graphs.Graph.build({0}, [])
    for k in (0, 1):
        v, sol = C.run_outcome(run(g, A.congest_kmvc_exact(k)))
        assert v is Verdict.ACCEPT and sol == frozenset()
    v, _ = C.run_outcome(run(g, A.congest_kmaxm_exact(1)))
    assert v is Verdict.NO_K


def test_k_zero_is_the_isolated_vertex_rule():
    v, _ = C.run_outcome(run(graphs.make_path(2), A.congest_kmvc_exact(0)))
    assert v is Verdict.NO_K
    v, sol = C.run_outcome(run(graphs.make_path(2), A.congest_kmaxm_exact(0)))
    assert v is Verdict.ACCEPT and sol == frozenset()


def test_randomized_monte_carlo_mode_still_answers():
    g = graphs.make_clique(5)
    res = run(g, A.congest_kmvc_exact(4, randomized=True, c=3,
                                      collision_mode="monte_carlo"), seed=1)
    verdict, sol = C.run_outcome(res)
    assert verdict is Verdict.ACCEPT


# ---------------------------------------------------------------------------
# Approximate solvers


@given(random_graph, st.integers(1, 8),
       st.sampled_from([Fraction(1, 4), Fraction(1, 2), Fraction(1)]))
@SETTINGS
def test_kmvc_2eps_contract(g, k, eps):
    eps = max(eps, Fraction(1, k))
    res = run(g, A.congest_kmvc_2eps(k, eps), seed=2)
    verdict, sol = C.run_outcome(res)
    C.check_approx(g, Problem.MVC, k, 2 - eps, verdict, sol)
    assert res.rounds <= A.kmvc_2eps_budget(g.n, k, eps)


@given(random_graph, st.integers(1, 8),
       st.sampled_from([Fraction(1, 4), Fraction(1, 2), Fraction(1)]))
@SETTINGS
def test_kmaxm_2eps_contract(g, k, eps):
    eps = max(eps, Fraction(1, k))
    res = run(g, A.congest_kmaxm_2eps(k, eps), seed=2)
    verdict, sol = C.run_outcome(res)
    C.check_approx(g, Problem.MAXM, k, 2 - eps, verdict, sol)
    assert res.rounds <= A.kmaxm_2eps_budget(g.n, k, eps)


def test_2eps_at_eps_one_is_still_sound():
    # eps = 1 means no slack: the relaxed solver must match the exact verdict
    g = graphs.make_cycle(7)  # MVC opt 4
    v, sol = C.run_outcome(run(g, A.congest_kmvc_2eps(4, Fraction(1))))
    assert v is Verdict.ACCEPT and len(sol) <= 4
    v, _ = C.run_outcome(run(g, A.congest_kmvc_2eps(3, Fraction(1))))
    assert v is Verdict.NO_K


# ---------------------------------------------------------------------------
# LOCAL-model solvers


@given(random_graph, st.integers(0, 6))
@SETTINGS
def test_local_dlb_mvc_contract(g, k):
    res = run(g, A.local_dlb_solve(Problem.MVC, k), model=Model.LOCAL)
    verdict, sol = C.run_outcome(res)
    C.check_exact(g, Problem.MVC, k, verdict, sol)
    assert res.rounds <= A.local_dlb_budget(g.n, k, Problem.MVC)


@given(random_graph, st.integers(0, 6),
       st.sampled_from([Problem.MDS, Problem.MEDS]))
@SETTINGS
def test_local_dlb_domination_contract(g, k, problem):
    res = run(g, A.local_dlb_solve(problem, k), model=Model.LOCAL)
    verdict, sol = C.run_outcome(res)
    from distparam import oracles
    try:
        opt = oracles.opt_value(g, problem)
    except oracles.Infeasible:
        assert verdict is Verdict.NO_K
        return
    C.check_exact(g, problem, k, verdict, sol)


@given(random_graph, st.integers(0, 6),
       st.sampled_from([Problem.MAXM, Problem.MAXIS]))
@SETTINGS
def test_local_kmax_greedy_contract(g, k, problem):
    from distparam import oracles
    res = run(g, A.local_kmax_greedy(problem, k), model=Model.LOCAL)
    verdict, sol = C.run_outcome(res)
    opt = oracles.opt_value(g, problem)
    if opt >= k:
        assert verdict is Verdict.ACCEPT
        assert oracles.is_feasible(g, problem, sol)
        assert len(sol) >= k
    else:
        assert verdict is Verdict.NO_K
    assert res.rounds <= A.local_kmax_budget(g.n, k)


# ---------------------------------------------------------------------------
# Greedy matching helper


@given(random_graph, st.integers(1, 5))
@SETTINGS
def test_greedy_matching_is_a_matching_and_grows(g, iters):
    def prog(ctx):
        mate = yield from A.greedy_matching_iterations(ctx, iters)
        return mate

    res = run(g, prog, model=Model.LOCAL)
    mates = res.outputs
    matched = {(min(v, u), max(v, u)) for v, u in mates.items() if u is not None}
    for v, u in mates.items():
        if u is not None:
            assert mates[u] == v, "matching must be mutual"
            assert g.has_edge(v, u)
    # after enough iterations the matching is maximal
    if iters >= g.n // 2 + 1:
        uncovered = {v for v, u in mates.items() if u is None}
        assert not any(g.has_edge(a, b)
                       for a in uncovered for b in uncovered if a < b)
