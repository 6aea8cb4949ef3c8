"""Parameter-search drivers: exactness, ratio modes, budgets, fallbacks."""

from __future__ import annotations

import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from distparam import graphs, oracles, search
from distparam.oracles import Problem
from distparam.search import (DuplicateFallback, FallbackNotRegistered,
                              SearchConfig, register_fallback, solve)

SETTINGS = settings(max_examples=40, deadline=None)

random_graph = st.builds(
    lambda n, seed: graphs.make_random_connected(n, 0.4, seed=seed),
    st.integers(2, 8), st.integers(0, 300))


def test_config_validation():
    with pytest.raises(ValueError):
        SearchConfig(Problem.MDS)  # only MVC / MaxM are searchable
    with pytest.raises(ValueError):
        SearchConfig(Problem.MVC, "one_plus_eps", eps=Fraction(0))
    with pytest.raises(ValueError):
        SearchConfig(Problem.MVC, "two_minus_eps", eps=Fraction(3, 4))
    with pytest.raises(ValueError):
        SearchConfig(Problem.MVC, "no_such_mode")
    SearchConfig(Problem.MAXM, "two_minus_eps", eps=Fraction(1, 2))


@given(random_graph, st.sampled_from([Problem.MVC, Problem.MAXM]))
@SETTINGS
def test_exact_mode_finds_the_optimum(g, problem):
    r = solve(g, SearchConfig(problem, "exact"))
    assert r.size == oracles.opt_value(g, problem)
    assert oracles.is_feasible(g, problem, r.solution)
    assert r.metrics.total_rounds <= r.metrics.budget_sum


@given(random_graph, st.sampled_from([Problem.MVC, Problem.MAXM]))
@SETTINGS
def test_one_plus_eps_ratio(g, problem):
    opt = oracles.opt_value(g, problem)
    r = solve(g, SearchConfig(problem, "one_plus_eps", eps=Fraction(1, 2)))
    assert oracles.is_feasible(g, problem, r.solution)
    if problem.sense == "min":
        assert Fraction(r.size) <= Fraction(3, 2) * opt
    else:
        assert Fraction(r.size) >= Fraction(2, 3) * opt
    assert r.metrics.total_rounds <= r.metrics.budget_sum


@given(random_graph, st.sampled_from([Problem.MVC, Problem.MAXM]))
@SETTINGS
def test_two_minus_eps_ratio(g, problem):
    opt = oracles.opt_value(g, problem)
    r = solve(g, SearchConfig(problem, "two_minus_eps", eps=Fraction(1, 2)))
    assert oracles.is_feasible(g, problem, r.solution)
    if problem.sense == "min":
        assert Fraction(r.size) <= Fraction(3, 2) * opt
    else:
        assert Fraction(r.size) >= Fraction(2, 3) * opt
    assert r.metrics.total_rounds <= r.metrics.budget_sum


@given(random_graph, st.sampled_from([Problem.MVC, Problem.MAXM]))
@SETTINGS
def test_adaptive_sqrt_ratio(g, problem):
    opt = oracles.opt_value(g, problem)
    r = solve(g, SearchConfig(problem, "adaptive_sqrt"))
    assert oracles.is_feasible(g, problem, r.solution)
    if opt > 0:
        bound = 2 - 1 / math.sqrt(opt)
        if problem.sense == "min":
            assert r.size <= bound * opt + 1e-9
        else:
            assert r.size >= opt / bound - 1e-9
    assert r.metrics.total_rounds <= r.metrics.budget_sum


@given(random_graph, st.sampled_from([Problem.MVC, Problem.MAXM]))
@SETTINGS
def test_hybrid_is_a_2_approximation(g, problem):
    opt = oracles.opt_value(g, problem)
    r = solve(g, SearchConfig(problem, "hybrid"))
    assert oracles.is_feasible(g, problem, r.solution)
    if problem.sense == "min":
        assert r.size <= 2 * opt
    elif opt:
        assert 2 * r.size >= opt


def test_hybrid_switches_to_the_fallback_above_the_threshold():
    # a long path has MVC optimum n/2, far above the sqrt(n) doubling cutoff
    g = graphs.make_path(30)
    r = solve(g, SearchConfig(Problem.MVC, "hybrid"))
    assert r.metrics.fallback_used
    assert oracles.is_feasible(g, Problem.MVC, r.solution)
    assert r.size <= 2 * oracles.opt_value(g, Problem.MVC)


def test_one_plus_eps_naive_escape_on_tiny_graphs():
    # when the probe budget dwarfs collect-everything, the driver collects
    g = graphs.make_path(2)
    r = solve(g, SearchConfig(Problem.MVC, "one_plus_eps", eps=Fraction(1, 8)))
    assert r.size == 1
    assert r.metrics.naive_used


def test_metrics_record_the_probes():
    g = graphs.make_clique(6)
    r = solve(g, SearchConfig(Problem.MVC, "exact"))
    assert r.metrics.probes
    assert all(p.rounds <= p.budget for p in r.metrics.probes)
    assert 5 in r.metrics.visited_ks  # the optimum itself must be probed


def test_fallback_registry_guards():
    with pytest.raises(FallbackNotRegistered):
        solve(graphs.make_path(4),
              SearchConfig(Problem.MVC, "hybrid", alpha=Fraction(7)))
    with pytest.raises(DuplicateFallback):
        register_fallback(Problem.MVC, Fraction(2),
                          search.fallback_maximal_matching(Problem.MVC),
                          search._default_threshold)
    # replace=True swaps the entry and keeps hybrid working
    register_fallback(Problem.MVC, Fraction(2),
                      search.fallback_maximal_matching(Problem.MVC),
                      search._default_threshold, replace=True)
    r = solve(graphs.make_path(20), SearchConfig(Problem.MVC, "hybrid"))
    assert oracles.is_feasible(graphs.make_path(20), Problem.MVC, r.solution)


def test_randomized_search_agrees_with_oracle():
    for seed in range(5):
        g = graphs.make_random_connected(7, 0.4, seed=900 + seed)
        r = solve(g, SearchConfig(Problem.MVC, "exact", randomized=True,
                                  seed=seed))
        assert r.size == oracles.opt_value(g, Problem.MVC)
