"""Adversarial experiments for bounded-round node programs.

Two attack surfaces, both empirical (they test programs, they prove nothing):

* segment reversals on the path-star construction - a program that halts
  within x rounds sees bit-identical views at the designated middle nodes
  before and after a reversal, so it must err on one orientation;
* cycle-star versus its tree variant - within ``d // 2 - 2`` rounds the
  hub-adjacent nodes cannot tell a long cycle from a broken one, so any
  feedback-set program pays on one of the two inputs.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from . import oracles
from .algorithms import NodeOutput, Verdict
from .engine import Model, RoundBudgetExceeded, run
from .graphs import (GraphError, Labeling, cycle_star_ids,
                     default_path_star_labeling, make_cycle_star,
                     make_cycle_star_tree, path_star_graph, reverse_segment)
from .oracles import Problem
from .primitives import (K_EXCH, broadcast_records, collect_graph, exchange,
                         leader_and_bfs)

# Segment reversed by the indistinguishability argument, per problem.
SEGMENT_FOR = {
    Problem.MVC: "A", Problem.MAXM: "A", Problem.MAXIS: "A",
    Problem.MDS: "B", Problem.MEDS: "B",
}

EXHAUSTIVE_LIMIT = 12


# ---------------------------------------------------------------------------
# View serialization


def node_view(g, v: int, depth: int):
    """The depth-hop view of v: its id plus the sorted views of its neighbors
    one hop shallower (unfolded, so walks may backtrack). Directed graphs tag
    each branch with the arc orientation as seen from the parent."""
    adj = g.adjacency()
    out = g.out_adjacency() if g.directed else None

    def rec(u: int, t: int):
        if t == 0:
            return (u,)
        branches = []
        for w in adj[u]:
            if g.directed:
                if w in out[u]:
                    branches.append((1, rec(w, t - 1)))
                if u in out[w]:
                    branches.append((0, rec(w, t - 1)))
            else:
                branches.append((0, rec(w, t - 1)))
        return (u, tuple(sorted(branches)))

    return rec(v, depth)


def serialize_view(g, v: int, depth: int) -> bytes:
    return repr(node_view(g, v, depth)).encode()


def middle_position(x: int, segment: str) -> int:
    """Path position whose x-hop view survives the segment reversal."""
    if segment not in ("A", "B"):
        raise ValueError(f"segment must be A or B, not {segment!r}")
    return x if segment == "A" else x + 1


# ---------------------------------------------------------------------------
# Reports


@dataclass
class InputRecord:
    subset: frozenset
    solution_size: int
    reference_size: int
    feasible: bool
    per_path_solver: dict
    per_path_reference: dict
    per_path_error: dict
    additive_error: int


@dataclass
class AdversaryReport:
    problem: Problem
    params: dict
    mode: str
    empirical: bool = True
    disqualified: bool = False
    detail: str = ""
    inputs: list = field(default_factory=list)
    max_additive_error: int = 0
    worst_subset: frozenset | None = None
    both_orientations_optimal: dict | None = None

    @property
    def worst_input(self) -> InputRecord | None:
        for rec in self.inputs:
            if rec.subset == self.worst_subset:
                return rec
        return None


def _extract_solution(outputs: dict) -> frozenset:
    sol: set = set()
    for o in outputs.values():
        if isinstance(o, NodeOutput):
            sol.update(o.members)
        elif o is not None:
            sol.update(o)
    return frozenset(sol)


def _restricted_size(solution, path_ids: frozenset, edge_problem: bool) -> int:
    if edge_problem:
        return sum(1 for e in solution if path_ids.intersection(e))
    return sum(1 for v in solution if v in path_ids)


def _measure(labeling: Labeling, problem: Problem, solution: frozenset,
             subset: frozenset) -> InputRecord:
    g = path_star_graph(labeling)
    ref = oracles.opt_reference_sets(labeling, problem)
    edge_problem = problem.solution_kind == "edge"
    m = labeling.mapping()
    per_s, per_r, per_e = {}, {}, {}
    for i in range(labeling.r):
        ids = frozenset(m[("path", i, j)] for j in range(labeling.ell + 1))
        s = _restricted_size(solution, ids, edge_problem)
        o = _restricted_size(ref, ids, edge_problem)
        per_s[i], per_r[i] = s, o
        per_e[i] = (s - o) if problem.sense == "min" else (o - s)
    feasible = oracles.is_feasible(g, problem, solution)
    if problem.sense == "min":
        err = len(solution) - len(ref)
    else:
        err = len(ref) - len(solution)
    return InputRecord(subset=subset, solution_size=len(solution),
                       reference_size=len(ref), feasible=feasible,
                       per_path_solver=per_s, per_path_reference=per_r,
                       per_path_error=per_e, additive_error=err)


def _apply_subset(base: Labeling, subset, segment: str) -> Labeling:
    lab = base
    for i in sorted(subset):
        lab = reverse_segment(lab, i, segment)
    return lab


def reversal_attack(program, problem: Problem, r: int, x: int,
                    mode: str = "per_path", model: Model = Model.LOCAL,
                    beta: int = 8, seed: int = 0,
                    round_budget: int | None = None) -> AdversaryReport:
    """Run `program` on the path-star with ell = 2x+3 under segment reversals,
    within `round_budget` rounds (default: x). Exceeding the budget
    disqualifies the program; it is not an error."""
    if problem not in SEGMENT_FOR:
        raise GraphError(f"no reversal argument for {problem.value}")
    if mode not in ("per_path", "exhaustive"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "exhaustive" and r > EXHAUSTIVE_LIMIT:
        raise ValueError(f"exhaustive mode needs r <= {EXHAUSTIVE_LIMIT}")
    ell = 2 * x + 3
    budget = x if round_budget is None else round_budget
    segment = SEGMENT_FOR[problem]
    base = default_path_star_labeling(r, ell)
    report = AdversaryReport(problem=problem, mode=mode,
                             params={"r": r, "x": x, "ell": ell,
                                     "segment": segment, "budget": budget})
    if mode == "per_path":
        subsets = [frozenset()] + [frozenset({i}) for i in range(r)]
    else:
        subsets = [frozenset(c for c in range(r) if mask >> c & 1)
                   for mask in range(1 << r)]
    records: dict[frozenset, InputRecord] = {}
    for subset in subsets:
        lab = _apply_subset(base, subset, segment)
        g = path_star_graph(lab)
        try:
            res = run(g, program, model=model, beta=beta, seed=seed,
                      round_budget=budget)
        except RoundBudgetExceeded as exc:
            report.disqualified = True
            report.detail = f"program overran the {budget}-round budget: {exc}"
            return report
        rec = _measure(lab, problem, _extract_solution(res.outputs), subset)
        records[subset] = rec
        report.inputs.append(rec)
        if rec.feasible and rec.additive_error >= report.max_additive_error:
            if report.worst_subset is None \
                    or rec.additive_error > report.max_additive_error:
                report.max_additive_error = rec.additive_error
                report.worst_subset = subset
    if mode == "per_path":
        base_rec = records[frozenset()]
        report.both_orientations_optimal = {
            i: (base_rec.per_path_error[i] == 0
                and records[frozenset({i})].per_path_error[i] == 0)
            for i in range(r)}
    return report


class ReversalSampler:
    """Seed-deterministic uniform sampler over the 2^r reversal subsets."""

    def __init__(self, r: int, x: int, problem: Problem, seed: int):
        if problem not in SEGMENT_FOR:
            raise GraphError(f"no reversal argument for {problem.value}")
        self.r = r
        self.x = x
        self.ell = 2 * x + 3
        self.problem = problem
        self.segment = SEGMENT_FOR[problem]
        self._rng = random.Random(seed)
        self._base = default_path_star_labeling(r, self.ell)

    def sample(self) -> tuple[frozenset, Labeling]:
        mask = self._rng.getrandbits(self.r)
        subset = frozenset(i for i in range(self.r) if mask >> i & 1)
        return subset, _apply_subset(self._base, subset, self.segment)

    def __iter__(self):
        while True:
            yield self.sample()


def random_reversal_distribution(r: int, x: int, problem: Problem,
                                 seed: int) -> ReversalSampler:
    return ReversalSampler(r, x, problem, seed)


# ---------------------------------------------------------------------------
# Cycle-star vs tree


def cycle_vs_tree_attack(program, k: int, t: int, d: int,
                         round_cap: int | None = None,
                         problem: Problem = Problem.MFVS,
                         model: Model = Model.LOCAL, beta: int = 8,
                         seed: int = 0) -> AdversaryReport:
    """Run a feedback-set program on the cycle-star and on its tree variant
    under the indistinguishability round cap; report hub-adjacent outputs and
    the additive error paid on at least one of the two inputs."""
    if problem not in (Problem.MFVS, Problem.MFES):
        raise GraphError(f"cycle-star attack expects MFVS or MFES, not {problem.value}")
    cap = (d // 2 - 2) if round_cap is None else round_cap
    directed = problem is Problem.MFES
    g_cyc, meta = make_cycle_star(k, t, d, directed=directed)
    g_tree = make_cycle_star_tree(k, t, d, directed=directed)
    ids = cycle_star_ids(k, t, d)
    report = AdversaryReport(problem=problem, mode="cycle_vs_tree",
                             params={"k": k, "t": t, "d": d, "round_cap": cap})
    sols = {}
    for name, g in (("cycle", g_cyc), ("tree", g_tree)):
        try:
            res = run(g, program, model=model, beta=beta, seed=seed,
                      round_budget=cap)
        except RoundBudgetExceeded as exc:
            report.disqualified = True
            report.detail = f"{name}: program overran the {cap}-round cap: {exc}"
            return report
        sols[name] = _extract_solution(res.outputs)
    # error on the cycle input: hub groups still containing an unbroken cycle
    # (one hub vertex repairs a whole group) plus any excess over the optimum
    unhit_groups = 0
    for i in range(k):
        broken_all = True
        for j in range(t):
            cyc_nodes = {ids[("hub", i)]} | {ids[("cyc", i, j, l)]
                                             for l in range(d)}
            if problem is Problem.MFVS:
                hit = bool(sols["cycle"] & cyc_nodes)
            else:
                hit = any(set(e) & cyc_nodes == set(e) or
                          (set(e) & cyc_nodes and ids[("v'",)] in e)
                          for e in sols["cycle"])
            if not hit:
                broken_all = False
        if not broken_all:
            unhit_groups += 1
    err_cycle = unhit_groups + max(0, len(sols["cycle"]) - k)
    err_tree = len(sols["tree"])  # the tree needs nothing at all
    hubs = [ids[("hub", i)] for i in range(k)]

    def hub_members(sol):
        if problem is Problem.MFVS:
            return {h: (h in sol) for h in hubs}
        return {h: any(h in e for e in sol) for h in hubs}

    report.inputs = [
        InputRecord(subset=frozenset({"cycle"}), solution_size=len(sols["cycle"]),
                    reference_size=meta.opt_sizes[problem.value],
                    feasible=oracles.is_feasible(g_cyc, problem, sols["cycle"]),
                    per_path_solver=hub_members(sols["cycle"]),
                    per_path_reference={h: True for h in hubs},
                    per_path_error={}, additive_error=err_cycle),
        InputRecord(subset=frozenset({"tree"}), solution_size=len(sols["tree"]),
                    reference_size=0,
                    feasible=oracles.is_feasible(g_tree, problem, sols["tree"]),
                    per_path_solver=hub_members(sols["tree"]),
                    per_path_reference={h: False for h in hubs},
                    per_path_error={}, additive_error=err_tree),
    ]
    report.max_additive_error = max(err_cycle, err_tree)
    report.worst_subset = frozenset(
        {"cycle"} if err_cycle >= err_tree else {"tree"})
    return report


def cycle_vs_tree_views_equal(k: int, t: int, d: int, depth: int,
                              problem: Problem = Problem.MFVS) -> bool:
    """True when every hub node's depth-hop view matches between the
    cycle-star and its tree variant."""
    directed = problem is Problem.MFES
    g_cyc, _ = make_cycle_star(k, t, d, directed=directed)
    g_tree = make_cycle_star_tree(k, t, d, directed=directed)
    ids = cycle_star_ids(k, t, d)
    return all(
        serialize_view(g_cyc, ids[("hub", i)], depth)
        == serialize_view(g_tree, ids[("hub", i)], depth)
        for i in range(k))


# ---------------------------------------------------------------------------
# Reference programs to point the harness at


def truncated_greedy_mvc(x: int):
    """Vertex cover from at most x rounds: greedy local-minimum matching for
    as many iterations as fit, then matched vertices plus the lower-id
    endpoint of every edge left uncovered."""
    from .algorithms import greedy_matching_iterations

    iters = max(0, (x - 2) // 2)

    def prog(ctx):
        me = ctx.node_id
        mate = yield from greedy_matching_iterations(ctx, iters)
        bits = yield from exchange(ctx, 1 if mate is not None else 0,
                                   field_width=1)
        in_cover = mate is not None
        if not in_cover:
            for u in ctx.neighbors:
                if bits.get(u, (1,))[0] == 0 and me < u:
                    in_cover = True
                    break
        members = frozenset({me}) if in_cover else frozenset()
        return NodeOutput(Verdict.ACCEPT, members)

    return prog


def collect_and_solve_reference(problem: Problem, diam_bound: int):
    """Unbounded-information reference: leader collects the graph, solves it
    optimally, broadcasts membership. Needs about 4*diam_bound rounds."""

    def prog(ctx):
        me = ctx.node_id
        d = max(diam_bound, 1)
        tree = yield from leader_and_bfs(ctx, d)
        g = yield from collect_graph(ctx, tree, d + 2)
        payload = []
        if tree.is_root:
            sol = oracles.opt_solution(g, problem)
            payload = sorted(sol) if problem.solution_kind == "edge" \
                else sorted((v,) for v in sol)
        arity = 2 if problem.solution_kind == "edge" else 1
        mem = yield from broadcast_records(ctx, tree, payload, arity, d + 2)
        if arity == 1:
            members = frozenset({me}) if (me,) in mem else frozenset()
        else:
            members = frozenset(e for e in mem if me in e)
        return NodeOutput(Verdict.ACCEPT, members)

    return prog


def degree_threshold_program(threshold: int = 3):
    """Zero-round demo program: join the solution iff own degree >= threshold
    (on the cycle-star this selects exactly the hub side)."""

    def prog(ctx):
        members = frozenset({ctx.node_id}) if ctx.degree >= threshold \
            else frozenset()
        return NodeOutput(Verdict.ACCEPT, members)
        yield  # never reached; makes prog a generator

    return prog
