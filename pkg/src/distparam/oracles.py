"""Centralized brute-force oracles and feasibility predicates.

These are ground truth for tests and for leader-side computation inside the
simulated algorithms. They are exact and deliberately simple; performance work
is limited to the pruning needed for the fixture sizes used in tests
(paths/stars up to a few dozen nodes, cycle constructions up to ~85).
"""

from __future__ import annotations

import itertools
from collections import deque
from enum import Enum

from .graphs import Graph, GraphError, Labeling


class Infeasible(ValueError):
    """The instance admits no feasible solution at all (e.g. open domination
    with an isolated vertex)."""


class Problem(str, Enum):
    MVC = "MVC"
    MAXM = "MaxM"
    MAXIS = "MaxIS"
    MDS = "MDS"
    MEDS = "MEDS"
    MFVS = "MFVS"
    MFES = "MFES"

    @property
    def sense(self) -> str:
        return "max" if self in (Problem.MAXM, Problem.MAXIS) else "min"

    @property
    def solution_kind(self) -> str:
        return "edge" if self in (Problem.MAXM, Problem.MEDS, Problem.MFES) else "vertex"

    @property
    def directed(self) -> bool:
        return self is Problem.MFES


def parse_problem(name: str) -> Problem:
    for p in Problem:
        if p.value.lower() == name.lower():
            return p
    raise ValueError(f"unknown problem {name!r}")


# ---------------------------------------------------------------------------
# Feasibility


def _check_model(g: Graph, problem: Problem) -> None:
    if problem is Problem.MFES and not g.directed:
        raise GraphError("MFES is defined on directed graphs")
    if problem is not Problem.MFES and g.directed:
        raise GraphError(f"{problem.value} is defined on undirected graphs")


def _undirected_has_cycle(g: Graph, removed: frozenset) -> bool:
    keep = g.nodes - removed
    adj = g.adjacency()
    seen: set[int] = set()
    for start in keep:
        if start in seen:
            continue
        # BFS forest; a cross/back edge within a component means a cycle.
        comp_nodes = 0
        comp_edges = 0
        seen.add(start)
        q = deque([start])
        while q:
            v = q.popleft()
            comp_nodes += 1
            for u in adj[v]:
                if u not in keep:
                    continue
                comp_edges += 1
                if u not in seen:
                    seen.add(u)
                    q.append(u)
        if comp_edges // 2 >= comp_nodes:
            return True
    return False


def _directed_has_cycle(nodes: frozenset, arcs: frozenset) -> bool:
    indeg = {v: 0 for v in nodes}
    out: dict[int, list[int]] = {v: [] for v in nodes}
    for a, b in arcs:
        out[a].append(b)
        indeg[b] += 1
    q = deque(v for v in nodes if indeg[v] == 0)
    done = 0
    while q:
        v = q.popleft()
        done += 1
        for u in out[v]:
            indeg[u] -= 1
            if indeg[u] == 0:
                q.append(u)
    return done != len(nodes)


def is_feasible(g: Graph, problem: Problem, solution) -> bool:
    """Exact feasibility predicate for each problem; membership of the
    candidate in V (resp. E) is part of the check."""
    _check_model(g, problem)
    if problem.solution_kind == "vertex":
        sol = frozenset(solution)
        if not sol <= g.nodes:
            return False
    else:
        sol = frozenset(tuple(e) if g.directed else tuple(sorted(e)) for e in solution)
        if not sol <= g.edges:
            return False

    adj = g.adjacency()
    if problem is Problem.MVC:
        return all(u in sol or v in sol for u, v in g.edges)
    if problem is Problem.MAXIS:
        return all(u not in sol or v not in sol for u, v in g.edges)
    if problem is Problem.MDS:
        return all(any(u in sol for u in adj[v]) for v in g.nodes)
    if problem is Problem.MAXM:
        used: set[int] = set()
        for u, v in sol:
            if u in used or v in used:
                return False
            used.update((u, v))
        return True
    if problem is Problem.MEDS:
        covered = set()
        for u, v in sol:
            covered.update((u, v))
        return all(u in covered or v in covered for u, v in g.edges)
    if problem is Problem.MFVS:
        return not _undirected_has_cycle(g, sol)
    if problem is Problem.MFES:
        return not _directed_has_cycle(g.nodes, g.edges - sol)
    raise AssertionError(problem)


# ---------------------------------------------------------------------------
# Exact optimizers


def _mvc_opt(g: Graph) -> frozenset:
    adj = {v: set(ns) for v, ns in g.adjacency().items()}
    best: list = [set(g.nodes)]

    def matching_lb(a: dict[int, set]) -> int:
        used: set[int] = set()
        size = 0
        for v in sorted(a):
            if v in used or not a[v]:
                continue
            for u in sorted(a[v]):
                if u not in used:
                    used.update((v, u))
                    size += 1
                    break
        return size

    def rec(a: dict[int, set], cover: set) -> None:
        while True:
            deg1 = next((v for v in a if len(a[v]) == 1), None)
            if deg1 is None:
                break
            # The neighbor of a pendant vertex is always safe to take.
            u = next(iter(a[deg1]))
            cover = cover | {u}
            for w in a[u]:
                a[w] = a[w] - {u}
            a = {v: ns for v, ns in a.items() if v != u}
        live = {v: ns for v, ns in a.items() if ns}
        if not live:
            if len(cover) < len(best[0]):
                best[0] = set(cover)
            return
        if len(cover) + matching_lb(live) >= len(best[0]):
            return
        v = max(live, key=lambda w: (len(live[w]), -w))

        def without(rem: set) -> dict[int, set]:
            return {w: ns - rem for w, ns in a.items() if w not in rem}

        rec(without({v}), cover | {v})
        rec(without(set(live[v])), cover | set(live[v]))

    rec(adj, set())
    return frozenset(best[0])


def _maxis_opt(g: Graph) -> frozenset:
    adj = {v: set(ns) for v, ns in g.adjacency().items()}
    best: list = [set()]

    def rec(a: dict[int, set], chosen: set) -> None:
        while True:
            easy = next((v for v in a if len(a[v]) <= 1), None)
            if easy is None:
                break
            # A vertex of degree <= 1 is always in some maximum set.
            chosen = chosen | {easy}
            rem = {easy} | a[easy]
            a = {w: ns - rem for w, ns in a.items() if w not in rem}
        if not a:
            if len(chosen) > len(best[0]):
                best[0] = set(chosen)
            return
        if len(chosen) + len(a) <= len(best[0]):
            return
        v = max(a, key=lambda w: (len(a[w]), -w))
        rem = {v} | a[v]
        rec({w: ns - rem for w, ns in a.items() if w not in rem}, chosen | {v})
        rec({w: ns - {v} for w, ns in a.items() if w != v}, chosen)

    rec(adj, set())
    return frozenset(best[0])


def _maxm_tree(g: Graph) -> frozenset:
    """Exact maximum matching on a forest (two-state DP per rooted subtree)."""
    adj = g.adjacency()
    matched: set = set()
    seen: set[int] = set()
    for root in sorted(g.nodes):
        if root in seen:
            continue
        order = []
        parent = {root: None}
        stack = [root]
        while stack:
            v = stack.pop()
            seen.add(v)
            order.append(v)
            for u in adj[v]:
                if u not in parent:
                    parent[u] = v
                    stack.append(u)
        # dp0 = best in subtree with v free, dp1 = best with v matched downward
        dp0: dict[int, int] = {}
        dp1: dict[int, int] = {}
        pick: dict[int, int | None] = {}
        children: dict[int, list[int]] = {v: [] for v in order}
        for v in order[1:]:
            children[parent[v]].append(v)
        for v in reversed(order):
            base = sum(max(dp0[c], dp1[c]) for c in children[v])
            dp0[v] = base
            dp1[v] = -1
            pick[v] = None
            for c in children[v]:
                cand = base - max(dp0[c], dp1[c]) + dp0[c] + 1
                if cand > dp1[v]:
                    dp1[v] = cand
                    pick[v] = c
        # Recover one optimal matching top-down.
        take: dict[int, bool] = {root: dp1[root] > dp0[root]}
        for v in order:
            if take[v]:
                c = pick[v]
                matched.add((min(v, c), max(v, c)))
                for w in children[v]:
                    take[w] = (w != c) and dp1[w] > dp0[w]
            else:
                for w in children[v]:
                    take[w] = dp1[w] > dp0[w]
    return frozenset(matched)


def _maxm_branch(g: Graph) -> frozenset:
    adj = {v: set(ns) for v, ns in g.adjacency().items()}
    best: list = [set()]

    def rec(a: dict[int, set], chosen: set) -> None:
        live = sorted(v for v in a if a[v])
        if not live:
            if len(chosen) > len(best[0]):
                best[0] = set(chosen)
            return
        if len(chosen) + len(live) // 2 <= len(best[0]):
            return
        v = live[0]
        for u in sorted(a[v]):
            rem = {v, u}
            rec({w: ns - rem for w, ns in a.items() if w not in rem},
                chosen | {(min(v, u), max(v, u))})
        rec({w: ns - {v} for w, ns in a.items() if w != v}, chosen)

    rec(adj, set())
    return frozenset(best[0])


def _maxm_opt(g: Graph) -> frozenset:
    if g.m >= g.n:  # any forest has m < n
        if g.n > 18:
            raise GraphError(f"maximum-matching oracle limited to forests or n <= 18, "
                             f"got n={g.n} with cycles")
        return _maxm_branch(g)
    if _undirected_has_cycle(g, frozenset()):
        if g.n > 18:
            raise GraphError(f"maximum-matching oracle limited to forests or n <= 18, "
                             f"got n={g.n} with cycles")
        return _maxm_branch(g)
    return _maxm_tree(g)


def _mds_tree(g: Graph) -> frozenset:
    """Open (total) domination on a forest by four-state subtree DP.

    States: 0 = v in set and dominated, 1 = v in set not yet dominated,
    2 = v out and dominated, 3 = v out not yet dominated.
    """
    INF = 10 ** 9
    adj = g.adjacency()
    chosen: set[int] = set()
    seen: set[int] = set()
    for root in sorted(g.nodes):
        if root in seen:
            continue
        if not adj[root] and len(g.nodes) >= 1:
            raise Infeasible(f"isolated vertex {root} cannot be open-dominated")
        order = []
        parent = {root: None}
        stack = [root]
        while stack:
            v = stack.pop()
            seen.add(v)
            order.append(v)
            for u in adj[v]:
                if u not in parent:
                    parent[u] = v
                    stack.append(u)
        children: dict[int, list[int]] = {v: [] for v in order}
        for v in order[1:]:
            children[parent[v]].append(v)
        dp: dict[int, list[int]] = {}
        choice: dict[int, list[list[int]]] = {}
        for v in reversed(order):
            # before merging any child: in-set costs 1, nothing dominates v yet
            cur = [INF, 1, INF, 0]
            trace: list[list[int]] = [[] for _ in range(4)]
            for c in children[v]:
                nxt = [INF] * 4
                ntr: list[list[int]] = [[] for _ in range(4)]
                for s in range(4):
                    if cur[s] >= INF:
                        continue
                    in_set = s < 2
                    dominated = s % 2 == 0
                    for cs in range(4):
                        if dp[c][cs] >= INF:
                            continue
                        c_in = cs < 2
                        c_dom = cs % 2 == 0
                        if not in_set and not c_dom and not c_in:
                            continue  # child out and undominated with parent out: dead
                        if not in_set and c_in and not c_dom:
                            continue  # child in set must be dominated below or by parent
                        new_dom = dominated or c_in
                        ns = (0 if new_dom else 1) if in_set else (2 if new_dom else 3)
                        cost = cur[s] + dp[c][cs]
                        if cost < nxt[ns]:
                            nxt[ns] = cost
                            ntr[ns] = trace[s] + [cs]
                cur, trace = nxt, ntr
            dp[v] = cur
            choice[v] = trace
        root_states = [s for s in (0, 2) if dp[root][s] < INF]
        if not root_states:
            raise Infeasible("component admits no open-dominating set")
        s0 = min(root_states, key=lambda s: dp[root][s])
        # Walk the recorded child-state choices to extract one optimal set.
        stack2 = [(root, s0)]
        while stack2:
            v, s = stack2.pop()
            if s < 2:
                chosen.add(v)
            for c, cs in zip(children[v], choice[v][s]):
                # A child left undominated is dominated by v (v is in the set).
                stack2.append((c, cs))
    return frozenset(chosen)


def _mds_branch(g: Graph) -> frozenset:
    adj = g.adjacency()
    for v in g.nodes:
        if not adj[v]:
            raise Infeasible(f"isolated vertex {v} cannot be open-dominated")
    max_cover = max(len(adj[v]) for v in g.nodes)
    best: list = [None]

    def rec(chosen: set, undom: frozenset) -> None:
        if not undom:
            if best[0] is None or len(chosen) < len(best[0]):
                best[0] = set(chosen)
            return
        bound = len(chosen) + (len(undom) + max_cover - 1) // max_cover
        if best[0] is not None and bound >= len(best[0]):
            return
        v = min(undom, key=lambda w: (len([u for u in adj[w] if u not in chosen]), w))
        for u in sorted(adj[v]):
            if u in chosen:
                continue
            rec(chosen | {u}, undom - frozenset(adj[u]))

    rec(set(), frozenset(g.nodes))
    if best[0] is None:
        raise Infeasible("no open-dominating set exists")
    return frozenset(best[0])


def _mds_opt(g: Graph) -> frozenset:
    if not _undirected_has_cycle(g, frozenset()):
        return _mds_tree(g)
    return _mds_branch(g)


def _meds_opt(g: Graph) -> frozenset:
    if g.m == 0:
        return frozenset()
    adj = g.adjacency()
    incident = {v: sorted(e for e in g.edges if v in e) for v in g.nodes}
    max_cover = max(len(adj[u]) + len(adj[v]) - 1 for u, v in g.edges)
    best: list = [None]

    def rec(chosen: frozenset, covered: frozenset) -> None:
        undom = [e for e in g.edges if e[0] not in covered and e[1] not in covered]
        if not undom:
            if best[0] is None or len(chosen) < len(best[0]):
                best[0] = chosen
            return
        bound = len(chosen) + (len(undom) + max_cover - 1) // max_cover
        if best[0] is not None and bound >= len(best[0]):
            return
        e = min(undom)
        cands = sorted(set(incident[e[0]]) | set(incident[e[1]]))
        for f in cands:
            rec(chosen | {f}, covered | frozenset(f))

    rec(frozenset(), frozenset())
    return best[0]


def _shortest_undirected_cycle(adj: dict[int, set]) -> list[int] | None:
    best: list[int] | None = None
    for s in sorted(adj):
        # BFS from s; first edge closing back near s gives a short cycle via s.
        parent = {s: None}
        depth = {s: 0}
        q = deque([s])
        while q:
            v = q.popleft()
            if best is not None and depth[v] * 2 >= len(best):
                break
            for u in adj[v]:
                if u == parent[v]:
                    continue
                if u in depth:
                    # walk both endpoints up to the root to form the cycle
                    path_v, path_u = [], []
                    a, b = v, u
                    while a is not None:
                        path_v.append(a)
                        a = parent[a]
                    while b is not None:
                        path_u.append(b)
                        b = parent[b]
                    tail = set(path_v)
                    meet = next(w for w in path_u if w in tail)
                    cyc = path_v[:path_v.index(meet) + 1] + \
                        list(reversed(path_u[:path_u.index(meet)]))
                    if len(set(cyc)) == len(cyc) and (best is None or len(cyc) < len(best)):
                        best = cyc
                else:
                    depth[u] = depth[v] + 1
                    parent[u] = v
                    q.append(u)
    return best


def _prune_undirected(adj: dict[int, set]) -> dict[int, set]:
    adj = {v: set(ns) for v, ns in adj.items()}
    changed = True
    while changed:
        changed = False
        for v in list(adj):
            if len(adj[v]) <= 1:
                for u in adj[v]:
                    adj[u].discard(v)
                del adj[v]
                changed = True
    return adj


def _cycle_packing_lb(adj: dict[int, set]) -> int:
    adj = {v: set(ns) for v, ns in adj.items()}
    count = 0
    while True:
        adj = _prune_undirected(adj)
        cyc = _shortest_undirected_cycle(adj)
        if cyc is None:
            return count
        count += 1
        for v in cyc:
            for u in adj[v]:
                adj[u].discard(v)
            del adj[v]


def _mfvs_opt(g: Graph) -> frozenset:
    best: list = [set(g.nodes)]

    def rec(adj: dict[int, set], chosen: set) -> None:
        adj = _prune_undirected(adj)
        cyc = _shortest_undirected_cycle(adj)
        if cyc is None:
            if len(chosen) < len(best[0]):
                best[0] = set(chosen)
            return
        if len(chosen) + _cycle_packing_lb(adj) >= len(best[0]):
            return
        for v in sorted(cyc, key=lambda w: -len(adj[w])):
            nxt = {w: ns - {v} for w, ns in adj.items() if w != v}
            rec(nxt, chosen | {v})

    rec({v: set(ns) for v, ns in g.adjacency().items()}, set())
    return frozenset(best[0])


def _shortest_directed_cycle(out: dict[int, set]) -> list[tuple[int, int]] | None:
    best: list[tuple[int, int]] | None = None
    for s in sorted(out):
        parent: dict[int, int | None] = {s: None}
        depth = {s: 0}
        q = deque([s])
        while q:
            v = q.popleft()
            if best is not None and depth[v] + 1 >= len(best):
                break
            for u in out[v]:
                if u == s:
                    path = []
                    a = v
                    while parent[a] is not None:
                        path.append((parent[a], a))
                        a = parent[a]
                    cyc = list(reversed(path))
                    cyc.append((v, s))
                    if best is None or len(cyc) < len(best):
                        best = cyc
                elif u not in depth:
                    depth[u] = depth[v] + 1
                    parent[u] = v
                    q.append(u)
    return best


def _prune_directed(out: dict[int, set]) -> dict[int, set]:
    out = {v: set(ns) for v, ns in out.items()}
    changed = True
    while changed:
        changed = False
        indeg: dict[int, int] = {v: 0 for v in out}
        for v in out:
            for u in out[v]:
                indeg[u] += 1
        for v in list(out):
            if not out[v] or indeg[v] == 0:
                del out[v]
                for w in out:
                    out[w].discard(v)
                changed = True
    return out


def _directed_cycle_packing_lb(out: dict[int, set]) -> int:
    out = {v: set(ns) for v, ns in out.items()}
    count = 0
    while True:
        out = _prune_directed(out)
        cyc = _shortest_directed_cycle(out)
        if cyc is None:
            return count
        count += 1
        for a, b in cyc:
            out[a].discard(b)


def _mfes_opt(g: Graph) -> frozenset:
    best: list = [set(g.edges)]

    def rec(out: dict[int, set], chosen: set) -> None:
        out = _prune_directed(out)
        cyc = _shortest_directed_cycle(out)
        if cyc is None:
            if len(chosen) < len(best[0]):
                best[0] = set(chosen)
            return
        if len(chosen) + _directed_cycle_packing_lb(out) >= len(best[0]):
            return
        for (a, b) in cyc:
            nxt = {w: (ns - {b} if w == a else set(ns)) for w, ns in out.items()}
            rec(nxt, chosen | {(a, b)})

    out0: dict[int, set] = {v: set() for v in g.nodes}
    for a, b in g.edges:
        out0[a].add(b)
    rec(out0, set())
    return frozenset(best[0])


def opt_solution(g: Graph, problem: Problem) -> frozenset:
    """One optimal solution, deterministic for a fixed input."""
    _check_model(g, problem)
    sol = {
        Problem.MVC: _mvc_opt,
        Problem.MAXM: _maxm_opt,
        Problem.MAXIS: _maxis_opt,
        Problem.MDS: _mds_opt,
        Problem.MEDS: _meds_opt,
        Problem.MFVS: _mfvs_opt,
        Problem.MFES: _mfes_opt,
    }[problem](g)
    assert is_feasible(g, problem, sol)
    return sol


def opt_value(g: Graph, problem: Problem) -> int:
    return len(opt_solution(g, problem))


def has_k_solution(g: Graph, problem: Problem, k: int) -> bool:
    try:
        v = opt_value(g, problem)
    except Infeasible:
        return False
    return v <= k if problem.sense == "min" else v >= k


# ---------------------------------------------------------------------------
# Closed-form reference optima on the path-star family


def opt_reference_sets(labeling: Labeling, problem: Problem) -> frozenset:
    """Closed-form optimal solutions on the path-star with ell = 2x+3, x a
    multiple of 6. Indices are 0-based positions along each path."""
    r, ell = labeling.r, labeling.ell
    if ell < 3 or (ell - 3) % 2 != 0 or ((ell - 3) // 2) % 6 != 0:
        raise GraphError(f"reference sets need ell = 2x+3 with 6 | x, got ell={ell}")
    x = (ell - 3) // 2
    m = labeling.mapping()
    v0 = m[("v0",)]
    if problem is Problem.MVC:
        return frozenset(m[("path", i, 2 * j)]
                         for i in range(r) for j in range(x + 2))
    if problem is Problem.MAXM:
        return frozenset(
            tuple(sorted((m[("path", i, 2 * j)], m[("path", i, 2 * j + 1)])))
            for i in range(r) for j in range(x + 2))
    if problem is Problem.MAXIS:
        return frozenset({v0} | {m[("path", i, 2 * j + 1)]
                                 for i in range(r) for j in range(x + 2)})
    if problem is Problem.MDS:
        # One path must spend a vertex at position 0 to dominate the center.
        core = {m[("path", i, p)]
                for i in range(r)
                for j in range((x + 2) // 2)
                for p in (4 * j + 1, 4 * j + 2)}
        return frozenset(core | {m[("path", 0, 0)]})
    if problem is Problem.MEDS:
        core = {
            tuple(sorted((m[("path", i, 3 * j + 1)], m[("path", i, 3 * j + 2)])))
            for i in range(r) for j in range(2 * x // 3 + 1)}
        core.add(tuple(sorted((v0, m[("path", 0, 0)]))))
        return frozenset(core)
    raise GraphError(f"no path-star reference set for {problem.value}")


def reference_size_formula(r: int, ell: int, problem: Problem) -> int:
    x = (ell - 3) // 2
    return {
        Problem.MVC: r * (x + 2),
        Problem.MAXM: r * (x + 2),
        Problem.MAXIS: r * (x + 2) + 1,
        Problem.MDS: r * (x + 2) + 1,
        Problem.MEDS: r * (2 * x // 3 + 1) + 1,
    }[problem]
