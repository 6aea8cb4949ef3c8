"""Distributed parameterized algorithms.

Each public function returns a node-program factory for the engine. Verdicts
are unanimous across nodes; Accept carries per-node membership (own id for
vertex problems, incident solution edges for edge problems).

Conventions: vertices tie-break by identifier, edges by (min, max) endpoint
pair; all sub-phase durations are functions of (n, k, beta) only, never of
data, so composed programs stay in lockstep.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

from . import oracles
from .engine import Model, NodeContext, id_width
from .graphs import Graph
from .oracles import Infeasible, Problem
from .primitives import (
    DiameterVerdict, K_EXCH, K_NOTIFY, Tree, broadcast_records, collect_graph,
    diameter_probe, exchange, leader_and_bfs, pipelined_upcast,
    bounded_upcast_min, record_capacity, threshold_count, upcast_duration,
)


class Verdict(str, Enum):
    ACCEPT = "Accept"
    NO_K = "NoKSolution"


@dataclass(frozen=True)
class NodeOutput:
    verdict: Verdict
    members: frozenset = frozenset()


def unanimous_verdict(outputs: dict) -> Verdict | None:
    vs = {o.verdict for o in outputs.values()}
    return vs.pop() if len(vs) == 1 else None


def combined_solution(outputs: dict) -> frozenset:
    out: set = set()
    for o in outputs.values():
        out.update(o.members)
    return frozenset(out)


def frac_ceil(x) -> int:
    x = Fraction(x)
    return -((-x.numerator) // x.denominator)


def frac_floor(x) -> int:
    x = Fraction(x)
    return x.numerator // x.denominator


def mvc_fp_bits(k: int, c: int) -> int:
    return max(1, (c + 4) * max(0, math.ceil(math.log2(k))) + 1) if k >= 1 else 1


def maxm_fp_bits(k: int, c: int) -> int:
    return max(1, (c + 2) * max(0, math.ceil(math.log2(k))) + 4) if k >= 1 else 4


DLB_C = {Problem.MVC: 2, Problem.MDS: 3, Problem.MEDS: 3}


# ---------------------------------------------------------------------------
# Shared greedy local-minimum iterations (2 rounds each)


def greedy_matching_iterations(ctx: NodeContext, iters: int, mate: int | None = None,
                               active: bool = True):
    """`iters` rounds of: every unmatched edge that is the identifier-least
    eligible edge at both endpoints joins the matching."""
    me = ctx.node_id
    for _ in range(iters):
        elig = active and mate is None
        bits = yield from exchange(ctx, 1 if elig else 0, field_width=1)
        cands = [u for u in ctx.neighbors if bits.get(u, (0,))[0] == 1]
        prop = None
        if elig and cands:
            prop = min(tuple(sorted((me, u))) for u in cands)
        out = {}
        if prop is not None:
            m = ctx.msg(K_EXCH, prop[0], prop[1])
            out = {u: m for u in ctx.neighbors}
        inbox = yield out
        if prop is not None:
            partner = prop[0] if prop[1] == me else prop[1]
            msgs = inbox.get(partner, [])
            if any(m.kind == K_EXCH and m.fields == prop for m in msgs):
                mate = partner
    return mate


def greedy_mis_iterations(ctx: NodeContext, iters: int):
    me = ctx.node_id
    in_set = False
    alive = True  # not in the set and no neighbor in it
    for _ in range(iters):
        bits = yield from exchange(ctx, 1 if alive else 0, field_width=1)
        alive_nbrs = [u for u in ctx.neighbors if bits.get(u, (0,))[0] == 1]
        join = alive and (not alive_nbrs or me < min(alive_nbrs))
        inbox = yield from exchange(ctx, 1 if join else 0, field_width=1)
        if join:
            in_set, alive = True, False
        elif alive and any(inbox.get(u, (0,))[0] == 1 for u in ctx.neighbors):
            alive = False
    return in_set


# ---------------------------------------------------------------------------
# LOCAL algorithms


def _broadcast_verdict_and_members(ctx, tree, ok, payload, arity, bound,
                                   field_width=None):
    """Fixed-round verdict + member broadcast; every node returns (ok, list)."""
    fw = id_width(ctx.n) if field_width is None else field_width
    cap1 = record_capacity(ctx, 1)
    capm = record_capacity(ctx, arity * fw)
    okrec = yield from broadcast_records(
        ctx, tree, [(1 if ok else 0,)] if tree.is_root else [],
        1, upcast_duration(tree.depth_bound, 1, cap1), field_width=1)
    mem = yield from broadcast_records(
        ctx, tree, payload if tree.is_root else [],
        arity, upcast_duration(tree.depth_bound, bound, capm), field_width=fw)
    return okrec[0][0] == 1, mem


def local_dlb_solve(problem: Problem, k: int):
    """LOCAL solver for minimization problems whose optimum grows with the
    diameter: probe, then a leader collects the graph and solves exactly."""
    c = DLB_C[problem]
    arity = 2 if problem.solution_kind == "edge" else 1

    def prog(ctx):
        me = ctx.node_id
        if k == 0:
            if problem is Problem.MDS:
                return NodeOutput(Verdict.NO_K)
            ok = ctx.degree == 0
            return NodeOutput(Verdict.ACCEPT if ok else Verdict.NO_K)
        v = yield from diameter_probe(ctx, c * k)
        if v is DiameterVerdict.LARGE:
            return NodeOutput(Verdict.NO_K)
        tree = yield from leader_and_bfs(ctx, 2 * c * k)
        g = yield from collect_graph(ctx, tree, tree.depth_bound + 2)
        ok, payload = False, []
        if tree.is_root:
            try:
                sol = oracles.opt_solution(g, problem)
                if len(sol) <= k:
                    ok = True
                    payload = sorted(sol) if arity == 2 else sorted((x,) for x in sol)
            except Infeasible:
                pass
        ok, mem = yield from _broadcast_verdict_and_members(
            ctx, tree, ok, payload, arity, ctx.n)
        if not ok:
            return NodeOutput(Verdict.NO_K)
        if arity == 1:
            members = frozenset({me}) if (me,) in mem else frozenset()
        else:
            members = frozenset(e for e in mem if me in e)
        return NodeOutput(Verdict.ACCEPT, members)

    return prog


def local_kmax_greedy(problem: Problem, k: int):
    """LOCAL solver for k-MaxM / k-MaxIS: collect-and-solve when the diameter
    is small, otherwise k local-minimum greedy iterations."""
    if problem not in (Problem.MAXM, Problem.MAXIS):
        raise ValueError(f"greedy maximization solver does not handle {problem}")
    arity = 2 if problem is Problem.MAXM else 1

    def prog(ctx):
        me = ctx.node_id
        if k == 0:
            return NodeOutput(Verdict.ACCEPT)
        v = yield from diameter_probe(ctx, 2 * k)
        if v is DiameterVerdict.SMALL:
            tree = yield from leader_and_bfs(ctx, 4 * k)
            g = yield from collect_graph(ctx, tree, tree.depth_bound + 2)
            ok, payload = False, []
            if tree.is_root:
                sol = oracles.opt_solution(g, problem)
                if len(sol) >= k:
                    ok = True
                    payload = sorted(sol) if arity == 2 else sorted((x,) for x in sol)
            ok, mem = yield from _broadcast_verdict_and_members(
                ctx, tree, ok, payload, arity, ctx.n)
            if not ok:
                return NodeOutput(Verdict.NO_K)
            if arity == 1:
                members = frozenset({me}) if (me,) in mem else frozenset()
            else:
                members = frozenset(e for e in mem if me in e)
            return NodeOutput(Verdict.ACCEPT, members)
        if problem is Problem.MAXM:
            mate = yield from greedy_matching_iterations(ctx, k)
            members = frozenset({tuple(sorted((me, mate)))}) if mate is not None \
                else frozenset()
        else:
            in_set = yield from greedy_mis_iterations(ctx, k)
            members = frozenset({me}) if in_set else frozenset()
        return NodeOutput(Verdict.ACCEPT, members)

    return prog


# ---------------------------------------------------------------------------
# CONGEST k-MVC


def kmvc_core(ctx: NodeContext, tree: Tree, k: int, active: bool = True,
              randomized: bool = False, c: int = 3,
              collision_mode: str = "detect"):
    """Kernelize-and-collect core: high-degree forcing to fixpoint, kernel
    edge-count gate, kernel collection (fingerprinted when randomized), leader
    solve, member broadcast, final size validation.

    Returns (Verdict, in_cover). Communication runs over the whole graph and
    the provided tree; `active=False` nodes behave as already-removed.
    """
    ctx.phase("kernel")
    me = ctx.node_id
    iw = id_width(ctx.n)
    forced = False
    forced_total = 0
    while True:
        live = active and not forced
        bits = yield from exchange(ctx, 1 if live else 0, field_width=1)
        live_nbrs = [u for u in ctx.neighbors if bits.get(u, (0,))[0] == 1]
        newly = False
        if live and len(live_nbrs) > k:
            forced = True
            newly = True
        total, exceeded, changed = yield from threshold_count(
            ctx, tree, 1 if forced else 0, k, bit=newly)
        if exceeded:
            return Verdict.NO_K, False
        forced_total = total
        if not changed:
            break
    live = active and not forced
    bits = yield from exchange(ctx, 1 if live else 0, field_width=1)
    live_nbrs = [u for u in ctx.neighbors if bits.get(u, (0,))[0] == 1]
    in_kernel = live and bool(live_nbrs)
    k2 = k - forced_total
    own_edges = [(me, u) for u in live_nbrs if u > me] if in_kernel else []
    total_e, exceeded_e, _ = yield from threshold_count(
        ctx, tree, len(own_edges), k * k2)
    if exceeded_e:
        return Verdict.NO_K, False

    # Collection. Randomized mode names kernel nodes by short fingerprints.
    edge_bound = k * k2 + 1
    use_fp = False
    fp = me
    names = {}
    if randomized:
        # a fingerprint wider than an id would not save bandwidth anyway
        b = min(mvc_fp_bits(k, c), iw)
        fp = ctx.rng.getrandbits(b)
        ctx.phase("collect_kernel")
        nb = yield from exchange(ctx, fp, field_width=b)
        names = {u: nb[u][0] for u in ctx.neighbors if u in nb}
        use_fp = True
        if collision_mode == "detect":
            own = [(fp,)] if in_kernel else []
            cap1 = record_capacity(ctx, b)
            got_fp = yield from pipelined_upcast(
                ctx, tree, own, 1,
                upcast_duration(tree.depth_bound, k + k * k + 1, cap1),
                field_width=b)
            dup = tree.is_root and len(got_fp) != len(set(got_fp))
            flag = yield from broadcast_records(
                ctx, tree, [(1 if dup else 0,)] if tree.is_root else [], 1,
                upcast_duration(tree.depth_bound, 1, record_capacity(ctx, 1)),
                field_width=1)
            if flag[0][0] == 1:
                use_fp = False  # collision: redo collection with identifiers
    w = min(mvc_fp_bits(k, c), iw) if use_fp else iw
    ctx.phase("collect_kernel")
    if use_fp:
        records = [(fp, names[u]) for _, u in own_edges]
    else:
        records = own_edges
    cap2 = record_capacity(ctx, 2 * w)
    got = yield from pipelined_upcast(
        ctx, tree, records, 2,
        upcast_duration(tree.depth_bound, edge_bound, cap2), field_width=w)
    ctx.phase("kernel_solve")
    ok, payload = False, []
    if tree.is_root:
        # fingerprint collisions may alias two kernel edges onto one pair
        # (possibly in both orientations); normalize before rebuilding
        clean = {(min(e), max(e)) for e in got if e[0] != e[1]}
        if clean:
            gk = Graph.build({a for e in clean for a in e}, clean)
            sol = oracles.opt_solution(gk, Problem.MVC)
        else:
            sol = frozenset()
        if len(sol) <= k2:
            ok = True
            payload = sorted((x,) for x in sol)
    ok, mem = yield from _broadcast_verdict_and_members(
        ctx, tree, ok, payload, 1, k2 + 1, field_width=w)
    if not ok:
        return Verdict.NO_K, False
    myname = fp if use_fp else me
    in_cover = forced or (in_kernel and (myname,) in mem)
    totc, excc, _ = yield from threshold_count(
        ctx, tree, 1 if in_cover else 0, k)
    if excc:
        return Verdict.NO_K, False
    return Verdict.ACCEPT, in_cover


def congest_kmvc_exact(k: int, randomized: bool = False, c: int = 3,
                       collision_mode: str = "detect"):
    def prog(ctx):
        me = ctx.node_id
        if k == 0 or ctx.n == 1:
            ok = ctx.degree == 0
            return NodeOutput(Verdict.ACCEPT if ok else Verdict.NO_K)
        v = yield from diameter_probe(ctx, 2 * k)
        if v is DiameterVerdict.LARGE:
            return NodeOutput(Verdict.NO_K)
        tree = yield from leader_and_bfs(ctx, 4 * k)
        verdict, in_cover = yield from kmvc_core(
            ctx, tree, k, True, randomized, c, collision_mode)
        members = frozenset({me}) if (verdict is Verdict.ACCEPT and in_cover) \
            else frozenset()
        return NodeOutput(verdict, members)

    return prog


def congest_kmvc_2eps(k: int, eps, randomized: bool = False, c: int = 3,
                      collision_mode: str = "detect"):
    """(2-eps)-approximate k-MVC: freeze a submatching, take its endpoints,
    and solve the residual exactly with the reduced parameter."""
    eps = Fraction(eps)
    if k >= 1 and not (Fraction(1, k) <= eps <= 1):
        raise ValueError(f"eps must lie in [1/k, 1], got {eps}")

    def prog(ctx):
        me = ctx.node_id
        if k == 0 or ctx.n == 1:
            ok = ctx.degree == 0
            return NodeOutput(Verdict.ACCEPT if ok else Verdict.NO_K)
        v = yield from diameter_probe(ctx, 2 * k)
        if v is DiameterVerdict.LARGE:
            return NodeOutput(Verdict.NO_K)
        tree = yield from leader_and_bfs(ctx, 4 * k)
        mate = yield from greedy_matching_iterations(ctx, k + 2)
        owned = 1 if (mate is not None and me < mate) else 0
        total, exceeded, _ = yield from threshold_count(ctx, tree, owned, k)
        if exceeded:
            return NodeOutput(Verdict.NO_K)  # matching > k, so any cover > k
        # here the matching is maximal with exactly `total` edges
        bound = 2 * k - frac_ceil(k * eps)  # = floor((2-eps)k)
        if total <= k * (1 - eps):
            in_cover = mate is not None
        else:
            mrecs = [(me, mate)] if owned else []
            cap2 = record_capacity(ctx, 2 * id_width(ctx.n))
            got = yield from pipelined_upcast(
                ctx, tree, mrecs, 2,
                upcast_duration(tree.depth_bound, k, cap2))
            # floor keeps 2|M'| + ceil(k*eps) within floor((2-eps)k)
            m_size = frac_floor(k * (1 - eps))
            mp = yield from broadcast_records(
                ctx, tree, sorted(got)[:m_size] if tree.is_root else [], 2,
                upcast_duration(tree.depth_bound, m_size + 1, cap2))
            removed = any(me in e for e in mp)
            k2 = k - m_size  # = ceil(k*eps)
            verdict2, in2 = yield from kmvc_core(
                ctx, tree, k2, not removed, randomized, c, collision_mode)
            if verdict2 is Verdict.NO_K:
                return NodeOutput(Verdict.NO_K)
            in_cover = removed or in2
        tot2, exc2, _ = yield from threshold_count(
            ctx, tree, 1 if in_cover else 0, bound)
        if exc2:
            return NodeOutput(Verdict.NO_K)
        members = frozenset({me}) if in_cover else frozenset()
        return NodeOutput(Verdict.ACCEPT, members)

    return prog


# ---------------------------------------------------------------------------
# CONGEST k-MaxM


def _find_augmenting(mate_of: dict, adj: dict, pends: dict):
    """Exhaustive search for a simple alternating (augmenting) path in the
    collected subgraph. `pends`: matched-name -> list of (slot, pendant-name).
    Returns (interior new pairs, (start owner, slot), (end owner, slot))."""

    def dfs(u, start_pname, visited):
        v = mate_of[u]
        if v in visited:
            return None
        visited = visited | {u, v}
        for slot, pname in pends.get(v, []):
            if pname != start_pname:
                return [], (v, slot)
        for wn in sorted(adj.get(v, [])):
            if wn in visited or wn not in mate_of:
                continue
            r = dfs(wn, start_pname, visited)
            if r is not None:
                return [(v, wn)] + r[0], r[1]
        return None

    for owner_s in sorted(pends):
        if owner_s not in mate_of:
            continue
        for slot_s, pname_s in pends[owner_s]:
            r = dfs(owner_s, pname_s, set())
            if r is not None:
                interior, (owner_f, slot_f) = r
                return interior, (owner_s, slot_s), (owner_f, slot_f)
    return None


def augment_stage(ctx: NodeContext, tree: Tree, mate: int | None, target: int,
                  active: bool = True, randomized: bool = False, c: int = 3,
                  collision_mode: str = "detect"):
    """Leader-driven augmentation of a maximal matching until it has `target`
    edges or is maximum. Returns (reached_target, mate)."""
    ctx.phase("augment")
    me = ctx.node_id
    d = tree.depth_bound
    iw = id_width(ctx.n)
    b = min(maxm_fp_bits(target, c), iw)
    use_fp = bool(randomized)
    fp = ctx.rng.getrandbits(b)
    names = {u: u for u in ctx.neighbors}
    if randomized:
        nb = yield from exchange(ctx, fp, field_width=b)
        names = {u: nb[u][0] for u in ctx.neighbors if u in nb}
    t = max(target, 1)
    reached = False
    for _ in range(t + 3):
        w = b if use_fp else iw
        myname = fp if use_fp else me
        nm = (lambda u: names[u]) if use_fp else (lambda u: u)
        st = yield from exchange(ctx, 1 if active else 0,
                                 1 if mate is not None else 0, field_width=1)
        nbr_active = {u: bool(f[0]) for u, f in st.items()}
        nbr_matched = {u: bool(f[1]) for u, f in st.items()}
        matched = active and mate is not None
        slot_map: dict[int, int] = {}
        match_recs, mm_recs, pend_recs, own_recs = [], [], [], []
        if matched:
            own_recs = [(myname,)]
            if me < mate:
                match_recs = [(myname, nm(mate))]
            mm_recs = [(myname, nm(u)) for u in ctx.neighbors
                       if u > me and u != mate
                       and nbr_active.get(u) and nbr_matched.get(u)]
            pend = [u for u in ctx.neighbors
                    if nbr_active.get(u) and not nbr_matched.get(u)][:2]
            for s, u in enumerate(pend):
                slot_map[s] = u
                pend_recs.append((myname, s, nm(u)))
        cap1 = record_capacity(ctx, w)
        cap2 = record_capacity(ctx, 2 * w)
        cap3 = record_capacity(ctx, 3 * w)
        got_own = []
        if randomized and collision_mode == "detect":
            got_own = yield from pipelined_upcast(
                ctx, tree, own_recs if use_fp else [], 1,
                upcast_duration(d, 2 * t, cap1), field_width=w)
        got_match = yield from pipelined_upcast(
            ctx, tree, match_recs, 2, upcast_duration(d, t, cap2),
            field_width=w)
        got_mm = yield from pipelined_upcast(
            ctx, tree, mm_recs, 2, upcast_duration(d, 2 * t * t, cap2),
            field_width=w)
        got_pend = yield from pipelined_upcast(
            ctx, tree, pend_recs, 3, upcast_duration(d, 4 * t, cap3),
            field_width=w)
        ctrl, path_recs = 0, []
        if tree.is_root:
            if use_fp and collision_mode == "detect" \
                    and len(got_own) != len(set(got_own)):
                ctrl = 3
            else:
                m_count = len(got_match)
                if m_count >= target:
                    ctrl = 2
                else:
                    mate_of = {}
                    for a, bb in got_match:
                        mate_of[a] = bb
                        mate_of[bb] = a
                    adj: dict = {}
                    for a, bb in got_mm:
                        adj.setdefault(a, set()).add(bb)
                        adj.setdefault(bb, set()).add(a)
                    pends: dict = {}
                    for owner, slot, pname in sorted(got_pend):
                        pends.setdefault(owner, []).append((slot, pname))
                    found = _find_augmenting(mate_of, adj, pends)
                    if found is not None:
                        interior, (os_, ss), (of_, sf) = found
                        path_recs = ([(os_, ss, 1), (of_, sf, 1)]
                                     + [(a, bb, 0) for a, bb in interior])
                        ctrl = 1
                    elif use_fp:
                        ctrl = 3  # confirm the negative deterministically
                    else:
                        ctrl = 0
        ctrlrec = yield from broadcast_records(
            ctx, tree, [(ctrl,)] if tree.is_root else [], 1,
            upcast_duration(d, 1, record_capacity(ctx, 2)), field_width=2)
        ctrl = ctrlrec[0][0]
        if ctrl == 3:
            use_fp = False
            continue
        if ctrl in (0, 2):
            reached = ctrl == 2
            break
        precs = yield from broadcast_records(
            ctx, tree, path_recs if tree.is_root else [], 3,
            upcast_duration(d, 2 * t + 2, cap3), field_width=w)
        new_mate = None
        notify = None
        if matched:
            for a, bb, tag in precs:
                if tag == 1 and a == myname:
                    notify = slot_map.get(bb)
                    new_mate = notify
                elif tag == 0 and myname in (a, bb):
                    pname = bb if a == myname else a
                    cands = [u for u in ctx.neighbors
                             if nbr_active.get(u) and nbr_matched.get(u)
                             and nm(u) == pname]
                    if cands:
                        new_mate = cands[0]
        out = {}
        if notify is not None:
            out[notify] = ctx.msg(K_NOTIFY, 1, field_width=1)
        inbox = yield out
        if matched and new_mate is not None:
            mate = new_mate
        elif active and mate is None:
            senders = [u for u, msgs in inbox.items()
                       if any(m.kind == K_NOTIFY for m in msgs)]
            if senders:
                mate = min(senders)
    return reached, mate


def congest_kmaxm_exact(k: int, randomized: bool = False, c: int = 3,
                        collision_mode: str = "detect"):
    def prog(ctx):
        me = ctx.node_id
        if k == 0:
            return NodeOutput(Verdict.ACCEPT)
        if ctx.n == 1:
            return NodeOutput(Verdict.NO_K)
        v = yield from diameter_probe(ctx, 2 * k)
        if v is DiameterVerdict.LARGE:
            mate = yield from greedy_matching_iterations(ctx, k)
            members = frozenset({tuple(sorted((me, mate)))}) \
                if mate is not None else frozenset()
            return NodeOutput(Verdict.ACCEPT, members)
        tree = yield from leader_and_bfs(ctx, 4 * k)
        mate = yield from greedy_matching_iterations(ctx, k)
        owned = 1 if (mate is not None and me < mate) else 0
        total, exceeded, _ = yield from threshold_count(ctx, tree, owned, k - 1)
        if exceeded:  # at least k matched edges already
            members = frozenset({tuple(sorted((me, mate)))}) \
                if mate is not None else frozenset()
            return NodeOutput(Verdict.ACCEPT, members)
        if 2 * total < k:  # maximum matching <= 2|maximal| < k
            return NodeOutput(Verdict.NO_K)
        reached, mate = yield from augment_stage(
            ctx, tree, mate, k, True, randomized, c, collision_mode)
        if not reached:
            return NodeOutput(Verdict.NO_K)
        members = frozenset({tuple(sorted((me, mate)))}) \
            if mate is not None else frozenset()
        return NodeOutput(Verdict.ACCEPT, members)

    return prog


def congest_kmaxm_2eps(k: int, eps, randomized: bool = False, c: int = 3,
                       collision_mode: str = "detect"):
    eps = Fraction(eps)
    if k >= 1 and not (Fraction(1, k) <= eps <= 1):
        raise ValueError(f"eps must lie in [1/k, 1], got {eps}")

    def prog(ctx):
        me = ctx.node_id
        if k == 0:
            return NodeOutput(Verdict.ACCEPT)
        if ctx.n == 1:
            return NodeOutput(Verdict.NO_K)
        v = yield from diameter_probe(ctx, 2 * k)
        if v is DiameterVerdict.LARGE:
            mate = yield from greedy_matching_iterations(ctx, k)
            members = frozenset({tuple(sorted((me, mate)))}) \
                if mate is not None else frozenset()
            return NodeOutput(Verdict.ACCEPT, members)
        tree = yield from leader_and_bfs(ctx, 4 * k)
        mate = yield from greedy_matching_iterations(ctx, k + 2)
        tau = frac_ceil(Fraction(k) / (2 - eps))
        owned = [(me, mate)] if (mate is not None and me < mate) else []
        total, exceeded, _ = yield from threshold_count(
            ctx, tree, len(owned), tau - 1)
        cap2 = record_capacity(ctx, 2 * id_width(ctx.n))
        if exceeded:  # enough matched edges: keep exactly the tau least
            chosen = yield from bounded_upcast_min(
                ctx, tree, owned, 2, tau, tree.depth_bound + tau + 1)
            keep = yield from broadcast_records(
                ctx, tree, chosen if tree.is_root else [], 2,
                upcast_duration(tree.depth_bound, tau, cap2))
            members = frozenset(e for e in keep if me in e)
            return NodeOutput(Verdict.ACCEPT, members)
        if 2 * total < k:
            return NodeOutput(Verdict.NO_K)
        m_size = max(0, frac_ceil(Fraction(k, 2) - 2 * k * eps))
        assert m_size <= k - tau and m_size <= total
        got = yield from pipelined_upcast(
            ctx, tree, owned, 2, upcast_duration(tree.depth_bound, tau, cap2))
        frozen = yield from broadcast_records(
            ctx, tree, sorted(got)[:m_size] if tree.is_root else [], 2,
            upcast_duration(tree.depth_bound, m_size + 1, cap2))
        frozen_here = any(me in e for e in frozen)
        target_res = tau - m_size
        reached, mate_res = yield from augment_stage(
            ctx, tree, None if frozen_here else mate, target_res,
            not frozen_here, randomized, c, collision_mode)
        final_mate = mate if frozen_here else mate_res
        own2 = 1 if (final_mate is not None and me < final_mate) else 0
        tot2, exc2, _ = yield from threshold_count(ctx, tree, own2, tau - 1)
        if not exc2:
            return NodeOutput(Verdict.NO_K)
        members = frozenset({tuple(sorted((me, final_mate)))}) \
            if final_mate is not None else frozenset()
        return NodeOutput(Verdict.ACCEPT, members)

    return prog


# ---------------------------------------------------------------------------
# Closed-form round budgets (upper bounds on the actual implementations)


def _cap(n: int, beta: int, model: Model, record_width: int) -> int | None:
    if model is Model.LOCAL:
        return None
    from .engine import HEADER_BITS, bandwidth
    cap = (bandwidth(n, beta) - HEADER_BITS) // record_width
    return max(cap, 1)  # budget formulas assume the run did not already fail


def kmvc_core_budget(n: int, k: int, beta: int, model: Model = Model.CONGEST,
                     randomized: bool = False, c: int = 3,
                     depth_bound: int | None = None) -> int:
    d = 4 * k if depth_bound is None else depth_bound
    tc = 2 * d + 2
    sweeps = (k + 2) * (1 + tc)
    iw = id_width(n)
    total = sweeps + 1 + tc
    if randomized:
        b = mvc_fp_bits(k, c)
        total += 1
        total += upcast_duration(d, k + k * k + 1, _cap(n, beta, model, b))
        total += upcast_duration(d, 1, _cap(n, beta, model, 1))
    w = iw  # deterministic fallback is the worst case for the edge upcast
    total += upcast_duration(d, k * k + 1, _cap(n, beta, model, 2 * w))
    total += upcast_duration(d, 1, _cap(n, beta, model, 1))
    total += upcast_duration(d, k + 1, _cap(n, beta, model, w))
    total += tc
    return total


def kmvc_exact_budget(n: int, k: int, beta: int = 8,
                      model: Model = Model.CONGEST,
                      randomized: bool = False, c: int = 3) -> int:
    if k == 0:
        return 0
    total = (6 * k + 1) + (8 * k + 2)
    total += kmvc_core_budget(n, k, beta, model, randomized, c)
    return 2 * total


def augment_stage_budget(n: int, target: int, beta: int,
                         model: Model = Model.CONGEST,
                         randomized: bool = False, c: int = 3,
                         depth_bound: int | None = None) -> int:
    t = max(target, 1)
    d = 4 * t if depth_bound is None else depth_bound
    iw = id_width(n)
    per = 1  # status exchange
    w = iw  # deterministic widths dominate the per-record duration
    if randomized:
        per += upcast_duration(d, 2 * t, _cap(n, beta, model, w))
    per += upcast_duration(d, t, _cap(n, beta, model, 2 * w))
    per += upcast_duration(d, 2 * t * t, _cap(n, beta, model, 2 * w))
    per += upcast_duration(d, 4 * t, _cap(n, beta, model, 3 * w))
    per += upcast_duration(d, 1, _cap(n, beta, model, 2))
    per += upcast_duration(d, 2 * t + 2, _cap(n, beta, model, 3 * w))
    per += 1  # handshake round
    return 1 + (t + 3) * per


def kmaxm_exact_budget(n: int, k: int, beta: int = 8,
                       model: Model = Model.CONGEST,
                       randomized: bool = False, c: int = 3) -> int:
    if k == 0:
        return 0
    total = (6 * k + 1) + (8 * k + 2) + 2 * k
    total += 2 * (4 * k) + 2
    total += augment_stage_budget(n, k, beta, model, randomized, c)
    return 2 * total


def kmvc_2eps_budget(n: int, k: int, eps, beta: int = 8,
                     model: Model = Model.CONGEST) -> int:
    if k == 0:
        return 0
    eps = Fraction(eps)
    d = 4 * k
    tc = 2 * d + 2
    total = (6 * k + 1) + (8 * k + 2) + 2 * (k + 2) + tc
    iw = id_width(n)
    total += upcast_duration(d, k + 1, _cap(n, beta, model, 2 * iw)) * 2
    total += kmvc_core_budget(n, max(frac_ceil(k * eps), 0), beta, model,
                              depth_bound=d)
    total += tc
    return 2 * total


def kmaxm_2eps_budget(n: int, k: int, eps, beta: int = 8,
                      model: Model = Model.CONGEST) -> int:
    if k == 0:
        return 0
    eps = Fraction(eps)
    d = 4 * k
    tc = 2 * d + 2
    tau = frac_ceil(Fraction(k) / (2 - eps))
    iw = id_width(n)
    total = (6 * k + 1) + (8 * k + 2) + 2 * (k + 2) + tc
    total += (d + tau + 1)
    total += upcast_duration(d, tau, _cap(n, beta, model, 2 * iw)) * 3
    total += augment_stage_budget(n, tau, beta, model, depth_bound=d)
    total += tc
    return 2 * total


def local_dlb_budget(n: int, k: int, problem: Problem) -> int:
    if k == 0:
        return 0
    c = DLB_C[problem]
    return 2 * ((3 * c * k + 1) + (4 * c * k + 2) + 3 * (2 * c * k + 2))


def local_kmax_budget(n: int, k: int) -> int:
    if k == 0:
        return 0
    return 2 * ((6 * k + 1) + (8 * k + 2) + (4 * k + 2) * 3 + 2 * k)
