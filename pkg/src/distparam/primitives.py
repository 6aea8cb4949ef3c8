"""Reusable node-program building blocks.

Every primitive is a generator meant to be driven by the engine, either
directly or via `yield from` inside a larger program. All round counts are
fixed functions of their arguments (never data dependent), so composed
programs stay in lockstep across nodes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .engine import HEADER_BITS, BandwidthExceeded, Model, NodeContext, bandwidth, id_width
from .graphs import Graph

K_PROBE_MIN = 1
K_PROBE_MM = 2
K_FLOOD = 3
K_NOTIFY = 4
K_UP = 5
K_DOWN = 6
K_SUM = 7
K_EXCH = 8


class DiameterVerdict(str, Enum):
    SMALL = "SMALL"
    LARGE = "LARGE"


@dataclass
class Tree:
    root: int
    parent: int | None
    depth: int
    children: tuple
    depth_bound: int

    @property
    def is_root(self) -> bool:
        return self.parent is None


def idle(ctx: NodeContext, rounds: int):
    for _ in range(rounds):
        yield {}


def exchange(ctx: NodeContext, *fields: int, field_width: int | None = None):
    """One round: send the given fields to every neighbor, return the inbox."""
    out = {u: ctx.msg(K_EXCH, *fields, field_width=field_width)
           for u in ctx.neighbors}
    inbox = yield out
    return {u: msgs[-1].fields for u, msgs in inbox.items()}


def diameter_probe(ctx: NodeContext, k: int):
    """Exactly 3k+1 rounds. SMALL if diameter <= k, LARGE if >= 2k+1,
    unanimous either way in between."""
    ctx.phase("probe")
    x = ctx.node_id
    for _ in range(k):
        inbox = yield {u: ctx.msg(K_PROBE_MIN, x) for u in ctx.neighbors}
        for msgs in inbox.values():
            for m in msgs:
                if m.kind == K_PROBE_MIN and m.fields[0] < x:
                    x = m.fields[0]
    y = z = x
    for _ in range(2 * k + 1):
        inbox = yield {u: ctx.msg(K_PROBE_MM, y, z) for u in ctx.neighbors}
        for msgs in inbox.values():
            for m in msgs:
                if m.kind == K_PROBE_MM:
                    y = min(y, m.fields[0])
                    z = max(z, m.fields[1])
    return DiameterVerdict.SMALL if y == z else DiameterVerdict.LARGE


def leader_and_bfs(ctx: NodeContext, diam_bound: int):
    """Exactly 2*diam_bound + 2 rounds. Requires actual diameter <=
    diam_bound; elects the minimum identifier as root and builds its BFS tree
    (parent = smallest-id neighbor one layer up)."""
    ctx.phase("bfs")
    root, depth = ctx.node_id, 0
    nbr_state: dict[int, tuple] = {}
    for _ in range(2 * diam_bound + 1):
        inbox = yield {u: ctx.msg(K_FLOOD, root, depth) for u in ctx.neighbors}
        for u, msgs in inbox.items():
            for m in msgs:
                if m.kind != K_FLOOD:
                    continue
                r2, d2 = m.fields
                nbr_state[u] = (r2, d2)
                if (r2, d2 + 1) < (root, depth):
                    root, depth = r2, d2 + 1
    parent = None
    if depth > 0:
        ups = [u for u, st in nbr_state.items() if st == (root, depth - 1)]
        parent = min(ups)
    out = {}
    if parent is not None:
        out[parent] = ctx.msg(K_NOTIFY, ctx.node_id)
    inbox = yield out
    children = tuple(sorted(
        u for u, msgs in inbox.items()
        if any(m.kind == K_NOTIFY for m in msgs)))
    return Tree(root=root, parent=parent, depth=depth, children=children,
                depth_bound=diam_bound)


def record_capacity(ctx: NodeContext, record_width: int) -> int | None:
    """Records per round on one channel; None means unbounded (LOCAL)."""
    if ctx._model is Model.LOCAL:
        return None
    cap = (bandwidth(ctx.n, ctx._beta) - HEADER_BITS) // record_width
    if cap < 1:
        raise BandwidthExceeded(
            f"a {record_width}-bit record does not fit the "
            f"{bandwidth(ctx.n, ctx._beta)}-bit channel budget")
    return cap


def upcast_duration(depth_bound: int, record_bound: int, cap: int | None) -> int:
    if cap is None:
        return depth_bound + 2
    return depth_bound + math.ceil(max(record_bound, 1) / cap) + 1


def _pack(ctx: NodeContext, kind: int, batch: list, per_field: int) -> "Msg":
    fields = [f for rec in batch for f in rec]
    return ctx.msg(kind, *fields, field_widths=[per_field] * len(fields))


def _unpack(msgs, kind: int, arity: int):
    for m in msgs:
        if m.kind != kind:
            continue
        for i in range(0, len(m.fields), arity):
            yield tuple(m.fields[i:i + arity])


def pipelined_upcast(ctx: NodeContext, tree: Tree, records, arity: int,
                     duration: int, field_width: int | None = None):
    """Convergecast every record to the root within a fixed number of rounds.
    Returns the full sorted list at the root, [] elsewhere. Records are tuples
    of `arity` fields of `field_width` bits each (default: id width)."""
    fw = id_width(ctx.n) if field_width is None else field_width
    cap = record_capacity(ctx, arity * fw)
    buf = sorted(tuple(r) for r in records)
    collected = list(buf) if tree.is_root else None
    if tree.is_root:
        buf = []
    for _ in range(duration):
        out = {}
        if buf and tree.parent is not None:
            batch = buf if cap is None else buf[:cap]
            buf = [] if cap is None else buf[cap:]
            out[tree.parent] = _pack(ctx, K_UP, batch, fw)
        inbox = yield out
        for u, msgs in inbox.items():
            for rec in _unpack(msgs, K_UP, arity):
                if tree.is_root:
                    collected.append(rec)
                else:
                    buf.append(rec)
    if tree.is_root:
        return sorted(collected)
    return []


def bounded_upcast_min(ctx: NodeContext, tree: Tree, records, arity: int,
                       t: int, duration: int, field_width: int | None = None):
    """Convergecast so the root ends with the t smallest records overall.
    Each node only ever forwards records among the t smallest it has seen,
    smallest-unsent first."""
    fw = id_width(ctx.n) if field_width is None else field_width
    cap = record_capacity(ctx, arity * fw)
    seen = sorted(set(tuple(r) for r in records))
    sent: set = set()
    for _ in range(duration):
        out = {}
        if tree.parent is not None:
            todo = [r for r in seen[:t] if r not in sent]
            batch = todo if cap is None else todo[:cap]
            if batch:
                sent.update(batch)
                out[tree.parent] = _pack(ctx, K_UP, batch, fw)
        inbox = yield out
        for u, msgs in inbox.items():
            for rec in _unpack(msgs, K_UP, arity):
                if rec not in seen:
                    seen.append(rec)
        seen.sort()
    if tree.is_root:
        return seen[:t]
    return []


def broadcast_records(ctx: NodeContext, tree: Tree, records, arity: int,
                      duration: int, field_width: int | None = None):
    """Root pipelines its records down the tree; every node returns the full
    list after `duration` rounds."""
    fw = id_width(ctx.n) if field_width is None else field_width
    cap = record_capacity(ctx, arity * fw)
    have = sorted(tuple(r) for r in records) if tree.is_root else []
    forwarded = 0
    for _ in range(duration):
        out = {}
        if tree.children and forwarded < len(have):
            batch = have[forwarded:] if cap is None else have[forwarded:forwarded + cap]
            forwarded += len(batch)
            for c in tree.children:
                out[c] = _pack(ctx, K_DOWN, batch, fw)
        inbox = yield out
        for u, msgs in inbox.items():
            for rec in _unpack(msgs, K_DOWN, arity):
                have.append(rec)
    return sorted(have)


def threshold_count(ctx: NodeContext, tree: Tree, value: int, threshold: int,
                    bit: int = 0):
    """Capped global sum of per-node nonnegative integers plus a global OR of
    one flag bit, in exactly 2*depth_bound + 2 rounds. Returns
    (capped_total, exceeded, or_bit); the total is exact when <= threshold."""
    d = tree.depth_bound
    cap_val = threshold + 1
    w = max(1, cap_val.bit_length())
    acc = min(int(value), cap_val)
    accbit = 1 if bit else 0
    have: set = set()
    sent_up = False
    result = None
    told_children = False
    for _ in range(2 * d + 2):
        out = {}
        if not sent_up and tree.parent is not None and len(have) == len(tree.children):
            out[tree.parent] = ctx.msg(K_SUM, acc, accbit, field_widths=(w, 1))
            sent_up = True
        if tree.is_root and result is None and len(have) == len(tree.children):
            result = (acc, accbit)
        if result is not None and not told_children:
            for c in tree.children:
                out[c] = ctx.msg(K_DOWN, result[0], result[1], field_widths=(w, 1))
            told_children = True
        inbox = yield out
        for u, msgs in inbox.items():
            for m in msgs:
                if m.kind == K_SUM:
                    have.add(u)
                    acc = min(cap_val, acc + m.fields[0])
                    accbit |= m.fields[1]
                elif m.kind == K_DOWN:
                    result = (m.fields[0], m.fields[1])
    assert result is not None, "threshold_count finished without a verdict"
    total, orbit = result
    return total, total > threshold, orbit


def owned_edge_records(ctx: NodeContext, active=None) -> list:
    """Edge records owned by this node: undirected edges to larger-id
    neighbors, or outgoing arcs. `active` optionally filters endpoints."""
    if ctx.out_arcs or ctx.in_arcs:
        cands = [(ctx.node_id, b) for b in sorted(ctx.out_arcs)]
    else:
        cands = [(ctx.node_id, u) for u in ctx.neighbors if u > ctx.node_id]
    if active is not None:
        cands = [e for e in cands if active(e[1])]
    return cands


def collect_graph(ctx: NodeContext, tree: Tree, duration: int,
                  directed: bool = False):
    """Upcast of the edge set; the root returns the reconstructed Graph over
    the ids appearing in the records plus the root itself."""
    ctx.phase("collect_graph")
    recs = owned_edge_records(ctx)
    got = yield from pipelined_upcast(ctx, tree, recs, 2, duration)
    if not tree.is_root:
        return None
    nodes = {ctx.node_id}
    for a, b in got:
        nodes.update((a, b))
    return Graph.build(nodes, got, directed=directed)
