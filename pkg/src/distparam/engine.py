"""Synchronous round-based message-passing simulator.

One node program is a Python generator produced from a NodeContext. Every
`yield outbox` ends the compute step of one round; the value sent back into the
generator is the inbox for the next round (a dict sender-id -> list of Msg).
Returning from the generator fixes the node's final output and the node stops
participating (it sends nothing from then on).

Bandwidth accounting: in CONGEST each directed channel (u -> v) carries at most
B(n) = beta * ceil(log2(n+1)) bits per round; every message is charged an 8-bit
header plus its field widths. LOCAL performs the same accounting but never
rejects.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable


class Model(str, Enum):
    LOCAL = "local"
    CONGEST = "congest"


class BandwidthExceeded(RuntimeError):
    """A directed channel was asked to carry more than B(n) bits in one round."""


class RoundBudgetExceeded(RuntimeError):
    """The simulation ran past the caller-imposed round budget."""


def id_width(n: int) -> int:
    """Bits needed for an identifier in a graph of n nodes (ids may equal n-1,
    and constructions use ids up to n, hence n+1 values)."""
    return max(1, math.ceil(math.log2(n + 1)))


def bandwidth(n: int, beta: int) -> int:
    return beta * id_width(n)


HEADER_BITS = 8  # 4-bit message kind + 4-bit field count


@dataclass(frozen=True)
class Msg:
    kind: int
    fields: tuple
    width: int

    def __iter__(self):
        return iter(self.fields)


def make_msg(n: int, kind: int, *fields: int, field_width: int | None = None,
             field_widths: Iterable[int] | None = None) -> Msg:
    """Message with explicit bit accounting; fields default to id width."""
    if field_widths is not None:
        widths = list(field_widths)
        if len(widths) != len(fields):
            raise ValueError("field_widths length mismatch")
    else:
        w = id_width(n) if field_width is None else field_width
        widths = [w] * len(fields)
    return Msg(kind, tuple(int(f) for f in fields), HEADER_BITS + sum(widths))


class NodeContext:
    """Per-node immutable view handed to a node program."""

    __slots__ = ("node_id", "n", "neighbors", "port_of", "out_arcs", "in_arcs",
                 "params", "rng", "_phase_setter", "_model", "_beta")

    def __init__(self, node_id: int, n: int, neighbors: tuple,
                 out_arcs: frozenset, in_arcs: frozenset, params: dict,
                 seed: int, model: Model, beta: int, phase_setter: Callable):
        self.node_id = node_id
        self.n = n
        self.neighbors = neighbors  # sorted; index = port number
        self.port_of = {u: p for p, u in enumerate(neighbors)}
        self.out_arcs = out_arcs    # neighbors reached by an outgoing arc
        self.in_arcs = in_arcs
        self.params = params
        self.rng = random.Random((seed * 0x9E3779B1) ^ (node_id * 0x85EBCA77))
        self._phase_setter = phase_setter
        self._model = model
        self._beta = beta

    @property
    def degree(self) -> int:
        return len(self.neighbors)

    def msg(self, kind: int, *fields: int, field_width: int | None = None,
            field_widths: Iterable[int] | None = None) -> Msg:
        return make_msg(self.n, kind, *fields, field_width=field_width,
                        field_widths=field_widths)

    def phase(self, name: str) -> None:
        """Annotate the rounds from here on as belonging to a named phase;
        purely observational (used for per-phase bandwidth statistics)."""
        self._phase_setter(self.node_id, name)


@dataclass
class SimResult:
    outputs: dict
    rounds: int
    peak_bits: int
    total_msgs: int
    total_bits: int
    bits_by_round: list
    phase_spans: dict = field(default_factory=dict)

    def peak_bits_in(self, phase: str) -> int:
        lo, hi = self.phase_spans[phase]
        span = self.bits_by_round[lo - 1:hi]
        return max(span) if span else 0

    def unanimous(self):
        vals = {getattr(o, "verdict", o) for o in self.outputs.values()}
        return vals.pop() if len(vals) == 1 else None


def run(graph, program: Callable[[NodeContext], "generator"],
        model: Model = Model.CONGEST, beta: int = 8, seed: int = 0,
        params: dict | None = None, round_budget: int | None = None) -> SimResult:
    """Drive one program on every node of the graph to completion."""
    params = dict(params or {})
    n = graph.n
    limit = bandwidth(n, beta)
    adj = graph.adjacency()
    adj_sets = {v: set(ns) for v, ns in adj.items()}
    out_arcs: dict[int, set] = {v: set() for v in graph.nodes}
    in_arcs: dict[int, set] = {v: set() for v in graph.nodes}
    if graph.directed:
        for a, b in graph.edges:
            out_arcs[a].add(b)
            in_arcs[b].add(a)

    order = sorted(graph.nodes)
    current_phase: dict[int, str | None] = {v: None for v in order}

    def phase_setter(v: int, name: str) -> None:
        current_phase[v] = name

    gens = {}
    outputs: dict[int, object] = {}
    pending: dict[int, object] = {}
    for v in order:
        ctx = NodeContext(v, n, tuple(adj[v]), frozenset(out_arcs[v]),
                          frozenset(in_arcs[v]), params, seed, model, beta,
                          phase_setter)
        gens[v] = program(ctx)

    rounds = 0
    peak_bits = 0
    total_msgs = 0
    total_bits = 0
    bits_by_round: list[int] = []
    phase_spans: dict[str, list] = {}
    inboxes: dict[int, dict] = {v: {} for v in order}
    live = list(order)

    # Prime every generator: the first yield is the round-1 outbox.
    for v in order:
        try:
            pending[v] = next(gens[v])
        except StopIteration as stop:
            outputs[v] = stop.value
            pending[v] = None
    live = [v for v in order if v not in outputs]

    while live:
        rounds += 1
        if round_budget is not None and rounds > round_budget:
            raise RoundBudgetExceeded(
                f"round {rounds} exceeds budget {round_budget}")
        round_peak = 0
        new_inboxes: dict[int, dict] = {}
        for v in live:
            outbox = pending[v] or {}
            ph = current_phase[v]
            if ph is not None:
                span = phase_spans.setdefault(ph, [rounds, rounds])
                span[0] = min(span[0], rounds)
                span[1] = max(span[1], rounds)
            for dest, msgs in outbox.items():
                if isinstance(msgs, Msg):
                    msgs = [msgs]
                if not msgs:
                    continue
                if dest not in adj_sets[v]:
                    raise KeyError(f"node {v} sending to non-neighbor {dest}")
                chan = sum(m.width for m in msgs)
                if model is Model.CONGEST and chan > limit:
                    raise BandwidthExceeded(
                        f"round {rounds}: channel {v}->{dest} needs {chan} bits, "
                        f"limit {limit}")
                round_peak = max(round_peak, chan)
                total_msgs += len(msgs)
                total_bits += chan
                new_inboxes.setdefault(dest, {}).setdefault(v, []).extend(msgs)
        peak_bits = max(peak_bits, round_peak)
        bits_by_round.append(round_peak)
        inboxes = new_inboxes
        still = []
        for v in live:
            try:
                pending[v] = gens[v].send(inboxes.get(v, {}))
                still.append(v)
            except StopIteration as stop:
                outputs[v] = stop.value
                pending[v] = None
        live = still

    return SimResult(outputs=outputs, rounds=rounds, peak_bits=peak_bits,
                     total_msgs=total_msgs, total_bits=total_bits,
                     bits_by_round=bits_by_round,
                     phase_spans={k: (a, b) for k, (a, b) in phase_spans.items()})
