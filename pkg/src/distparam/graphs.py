"""Graph representation, standard generators, lower-bound constructions and reductions.

Graphs are finite, simple and loop-free. Directed and undirected graphs share one
type with a flag; an undirected edge is stored as a sorted pair, an arc as an
ordered pair. All constructions are deterministic, including identifier layout.
"""

from __future__ import annotations

import itertools
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable


class GraphError(ValueError):
    pass


def _norm_edge(u: int, v: int, directed: bool) -> tuple[int, int]:
    if u == v:
        raise GraphError(f"self-loop on node {u}")
    if directed:
        return (u, v)
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class Graph:
    nodes: frozenset
    edges: frozenset
    directed: bool = False

    @staticmethod
    def build(nodes: Iterable[int], edges: Iterable[tuple[int, int]],
              directed: bool = False) -> "Graph":
        node_set = frozenset(int(v) for v in nodes)
        edge_set = set()
        for u, v in edges:
            e = _norm_edge(int(u), int(v), directed)
            if e in edge_set:
                raise GraphError(f"parallel edge {e}")
            edge_set.add(e)
        for u, v in edge_set:
            if u not in node_set or v not in node_set:
                raise GraphError(f"edge ({u},{v}) has endpoint outside node set")
        return Graph(node_set, frozenset(edge_set), directed)

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def m(self) -> int:
        return len(self.edges)

    def adjacency(self) -> dict[int, list[int]]:
        """Neighbors in the communication sense (underlying undirected graph)."""
        cached = self.__dict__.get("_adj")
        if cached is None:
            adj: dict[int, list[int]] = {v: [] for v in self.nodes}
            for u, v in self.edges:
                adj[u].append(v)
                adj[v].append(u)
            for v in adj:
                adj[v].sort()
            object.__setattr__(self, "_adj", adj)
            cached = adj
        return cached

    def out_adjacency(self) -> dict[int, list[int]]:
        if not self.directed:
            raise GraphError("out_adjacency on undirected graph")
        out: dict[int, list[int]] = {v: [] for v in self.nodes}
        for u, v in self.edges:
            out[u].append(v)
        for v in out:
            out[v].sort()
        return out

    def neighbors(self, v: int) -> list[int]:
        return self.adjacency()[v]

    def degree(self, v: int) -> int:
        return len(self.adjacency()[v])

    def has_edge(self, u: int, v: int) -> bool:
        return _norm_edge(u, v, self.directed) in self.edges

    def underlying_undirected(self) -> "Graph":
        if not self.directed:
            return self
        return Graph.build(self.nodes, {tuple(sorted(e)) for e in self.edges},
                           directed=False)

    def bfs_distances(self, source: int) -> dict[int, int]:
        adj = self.adjacency()
        dist = {source: 0}
        q = deque([source])
        while q:
            v = q.popleft()
            for u in adj[v]:
                if u not in dist:
                    dist[u] = dist[v] + 1
                    q.append(u)
        return dist

    def is_connected(self) -> bool:
        if self.n == 0:
            return True
        source = next(iter(self.nodes))
        return len(self.bfs_distances(source)) == self.n

    def diameter(self) -> int:
        """Exact diameter by all-pairs BFS; raises on disconnected input."""
        if not self.is_connected():
            raise GraphError("diameter of disconnected graph")
        best = 0
        for v in self.nodes:
            best = max(best, max(self.bfs_distances(v).values()))
        return best

    def induced(self, keep: Iterable[int]) -> "Graph":
        keep_set = frozenset(keep)
        return Graph(keep_set,
                     frozenset(e for e in self.edges
                               if e[0] in keep_set and e[1] in keep_set),
                     self.directed)


# ---------------------------------------------------------------------------
# Constructions


@dataclass(frozen=True)
class ConstructionMeta:
    family: str
    params: dict
    n: int
    diameter: int | None = None
    opt_sizes: dict = field(default_factory=dict)
    unique_optimum: bool | None = None


@dataclass(frozen=True)
class Labeling:
    """Bijection from structural positions to node identifiers.

    Positions are ('v0',) for the center and ('path', i, j) for the j-th node of
    path i in the path-star construction.
    """

    positions: tuple
    ids: tuple
    r: int
    ell: int

    def id_of(self, pos) -> int:
        return dict(zip(self.positions, self.ids))[pos]

    def mapping(self) -> dict:
        return dict(zip(self.positions, self.ids))

    def id_set(self) -> frozenset:
        return frozenset(self.ids)


def _path_star_positions(r: int, ell: int) -> tuple:
    pos = [("path", i, j) for i in range(r) for j in range(ell + 1)]
    pos.append(("v0",))
    return tuple(pos)


def default_path_star_labeling(r: int, ell: int) -> Labeling:
    """Contiguous identifier blocks of width ell+2 per path; v0 gets the maximum."""
    block = ell + 2
    mapping = {}
    for i in range(r):
        for j in range(ell + 1):
            mapping[("path", i, j)] = block * i + j
    mapping[("v0",)] = block * r
    positions = _path_star_positions(r, ell)
    return Labeling(positions, tuple(mapping[p] for p in positions), r, ell)


def path_star_edges(labeling: Labeling) -> set:
    r, ell = labeling.r, labeling.ell
    m = labeling.mapping()
    edges = set()
    for i in range(r):
        edges.add((m[("v0",)], m[("path", i, 0)]))
        for j in range(ell):
            edges.add((m[("path", i, j)], m[("path", i, j + 1)]))
    return edges


def path_star_graph(labeling: Labeling, directed: bool = False) -> Graph:
    """Graph for an arbitrary path-star labeling (directed: arcs away from v0)."""
    return Graph.build(labeling.ids, path_star_edges(labeling), directed=directed)


def make_path_star(r: int, ell: int) -> tuple[Graph, Labeling, ConstructionMeta]:
    if r < 2 or ell < 3:
        raise GraphError(f"path-star requires r >= 2 and ell >= 3, got r={r}, ell={ell}")
    lab = default_path_star_labeling(r, ell)
    g = path_star_graph(lab)
    # Tail-to-tail through v0: ell + 1 + 1 + ell hops.
    meta = ConstructionMeta(
        family="path_star",
        params={"r": r, "ell": ell},
        n=r * (ell + 1) + 1,
        diameter=2 * ell + 2,
    )
    assert g.n == meta.n
    return g, lab, meta


def make_directed_path_star(r: int, ell: int) -> tuple[Graph, Labeling, ConstructionMeta]:
    if r < 2 or ell < 3:
        raise GraphError(f"path-star requires r >= 2 and ell >= 3, got r={r}, ell={ell}")
    lab = default_path_star_labeling(r, ell)
    g = path_star_graph(lab, directed=True)
    meta = ConstructionMeta(
        family="directed_path_star",
        params={"r": r, "ell": ell},
        n=r * (ell + 1) + 1,
        diameter=2 * ell + 2,
    )
    return g, lab, meta


def reverse_segment(labeling: Labeling, path: int, segment: str) -> Labeling:
    """Reverse the identifier order along segment A_i (positions 0..ell-2) or
    B_i (positions 0..ell-1) of the given path. Involution; all other
    identifiers are unchanged."""
    if path < 0 or path >= labeling.r:
        raise GraphError(f"path index {path} out of range for r={labeling.r}")
    if segment not in ("A", "B"):
        raise GraphError(f"segment must be 'A' or 'B', got {segment!r}")
    length = labeling.ell - 1 if segment == "A" else labeling.ell
    m = labeling.mapping()
    seg_ids = [m[("path", path, j)] for j in range(length)]
    for j in range(length):
        m[("path", path, j)] = seg_ids[length - 1 - j]
    return Labeling(labeling.positions,
                    tuple(m[p] for p in labeling.positions),
                    labeling.r, labeling.ell)


def cycle_star_ids(k: int, t: int, d: int) -> dict:
    ids = {}
    for i in range(k):
        ids[("hub", i)] = i
    for i in range(k):
        for j in range(t):
            for l in range(d):
                ids[("cyc", i, j, l)] = k + i * t * d + j * d + l
    ids[("v'",)] = k * (1 + d * t)
    return ids


def _cycle_star_edges(k: int, t: int, d: int, directed: bool) -> set:
    ids = cycle_star_ids(k, t, d)
    vp = ids[("v'",)]
    edges = set()
    for i in range(k):
        vi = ids[("hub", i)]
        if directed:
            edges.add((vp, vi))
        else:
            edges.add((vp, vi))
        for j in range(t):
            first = ids[("cyc", i, j, 0)]
            last = ids[("cyc", i, j, d - 1)]
            if directed:
                edges.add((vi, first))
                edges.add((last, vp))
            else:
                edges.add((vi, first))
                edges.add((vi, last))
            for l in range(d - 1):
                edges.add((ids[("cyc", i, j, l)], ids[("cyc", i, j, l + 1)]))
    return edges


def make_cycle_star(k: int, t: int, d: int, directed: bool = False
                    ) -> tuple[Graph, ConstructionMeta]:
    if k < 1 or t < 1 or d <= 10:
        raise GraphError(f"cycle-star requires k,t >= 1 and d > 10, got {(k, t, d)}")
    ids = cycle_star_ids(k, t, d)
    g = Graph.build(ids.values(), _cycle_star_edges(k, t, d, directed), directed=directed)
    meta = ConstructionMeta(
        family="cycle_star" if not directed else "directed_cycle_star",
        params={"k": k, "t": t, "d": d},
        n=k * (1 + d * t) + 1,
        opt_sizes={"MFES" if directed else "MFVS": k},
        unique_optimum=(t >= 2),
    )
    assert g.n == meta.n
    return g, meta


def make_cycle_star_tree(k: int, t: int, d: int, directed: bool = False) -> Graph:
    """Cycle-star with the middle edge of every cycle deleted; acyclic."""
    if k < 1 or t < 1 or d <= 10:
        raise GraphError(f"cycle-star requires k,t >= 1 and d > 10, got {(k, t, d)}")
    ids = cycle_star_ids(k, t, d)
    edges = _cycle_star_edges(k, t, d, directed)
    for i in range(k):
        for j in range(t):
            a = ids[("cyc", i, j, d // 2)]
            b = ids[("cyc", i, j, d // 2 + 1)]
            edges.discard((a, b))
            edges.discard((b, a))
    return Graph.build(ids.values(), edges, directed=directed)


# ---------------------------------------------------------------------------
# Reductions


def reduce_mvc_to_mfvs(g: Graph) -> tuple[Graph, Callable[[set], set]]:
    """Replace each edge with a triangle through a fresh edge-node. Any feedback
    vertex set of the result maps back to a cover of g of no larger size."""
    if g.directed:
        raise GraphError("triangle reduction needs an undirected graph")
    next_id = (max(g.nodes) + 1) if g.nodes else 0
    edge_node = {}
    for e in sorted(g.edges):
        edge_node[e] = next_id
        next_id += 1
    edges = set()
    for e, w in edge_node.items():
        u, v = e
        edges.add((u, v))
        edges.add((u, w))
        edges.add((v, w))
    g1 = Graph.build(set(g.nodes) | set(edge_node.values()), edges)
    node_of_edge = dict(edge_node)

    def back_map(fvs: set) -> set:
        cover = set()
        for w in fvs:
            hit = [e for e, en in node_of_edge.items() if en == w]
            if hit:
                cover.add(min(hit[0]))
            else:
                cover.add(w)
        return cover

    return g1, back_map


def reduce_mvc_to_mfes(g: Graph) -> tuple[Graph, Callable[[set], set]]:
    """Split each vertex v into v_in = 2v, v_out = 2v+1 with arc (v_in, v_out);
    each edge {u,v} becomes arcs (u_out, v_in) and (v_out, u_in)."""
    if g.directed:
        raise GraphError("split reduction needs an undirected graph")
    arcs = set()
    nodes = set()
    for v in g.nodes:
        nodes.add(2 * v)
        nodes.add(2 * v + 1)
        arcs.add((2 * v, 2 * v + 1))
    for u, v in g.edges:
        arcs.add((2 * u + 1, 2 * v))
        arcs.add((2 * v + 1, 2 * u))
    g2 = Graph.build(nodes, arcs, directed=True)

    def back_map(fes: set) -> set:
        cover = set()
        for a, b in fes:
            if a % 2 == 0 and b == a + 1:
                cover.add(a // 2)
            elif a % 2 == 1:
                cover.add(a // 2)
        return cover

    return g2, back_map


def attach(g: Graph, h: Graph, v: int, u: int
           ) -> tuple[Graph, dict]:
    """Disjoint union of g and h plus the bridge edge {v, u}; h is relabeled to
    identifiers above g's and the relabeling map is returned."""
    if g.directed != h.directed:
        raise GraphError("cannot attach directed to undirected")
    if v not in g.nodes:
        raise GraphError(f"node {v} not in the base graph")
    if u not in h.nodes:
        raise GraphError(f"node {u} not in the attached graph")
    offset = (max(g.nodes) + 1) if g.nodes else 0
    relabel = {w: offset + i for i, w in enumerate(sorted(h.nodes))}
    edges = set(g.edges)
    edges.update(_norm_edge(relabel[a], relabel[b], g.directed) for a, b in h.edges)
    edges.add(_norm_edge(v, relabel[u], g.directed))
    out = Graph.build(set(g.nodes) | set(relabel.values()), edges, g.directed)
    return out, relabel


# ---------------------------------------------------------------------------
# Standard generators


def make_path(n: int) -> Graph:
    if n < 1:
        raise GraphError("n must be >= 1")
    return Graph.build(range(n), [(i, i + 1) for i in range(n - 1)])


def make_cycle(n: int) -> Graph:
    if n < 3:
        raise GraphError("cycle needs n >= 3")
    return Graph.build(range(n), [(i, (i + 1) % n) for i in range(n)])


def make_star(n: int) -> Graph:
    """Star S_n: one center (id 0) and n leaves."""
    if n < 1:
        raise GraphError("n must be >= 1")
    return Graph.build(range(n + 1), [(0, i) for i in range(1, n + 1)])


def make_clique(n: int) -> Graph:
    if n < 1:
        raise GraphError("n must be >= 1")
    return Graph.build(range(n), itertools.combinations(range(n), 2))


def make_random(n: int, p: float, seed: int) -> Graph:
    if n < 1:
        raise GraphError("n must be >= 1")
    rng = random.Random(seed)
    edges = [(u, v) for u, v in itertools.combinations(range(n), 2)
             if rng.random() < p]
    return Graph.build(range(n), edges)


def make_random_connected(n: int, p: float, seed: int, max_tries: int = 1000) -> Graph:
    """Seed-deterministic connected G(n, p) sample (rejection over derived seeds)."""
    for attempt in range(max_tries):
        g = make_random(n, p, seed * max_tries + attempt)
        if g.is_connected():
            return g
    raise GraphError(f"no connected sample for n={n}, p={p} after {max_tries} tries")


def kernel_stress(k: int, path_len: int | None = None, leaves: int = 0) -> Graph:
    """Clique of size k+1 with a path of length path_len hung off node 0 and
    optionally extra leaves on node 0. Diameter stays <= path_len + 2."""
    if k < 1:
        raise GraphError("k must be >= 1")
    if path_len is None:
        path_len = 2 * k
    g = make_clique(k + 1)
    nodes = set(g.nodes)
    edges = set(g.edges)
    prev = 0
    nxt = k + 1
    for _ in range(path_len):
        nodes.add(nxt)
        edges.add(_norm_edge(prev, nxt, False))
        prev = nxt
        nxt += 1
    for _ in range(leaves):
        nodes.add(nxt)
        edges.add(_norm_edge(0, nxt, False))
        nxt += 1
    return Graph.build(nodes, edges)
