"""Command-line surface: generate fixture graphs, run one simulation, sweep a
parameter grid to CSV, verify solutions against the oracles, and drive the
adversarial harness.

Outputs are byte-deterministic for fixed inputs and seeds: one compact JSON
record per line, CSV with a fixed column order.

Exit codes: 0 accept, 2 usage, 3 no_k_solution, 4 non-unanimous (or an accept
that fails re-validation), 5 bandwidth, 6 round budget.
"""

from __future__ import annotations

import json
import sys
from fractions import Fraction

import click

from . import algorithms as alg
from . import attacks, graphs, oracles, search
from .engine import BandwidthExceeded, Model, RoundBudgetExceeded, run
from .oracles import Infeasible, Problem

ORACLE_NODE_LIMIT = 18

EXIT_ACCEPT = 0
EXIT_NO_K = 3
EXIT_NON_UNANIMOUS = 4
EXIT_BANDWIDTH = 5
EXIT_BUDGET = 6


# ---------------------------------------------------------------------------
# Edge-list format


def write_edge_list(g: graphs.Graph, fh) -> None:
    kind = "d" if g.directed else "u"
    fh.write(f"graph {g.n} {g.m} {kind}\n")
    covered = {v for e in g.edges for v in e}
    for v in sorted(g.nodes - covered):
        fh.write(f"node {v}\n")
    for a, b in sorted(g.edges):
        fh.write(f"{a} {b}\n")


def read_edge_list(fh) -> graphs.Graph:
    header = None
    nodes: set = set()
    edges: list = []
    for raw in fh:
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if header is None:
            if len(parts) != 4 or parts[0] != "graph" or parts[3] not in ("u", "d"):
                raise ValueError(f"bad header line: {line!r}")
            header = (int(parts[1]), int(parts[2]), parts[3] == "d")
            continue
        if parts[0] == "node":
            nodes.add(int(parts[1]))
            continue
        if len(parts) != 2:
            raise ValueError(f"bad edge line: {line!r}")
        a, b = int(parts[0]), int(parts[1])
        nodes.update((a, b))
        edges.append((a, b))
    if header is None:
        raise ValueError("empty graph file")
    n, m, directed = header
    g = graphs.Graph.build(nodes, edges, directed=directed)
    if g.n != n or g.m != m:
        raise ValueError(
            f"header says n={n} m={m}, file has n={g.n} m={g.m}")
    return g


# ---------------------------------------------------------------------------
# Families and algorithms


def parse_params(text: str) -> dict:
    out: dict = {}
    if not text:
        return out
    for item in text.split(","):
        key, _, val = item.partition("=")
        if not _:
            raise click.UsageError(f"param {item!r} is not key=value")
        try:
            out[key.strip()] = int(val)
        except ValueError:
            out[key.strip()] = float(val)
    return out


def build_family(family: str, p: dict):
    """Returns (graph, meta-or-None)."""
    if family == "path_star":
        g, _, meta = graphs.make_path_star(p["r"], p["ell"])
        return g, meta
    if family == "directed_path_star":
        g, _, meta = graphs.make_directed_path_star(p["r"], p["ell"])
        return g, meta
    if family == "cycle_star":
        return graphs.make_cycle_star(p["k"], p["t"], p["d"],
                                      directed=bool(p.get("directed", 0)))
    if family == "cycle_star_tree":
        return graphs.make_cycle_star_tree(
            p["k"], p["t"], p["d"], directed=bool(p.get("directed", 0))), None
    if family == "path":
        return graphs.make_path(p["n"]), None
    if family == "cycle":
        return graphs.make_cycle(p["n"]), None
    if family == "star":
        return graphs.make_star(p["n"]), None
    if family == "clique":
        return graphs.make_clique(p["n"]), None
    if family == "random":
        return graphs.make_random_connected(
            p["n"], p.get("p", 0.4), seed=p.get("seed", 0)), None
    if family == "kernel_stress":
        return graphs.kernel_stress(p["k"], p.get("path_len"),
                                    p.get("leaves", 0)), None
    raise click.UsageError(f"unknown family {family!r}")


def make_program(algorithm: str, problem_out: list, k: int, eps, randomized: bool,
                 c: int):
    """problem_out receives the Problem the algorithm solves (for validation)."""
    def need_eps():
        if eps is None:
            raise click.UsageError(f"{algorithm} needs --eps")
        return Fraction(eps)

    table = {
        "kmvc-exact": (Problem.MVC,
                       lambda: alg.congest_kmvc_exact(k, randomized, c)),
        "kmaxm-exact": (Problem.MAXM,
                        lambda: alg.congest_kmaxm_exact(k, randomized, c)),
        "kmvc-2eps": (Problem.MVC,
                      lambda: alg.congest_kmvc_2eps(k, need_eps(), randomized, c)),
        "kmaxm-2eps": (Problem.MAXM,
                       lambda: alg.congest_kmaxm_2eps(k, need_eps(), randomized, c)),
        "dlb-mvc": (Problem.MVC, lambda: alg.local_dlb_solve(Problem.MVC, k)),
        "dlb-mds": (Problem.MDS, lambda: alg.local_dlb_solve(Problem.MDS, k)),
        "dlb-meds": (Problem.MEDS, lambda: alg.local_dlb_solve(Problem.MEDS, k)),
        "local-kmaxm": (Problem.MAXM,
                        lambda: alg.local_kmax_greedy(Problem.MAXM, k)),
        "local-kmaxis": (Problem.MAXIS,
                         lambda: alg.local_kmax_greedy(Problem.MAXIS, k)),
    }
    if algorithm not in table:
        raise click.UsageError(f"unknown algorithm {algorithm!r}")
    problem, factory = table[algorithm]
    problem_out.append(problem)
    return factory()


def _opt_size(g: graphs.Graph, problem: Problem):
    if g.n > ORACLE_NODE_LIMIT:
        return None
    try:
        return oracles.opt_value(g, problem)
    except Infeasible:
        return None


def _emit(record: dict) -> None:
    click.echo(json.dumps(record, sort_keys=True, separators=(",", ":")))


def _execute(g, algorithm, k, eps, model, beta, seed, budget, randomized, c,
             graph_desc):
    problem_box: list = []
    program = make_program(algorithm, problem_box, k, eps, randomized, c)
    problem = problem_box[0]
    record = {
        "algorithm": algorithm, "graph": graph_desc, "k": k,
        "epsilon": str(Fraction(eps)) if eps is not None else None,
        "model": model.value, "beta": beta, "seed": seed,
    }
    try:
        res = run(g, program, model=model, beta=beta, seed=seed,
                  round_budget=budget)
    except BandwidthExceeded as exc:
        record.update(verdict="error:bandwidth", detail=str(exc))
        return record, EXIT_BANDWIDTH
    except RoundBudgetExceeded as exc:
        record.update(verdict="error:budget", detail=str(exc))
        return record, EXIT_BUDGET
    verdict = alg.unanimous_verdict(res.outputs)
    sol = alg.combined_solution(res.outputs)
    record.update(rounds=res.rounds, peak_bits=res.peak_bits,
                  total_msgs=res.total_msgs,
                  solution_size=len(sol), opt_size=_opt_size(g, problem))
    if verdict is None:
        record.update(verdict="error:non_unanimous")
        return record, EXIT_NON_UNANIMOUS
    if verdict is alg.Verdict.NO_K:
        record.update(verdict="no_k_solution")
        return record, EXIT_NO_K
    if not oracles.is_feasible(g, problem, sol):
        record.update(verdict="error:infeasible_accept")
        return record, EXIT_NON_UNANIMOUS
    record.update(verdict="accept",
                  solution=sorted(sol) if problem.solution_kind != "edge"
                  else sorted(map(list, sol)))
    return record, EXIT_ACCEPT


def _load_graph(graph_path, family, params):
    if graph_path and family:
        raise click.UsageError("give either a graph file or a family, not both")
    if graph_path:
        with open(graph_path, encoding="utf-8") as fh:
            return read_edge_list(fh), f"file:{graph_path}"
    if family:
        g, _ = build_family(family, parse_params(params or ""))
        desc = family if not params else f"{family}({params})"
        return g, desc
    raise click.UsageError("need --graph or --family")


# ---------------------------------------------------------------------------
# Commands


@click.group()
def main():
    """Round-based simulator for parameterized distributed graph algorithms."""


@main.command()
@click.option("--family", required=True)
@click.option("--params", default="")
@click.option("--out", type=click.Path(), required=True)
def generate(family, params, out):
    """Write a graph family instance as an edge-list file (plus .meta.json)."""
    try:
        g, meta = build_family(family, parse_params(params))
    except (graphs.GraphError, KeyError) as exc:
        raise click.UsageError(f"bad params for {family}: {exc}")
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        write_edge_list(g, fh)
    if meta is not None:
        side = {"family": meta.family, "params": meta.params, "n": meta.n,
                "diameter": meta.diameter, "opt_sizes": meta.opt_sizes,
                "unique_optimum": meta.unique_optimum}
        with open(out + ".meta.json", "w", encoding="utf-8", newline="\n") as fh:
            json.dump(side, fh, sort_keys=True)
            fh.write("\n")
    click.echo(f"wrote {g.n} nodes, {g.m} edges to {out}")


@main.command(name="run")
@click.option("--graph", "graph_path", type=click.Path(exists=True))
@click.option("--family")
@click.option("--params", default="")
@click.option("--algorithm", required=True)
@click.option("--k", type=int, required=True)
@click.option("--eps", default=None)
@click.option("--model", type=click.Choice(["local", "congest"]),
              default="congest")
@click.option("--beta", type=int, default=8)
@click.option("--seed", type=int, default=0)
@click.option("--budget", type=int, default=None)
@click.option("--randomized/--deterministic", default=False)
@click.option("--fingerprint-c", type=int, default=3)
def run_cmd(graph_path, family, params, algorithm, k, eps, model, beta, seed,
            budget, randomized, fingerprint_c):
    """Run one algorithm on one graph; print a RunRecord line."""
    g, desc = _load_graph(graph_path, family, params)
    record, code = _execute(g, algorithm, k, eps, Model(model), beta, seed,
                            budget, randomized, fingerprint_c, desc)
    _emit(record)
    sys.exit(code)


CSV_COLUMNS = ("family,params,n,k,epsilon,model,beta,seed,verdict,"
               "solution_size,opt_size,rounds,peak_bits,total_msgs")


@main.command()
@click.option("--spec", "spec_path", type=click.Path(exists=True), required=True)
@click.option("--out", type=click.Path(), default=None)
def sweep(spec_path, out):
    """Cross-product of families x k x eps x seeds from a JSON spec file."""
    with open(spec_path, encoding="utf-8") as fh:
        try:
            spec = json.load(fh)
        except json.JSONDecodeError as exc:
            raise click.UsageError(f"malformed sweep spec: {exc}")
    for key in ("algorithm", "families", "ks"):
        if key not in spec:
            raise click.UsageError(f"sweep spec missing {key!r}")
    model = Model(spec.get("model", "congest"))
    beta = int(spec.get("beta", 8))
    epsilons = spec.get("epsilons", [None])
    seeds = spec.get("seeds", [0])
    randomized = bool(spec.get("randomized", False))
    c = int(spec.get("fingerprint_c", 3))
    rows = [CSV_COLUMNS]
    for fam in spec["families"]:
        family, params = fam["family"], fam.get("params", {})
        g, _ = build_family(family, params)
        pstr = ";".join(f"{a}={b}" for a, b in sorted(params.items()))
        for k in spec["ks"]:
            for eps in epsilons:
                for seed in seeds:
                    record, _code = _execute(
                        g, spec["algorithm"], int(k), eps, model, beta,
                        int(seed), spec.get("budget"), randomized, c, family)
                    rows.append(",".join(str(x) for x in (
                        family, pstr, g.n, k,
                        "" if eps is None else Fraction(eps),
                        model.value, beta, seed, record["verdict"],
                        record.get("solution_size", ""),
                        record.get("opt_size", ""),
                        record.get("rounds", ""),
                        record.get("peak_bits", ""),
                        record.get("total_msgs", ""))))
    text = "\n".join(rows) + "\n"
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


def parse_solution(text: str, edge_problem: bool) -> frozenset:
    text = text.strip()
    if not text:
        return frozenset()
    items = [t for t in text.replace("\n", ",").split(",") if t.strip()]
    if edge_problem:
        out = set()
        for item in items:
            a, _, b = item.partition("-")
            out.add(tuple(sorted((int(a), int(b)))))
        return frozenset(out)
    return frozenset(int(t) for t in items)


@main.command()
@click.option("--graph", "graph_path", type=click.Path(exists=True), required=True)
@click.option("--problem", required=True)
@click.option("--solution", default=None,
              help="comma-separated ids, or a-b pairs for edge problems")
@click.option("--solution-file", type=click.Path(exists=True), default=None)
def verify(graph_path, problem, solution, solution_file):
    """Check feasibility (always) and optimality (desk-scale oracles)."""
    prob = oracles.parse_problem(problem)
    with open(graph_path, encoding="utf-8") as fh:
        g = read_edge_list(fh)
    if solution_file is not None:
        with open(solution_file, encoding="utf-8") as fh:
            solution = fh.read()
    if solution is None:
        raise click.UsageError("need --solution or --solution-file")
    sol = parse_solution(solution, prob.solution_kind == "edge")
    if prob.solution_kind == "edge" and prob.directed:
        # arcs keep their orientation
        sol = frozenset(tuple(map(int, s)) for s in sol)
    feasible = oracles.is_feasible(g, prob, sol)
    record = {"problem": prob.value, "size": len(sol), "feasible": feasible,
              "opt_size": None, "optimal": None, "note": None}
    if g.n > ORACLE_NODE_LIMIT:
        record["note"] = f"oracle limit {ORACLE_NODE_LIMIT} nodes exceeded"
    else:
        try:
            opt = oracles.opt_value(g, prob)
            record["opt_size"] = opt
            record["optimal"] = bool(feasible and len(sol) == opt)
        except Infeasible:
            record["note"] = "no feasible solution exists"
    _emit(record)
    sys.exit(0 if feasible else 1)


@main.group()
def attack():
    """Adversarial experiments on bounded-round programs."""


@attack.command()
@click.option("--program",
              type=click.Choice(["truncated-greedy", "collect-solve"]),
              default="truncated-greedy")
@click.option("--problem", default="MVC")
@click.option("--r", type=int, required=True)
@click.option("--x", type=int, required=True)
@click.option("--mode", type=click.Choice(["per_path", "exhaustive"]),
              default="per_path")
@click.option("--budget", type=int, default=None)
@click.option("--seed", type=int, default=0)
def reversal(program, problem, r, x, mode, budget, seed):
    """Segment-reversal attack on the path-star construction."""
    prob = oracles.parse_problem(problem)
    if program == "truncated-greedy":
        prog = attacks.truncated_greedy_mvc(x)
    else:
        prog = attacks.collect_and_solve_reference(prob, 2 * (2 * x + 3) + 2)
    rep = attacks.reversal_attack(prog, prob, r, x, mode=mode, seed=seed,
                                  round_budget=budget)
    out = {"attack": "reversal", "program": program, "problem": prob.value,
           "params": rep.params, "mode": mode, "empirical": rep.empirical,
           "disqualified": rep.disqualified, "detail": rep.detail or None,
           "max_additive_error": rep.max_additive_error,
           "worst_subset": sorted(rep.worst_subset) if rep.worst_subset else [],
           "inputs": len(rep.inputs)}
    if rep.both_orientations_optimal is not None:
        out["both_orientations_optimal"] = {
            str(i): v for i, v in sorted(rep.both_orientations_optimal.items())}
    _emit(out)
    sys.exit(0 if not rep.disqualified else 1)


@attack.command(name="cycle-tree")
@click.option("--program", type=click.Choice(["degree-threshold", "empty"]),
              default="degree-threshold")
@click.option("--problem", default="MFVS")
@click.option("--k", type=int, required=True)
@click.option("--t", type=int, required=True)
@click.option("--d", type=int, required=True)
@click.option("--cap", type=int, default=None)
@click.option("--seed", type=int, default=0)
def cycle_tree(program, problem, k, t, d, cap, seed):
    """Cycle-star versus tree-variant attack for feedback-set programs."""
    prob = oracles.parse_problem(problem)
    if program == "degree-threshold":
        prog = attacks.degree_threshold_program(3)
    else:
        def prog(ctx):
            return frozenset()
            yield
    rep = attacks.cycle_vs_tree_attack(prog, k, t, d, round_cap=cap,
                                       problem=prob, seed=seed)
    out = {"attack": "cycle_vs_tree", "program": program,
           "problem": prob.value, "params": rep.params,
           "empirical": rep.empirical, "disqualified": rep.disqualified,
           "detail": rep.detail or None,
           "max_additive_error": rep.max_additive_error,
           "errors": {sorted(rec.subset)[0]: rec.additive_error
                      for rec in rep.inputs}}
    _emit(out)
    sys.exit(0 if not rep.disqualified else 1)


if __name__ == "__main__":
    main()
