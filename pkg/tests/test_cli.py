"""Command-line behavior: file formats, exit codes, record shapes,
byte-determinism of sweeps."""

from __future__ import annotations

import io
import json

import pytest
from click.testing import CliRunner

from distparam import cli, graphs


@pytest.fixture
def runner():
    return CliRunner()


def invoke(runner, *args):
    return runner.invoke(cli.main, list(args), catch_exceptions=False)


# ---------------------------------------------------------------------------
# Edge-list format


def test_edge_list_round_trip():
    g = graphs.make_random_connected(7, 0.4, seed=3)
    buf = io.StringIO()
    cli.write_edge_list(g, buf)
    back = cli.read_edge_list(io.StringIO(buf.getvalue()))
    assert back.nodes == g.nodes
    assert back.edges == g.edges
    assert back.directed == g.directed


def test_edge_list_keeps_isolated_nodes_and_comments():
    text = "# a comment\ngraph 3 1 u\nnode 5\n\n0 1\n"
    g = cli.read_edge_list(io.StringIO(text))
    assert g.nodes == {0, 1, 5}
    assert g.m == 1


def test_edge_list_rejects_bad_header_and_counts():
    with pytest.raises(ValueError):
        cli.read_edge_list(io.StringIO("graph 2 1 x\n0 1\n"))
    with pytest.raises(ValueError):
        cli.read_edge_list(io.StringIO("graph 5 1 u\n0 1\n"))
    with pytest.raises(ValueError):
        cli.read_edge_list(io.StringIO(""))


def test_directed_edge_list_round_trip():
    g = graphs.Graph.build({0, 1, 2}, [(2, 0), (0, 1)], directed=True)
    buf = io.StringIO()
    cli.write_edge_list(g, buf)
    back = cli.read_edge_list(io.StringIO(buf.getvalue()))
    assert back.directed and back.edges == g.edges


# ---------------------------------------------------------------------------
# generate / run


def test_generate_writes_file_and_sidecar(runner, tmp_path):
    out = tmp_path / "ps.el"
    result = invoke(runner, "generate", "--family", "path_star",
                    "--params", "r=2,ell=5", "--out", str(out))
    assert result.exit_code == 0
    g = cli.read_edge_list(io.StringIO(out.read_text()))
    assert g.n == 2 * 6 + 1
    side = json.loads((tmp_path / "ps.el.meta.json").read_text())
    assert side["n"] == g.n
    assert side["family"] == "path_star"


def test_generate_rejects_bad_params(runner, tmp_path):
    result = runner.invoke(cli.main, [
        "generate", "--family", "cycle_star", "--params", "k=1,t=1,d=5",
        "--out", str(tmp_path / "x.el")])
    assert result.exit_code == 2


def test_run_accept_exit_zero_and_record_shape(runner):
    result = invoke(runner, "run", "--family", "clique", "--params", "n=5",
                    "--algorithm", "kmvc-exact", "--k", "4")
    assert result.exit_code == 0
    rec = json.loads(result.output)
    assert rec["verdict"] == "accept"
    assert rec["solution_size"] == 4
    assert rec["opt_size"] == 4
    assert rec["rounds"] > 0 and rec["peak_bits"] > 0
    assert sorted(rec["solution"])


def test_run_no_k_solution_exit_three(runner):
    result = invoke(runner, "run", "--family", "clique", "--params", "n=5",
                    "--algorithm", "kmvc-exact", "--k", "2")
    assert result.exit_code == 3
    assert json.loads(result.output)["verdict"] == "no_k_solution"


def test_run_bandwidth_exit_five(runner):
    result = invoke(runner, "run", "--family", "clique", "--params", "n=40",
                    "--algorithm", "kmvc-exact", "--k", "6", "--beta", "1")
    assert result.exit_code == 5
    assert json.loads(result.output)["verdict"] == "error:bandwidth"


def test_run_budget_exit_six(runner):
    result = invoke(runner, "run", "--family", "path", "--params", "n=6",
                    "--algorithm", "kmvc-exact", "--k", "3", "--budget", "4")
    assert result.exit_code == 6
    assert json.loads(result.output)["verdict"] == "error:budget"


def test_run_usage_errors_exit_two(runner):
    assert runner.invoke(cli.main, ["run", "--algorithm", "kmvc-exact",
                                    "--k", "1"]).exit_code == 2
    assert runner.invoke(cli.main, ["run", "--family", "path", "--params",
                                    "n=4", "--algorithm", "nope",
                                    "--k", "1"]).exit_code == 2
    assert runner.invoke(cli.main, ["run", "--family", "path", "--params",
                                    "n=4", "--algorithm", "kmvc-2eps",
                                    "--k", "1"]).exit_code == 2


def test_run_output_is_deterministic(runner):
    args = ("run", "--family", "random", "--params", "n=8,seed=4",
            "--algorithm", "kmaxm-exact", "--k", "2", "--seed", "9")
    assert invoke(runner, *args).output == invoke(runner, *args).output


def test_run_local_model_algorithm(runner):
    result = invoke(runner, "run", "--family", "star", "--params", "n=5",
                    "--algorithm", "dlb-mvc", "--k", "1", "--model", "local")
    assert result.exit_code == 0
    assert json.loads(result.output)["solution"] == [0]


# ---------------------------------------------------------------------------
# sweep


def test_sweep_csv_is_byte_deterministic(runner, tmp_path):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({
        "algorithm": "kmvc-exact",
        "families": [{"family": "path", "params": {"n": 5}},
                     {"family": "cycle", "params": {"n": 5}}],
        "ks": [1, 2, 3],
        "seeds": [0, 1],
    }))
    a = invoke(runner, "sweep", "--spec", str(spec))
    b = invoke(runner, "sweep", "--spec", str(spec))
    assert a.exit_code == 0
    assert a.output.encode() == b.output.encode()
    lines = a.output.strip().split("\n")
    assert lines[0] == ("family,params,n,k,epsilon,model,beta,seed,verdict,"
                        "solution_size,opt_size,rounds,peak_bits,total_msgs")
    assert len(lines) == 1 + 2 * 3 * 2
    # rows follow spec order: all path rows before all cycle rows
    assert all(row.startswith("path,") for row in lines[1:7])
    assert all(row.startswith("cycle,") for row in lines[7:])


def test_sweep_rejects_malformed_spec(runner, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert runner.invoke(cli.main, ["sweep", "--spec", str(bad)]).exit_code == 2
    bad.write_text(json.dumps({"algorithm": "kmvc-exact"}))
    assert runner.invoke(cli.main, ["sweep", "--spec", str(bad)]).exit_code == 2


# ---------------------------------------------------------------------------
# verify / attack


def test_verify_reports_optimality(runner, tmp_path):
    out = tmp_path / "c5.el"
    invoke(runner, "generate", "--family", "cycle", "--params", "n=5",
           "--out", str(out))
    good = invoke(runner, "verify", "--graph", str(out), "--problem", "MVC",
                  "--solution", "0,2,3")
    assert good.exit_code == 0
    rec = json.loads(good.output)
    assert rec["feasible"] and rec["optimal"] and rec["opt_size"] == 3
    bad = invoke(runner, "verify", "--graph", str(out), "--problem", "MVC",
                 "--solution", "0,2")
    assert bad.exit_code == 1
    assert not json.loads(bad.output)["feasible"]


def test_verify_edge_solution_syntax(runner, tmp_path):
    out = tmp_path / "p4.el"
    invoke(runner, "generate", "--family", "path", "--params", "n=4",
           "--out", str(out))
    res = invoke(runner, "verify", "--graph", str(out), "--problem", "MaxM",
                 "--solution", "0-1,2-3")
    assert res.exit_code == 0
    assert json.loads(res.output)["size"] == 2


def test_verify_large_graph_reports_oracle_limit(runner, tmp_path):
    out = tmp_path / "big.el"
    invoke(runner, "generate", "--family", "clique",
           "--params", f"n={cli.ORACLE_NODE_LIMIT + 2}", "--out", str(out))
    sol = ",".join(str(i) for i in range(cli.ORACLE_NODE_LIMIT + 1))
    res = invoke(runner, "verify", "--graph", str(out), "--problem", "MVC",
                 "--solution", sol)
    assert res.exit_code == 0
    rec = json.loads(res.output)
    assert rec["feasible"] and rec["opt_size"] is None
    assert "oracle limit" in rec["note"]


def test_attack_reversal_subcommand(runner):
    res = invoke(runner, "attack", "reversal", "--r", "3", "--x", "6",
                 "--mode", "exhaustive")
    assert res.exit_code == 0
    rec = json.loads(res.output)
    assert rec["max_additive_error"] >= 1
    assert rec["inputs"] == 2 ** 3


def test_attack_cycle_tree_subcommand(runner):
    res = invoke(runner, "attack", "cycle-tree", "--program", "empty",
                 "--k", "2", "--t", "2", "--d", "13")
    assert res.exit_code == 0
    rec = json.loads(res.output)
    assert rec["errors"]["cycle"] == 2
    assert rec["errors"]["tree"] == 0
