import json
import math

import pytest

from entroute.cli import main
from entroute.network import QuantumNetwork
from entroute.pair_algebra import (
    purification_success_prob,
    purified_fidelity,
    pseudo_fidelity,
)
from entroute.strategies import lemma1_delta


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def grid_net(tmp_path):
    spec = tmp_path / "spec.json"
    spec.write_text(
        json.dumps(
            {
                "kind": "grid",
                "rows": 2,
                "cols": 3,
                "capacity": 3,
                "qubit_allowance": 1,
                "seed": 5,
            }
        ),
        encoding="utf-8",
    )
    net = tmp_path / "net.json"
    assert main(["topo", "gen", "--spec", str(spec), "--out", str(net)]) == 0
    return spec, net


def test_purify_schedule_json(capsys):
    code, out, _ = run_cli(
        capsys, "purify", "--n", "2", "--fe", "0.75", "--ftheta", "0.78"
    )
    assert code == 0
    rec = json.loads(out)
    assert rec["tree"] == "(L,L)"
    assert rec["leaves"] == 2
    assert rec["exact_fidelity"] == pytest.approx(purified_fidelity(0.75, 0.75), abs=1e-12)
    assert rec["exact_yield"] == pytest.approx(purification_success_prob(0.75, 0.75), abs=1e-12)
    assert rec["throughput_per_input_pair"] == pytest.approx(rec["exact_yield"] / 2, abs=1e-12)


def test_purify_baseline_and_oracle_agree(capsys):
    code, out, _ = run_cli(capsys, "purify", "--n", "4", "--fe", "0.75", "--baseline", "symmetric")
    assert code == 0
    assert json.loads(out)["tree"] == "((L,L),(L,L))"
    code, out, _ = run_cli(
        capsys, "purify", "--n", "3", "--fe", "0.75", "--ftheta", "0.8", "--oracle"
    )
    assert code == 0
    oracle = json.loads(out)
    code, out, _ = run_cli(capsys, "purify", "--n", "3", "--fe", "0.75", "--ftheta", "0.8")
    assert code == 0
    assert json.loads(out)["tree"] == oracle["tree"]


def test_purify_infeasible_exit_code(capsys):
    code, out, _ = run_cli(capsys, "purify", "--n", "2", "--fe", "0.6", "--ftheta", "0.999")
    assert code == 1
    assert json.loads(out)["infeasible"] is True


def test_purify_missing_ftheta(capsys):
    code, _, err = run_cli(capsys, "purify", "--n", "2", "--fe", "0.75")
    assert code == 2
    assert "--ftheta" in err


def test_strategy_eval(capsys):
    code, out, _ = run_cli(
        capsys, "strategy", "--chain", "[[0.8, 0.8], [0.9, 0.9]]", "--policy", "pas"
    )
    assert code == 0
    rec = json.loads(out)
    assert rec["policy"] == "pas"
    assert 0.5 < rec["fidelity"] < 1.0
    # h = l degenerates to purify-and-swap
    code, out, _ = run_cli(
        capsys,
        "strategy",
        "--chain",
        '{"hops": [[0.8, 0.8], [0.9, 0.9]], "swap_success": 0.8}',
        "--policy",
        "sps",
        "--h",
        "2",
    )
    sps = json.loads(out)
    assert sps["fidelity"] == pytest.approx(rec["fidelity"], abs=1e-12)


def test_strategy_scan_csv(capsys, tmp_path):
    out_path = tmp_path / "scan.csv"
    code, stdout, _ = run_cli(
        capsys, "strategy", "scan", "--step", "0.1", "--region", "lemma1", "--out", str(out_path)
    )
    assert code == 0 and stdout == ""
    lines = out_path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "a,b,c,d,delta,winner"
    # 6 grid values for a,b; 4 for c,d
    assert len(lines) - 1 == 6 * 6 * 4 * 4
    a, b, c, d, delta, winner = lines[1].split(",")
    assert float(delta) == pytest.approx(
        lemma1_delta(float(a), float(b), float(c), float(d)), rel=1e-9
    )
    assert winner in {"pas", "sap", "tie"}


def test_route_plan_and_sidecar(capsys, grid_net, tmp_path):
    _, net_path = grid_net
    stats_path = tmp_path / "stats.csv"
    code, out, _ = run_cli(
        capsys,
        "route",
        "--net",
        str(net_path),
        "--src",
        "0",
        "--dst",
        "5",
        "--f0",
        "0.75",
        "--q0",
        "0.25",
        "--dphi",
        "0.005",
        "--dpsi",
        "0.01",
        "--oracle",
        "--stats-out",
        str(stats_path),
    )
    assert code == 0
    rec = json.loads(out)
    assert rec["nodes"][0] == 0 and rec["nodes"][-1] == 5
    assert rec["cost"] == pytest.approx(rec["oracle"]["cost"], abs=1e-9)
    net = QuantumNetwork.load(net_path)
    want = math.prod(
        purified_fidelity(f, f) if m == 2 else f
        for f, m in zip(rec["edge_fidelities"], rec["pair_counts"])
    )  # not the plan fidelity, just a sanity bound on the inputs
    assert 0 < want <= 1
    lines = stats_path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "vertex,alive_labels,pushed,expanded"
    assert len(lines) > 1
    assert set(net.nodes) == {0, 1, 2, 3, 4, 5}


def test_route_infeasible_agrees_with_oracle(capsys, grid_net):
    _, net_path = grid_net
    code, out, _ = run_cli(
        capsys,
        "route",
        "--net",
        str(net_path),
        "--src",
        "0",
        "--dst",
        "5",
        "--f0",
        "0.95",
        "--q0",
        "0.9",
        "--oracle",
    )
    assert code == 1
    rec = json.loads(out)
    assert rec["infeasible"] is True and rec["oracle"] is None


def test_route_unknown_node(capsys, grid_net):
    _, net_path = grid_net
    code, _, err = run_cli(
        capsys, "route", "--net", str(net_path), "--src", "99", "--dst", "5", "--f0", "0.8"
    )
    assert code == 2
    assert "not in network" in err


def test_multiflow_output_fields(capsys, grid_net, tmp_path):
    _, net_path = grid_net
    flows = tmp_path / "flows.json"
    flows.write_text(
        json.dumps(
            [
                {"id": "f1", "src": 0, "dst": 5, "f0": 0.75, "weight": 2.0, "rk": 2},
                {"id": "f2", "src": 2, "dst": 3, "f0": 0.75, "weight": 1.0},
            ]
        ),
        encoding="utf-8",
    )
    code, out, _ = run_cli(
        capsys,
        "multiflow",
        "--net",
        str(net_path),
        "--flows",
        str(flows),
        "--eps",
        "0.2",
        "--delta",
        "0.05",
        "--seed",
        "7",
    )
    assert code == 0
    rec = json.loads(out)
    assert set(rec) == {"selection", "total_weight", "lp_objective", "trials", "feasible_trials"}
    assert rec["trials"] == 3
    if rec["selection"] is not None:
        assert rec["total_weight"] <= rec["lp_objective"] / 0.8 + 1e-9


def test_topo_gen_deterministic(grid_net, tmp_path):
    spec_path, net_path = grid_net
    again = tmp_path / "again.json"
    assert main(["topo", "gen", "--spec", str(spec_path), "--out", str(again)]) == 0
    assert again.read_text(encoding="utf-8") == net_path.read_text(encoding="utf-8")


def test_env_seed_overrides_topo(grid_net, tmp_path, monkeypatch):
    spec_path, net_path = grid_net
    other = tmp_path / "other.json"
    monkeypatch.setenv("ENTROUTE_SEED", "123")
    assert main(["topo", "gen", "--spec", str(spec_path), "--out", str(other)]) == 0
    assert other.read_text(encoding="utf-8") != net_path.read_text(encoding="utf-8")


def test_env_seed_invalid(capsys, grid_net, monkeypatch, tmp_path):
    spec_path, _ = grid_net
    monkeypatch.setenv("ENTROUTE_SEED", "not-a-number")
    code, _, err = run_cli(
        capsys, "topo", "gen", "--spec", str(spec_path), "--out", str(tmp_path / "x.json")
    )
    assert code == 2
    assert "ENTROUTE_SEED" in err


def test_experiment_run_writes_outputs(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(
        json.dumps(
            {
                "scenario": "purify-compare",
                "trials": 1,
                "seed": 0,
                "budgets": [2, 3],
                "fidelities": [0.75],
            }
        ),
        encoding="utf-8",
    )
    outdir = tmp_path / "out"
    code, out, _ = run_cli(
        capsys, "experiment", "run", "--config", str(cfg), "--out", str(outdir)
    )
    assert code == 0
    csv_path, json_path = out.splitlines()
    body = (outdir / "results.csv").read_text(encoding="utf-8")
    assert body.startswith("scenario,algorithm,parameter,metric,value,seed,runtime_ms\n")
    assert "purify-compare,ours" in body
    summary = json.loads((outdir / "summary.json").read_text(encoding="utf-8"))
    assert summary["row_count"] == body.count("\n") - 1
    assert csv_path.endswith("results.csv") and json_path.endswith("summary.json")


def test_experiment_csv_deterministic_modulo_runtime(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(
        json.dumps(
            {
                "scenario": "strategy-compare",
                "trials": 2,
                "seed": 3,
                "lengths": [3],
            }
        ),
        encoding="utf-8",
    )
    bodies = []
    for name in ("a", "b"):
        outdir = tmp_path / name
        code, _, _ = run_cli(
            capsys, "experiment", "run", "--config", str(cfg), "--out", str(outdir)
        )
        assert code == 0
        rows = (outdir / "results.csv").read_text(encoding="utf-8").splitlines()
        bodies.append([r.rsplit(",", 1)[0] for r in rows])
    assert bodies[0] == bodies[1]


def test_verify_cli_exit_and_bytes(capsys, tmp_path):
    out_path = tmp_path / "report.txt"
    code, stdout, _ = run_cli(
        capsys, "verify", "--suite", "lemma1", "--seed", "0", "--out", str(out_path)
    )
    assert code == 0
    assert stdout.startswith("suite lemma1: PASS\n")
    assert out_path.read_text(encoding="utf-8") == stdout


def test_missing_file_reports_error(capsys):
    code, _, err = run_cli(capsys, "route", "--net", "/nonexistent.json", "--src", "a", "--dst", "b", "--f0", "0.8")
    assert code == 2
    assert "error:" in err


def test_pseudo_fidelity_threshold_used_by_route(capsys, grid_net):
    # the emitted plan satisfies the step-relaxed fidelity guarantee
    _, net_path = grid_net
    code, out, _ = run_cli(
        capsys,
        "route",
        "--net",
        str(net_path),
        "--src",
        "0",
        "--dst",
        "5",
        "--f0",
        "0.75",
        "--q0",
        "0.25",
        "--dphi",
        "0.005",
        "--dpsi",
        "0.01",
    )
    assert code == 0
    rec = json.loads(out)
    slack = len(rec["nodes"]) * 0.005
    assert rec["phi_hat"] >= pseudo_fidelity(0.75) - slack - 1e-9
