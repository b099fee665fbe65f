"""Command-line front end.

Subcommands mirror the library layers: ``purify`` (single-link schedules),
``strategy`` (chain policies and region scans), ``route`` (single-pair
search), ``multiflow`` (LP relaxation + rounding), ``topo gen`` (seeded
topologies), ``experiment run`` (batch scenarios), and ``verify``
(fixed-seed invariant suites).  The ENTROUTE_SEED environment variable
overrides every seed source — flags and config files alike.  All file
output is UTF-8 JSON/CSV; re-running a command with the same flags and
seed reproduces the CSV bodies byte for byte (runtimes excluded).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

from .auxgraph import build_aux_graph
from .experiments import config_from_json, run_experiment
from .multiflow import FlowRequest, multiflow_solve
from .network import QuantumNetwork
from .pair_algebra import pseudo_fidelity
from .purification import (
    SchedulerConfig,
    brute_force_optimal,
    evaluate_tree,
    leaf_count,
    pumping_schedule,
    schedule,
    symmetric_schedule,
    tree_to_text,
)
from .routing import brute_force_route, min_cost_path
from .strategies import (
    RepeaterChain,
    purify_and_swap,
    scan_points,
    swap_and_purify,
    swap_purify_swap,
)
from .topology import generate, spec_from_json
from .verify import SUITES, render, run_suite


def _env_seed():
    raw = os.environ.get("ENTROUTE_SEED", "").strip()
    if not raw:
        return None
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"ENTROUTE_SEED={raw!r} is not an integer") from None


def _emit_json(obj, out=None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


# ---------------------------------------------------------------------------
# purify


def _cmd_purify(args) -> int:
    if args.baseline == "symmetric":
        tree = symmetric_schedule(args.n)
    elif args.baseline == "pumping":
        tree = pumping_schedule(args.n)
    else:
        if args.ftheta is None:
            raise ValueError("--ftheta is required unless --baseline is given")
        if args.oracle:
            tree = brute_force_optimal(args.n, args.fe, args.ftheta)
        else:
            ent = schedule(
                SchedulerConfig(args.n, args.fe, args.ftheta, args.df, args.dxi)
            )
            tree = None if ent is None else ent.tree
    if tree is None:
        _emit_json({"infeasible": True, "n": args.n, "f_e": args.fe, "f_theta": args.ftheta})
        return 1
    f, y = evaluate_tree(tree, args.fe)
    b = leaf_count(tree)
    _emit_json(
        {
            "tree": tree_to_text(tree),
            "exact_fidelity": f,
            "exact_yield": y,
            "leaves": b,
            "throughput_per_input_pair": y / b,
        }
    )
    return 0


# ---------------------------------------------------------------------------
# strategy


def _parse_chain(text: str) -> RepeaterChain:
    obj = json.loads(text)
    if isinstance(obj, dict):
        return RepeaterChain(obj["hops"], obj.get("swap_success", 1.0))
    return RepeaterChain(obj)


def _cmd_strategy(args) -> int:
    if args.mode == "scan":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("a", "b", "c", "d", "delta", "winner"))
        for a, b, c, d, delta, winner in scan_points(args.region, args.step):
            w.writerow((f"{a:.6g}", f"{b:.6g}", f"{c:.6g}", f"{d:.6g}", f"{delta:.12g}", winner))
        if args.out:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(buf.getvalue())
        else:
            sys.stdout.write(buf.getvalue())
        return 0
    if args.chain is None or args.policy is None:
        raise ValueError("--chain and --policy are required")
    chain = _parse_chain(args.chain)
    if args.policy == "pas":
        out = purify_and_swap(chain)
    elif args.policy == "sap":
        out = swap_and_purify(chain)
    else:
        h = chain.length if args.h is None else args.h
        out = swap_purify_swap(chain, h)
    record = {
        "policy": args.policy,
        "fidelity": out.fidelity,
        "success_prob": out.success_prob,
    }
    if args.policy == "sps":
        record["h"] = chain.length if args.h is None else args.h
    _emit_json(record)
    return 0


# ---------------------------------------------------------------------------
# route


def _node_id(net: QuantumNetwork, raw: str):
    """Flags arrive as strings; integer-labelled networks need a coercion."""
    if raw in net.nodes:
        return raw
    try:
        as_int = int(raw)
    except ValueError:
        as_int = None
    if as_int is not None and as_int in net.nodes:
        return as_int
    raise ValueError(f"node {raw!r} not in network")


def _write_label_stats(path, stats: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("vertex", "alive_labels", "pushed", "expanded"))
        alive = stats.get("alive_per_vertex", {})
        for v in sorted(alive, key=str):
            w.writerow((v, alive[v], stats.get("pushed", 0), stats.get("expanded", 0)))


def _cmd_route(args) -> int:
    net = QuantumNetwork.load(args.net)
    src, dst = _node_id(net, args.src), _node_id(net, args.dst)
    aux = build_aux_graph(net, src, dst, deltaq=args.deltaq)
    phi0 = pseudo_fidelity(args.f0)
    psi0 = math.log(args.q0)
    stats: dict = {}
    plan = min_cost_path(aux, phi0, psi0, args.dphi, args.dpsi, stats=stats)
    record = {"infeasible": True} if plan is None else plan.to_json()
    if args.oracle:
        oracle = brute_force_route(net, src, dst, args.f0, args.q0)
        record["oracle"] = None if oracle is None else oracle.to_json()
    if args.stats_out:
        _write_label_stats(args.stats_out, stats)
    _emit_json(record, args.out)
    return 1 if plan is None else 0


# ---------------------------------------------------------------------------
# multiflow


def _cmd_multiflow(args) -> int:
    net = QuantumNetwork.load(args.net)
    seed = _env_seed()
    if seed is None:
        seed = args.seed
    flows = [
        FlowRequest(
            row["id"],
            row["src"],
            row["dst"],
            row["f0"],
            row["weight"],
            row.get("rk", args.rk),
        )
        for row in _load_json(args.flows)
    ]
    res = multiflow_solve(flows, net, args.eps, args.delta, seed, deltaq=args.deltaq)
    sel = res.selection
    _emit_json(
        {
            "selection": None if sel is None else [None if i is None else int(i) for i in sel.chosen],
            "total_weight": None if sel is None else sel.total_weight,
            "lp_objective": res.lp_objective,
            "trials": res.trials,
            "feasible_trials": res.feasible_trials,
        },
        args.out,
    )
    return 0


# ---------------------------------------------------------------------------
# topo / experiment / verify


def _cmd_topo_gen(args) -> int:
    raw = _load_json(args.spec)
    seed = _env_seed()
    if seed is not None:
        raw["seed"] = seed
    net = generate(spec_from_json(raw))
    net.dump(args.out)
    return 0


def _cmd_experiment_run(args) -> int:
    raw = _load_json(args.config)
    seed = _env_seed()
    if seed is not None:
        raw["seed"] = seed
    cfg = config_from_json(raw)
    outdir = args.out or cfg.output or "."
    result = run_experiment(cfg)
    csv_path, json_path = result.write(outdir)
    sys.stdout.write(f"{csv_path}\n{json_path}\n")
    return 0


def _cmd_verify(args) -> int:
    seed = _env_seed()
    if seed is None:
        seed = args.seed
    reports = run_suite(args.suite, seed)
    text, code = render(reports)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    sys.stdout.write(text)
    return code


# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="entroute", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("purify", help="single-link purification schedule")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--fe", type=float, required=True)
    q.add_argument("--ftheta", type=float)
    q.add_argument("--df", type=float, default=1e-4)
    q.add_argument("--dxi", type=float, default=1e-4)
    q.add_argument("--baseline", choices=("symmetric", "pumping"))
    q.add_argument("--oracle", action="store_true")
    q.set_defaults(fn=_cmd_purify)

    s = sub.add_parser("strategy", help="chain strategy evaluation or region scan")
    s.add_argument("mode", nargs="?", choices=("scan",), default=None)
    s.add_argument("--chain", help='hop fidelities as JSON, e.g. [[0.8,0.8],[0.9]]')
    s.add_argument("--policy", choices=("pas", "sap", "sps"))
    s.add_argument("--h", type=int)
    s.add_argument("--step", type=float, default=0.01)
    s.add_argument("--region", choices=("lemma1", "low"), default="lemma1")
    s.add_argument("--out")
    s.set_defaults(fn=_cmd_strategy)

    r = sub.add_parser("route", help="min-cost single-pair route")
    r.add_argument("--net", required=True)
    r.add_argument("--src", required=True)
    r.add_argument("--dst", required=True)
    r.add_argument("--f0", type=float, required=True)
    r.add_argument("--q0", type=float, default=1.0)
    r.add_argument("--dphi", type=float, default=0.01)
    r.add_argument("--dpsi", type=float, default=0.01)
    r.add_argument("--deltaq", type=int, default=1)
    r.add_argument("--oracle", action="store_true")
    r.add_argument("--out")
    r.add_argument("--stats-out")
    r.set_defaults(fn=_cmd_route)

    m = sub.add_parser("multiflow", help="multi-flow LP + randomized rounding")
    m.add_argument("--net", required=True)
    m.add_argument("--flows", required=True)
    m.add_argument("--eps", type=float, default=0.1)
    m.add_argument("--delta", type=float, default=0.05)
    m.add_argument("--rk", type=int, default=3)
    m.add_argument("--seed", type=int, default=7)
    m.add_argument("--deltaq", type=int, default=1)
    m.add_argument("--out")
    m.set_defaults(fn=_cmd_multiflow)

    t = sub.add_parser("topo", help="topology utilities")
    tsub = t.add_subparsers(dest="topo_command", required=True)
    tg = tsub.add_parser("gen", help="generate a seeded network file")
    tg.add_argument("--spec", required=True)
    tg.add_argument("--out", required=True)
    tg.set_defaults(fn=_cmd_topo_gen)

    e = sub.add_parser("experiment", help="batch experiment scenarios")
    esub = e.add_subparsers(dest="experiment_command", required=True)
    er = esub.add_parser("run", help="run a scenario from a JSON config")
    er.add_argument("--config", required=True)
    er.add_argument("--out")
    er.set_defaults(fn=_cmd_experiment_run)

    v = sub.add_parser("verify", help="fixed-seed invariant suites")
    v.add_argument("--suite", choices=SUITES + ("all",), required=True)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--out")
    v.set_defaults(fn=_cmd_verify)
    return p


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (FileNotFoundError, KeyError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
