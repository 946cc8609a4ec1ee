"""Command-line interface.

Every subcommand is deterministic given (argv, input files, seed) and writes
a manifest next to its primary output recording parameters, input/output
paths, and sha256 digests of the artifacts; ``replay`` re-runs a manifest
and checks that the artifacts reproduce byte for byte.

Exit codes: 0 success/equal/holds, 1 far/violation/missing, 2 usage error.
"""

from __future__ import annotations

import argparse
import hashlib
import sys
import time
from pathlib import Path

from . import serialize as io
from .adversary import build_adversary_pair, build_hard_graph, verify_adversary_pair
from .algorithms import (
    TesterConfig,
    c2st,
    c2st_unknown_graph,
    cgft,
    clp_learn,
    oracle_query_with_mass,
    subadditivity_audit,
)
from .covering import build_randomized, build_resampled, verify_covering
from .errors import CausalScopeError
from .graph import chain_graph, project_to_smcg, random_graph, star_graph
from .model import exact_interventional, random_smbn, sample_interventional

USAGE_ERROR = 2


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _tester_config(args) -> TesterConfig:
    return TesterConfig(
        base_constant=args.base_constant,
        calibration_reps=args.calibration_reps,
        budget_mode=args.budget_mode,
        delta_cover=args.delta_cover,
        learn_constant=args.learn_constant,
    )


def _add_tester_flags(p):
    p.add_argument("--base-constant", type=float, default=5.0,
                   help="multiplier on the tester sample-size formula")
    p.add_argument("--learn-constant", type=float, default=2.0,
                   help="multiplier on the learner sample-size formula")
    p.add_argument("--calibration-reps", type=int, default=500)
    p.add_argument("--budget-mode", choices=["per-target", "aggregate"],
                   default="per-target")
    p.add_argument("--delta-cover", type=float, default=0.1,
                   help="failure budget per randomized covering draw (retried until verified)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="causalscope",
        description="Interventional testing and learning of causal Bayesian networks.",
    )
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("gen-graph", help="generate a graph file")
    p.add_argument("--kind", choices=["random", "chain", "star", "hard"], required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--K", type=int, default=2)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--l", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("gen-model", help="random Dirichlet CPTs over a graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("project", help="project a general causal graph to an SMCG")
    p.add_argument("--general", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("cover", help="build a covering intervention set and verify it")
    p.add_argument("--graph", required=True)
    p.add_argument("--method", choices=["randomized", "resampled"], default="randomized")
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("cover-verify", help="verify a covering set file against a graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--cover", required=True)

    p = sub.add_parser("dist", help="exact interventional distribution to a file")
    p.add_argument("--model", required=True)
    p.add_argument("--do", default="", help="intervention, e.g. '0=1,3=0'")
    p.add_argument("--max-enum", type=int, default=1 << 26)
    p.add_argument("--out", required=True)

    p = sub.add_parser("sample", help="draw interventional samples, one row per line")
    p.add_argument("--model", required=True)
    p.add_argument("--do", default="")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("c2st", help="two-sample test between two model files")
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--graph", required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cover", help="optional pre-built covering set file")
    p.add_argument("--report", required=True)
    _add_tester_flags(p)

    p = sub.add_parser("cgft", help="goodness-of-fit test against a known model")
    p.add_argument("--model", required=True, help="known hypothesis model file")
    p.add_argument("--x", required=True, help="unknown model file (sampled)")
    p.add_argument("--graph", required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cover")
    p.add_argument("--report", required=True)
    _add_tester_flags(p)

    p = sub.add_parser("c2st-unknown", help="two-sample test with unknown graph")
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report", required=True)
    _add_tester_flags(p)

    p = sub.add_parser("learn", help="learn an interventional oracle from a model")
    p.add_argument("--x", required=True)
    p.add_argument("--graph", required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cover")
    p.add_argument("--out", required=True)
    _add_tester_flags(p)

    p = sub.add_parser("query", help="query a saved oracle for an interventional distribution")
    p.add_argument("--oracle", required=True)
    p.add_argument("--do", default="")
    p.add_argument("--max-enum", type=int, default=1 << 26)
    p.add_argument("--out", required=True)

    p = sub.add_parser("audit-subadditivity", help="exact subadditivity audit of two models")
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--graph", required=True)
    p.add_argument("--max-enum", type=int, default=1 << 26)
    p.add_argument("--out", required=True)

    p = sub.add_parser("adversary", help="emit a twin model pair that separates on one intervention")
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--secret", required=True, help="comma-separated bits, e.g. '1,1'")
    p.add_argument("--tree-seed", type=int, default=None)
    p.add_argument("--outdir", required=True)

    p = sub.add_parser("verify-adversary", help="exhaustively verify an emitted pair")
    p.add_argument("--pair", required=True, help="directory written by 'adversary'")
    p.add_argument("--report", default=None)

    p = sub.add_parser("replay", help="re-run a manifest and check outputs reproduce")
    p.add_argument("manifest")

    return parser


def _cmd_gen_graph(args):
    if args.kind == "random":
        g = random_graph(args.n, args.K, args.d, args.l, args.seed)
    elif args.kind == "chain":
        g = chain_graph(args.n, args.K)
    elif args.kind == "star":
        g = star_graph(args.n, args.K)
    else:
        g = build_hard_graph(args.n, args.d, args.l, args.seed)
    io.save_json(io.graph_to_dict(g), args.out)
    return 0, {"n": g.n}, {"graph": args.out}, {}


def _cmd_gen_model(args):
    g = io.graph_from_dict(io.load_json(args.graph))
    m = random_smbn(g, args.alpha, args.seed)
    io.save_json(io.model_to_dict(m), args.out)
    return 0, {}, {"model": args.out}, {"graph": args.graph}


def _cmd_project(args):
    h = io.general_graph_from_dict(io.load_json(args.general))
    g = project_to_smcg(h)
    io.save_json(io.graph_to_dict(g), args.out)
    return 0, {"n": g.n}, {"graph": args.out}, {"general": args.general}


def _cmd_cover(args):
    g = io.graph_from_dict(io.load_json(args.graph))
    if args.method == "randomized":
        cs = build_randomized(g, args.delta, args.seed)
    else:
        cs = build_resampled(g, args.seed)
    missing = verify_covering(g, cs)
    io.save_json(io.covering_to_dict(cs), args.out)
    verdicts = {"size": len(cs), "covering": missing is None}
    if missing is not None:
        verdicts["first_missing"] = {"S": list(missing[0]), "pa": list(missing[1])}
    return (0 if missing is None else 1), verdicts, {"cover": args.out}, {"graph": args.graph}


def _cmd_cover_verify(args):
    g = io.graph_from_dict(io.load_json(args.graph))
    cs = io.covering_from_dict(io.load_json(args.cover))
    missing = verify_covering(g, cs)
    verdicts = {"covering": missing is None}
    if missing is not None:
        verdicts["first_missing"] = {"S": list(missing[0]), "pa": list(missing[1])}
        print(f"missing witness for S={list(missing[0])} pa={list(missing[1])}")
    else:
        print("ok")
    return (0 if missing is None else 1), verdicts, {}, {"graph": args.graph, "cover": args.cover}


def _cmd_dist(args):
    m = io.model_from_dict(io.load_json(args.model))
    I = io.parse_do(args.do)
    dist = exact_interventional(m, I, max_cells=args.max_enum)
    io.save_json(io.dist_to_dict(dist), args.out)
    return 0, {"do": I.key}, {"dist": args.out}, {"model": args.model}


def _cmd_sample(args):
    m = io.model_from_dict(io.load_json(args.model))
    I = io.parse_do(args.do)
    samples = sample_interventional(m, I, args.count, args.seed)
    io.write_samples(samples, args.out)
    return 0, {"count": args.count}, {"samples": args.out}, {"model": args.model}


def _cmd_c2st(args):
    g = io.graph_from_dict(io.load_json(args.graph))
    x = io.model_from_dict(io.load_json(args.x))
    y = io.model_from_dict(io.load_json(args.y))
    covering = io.covering_from_dict(io.load_json(args.cover)) if args.cover else None
    decision, report = c2st(x, y, g, args.eps, args.seed, covering, _tester_config(args))
    io.save_json(report, args.report)
    print(decision)
    return (0 if decision == "equal" else 1), {"decision": decision}, \
        {"report": args.report}, {"x": args.x, "y": args.y, "graph": args.graph}


def _cmd_cgft(args):
    g = io.graph_from_dict(io.load_json(args.graph))
    m = io.model_from_dict(io.load_json(args.model))
    x = io.model_from_dict(io.load_json(args.x))
    covering = io.covering_from_dict(io.load_json(args.cover)) if args.cover else None
    decision, report = cgft(m, x, g, args.eps, args.seed, covering, _tester_config(args))
    io.save_json(report, args.report)
    print(decision)
    return (0 if decision == "equal" else 1), {"decision": decision}, \
        {"report": args.report}, {"model": args.model, "x": args.x, "graph": args.graph}


def _cmd_c2st_unknown(args):
    x = io.model_from_dict(io.load_json(args.x))
    y = io.model_from_dict(io.load_json(args.y))
    decision, report = c2st_unknown_graph(
        x, y, args.d, args.l, args.K, args.n, args.eps, args.seed, _tester_config(args)
    )
    io.save_json(report, args.report)
    print(decision)
    return (0 if decision == "equal" else 1), {"decision": decision}, \
        {"report": args.report}, {"x": args.x, "y": args.y}


def _cmd_learn(args):
    g = io.graph_from_dict(io.load_json(args.graph))
    x = io.model_from_dict(io.load_json(args.x))
    covering = io.covering_from_dict(io.load_json(args.cover)) if args.cover else None
    oracle = clp_learn(x, g, args.eps, args.seed, covering, _tester_config(args))
    io.save_json(io.oracle_to_dict(oracle), args.out)
    return 0, {"locals": len(oracle.locals)}, {"oracle": args.out}, \
        {"x": args.x, "graph": args.graph}


def _cmd_query(args):
    oracle = io.oracle_from_dict(io.load_json(args.oracle))
    I = io.parse_do(args.do)
    dist, mass = oracle_query_with_mass(oracle, I.targets, dict(I.pairs),
                                        max_cells=args.max_enum)
    io.save_json(io.dist_to_dict(dist), args.out)
    return 0, {"do": I.key, "raw_mass": mass}, {"dist": args.out}, {"oracle": args.oracle}


def _cmd_audit(args):
    g = io.graph_from_dict(io.load_json(args.graph))
    x = io.model_from_dict(io.load_json(args.x))
    y = io.model_from_dict(io.load_json(args.y))
    rep = subadditivity_audit(x, y, g, max_cells=args.max_enum)
    payload = {
        "gamma_max": rep.gamma_max,
        "worst_joint_h2": rep.worst_joint_h2,
        "bound": rep.bound,
        "holds": rep.holds,
        "worst_intervention": rep.worst_intervention,
        "observable_bound": rep.observable_bound,
        "holds_observable": rep.holds_observable,
    }
    io.save_json(payload, args.out)
    ok = rep.holds and (rep.holds_observable is not False)
    print("holds" if ok else "VIOLATION")
    return (0 if ok else 1), {"holds": ok}, {"report": args.out}, \
        {"x": args.x, "y": args.y, "graph": args.graph}


def _cmd_adversary(args):
    secret = tuple(int(b) for b in args.secret.split(","))
    ap = build_adversary_pair(args.l, args.s, secret, args.tree_seed)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    io.save_json(io.model_to_dict(ap.model_m), outdir / "model_m.json")
    io.save_json(io.model_to_dict(ap.model_n), outdir / "model_n.json")
    io.save_json(
        {
            "l": args.l, "s": args.s, "secret_pa": list(ap.secret_pa),
            "tree_seed": args.tree_seed,
            "c_vertices": list(ap.c_vertices), "w_vertices": list(ap.w_vertices),
        },
        outdir / "metadata.json",
    )
    outs = {name: str(outdir / f"{name}.json") for name in ("model_m", "model_n", "metadata")}
    return 0, {"secret_pa": list(secret)}, outs, {}


def _cmd_verify_adversary(args):
    pair_dir = Path(args.pair)
    meta = io.load_json(pair_dir / "metadata.json")
    ap = build_adversary_pair(meta["l"], meta["s"], meta["secret_pa"], meta["tree_seed"])
    # verify the files on disk, not the freshly built pair
    ap.model_m = io.model_from_dict(io.load_json(pair_dir / "model_m.json"))
    ap.model_n = io.model_from_dict(io.load_json(pair_dir / "model_n.json"))
    ap.graph = ap.model_m.graph
    report = verify_adversary_pair(ap)
    secret_entries = [e for e in report.ledger if e["case"] == "covered"]
    for entry in secret_entries[:1]:
        print(f"covered do({entry['do']}): TV={entry['tv']}")
    print("ok" if report.ok else f"FAILED: {report.failures[:3]}")
    outputs = {}
    if args.report:
        io.save_json(
            {"ok": report.ok, "interventions_checked": report.interventions_checked,
             "failures": [list(f) for f in report.failures], "ledger": report.ledger},
            args.report,
        )
        outputs["report"] = args.report
    return (0 if report.ok else 1), {"ok": report.ok}, outputs, {"pair": str(pair_dir)}


_HANDLERS = {
    "gen-graph": _cmd_gen_graph,
    "gen-model": _cmd_gen_model,
    "project": _cmd_project,
    "cover": _cmd_cover,
    "cover-verify": _cmd_cover_verify,
    "dist": _cmd_dist,
    "sample": _cmd_sample,
    "c2st": _cmd_c2st,
    "cgft": _cmd_cgft,
    "c2st-unknown": _cmd_c2st_unknown,
    "learn": _cmd_learn,
    "query": _cmd_query,
    "audit-subadditivity": _cmd_audit,
    "adversary": _cmd_adversary,
    "verify-adversary": _cmd_verify_adversary,
}


def _manifest_path(cmd: str, outputs: dict, inputs: dict) -> Path:
    if outputs:
        primary = sorted(str(v) for v in outputs.values())[0]
        return Path(primary + ".manifest.json")
    if inputs:
        anchor = Path(sorted(str(v) for v in inputs.values())[0])
        base = anchor if anchor.is_dir() else anchor.parent
        return base / f"causalscope-{cmd}.manifest.json"
    return Path(f"causalscope-{cmd}.manifest.json")


def _cmd_replay(args):
    manifest = io.load_json(args.manifest)
    argv = manifest["argv"]
    code = main(argv, write_manifest=False)
    mismatched = []
    for name, path in manifest["outputs"].items():
        want = manifest["output_sha256"].get(name)
        have = _sha256(path) if Path(path).exists() else None
        if want != have:
            mismatched.append(path)
    if mismatched:
        print(f"NOT reproduced: {mismatched}")
        return 1
    print("reproduced")
    return code


def main(argv=None, write_manifest: bool = True) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.cmd == "replay":
        return _cmd_replay(args)
    handler = _HANDLERS[args.cmd]
    start = time.perf_counter()
    try:
        code, verdicts, outputs, inputs = handler(args)
    except (CausalScopeError, FileNotFoundError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    elapsed = time.perf_counter() - start
    if write_manifest:
        full_argv = list(argv) if argv is not None else sys.argv[1:]
        manifest = {
            "command": args.cmd,
            "argv": full_argv,
            "seed": getattr(args, "seed", None),
            "params": {k: v for k, v in vars(args).items() if k != "cmd"},
            "inputs": inputs,
            "outputs": {k: str(v) for k, v in outputs.items()},
            "output_sha256": {k: _sha256(v) for k, v in outputs.items()},
            "wall_clock_sec": elapsed,
            "verdicts": verdicts,
        }
        io.save_json(manifest, _manifest_path(args.cmd, outputs, inputs))
    return code


if __name__ == "__main__":
    sys.exit(main())
