"""Command-line entry point: generate, run, analyze, compare."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

from . import experiments
from .hamiltonians import KINDS
from .optimizers import METHODS, OptimizerConfig


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    return json.loads(Path(path).read_text())


def _cmd_generate(args) -> int:
    cfg = experiments.ProblemConfig(**_load_config(args.config).get("problem", {}))
    if args.kind:
        cfg.kind = args.kind
    if args.qubits:
        cfg.size = args.qubits
    if args.seed is not None:
        cfg.seed = args.seed
    if args.count:
        cfg.count = args.count
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for i in range(cfg.count):
        seed = cfg.seed + i
        inst = experiments.make_instance(cfg, seed).solve()
        doc = {**inst.to_dict(), "ground_energy": inst.ground_energy}
        if inst.hamiltonian.is_diagonal:
            doc["ground_indices"] = sorted(inst.ground_indices)
        path = out / f"{cfg.kind}-n{cfg.size}-s{seed}.json"
        path.write_text(json.dumps(doc, indent=2, sort_keys=True))
        print(path)
    return 0


def _cmd_run(args) -> int:
    raw = _load_config(args.config)
    cfg = experiments.ExperimentConfig.from_dict(raw)
    if args.qubits:
        cfg.problem.size = args.qubits
    if args.seed is not None:
        cfg.problem.seed = args.seed
    if args.layers:
        cfg.ansatz = {**cfg.ansatz, "layers": args.layers}
    if args.method:
        base = cfg.methods[0]
        cfg.methods = [OptimizerConfig(**{**asdict(base), "method": m}) for m in args.method]
    if args.eta is not None or args.iters is not None:
        cfg.methods = [OptimizerConfig(**{**asdict(m),
                                          **({"eta": args.eta} if args.eta is not None else {}),
                                          **({"iterations": args.iters} if args.iters is not None else {})})
                       for m in cfg.methods]
    cfg.out_dir = args.out
    summary = experiments.run_benchmark(cfg)
    print(json.dumps(summary.aggregates(), indent=2, sort_keys=True))
    return 0


def _cmd_analyze(args) -> int:
    cfg = experiments.AnalysisConfig.from_dict(_load_config(args.config))
    if args.qubits:
        cfg.n_qubits = args.qubits
    if args.layers:
        cfg.layers = args.layers
    if args.seed is not None:
        cfg.seed = args.seed
    if args.iters is not None:
        cfg.heisenberg_iterations = args.iters
    if args.eta is not None:
        cfg.heisenberg_eta = args.eta
    res = experiments.analyze_fisher(cfg, args.out)
    brief = {
        "mean_distance": {k: v["mean"] for k, v in res["distance"].items()},
        "rank_table": res["rank_table"],
        "z_failure": res["z_failure"],
    }
    print(json.dumps(brief, indent=2, sort_keys=True))
    return 0


def _cmd_compare(args) -> int:
    paths = list(args.traces)
    if args.out:
        paths += sorted(Path(args.out).glob("**/*.csv"))
    if not paths:
        raise ValueError("no trace files given")
    print(json.dumps(experiments.compare_traces(paths), indent=2, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vqa-natgrad", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_required=True):
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", required=out_required, help="output directory")
        p.add_argument("--qubits", type=int)
        p.add_argument("--layers", type=int)
        p.add_argument("--method", nargs="+", choices=METHODS)
        p.add_argument("--eta", type=float)
        p.add_argument("--iters", type=int)

    g = sub.add_parser("generate", help="write problem instances as JSON")
    common(g)
    g.add_argument("--kind", choices=KINDS)
    g.add_argument("--count", type=int)
    g.set_defaults(func=_cmd_generate)

    r = sub.add_parser("run", help="run a benchmark campaign")
    common(r)
    r.set_defaults(func=_cmd_run)

    a = sub.add_parser("analyze", help="Fisher-information analyses")
    common(a, out_required=False)
    a.set_defaults(func=_cmd_analyze)

    c = sub.add_parser("compare", help="aggregate existing CSV traces")
    common(c, out_required=False)
    c.add_argument("traces", nargs="*", help="trace CSV files")
    c.set_defaults(func=_cmd_compare)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, TypeError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
