"""Command-line entry point: ``svpvqa {gen,solve,bench,report,qubits}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import bench
from .lattice import LatticeInvariantError
from .solvers import default_config, solve
from .optimizer import OptimizeConfig

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME, EXIT_VERIFY = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="svpvqa", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    gen = sub.add_parser("gen", help="generate an instance set")
    gen.add_argument("set", choices=["benchmark", "challenging"])
    gen.add_argument("--dim", type=int, required=True)
    gen.add_argument("--count", type=int, required=True)
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("--out", required=True)
    gen.add_argument("--entry-bound", type=int, default=150)
    gen.add_argument("--uni-ops", type=int, default=20)
    gen.add_argument("--lll-delta", default="3/4")
    gen.add_argument("--max-ratio", default="0.05")

    s = sub.add_parser("solve", help="solve one instance file")
    s.add_argument("--algorithm", required=True, choices=["ipsa", "ipsa-qaoa", "iqoap", "psa", "lll"])
    s.add_argument("--k", type=int, default=3, help="bits per coefficient for psa")
    s.add_argument("--instance", required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--layers", type=int)
    s.add_argument("--shots", type=int)
    s.add_argument("--xtol", type=float, default=1e-4)
    s.add_argument("--ftol", type=float, default=1e-4)
    s.add_argument("--max-evals", type=int)
    s.add_argument("--readout", choices=["mode", "min"])
    s.add_argument("--out", required=True)

    b = sub.add_parser("bench", help="run algorithms over an instance directory")
    b.add_argument("--instances", required=True)
    b.add_argument("--algorithms", required=True, help="comma list, e.g. ipsa,iqoap,3-psa,lll")
    b.add_argument("--seed", type=int, required=True)
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--out", required=True)

    r = sub.add_parser("report", help="summarize a directory of solve records")
    r.add_argument("--in", dest="in_dir", required=True)
    r.add_argument("--format", choices=["csv", "table"], default="table")
    r.add_argument("--emit-plot-data", action="store_true")

    q = sub.add_parser("qubits", help="print qubit requirements")
    q.add_argument("--max-dim", type=int, default=8)
    return p


def _cmd_gen(args) -> int:
    params = bench.GenParams(
        lll_delta=args.lll_delta,
        uni_ops=args.uni_ops,
        entry_bound=args.entry_bound,
        max_ratio=args.max_ratio,
    )
    if args.set == "benchmark":
        insts = bench.gen_benchmark(args.dim, args.count, args.seed, params)
    else:
        insts = bench.gen_challenging(args.dim, args.count, args.seed, params)
    for path in bench.write_instances(insts, args.out):
        print(path)
    return EXIT_OK


def _cmd_solve(args) -> int:
    inst = bench.load_instance(args.instance)
    inst.verify()
    tag = f"{args.k}-psa" if args.algorithm == "psa" else args.algorithm
    cfg = None
    if tag != "lll":
        cfg = default_config(
            tag,
            layers=args.layers,
            shots=args.shots,
            readout=args.readout,
            optimizer=OptimizeConfig(args.xtol, args.ftol, args.max_evals),
        )
    rec = solve(tag, inst.lattice, np.random.default_rng(args.seed), cfg, inst.lambda1_sq)
    rec.instance_id, rec.set_name = inst.instance_id, inst.set_name
    rec.seeds = {"solve": args.seed}
    Path(args.out).write_text(bench.record_to_json(rec), encoding="utf-8")
    print(f"{rec.instance_id} {tag}: |v|^2={rec.found_norm_sq} lambda1^2={rec.lambda1_sq} "
          f"success={rec.success} AR={rec.approx_ratio:.4f}")
    return EXIT_OK


def _cmd_bench(args) -> int:
    insts = bench.load_instances(args.instances)
    if not insts:
        print(f"no instance files in {args.instances}", file=sys.stderr)
        return EXIT_USAGE
    algos = bench.parse_algorithms(args.algorithms)
    recs = bench.run_experiment(insts, algos, jobs=args.jobs, seed=args.seed)
    bench.write_records(recs, args.out)
    failed = [r for r in recs if r.error]
    print(bench.summarize(recs).to_table(), end="")
    if failed:
        print(f"{len(failed)} of {len(recs)} pairs flagged", file=sys.stderr)
    return EXIT_OK


def _cmd_report(args) -> int:
    recs = bench.load_records(args.in_dir)
    for rec in recs:
        if bench.recompute_totals(rec) != (rec.depth_total, rec.cnot_total):
            print(f"{rec.instance_id}/{rec.algorithm}: totals do not match run log", file=sys.stderr)
            return EXIT_VERIFY
    summary = bench.summarize(recs)
    sys.stdout.write(summary.to_csv() if args.format == "csv" else summary.to_table())
    if args.emit_plot_data:
        path = Path(args.in_dir) / "plot_data.json"
        path.write_text(json.dumps(summary.plot_series(), indent=1, sort_keys=True) + "\n")
        print(f"plot data written to {path}", file=sys.stderr)
    return EXIT_OK


def _cmd_qubits(args) -> int:
    table = bench.qubit_table(args.max_dim)
    print("algorithm    n  max-qubits")
    for algo, row in table["configurations"].items():
        for n, q in row.items():
            print(f"{algo:<11} {n:>2} {q:>11}")
    print("\n n  ipsa  psa-lll")
    for n in table["curves"]["ipsa"]:
        print(f"{n:>2} {table['curves']['ipsa'][n]:>5} {table['curves']['psa-lll'][n]:>8}")
    return EXIT_OK


COMMANDS = {
    "gen": _cmd_gen,
    "solve": _cmd_solve,
    "bench": _cmd_bench,
    "report": _cmd_report,
    "qubits": _cmd_qubits,
}


def main(argv: list[str] | None = None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:  # --help, or a usage error already reported
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return COMMANDS[args.command](args)
    except (bench.VerificationError, LatticeInvariantError) as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
