"""``gemfield`` command-line interface.

Exit codes: 0 success, 1 comparison or validation failure, 2 usage or
scenario error, 3 numerical divergence.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .analysis import compare
from .bench import BACKENDS, bench
from .errors import DivergenceError, ScenarioError
from .fdtd import run
from .gem import run_gem
from .graph import build_graph, export_edges, validate_graph
from .record import load_record, save_record
from .scenario_io import format_scenario, generate_random_scenario, load_scenario
from .simulation import prepare

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_DIVERGED = 0, 1, 2, 3


def _split_arg(args) -> bool | None:
    return True if args.split else None


def cmd_run(args) -> int:
    scenario = load_scenario(args.scenario)
    setup = prepare(scenario, split=_split_arg(args), n_steps=args.steps)
    try:
        if args.backend == "fdtd":
            record = run(setup=setup)
        else:
            record = run_gem(setup=setup, ordered=args.ordered)
    except DivergenceError as exc:
        if exc.record is not None:
            save_record(exc.record, args.out)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    save_record(record, args.out)
    print(f"{args.backend}: {record.n_recorded} steps, {len(record.probe_coords)} probes -> {args.out}")
    return EXIT_OK


def cmd_compare(args) -> int:
    a, b = load_record(args.a), load_record(args.b)
    try:
        report = compare(a, b, threshold=args.r2_threshold)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(report.to_text())
    if args.json:
        Path(args.json).write_text(json.dumps(report.to_dict(), indent=2) + "\n")
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_gen(args) -> int:
    scenario = generate_random_scenario(args.seed, args.size)
    text = format_scenario(scenario)
    if args.out == "-":
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text)
    return EXIT_OK


def cmd_bench(args) -> int:
    def progress(size, seconds):
        print(f"  size {size}: {seconds:.3f} s", file=sys.stderr)

    report = bench(args.backend, args.sizes, reps=args.reps, steps=args.steps,
                   ordered=not args.parallel, progress=progress)
    text = report.to_text()
    print(text)
    if args.out:
        out = Path(args.out)
        out.write_text(text + "\n")
        out.with_suffix(".json").write_text(json.dumps(report.to_dict(), indent=2) + "\n")
    return EXIT_DIVERGED if any(e.diverged for e in report.entries) else EXIT_OK


def cmd_validate_graph(args) -> int:
    scenario = load_scenario(args.scenario)
    setup = prepare(scenario, split=_split_arg(args))
    graph = build_graph(setup.coeffs, setup.split, scenario.sources)
    report = validate_graph(graph, setup.coeffs)
    print(f"{'split' if graph.split else 'plain'} graph: {graph.node_count} nodes, "
          f"{graph.edge_count} edges")
    print(report.summary())
    if args.export:
        with open(args.export, "w") as fh:
            export_edges(graph, fh)
    return EXIT_OK if report.ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gemfield", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a scenario and write its record")
    p.add_argument("--scenario", required=True)
    p.add_argument("--backend", choices=BACKENDS, default="fdtd")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--ordered", action="store_true",
                   help="gem: sum in fixed source order (bit-identical to fdtd)")
    p.add_argument("--split", action="store_true", help="force the split-field formulation")
    p.add_argument("--steps", type=int, default=None, help="override the scenario's step count")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare", help="compare record B against reference record A")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--r2-threshold", type=float, default=0.9999)
    p.add_argument("--json", help="also write the report as JSON")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("gen", help="generate a random scenario")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--size", type=int, default=200)
    p.add_argument("--out", required=True, help="scenario file, or - for stdout")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="time a backend on free-space grids")
    p.add_argument("--backend", choices=BACKENDS, required=True)
    p.add_argument("--sizes", type=int, nargs="+", default=[250, 500, 1000, 2000])
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--steps", type=int, default=1024)
    p.add_argument("--parallel", action="store_true", help="gem: use the threaded kernel")
    p.add_argument("--out", help="text report path (a .json twin is written beside it)")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("validate-graph", help="build and check the graph of a scenario")
    p.add_argument("--scenario", required=True)
    p.add_argument("--split", action="store_true")
    p.add_argument("--export", help="write the edge list to this file")
    p.set_defaults(func=cmd_validate_graph)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "bench" and args.reps < 2:
        parser.error("--reps must be >= 2")
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
