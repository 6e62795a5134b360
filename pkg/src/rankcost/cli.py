"""Command-line entry point: generate, solve, bench and render."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import bench, es
from .grid import GenerationError, InstanceError, generate_instance, load_instance, save_instance, validate_outcome
from .render import render_ascii, render_svg
from .solver import Mode, SolverConfig, load_solution, save_solution, solve

log = logging.getLogger("rankcost")


def _common(parser: argparse.ArgumentParser, out_help: str):
    parser.add_argument("--seed", type=int, default=0, help="random seed (default: 0)")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    parser.add_argument("-o", "--out", type=Path, default=None, help=out_help)


def _solver_flags(parser: argparse.ArgumentParser):
    # defaults are the published training hyperparameters
    parser.add_argument("--generations", type=int, default=1000)
    parser.add_argument("--population", type=int, default=40)
    parser.add_argument("--lr", type=float, default=0.001)
    parser.add_argument("--sigma-r", type=float, default=0.1)
    parser.add_argument("--sigma-c", type=float, default=0.1)
    parser.add_argument("--length-bound-factor", type=float, default=1.0)
    parser.add_argument("--shaped-failures", action="store_true",
                        help="grade failed routings by connected fraction instead of a flat -1")
    parser.add_argument("--threads", type=int, default=None,
                        help=f"evaluation threads (default: ${es.THREADS_ENV} or CPU count)")


def _solver_config(args, **overrides) -> SolverConfig:
    return SolverConfig(
        generations=args.generations,
        population_size=args.population,
        learning_rate=args.lr,
        sigma_ranking=args.sigma_r,
        sigma_cost=args.sigma_c,
        seed=args.seed,
        length_upper_bound_factor=args.length_bound_factor,
        shaped_failures=args.shaped_failures,
        workers=args.threads,
        **overrides,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rankcost", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write random instance files")
    _common(p, "output directory (default: instances)")
    p.add_argument("--width", type=int, default=16)
    p.add_argument("--height", type=int, default=16)
    p.add_argument("--nets", type=int, default=4)
    p.add_argument("--density", type=float, default=0.0, help="obstacle density in [0, 1)")
    p.add_argument("--count", type=int, default=50)

    p = sub.add_parser("solve", help="train Ranking Cost on one instance")
    _common(p, "solution file (default: stdout summary only)")
    p.add_argument("instance", type=Path)
    p.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.FULL.value)
    p.add_argument("--post-process", action="store_true")
    p.add_argument("--log", type=Path, default=None, help="per-generation training log (JSON lines)")
    p.add_argument("--log-timing", action="store_true", help="add wallclock seconds to log records")
    _solver_flags(p)

    p = sub.add_parser("bench", help="compare algorithms on a directory of instances")
    _common(p, "report directory (default: bench-report)")
    p.add_argument("instance_dir", type=Path, nargs="?")
    p.add_argument("--algorithms", default="seq-astar:5,seq-astar:200,cml,rc,rc-pp")
    p.add_argument("--seeds", default="0,1,2,3,4,5")
    p.add_argument("--from-records", type=Path, default=None,
                   help="rebuild the report from an existing records.json")
    _solver_flags(p)

    p = sub.add_parser("render", help="draw an instance and optional solution")
    _common(p, "output file (default: stdout)")
    p.add_argument("instance", type=Path)
    p.add_argument("--solution", type=Path, default=None)
    p.add_argument("--format", choices=["ascii", "svg"], default="ascii")
    return parser


def _setup_logging(verbose: int):
    level = logging.WARNING - 10 * min(verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def cmd_generate(args) -> int:
    out_dir = args.out or Path("instances")
    out_dir.mkdir(parents=True, exist_ok=True)
    kind = "plain" if args.density == 0 else "obstacles"
    for i in range(args.count):
        inst = generate_instance(args.width, args.height, args.nets, args.density, seed=(args.seed, i))
        path = out_dir / f"{args.width}x{args.height}_{kind}_{i:03d}.json"
        path.write_bytes(save_instance(inst))
    print(f"wrote {args.count} instances to {out_dir}")
    return 0


def cmd_solve(args) -> int:
    instance = load_instance(args.instance.read_bytes())
    config = _solver_config(args, mode=Mode(args.mode), post_process=args.post_process)
    log_file = args.log.open("w") if args.log else None

    def record(stats, generation, elapsed):
        if log_file is None:
            return
        rec = stats.as_dict()
        if args.log_timing:
            rec["wallclock"] = round(elapsed, 6)
        log_file.write(json.dumps(rec) + "\n")

    try:
        result = solve(instance, config, record)
    finally:
        if log_file is not None:
            log_file.close()
    outcome = result.outcome
    if args.out is not None:
        args.out.write_bytes(save_solution(outcome, result.order, result.generations))
    length = outcome.total_length if outcome.total_length is not None else "-"
    print(f"connected {outcome.connected_count}/{instance.num_nets} nets, "
          f"length {length}, generations {result.generations}")
    return 0


def _load_dir(path: Path) -> dict:
    files = sorted(path.glob("*.json"))
    if not files:
        raise FileNotFoundError(f"no instance files in {path}")
    return {f.stem: load_instance(f.read_bytes()) for f in files}


def cmd_bench(args) -> int:
    out_dir = args.out or Path("bench-report")
    if args.from_records:
        report = bench.BenchReport.from_json(args.from_records.read_text())
    else:
        if args.instance_dir is None:
            raise SystemExit("bench: need an instance directory or --from-records")
        instances = _load_dir(args.instance_dir)
        algorithms = bench.parse_algorithms(args.algorithms, _solver_config(args))
        seeds = [int(s) for s in args.seeds.split(",") if s.strip()]

        def progress(name, seed, results):
            log.info("%s seed %d: %s", name, seed,
                     ", ".join(f"{r.algorithm}={'ok' if r.success else 'fail'}" for r in results))

        report = bench.run_benchmark(instances, algorithms, seeds, progress=progress)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "records.json").write_text(report.to_json())
    table = report.format_table()
    (out_dir / "table.txt").write_text(table)
    sys.stdout.write(table)
    return 0


def cmd_render(args) -> int:
    instance = load_instance(args.instance.read_bytes())
    outcome = None
    if args.solution is not None:
        outcome, _ = load_solution(args.solution.read_bytes(), instance)
        report = validate_outcome(instance, outcome)
        if not report.valid:
            raise InstanceError("solution does not match instance: " + "; ".join(report.errors))
    text = render_ascii(instance, outcome) if args.format == "ascii" else render_svg(instance, outcome)
    if args.out is None:
        sys.stdout.write(text)
    else:
        args.out.write_text(text)
    return 0


COMMANDS = {"generate": cmd_generate, "solve": cmd_solve, "bench": cmd_bench, "render": cmd_render}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    _setup_logging(args.verbose)
    if getattr(args, "threads", None):
        os.environ[es.THREADS_ENV] = str(args.threads)
    try:
        return COMMANDS[args.command](args)
    except (InstanceError, GenerationError, OSError, ValueError) as exc:
        print(f"rankcost {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
