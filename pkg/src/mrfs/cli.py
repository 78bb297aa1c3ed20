"""Command-line frontend: ``generate``, ``solve``, ``validate``, ``bench``, ``export-lp``.

Exit codes: 0 success, 1 validation or certified-bound failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

from .lp import build_grid, build_lp, export_mps
from .merge import Solution, solve_mr
from .model import (MAP, REDUCE, InstanceError, generate_instance, load_instance, load_schedule,
                    save_instance, save_schedule, validate_schedule)
from .oracle import DEFAULT_MAX_LEAVES, OracleCapExceeded, brute_force_mr, brute_force_msr
from .shuffle import fold_shuffle, solve_msr_same, solve_msr_separate

PROBLEMS = ("mr", "msr-same", "msr-separate")
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# ------------------------------------------------------------------ parsing


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _span(text: str) -> tuple[int, int]:
    """``LO:HI`` (inclusive) or a single integer."""
    try:
        if ":" in text:
            lo, hi = text.split(":", 1)
            return int(lo), int(hi)
        return int(text), int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}") from None


def _add_generator_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("instance generator")
    g.add_argument("--jobs", type=int, default=3, help="number of jobs")
    g.add_argument("--map-tasks", type=_span, default=(1, 2), metavar="LO:HI")
    g.add_argument("--reduce-tasks", type=_span, default=(1, 2), metavar="LO:HI")
    g.add_argument("--map-procs", type=int, default=2)
    g.add_argument("--reduce-procs", type=int, default=2)
    g.add_argument("--p-max", type=int, default=10, help="processing times are drawn from 1..P")
    g.add_argument("--shuffle-max", type=int, default=5,
                   help="transfer times are drawn from 0..S; 0 gives a pure MapReduce instance")
    g.add_argument("--weight-max", type=int, default=5)
    g.add_argument("--no-input-procs", action="store_true",
                   help="omit the input processors used by the separate-shuffle variant")
    g.add_argument("--shared-pools", action="store_true",
                   help="Reduce tasks run on the Map processors")


def _generator_kwargs(args) -> dict:
    return dict(n_jobs=args.jobs, n_map_tasks_range=args.map_tasks,
                n_reduce_tasks_range=args.reduce_tasks, m_map=args.map_procs,
                m_reduce=args.reduce_procs, p_range=(1, args.p_max),
                shuffle_range=(0, args.shuffle_max) if args.shuffle_max > 0 else None,
                weight_range=(1, args.weight_max), input_processors=not args.no_input_procs,
                shared_pools=args.shared_pools)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mrfs", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a random instance")
    p.add_argument("--seed", type=int, default=0)
    _add_generator_flags(p)
    p.add_argument("--out", type=Path, help="output file (default: stdout)")

    p = sub.add_parser("solve", help="schedule an instance and report its ratio")
    p.add_argument("instance", type=Path)
    p.add_argument("--problem", choices=PROBLEMS, default="mr")
    p.add_argument("--a", type=_fraction, default=Fraction(3, 2))
    p.add_argument("--delta", type=_fraction, default=Fraction(1, 2))
    p.add_argument("--out", type=Path, help="write the schedule JSON here")
    p.add_argument("--recompact", action="store_true",
                   help="msr-separate: left-shift Reduce processors after moving the shuffles")

    p = sub.add_parser("validate", help="check a schedule against an instance")
    p.add_argument("instance", type=Path)
    p.add_argument("schedule", type=Path)
    p.add_argument("--mode", choices=PROBLEMS, default="mr")

    p = sub.add_parser("bench", help="run a seed range and tabulate ratios")
    p.add_argument("--seeds", type=_span, default=(0, 9), metavar="LO:HI",
                   help="inclusive seed range")
    _add_generator_flags(p)
    p.add_argument("--problem", choices=PROBLEMS, default="mr")
    p.add_argument("--a", type=_fraction, default=Fraction(3, 2))
    p.add_argument("--delta", type=_fraction, default=Fraction(1, 2))
    p.add_argument("--oracle-max-leaves", type=int, default=DEFAULT_MAX_LEAVES,
                   help="search-space cap of the exact oracle; 0 disables it")
    p.add_argument("--format", choices=("json", "tsv"), default="json")
    p.add_argument("--timing", action="store_true", help="add per-seed elapsed seconds")

    p = sub.add_parser("export-lp", help="write the interval-indexed LP of one phase as MPS")
    p.add_argument("instance", type=Path)
    p.add_argument("--phase", choices=(MAP, REDUCE), default=MAP)
    p.add_argument("--problem", choices=PROBLEMS, default="mr",
                   help="msr-* exports the Reduce LP with shuffle blocks folded in")
    p.add_argument("--delta", type=_fraction, default=Fraction(1, 2))
    p.add_argument("--out", type=Path, help="output file (default: stdout)")
    return parser


# ----------------------------------------------------------------- commands


def _read_instance(path: Path):
    try:
        return load_instance(path.read_text())
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None
    except (InstanceError, KeyError, TypeError) as e:
        raise UsageError(f"{path}: invalid instance: {e}") from None


def _write(path: Path | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text + "\n")
    else:
        path.write_text(text + "\n")


def _check_params(a: Fraction, delta: Fraction) -> None:
    if not a > 1:
        raise UsageError("--a must be greater than 1")
    if not 0 < delta < 1:
        raise UsageError("--delta must lie strictly between 0 and 1")


def run_problem(inst, problem: str, a=Fraction(3, 2), delta=Fraction(1, 2),
                recompact: bool = False) -> Solution:
    if problem == "mr":
        return solve_mr(inst, a, delta)
    if problem == "msr-same":
        return solve_msr_same(inst, a, delta)
    if problem == "msr-separate":
        if inst.input_processors is None:
            raise UsageError("msr-separate needs an instance with input processors")
        return solve_msr_separate(inst, a, delta, recompact=recompact)
    raise UsageError(f"unknown problem {problem!r}")


def cmd_generate(args) -> int:
    try:
        inst = generate_instance(args.seed, **_generator_kwargs(args))
    except ValueError as e:
        raise UsageError(str(e)) from None
    _write(args.out, save_instance(inst))
    return EXIT_OK


def cmd_solve(args) -> int:
    _check_params(args.a, args.delta)
    inst = _read_instance(args.instance)
    t0 = time.perf_counter()
    sol = run_problem(inst, args.problem, args.a, args.delta, args.recompact)
    check = validate_schedule(inst, sol.schedule, args.problem)
    out = sol.report.to_dict()
    out["valid"] = check.ok
    out["violations"] = check.violations
    out["elapsed_s"] = round(time.perf_counter() - t0, 6)
    if args.out is not None:
        args.out.write_text(save_schedule(sol.schedule) + "\n")
    print(json.dumps(out, sort_keys=True))
    return EXIT_OK if check.ok and sol.report.within_bound else EXIT_FAIL


def cmd_validate(args) -> int:
    inst = _read_instance(args.instance)
    try:
        sched = load_schedule(args.schedule.read_text())
    except OSError as e:
        raise UsageError(f"cannot read {args.schedule}: {e.strerror}") from None
    except (ValueError, KeyError, TypeError) as e:
        raise UsageError(f"{args.schedule}: invalid schedule: {e}") from None
    rep = validate_schedule(inst, sched, args.mode)
    out = {"ok": rep.ok, "violations": rep.violations,
           "objective": _json_num(rep.objective)}
    print(json.dumps(out, sort_keys=True))
    return EXIT_OK if rep.ok else EXIT_FAIL


def _json_num(x):
    x = Fraction(x)
    return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def bench_row(seed: int, gen: dict, problem: str, a: Fraction, delta: Fraction,
              max_leaves: int, timing: bool = False) -> dict:
    """Solve one seeded instance, validate it, and compare with the oracle if it fits the cap."""
    t0 = time.perf_counter()
    inst = generate_instance(seed, **gen)
    sol = run_problem(inst, problem, a, delta)
    rep = sol.report
    rep.seed = seed
    check = validate_schedule(inst, sol.schedule, problem)
    note = ""
    if max_leaves > 0 and inst.pools_disjoint:
        try:
            if problem == "mr":
                opt = brute_force_mr(inst, max_leaves)
            else:
                opt = brute_force_msr(inst, problem.split("-")[1], max_leaves)
            rep.oracle_optimum = opt.optimum
        except OracleCapExceeded:
            note = "opt: skipped"
    else:
        note = "opt: skipped"
    row = {"seed": seed, "digest": rep.instance_digest, "objective": _json_num(rep.objective),
           "lp_map": rep.lp_map, "lp_reduce": rep.lp_reduce, "lower_bound": rep.lower_bound,
           "certified_bound": rep.certified_bound, "ratio_vs_lp": rep.ratio_vs_lp,
           "opt": _json_num(rep.oracle_optimum) if rep.oracle_optimum is not None else None,
           "ratio_vs_opt": rep.ratio_vs_opt, "valid": check.ok,
           "within_bound": rep.within_bound, "note": note}
    if timing:
        row["elapsed_s"] = round(time.perf_counter() - t0, 6)
    return row


def _bench_worker(job):
    return bench_row(*job)


def _threads() -> int:
    env = os.environ.get("MRFS_THREADS")
    n = os.cpu_count() or 1
    if env:
        try:
            n = min(n, max(1, int(env)))
        except ValueError:
            raise UsageError("MRFS_THREADS must be a positive integer") from None
    return n


def summarize(rows: list[dict]) -> dict:
    lp = [r["ratio_vs_lp"] for r in rows]
    opt = [r["ratio_vs_opt"] for r in rows if r["ratio_vs_opt"] is not None]
    fails = [r["seed"] for r in rows if not (r["valid"] and r["within_bound"])]
    return {"seeds": len(rows), "max_ratio_vs_lp": max(lp, default=None),
            "mean_ratio_vs_lp": sum(lp) / len(lp) if lp else None,
            "oracle_solved": len(opt), "max_ratio_vs_opt": max(opt, default=None),
            "mean_ratio_vs_opt": sum(opt) / len(opt) if opt else None,
            "failures": fails}


BENCH_COLUMNS = ("seed", "digest", "objective", "lp_map", "lp_reduce", "lower_bound",
                 "certified_bound", "ratio_vs_lp", "opt", "ratio_vs_opt", "valid",
                 "within_bound", "note")


def _tsv_cell(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, bool):
        return "yes" if v else "no"
    return str(v)


def format_bench(rows: list[dict], summary: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps({"rows": rows, "summary": summary}, sort_keys=True, indent=1)
    cols = list(BENCH_COLUMNS) + (["elapsed_s"] if rows and "elapsed_s" in rows[0] else [])
    lines = ["\t".join(cols)]
    lines += ["\t".join(_tsv_cell(r.get(c)) for c in cols) for r in rows]
    lines.append("\t".join(["summary"] + [f"{k}={_tsv_cell(v)}" for k, v in summary.items()]))
    return "\n".join(lines)


def cmd_bench(args) -> int:
    _check_params(args.a, args.delta)
    gen = _generator_kwargs(args)
    lo, hi = args.seeds
    if hi < lo:
        raise UsageError("--seeds: empty range")
    try:
        generate_instance(lo, **gen)
    except ValueError as e:
        raise UsageError(str(e)) from None
    if args.problem == "msr-separate" and not gen["input_processors"]:
        raise UsageError("msr-separate needs input processors")
    jobs = [(s, gen, args.problem, args.a, args.delta, args.oracle_max_leaves, args.timing)
            for s in range(lo, hi + 1)]
    threads = _threads()
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            rows = list(ex.map(_bench_worker, jobs))
    else:
        rows = [_bench_worker(j) for j in jobs]
    summary = summarize(rows)
    print(format_bench(rows, summary, args.format))
    return EXIT_FAIL if summary["failures"] else EXIT_OK


def cmd_export_lp(args) -> int:
    if not 0 < args.delta < 1:
        raise UsageError("--delta must lie strictly between 0 and 1")
    inst = _read_instance(args.instance)
    if args.problem != "mr" and args.phase == REDUCE:
        inst = fold_shuffle(inst)
    model = build_lp(inst, args.phase, build_grid(inst, args.phase, args.delta))
    _write(args.out, export_mps(model).rstrip("\n"))
    return EXIT_OK


COMMANDS = {"generate": cmd_generate, "solve": cmd_solve, "validate": cmd_validate,
            "bench": cmd_bench, "export-lp": cmd_export_lp}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    try:
        return COMMANDS[args.command](args)
    except UsageError as e:
        print(f"mrfs {args.command}: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
