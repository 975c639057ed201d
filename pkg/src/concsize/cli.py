"""Command-line entry point: ``concsize run|sweep-max-tries|check|stress``."""

from __future__ import annotations

import argparse
import sys

from .bench import (DEFAULT_REPS, DEFAULT_SWEEP, DEFAULT_WARMUP, CapacityExceeded, attach_overheads,
                    emit_csv, run_experiment, sweep_max_tries, write_csv)
from .lincheck import History, HistoryFormatError, SearchBudgetExceeded, check_linearizable
from .optimistic import MAX_TRIES
from .sets import METHODS, STRUCTURES
from .workload import DEFAULT_PREFILL, MIXES, WorkloadSpec


def _csv_ints(text: str) -> list[int]:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("expected at least one value")
    return values


def _csv_methods(text: str) -> list[str]:
    values = [v.strip() for v in text.split(",") if v.strip()]
    for v in values:
        if v not in METHODS:
            raise argparse.ArgumentTypeError(f"unknown method {v!r}; choose from {', '.join(METHODS)}")
    return values


def _workload_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--structure", choices=STRUCTURES, default="hash")
    p.add_argument("--workload", choices=sorted(MIXES), default="update")
    p.add_argument("--threads", type=_csv_ints, default=[1],
                   help="workload thread counts, comma separated")
    p.add_argument("--size-threads", type=int, default=0)
    p.add_argument("--size-delay-us", type=float, default=0.0)
    p.add_argument("--duration-s", type=float, default=1.0)
    p.add_argument("--prefill", type=int, default=DEFAULT_PREFILL)
    p.add_argument("--key-range", type=int, default=None,
                   help="default: balanced so the size stays near the prefill")
    p.add_argument("--zipf-theta", type=float, default=None,
                   help="skew for contains keys (e.g. 0.99); uniform if unset")
    p.add_argument("--buckets", type=int, default=None, help="hash table bucket count")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--reps", type=int, default=DEFAULT_REPS)
    p.add_argument("--warmup", type=int, default=DEFAULT_WARMUP)
    p.add_argument("--out", default=None, help="CSV path (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="concsize",
                                     description="Concurrent set size benchmarks and checks.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="throughput of one or more size methods")
    _workload_args(run)
    run.add_argument("--method", type=_csv_methods, default=["sp"],
                     help=f"comma separated, from: {', '.join(METHODS)}")
    run.add_argument("--max-tries", type=int, default=MAX_TRIES)
    run.add_argument("--no-baseline", action="store_true",
                     help="skip the automatic 'none' rows used for the overhead column")

    sweep = sub.add_parser("sweep-max-tries", help="optimistic method across MAX_TRIES values")
    _workload_args(sweep)
    sweep.add_argument("--values", type=_csv_ints, default=list(DEFAULT_SWEEP))

    check = sub.add_parser("check", help="check recorded histories for linearizability")
    check.add_argument("paths", nargs="+")
    check.add_argument("--budget", type=int, default=2_000_000, help="search state limit")

    stress = sub.add_parser("stress", help="conservation or phase-invariant stress run")
    stress.add_argument("kind", choices=("conservation", "phase"))
    stress.add_argument("--structure", choices=STRUCTURES, default="hash")
    stress.add_argument("--method", choices=METHODS[1:], default="sp")
    stress.add_argument("--threads", type=int, default=8)
    stress.add_argument("--size-threads", type=int, default=2)
    stress.add_argument("--keys-per-thread", type=int, default=10_000)
    stress.add_argument("--prefill", type=int, default=0)
    stress.add_argument("--duration-s", type=float, default=60.0)
    return parser


def _spec(args, threads: int, size_threads: int) -> WorkloadSpec:
    return WorkloadSpec.from_mix(
        args.workload, key_range=args.key_range, prefill=args.prefill,
        duration_s=args.duration_s, threads=threads, size_threads=size_threads,
        size_delay_us=args.size_delay_us, zipf_theta=args.zipf_theta, seed=args.seed)


def _emit(results, out) -> None:
    if out:
        emit_csv(results, out)
    else:
        write_csv(results, sys.stdout)


def cmd_run(args) -> int:
    results = []
    baselines = set()
    for w in args.threads:
        for method in args.method:
            s = 0 if method == "none" else args.size_threads
            if method != "none" and not args.no_baseline and w + s not in baselines:
                baselines.add(w + s)
                results.append(run_experiment(_spec(args, w + s, 0), args.structure, "none",
                                              reps=args.reps, warmup=args.warmup,
                                              bucket_count=args.buckets))
            elif method == "none":
                if w in baselines:
                    continue
                baselines.add(w)
            results.append(run_experiment(_spec(args, w, s), args.structure, method,
                                          max_tries=args.max_tries, reps=args.reps,
                                          warmup=args.warmup, bucket_count=args.buckets))
            print(f"# {args.structure} {method} w={w} s={s}: "
                  f"{results[-1].ops_per_second:.0f} ops/s", file=sys.stderr)
    _emit(attach_overheads(results), args.out)
    return 0


def cmd_sweep(args) -> int:
    results = []
    for w in args.threads:
        spec = _spec(args, w, args.size_threads)
        rows = sweep_max_tries(spec, args.structure, args.values, reps=args.reps,
                               warmup=args.warmup, bucket_count=args.buckets)
        for r in rows:
            print(f"# max_tries={r.max_tries} w={w}: {r.ops_per_second:.0f} ops/s, "
                  f"{r.escalations_per_size_op} escalations/size", file=sys.stderr)
        results.extend(rows)
    _emit(results, args.out)
    return 0


def cmd_check(args) -> int:
    status = 0
    for path in args.paths:
        try:
            with open(path) as fh:
                history = History.from_text(fh.read())
            verdict = check_linearizable(history, budget=args.budget)
        except (OSError, HistoryFormatError, SearchBudgetExceeded) as exc:
            print(f"{path}: error: {exc}", file=sys.stderr)
            status = 2
            continue
        print(f"{path}: {verdict.explain()}")
        if not verdict and status == 0:
            status = 1
    return status


def cmd_stress(args) -> int:
    from .stress import conservation_stress, phase_stress

    if args.kind == "conservation":
        rep = conservation_stress(args.structure, args.method, threads=args.threads,
                                  keys_per_thread=args.keys_per_thread,
                                  size_threads=args.size_threads, prefill=args.prefill)
        print(f"final size {rep.final_size} (prefill {rep.prefill}), {rep.size_calls} sizes "
              f"in [{rep.size_min}, {rep.size_max}], {len(rep.out_of_range)} out of range")
    else:
        rep = phase_stress(args.duration_s, structure=args.structure, threads=args.threads,
                           size_threads=args.size_threads)
        print(f"{rep.transitions} phase transitions, {rep.sizes} sizes, {rep.joins} joins, "
              f"{len(rep.bad_transitions)} bad transitions, "
              f"{rep.frozen_violations} frozen-window writes")
    return 0 if rep.ok else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {"run": cmd_run, "sweep-max-tries": cmd_sweep, "check": cmd_check,
                "stress": cmd_stress}
    try:
        return handlers[args.command](args)
    except (CapacityExceeded, ValueError, OSError) as exc:
        print(f"concsize: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
