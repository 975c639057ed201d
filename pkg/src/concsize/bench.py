"""Throughput experiments over workload and size threads, with CSV output."""

from __future__ import annotations

import csv
import threading
import time
from dataclasses import dataclass, field, fields

from .optimistic import MAX_TRIES
from .registry import MAX_THREADS, ThreadRegistry
from .sets import make_set
from .workload import CONTAINS, INSERT, OpStream, ScrambledZipfian, WorkloadSpec, next_op, prefill

DEFAULT_REPS = 10
DEFAULT_WARMUP = 5
DEFAULT_SWEEP = (2, 3, 4, 8, 16)


class CapacityExceeded(ValueError):
    pass


@dataclass
class BenchResult:
    structure: str
    method: str
    workload: str
    w: int
    s: int
    size_delay_us: float
    max_tries: int | None
    ops_per_second: float
    size_ops_per_second: float | None = None
    overhead_pct: float | None = None
    run_seconds: float = 0.0
    repetitions: int = 0
    escalations_per_size_op: float | None = None
    # Not written to CSV.
    size_min: int | None = field(default=None, compare=False)
    size_max: int | None = field(default=None, compare=False)
    awaiting_sizes_after: int | None = field(default=None, compare=False)


CSV_COLUMNS = (
    "structure", "method", "workload", "w", "s", "size_delay_us", "max_tries",
    "ops_per_second", "size_ops_per_second", "overhead_pct", "run_seconds",
    "repetitions", "escalations_per_size_op",
)
_DECIMALS = {
    "size_delay_us": 1, "ops_per_second": 2, "size_ops_per_second": 2,
    "overhead_pct": 2, "run_seconds": 3, "escalations_per_size_op": 4,
}
_TYPES = {f.name: f.type for f in fields(BenchResult)}


def default_bucket_count(spec: WorkloadSpec) -> int:
    # Load factor at most one at the prefill size.
    n = 1024
    while n < spec.prefill:
        n *= 2
    return n


def _run_once(target, spec: WorkloadSpec, registry: ThreadRegistry, rep: int, zipf):
    w, s = spec.threads, spec.size_threads
    start = threading.Barrier(w + s + 1)
    stop = [False]
    op_counts = [0] * w
    size_counts = [0] * s
    seen: list[tuple[int, int]] = []
    errors: list[BaseException] = []
    delay = spec.size_delay_us / 1e6

    def worker(i: int):
        stream = OpStream(spec, spec.seed * 1_000_003 + rep * 1009 + i, zipf)
        rng, z = stream.rng, stream.zipf
        insert, delete, contains = target.insert, target.delete, target.contains
        n = 0
        try:
            with registry.registered():
                start.wait()
                while not stop[0]:
                    kind, key = next_op(spec, rng, z)
                    if kind is CONTAINS:
                        contains(key)
                    elif kind is INSERT:
                        insert(key)
                    else:
                        delete(key)
                    n += 1
        except BaseException as exc:
            errors.append(exc)
            start.abort()
        op_counts[i] = n

    def sizer(i: int):
        size = target.size
        n = 0
        lo = hi = None
        try:
            with registry.registered():
                start.wait()
                while not stop[0]:
                    v = size()
                    n += 1
                    if lo is None or v < lo:
                        lo = v
                    if hi is None or v > hi:
                        hi = v
                    if delay:
                        time.sleep(delay)
        except BaseException as exc:
            errors.append(exc)
            start.abort()
        size_counts[i] = n
        if lo is not None:
            seen.append((lo, hi))

    threads = [threading.Thread(target=worker, args=(i,), daemon=True) for i in range(w)]
    threads += [threading.Thread(target=sizer, args=(i,), daemon=True) for i in range(s)]
    for t in threads:
        t.start()
    try:
        start.wait()
    except threading.BrokenBarrierError:
        pass
    t0 = time.perf_counter()
    time.sleep(spec.duration_s)
    stop[0] = True
    elapsed = time.perf_counter() - t0
    for t in threads:
        t.join()
    if errors:
        raise errors[0]
    return sum(op_counts), sum(size_counts), elapsed, seen


def run_experiment(spec: WorkloadSpec, structure: str, method: str, *, max_tries: int = MAX_TRIES,
                   reps: int = DEFAULT_REPS, warmup: int = DEFAULT_WARMUP,
                   bucket_count: int | None = None, max_threads: int = MAX_THREADS) -> BenchResult:
    """Prefill once, run ``warmup`` untimed and ``reps`` timed repetitions, and average."""
    if spec.threads + spec.size_threads + 1 > max_threads:
        raise CapacityExceeded(f"{spec.threads} workload + {spec.size_threads} size threads + main "
                               f"exceed the registry capacity of {max_threads}")
    if method == "none" and spec.size_threads:
        raise ValueError("method 'none' cannot run size threads")
    registry = ThreadRegistry(max_threads)
    opts = {"bucket_count": bucket_count or default_bucket_count(spec)}
    if method == "optimistic":
        opts["max_tries"] = max_tries
    target = make_set(structure, method, registry, **opts)
    with registry.registered():
        prefill(target, spec)
    zipf = ScrambledZipfian(spec.key_range, spec.zipf_theta) if spec.zipf_theta is not None else None
    calc = target.calc

    for rep in range(warmup):
        _run_once(target, spec, registry, -1 - rep, zipf)
    esc_before = calc.escalations.get() if method == "optimistic" else 0

    ops = size_ops = 0
    seconds = 0.0
    lo = hi = None
    ops_rates, size_rates = [], []
    for rep in range(reps):
        n_ops, n_sizes, elapsed, seen = _run_once(target, spec, registry, rep, zipf)
        ops += n_ops
        size_ops += n_sizes
        seconds += elapsed
        ops_rates.append(n_ops / elapsed if elapsed > 0 else 0.0)
        size_rates.append(n_sizes / elapsed if elapsed > 0 else 0.0)
        for a, b in seen:
            lo = a if lo is None else min(lo, a)
            hi = b if hi is None else max(hi, b)

    result = BenchResult(
        structure=structure, method=method, workload=spec.label, w=spec.threads,
        s=spec.size_threads, size_delay_us=spec.size_delay_us,
        max_tries=max_tries if method == "optimistic" else None,
        ops_per_second=sum(ops_rates) / reps if reps else 0.0,
        size_ops_per_second=(sum(size_rates) / reps if reps else 0.0) if spec.size_threads else None,
        run_seconds=seconds, repetitions=reps, size_min=lo, size_max=hi,
    )
    if method == "optimistic":
        escalations = calc.escalations.get() - esc_before
        result.escalations_per_size_op = escalations / size_ops if size_ops else 0.0
        result.awaiting_sizes_after = calc.awaiting_sizes.get()
    return result


def sweep_max_tries(spec: WorkloadSpec, structure: str = "hash", values=None, **kwargs) -> list[BenchResult]:
    values = DEFAULT_SWEEP if values is None else values
    return [run_experiment(spec, structure, "optimistic", max_tries=v, **kwargs) for v in values]


def attach_overheads(results: list[BenchResult]) -> list[BenchResult]:
    """Fill ``overhead_pct`` against a baseline with the same total thread count.

    The baseline is the ``none`` row for the same structure and workload whose
    workload-thread count equals this row's ``w + s``. Rows without a matching
    baseline keep an empty overhead.
    """
    baselines = {(r.structure, r.workload, r.w): r for r in results if r.method == "none"}
    for r in results:
        if r.method == "none":
            continue
        base = baselines.get((r.structure, r.workload, r.w + r.s))
        if base is not None and base.ops_per_second > 0:
            r.overhead_pct = (base.ops_per_second - r.ops_per_second) / base.ops_per_second * 100.0
    return results


def _format(name: str, value) -> str:
    if value is None:
        return ""
    if name in _DECIMALS:
        return f"{float(value):.{_DECIMALS[name]}f}"
    return str(value)


def _parse(name: str, text: str):
    if text == "":
        return None
    if name in _DECIMALS:
        return float(text)
    if name in ("w", "s", "max_tries", "repetitions"):
        return int(text)
    return text


def emit_csv(results: list[BenchResult], path) -> None:
    try:
        with open(path, "w", newline="") as fh:
            write_csv(results, fh)
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc}") from exc


def write_csv(results: list[BenchResult], fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in results:
        writer.writerow([_format(c, getattr(r, c)) for c in CSV_COLUMNS])


def read_csv(path) -> list[BenchResult]:
    try:
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise OSError(f"cannot read CSV from {path}: {exc}") from exc
    return [BenchResult(**{c: _parse(c, row[c]) for c in CSV_COLUMNS}) for row in rows]
