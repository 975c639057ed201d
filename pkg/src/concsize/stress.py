"""Long-running correctness checks: size conservation and handshake phase invariants."""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field

from .registry import ThreadRegistry
from .sets import make_set
from .workload import CONTAINS, INSERT, OpStream, WorkloadSpec, next_op


@dataclass
class ConservationReport:
    prefill: int
    final_size: int
    oracle_count: int
    size_calls: int
    size_min: int | None
    size_max: int | None
    out_of_range: list[int] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return (not self.out_of_range and self.final_size == self.prefill
                and self.oracle_count == self.prefill)


def conservation_stress(structure: str = "hash", method: str = "sp", *, threads: int = 8,
                        keys_per_thread: int = 10_000, size_threads: int = 2, prefill: int = 0,
                        bucket_count: int | None = None, **set_options) -> ConservationReport:
    """Each worker inserts its own private keys, then deletes them, while sizes run.

    Prefill keys are negative so they never collide with worker keys. Every
    size must land in ``[prefill, prefill + threads * keys_per_thread]``.
    """
    registry = ThreadRegistry(threads + size_threads + 1)
    if bucket_count is None:
        bucket_count = max(1024, threads * keys_per_thread // 2)
    target = make_set(structure, method, registry, bucket_count=bucket_count, **set_options)
    with registry.registered():
        for k in range(prefill, 0, -1):
            target.insert(-k)
    hi_bound = prefill + threads * keys_per_thread
    start = threading.Barrier(threads + size_threads)
    done = threading.Event()
    bad: list[int] = []
    calls = [0] * size_threads
    ranges: list[tuple[int, int]] = []
    errors: list[BaseException] = []

    def worker(i: int):
        base = i * keys_per_thread + 1
        try:
            with registry.registered():
                start.wait()
                for k in range(base, base + keys_per_thread):
                    if not target.insert(k):
                        raise AssertionError(f"insert of private key {k} failed")
                for k in range(base, base + keys_per_thread):
                    if not target.delete(k):
                        raise AssertionError(f"delete of private key {k} failed")
        except BaseException as exc:
            errors.append(exc)
            start.abort()

    def sizer(i: int):
        lo = hi = None
        n = 0
        try:
            with registry.registered():
                start.wait()
                while not done.is_set():
                    v = target.size()
                    n += 1
                    if not prefill <= v <= hi_bound:
                        bad.append(v)
                    lo = v if lo is None else min(lo, v)
                    hi = v if hi is None else max(hi, v)
        except BaseException as exc:
            errors.append(exc)
            start.abort()
        calls[i] = n
        if lo is not None:
            ranges.append((lo, hi))

    workers = [threading.Thread(target=worker, args=(i,), daemon=True) for i in range(threads)]
    sizers = [threading.Thread(target=sizer, args=(i,), daemon=True) for i in range(size_threads)]
    for t in sizers + workers:
        t.start()
    for t in workers:
        t.join()
    done.set()
    for t in sizers:
        t.join()
    if errors:
        raise errors[0]
    with registry.registered():
        final = target.size()
    return ConservationReport(
        prefill=prefill, final_size=final, oracle_count=target.structure.count(),
        size_calls=sum(calls),
        size_min=min((a for a, _ in ranges), default=None),
        size_max=max((b for _, b in ranges), default=None),
        out_of_range=bad,
    )


# Allowed (phase mod 4, delta) transitions of the global size phase.
PHASE_TRANSITIONS = frozenset({(0, 1), (1, 1), (2, 2), (2, 4)})


def phase_violations(log: list[int]) -> list[tuple[int, int]]:
    """Consecutive phase pairs that break the delta or mod-4 cycle rules."""
    bad = []
    for a, b in zip(log, log[1:]):
        if (a % 4, b - a) not in PHASE_TRANSITIONS:
            bad.append((a, b))
    return bad


@dataclass
class PhaseReport:
    transitions: int
    sizes: int
    updates: int
    bad_transitions: list[tuple[int, int]]
    frozen_violations: int
    joins: int

    @property
    def ok(self) -> bool:
        return not self.bad_transitions and self.frozen_violations == 0


def phase_stress(duration_s: float = 60.0, *, structure: str = "hash", threads: int = 8,
                 size_threads: int = 2, prefill: int = 1000, seed: int = 1) -> PhaseReport:
    """Run the handshake method with every phase write logged and check the log."""
    registry = ThreadRegistry(threads + size_threads + 1)
    target = make_set(structure, "handshake", registry, debug=True)
    spec = WorkloadSpec.from_mix("update", prefill=prefill, threads=threads,
                                 size_threads=size_threads, seed=seed)
    with registry.registered():
        for k in range(1, prefill + 1):
            target.insert(k * spec.key_range // prefill)
    stop = threading.Event()
    start = threading.Barrier(threads + size_threads + 1)
    counts = [0] * (threads + size_threads)
    errors: list[BaseException] = []

    def worker(i: int):
        rng = OpStream(spec, seed * 7919 + i).rng
        n = 0
        try:
            with registry.registered():
                start.wait()
                while not stop.is_set():
                    kind, key = next_op(spec, rng)
                    if kind is CONTAINS:
                        target.contains(key)
                    elif kind is INSERT:
                        target.insert(key)
                    else:
                        target.delete(key)
                    n += 1
        except BaseException as exc:
            errors.append(exc)
        counts[i] = n

    def sizer(i: int):
        n = 0
        try:
            with registry.registered():
                start.wait()
                while not stop.is_set():
                    target.size()
                    n += 1
        except BaseException as exc:
            errors.append(exc)
        counts[threads + i] = n

    ts = [threading.Thread(target=worker, args=(i,), daemon=True) for i in range(threads)]
    ts += [threading.Thread(target=sizer, args=(i,), daemon=True) for i in range(size_threads)]
    for t in ts:
        t.start()
    start.wait()
    time.sleep(duration_s)
    stop.set()
    for t in ts:
        t.join()
    if errors:
        raise errors[0]
    calc = target.calc
    log = list(calc.phase_log)
    return PhaseReport(
        transitions=len(log) - 1,
        sizes=sum(counts[threads:]),
        updates=sum(counts[:threads]),
        bad_transitions=phase_violations(log),
        frozen_violations=calc.frozen_violations,
        joins=sum(1 for a, b in zip(log, log[1:]) if b - a == 4),
    )
