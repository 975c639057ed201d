"""Lock-based size: updaters share a read lock, size takes the write lock."""

from __future__ import annotations

from .atomics import AtomicInt, AtomicRef, Backoff, PaddedArray
from .core import DELETE, INSERT
from .instrument import probe, spin
from .registry import ThreadRegistry, default_registry, scan_ids
from .sizeinfo import SizeInfo, wait_for_size

_WRITER = 1 << 40


class RWLock:
    """Writer-preferring spin readers-writer lock.

    ``state`` holds the reader count, plus ``_WRITER`` while a writer owns
    it. A writer first raises ``writers_waiting`` so no new reader gets in,
    then waits for the readers to drain.
    """

    def __init__(self):
        self.state = AtomicInt(0)
        self.writers_waiting = AtomicInt(0)

    def acquire_shared(self) -> None:
        state = self.state
        backoff = None
        while True:
            s = state.get()
            if s < _WRITER and self.writers_waiting.get() == 0:
                if state.compare_and_set(s, s + 1):
                    return
                continue
            spin("wait.read_lock")
            if backoff is None:
                backoff = Backoff()
            backoff()

    def release_shared(self) -> None:
        self.state.get_and_add(-1)

    def acquire_exclusive(self) -> None:
        self.writers_waiting.get_and_add(1)
        backoff = None
        while not self.state.compare_and_set(0, _WRITER):
            spin("wait.write_lock")
            if backoff is None:
                backoff = Backoff()
            backoff()
        self.writers_waiting.get_and_add(-1)

    def release_exclusive(self) -> None:
        self.state.get_and_add(-_WRITER)

    def readers(self) -> int:
        return self.state.get() % _WRITER

    def write_locked(self) -> bool:
        return self.state.get() >= _WRITER


class LocksSizeCalculator:

    def __init__(self, registry: ThreadRegistry | None = None, lock=None, *, debug: bool = False):
        self.registry = registry or default_registry
        self.metadata_counters = PaddedArray(self.registry.max_threads, 0)
        self.lock = lock if lock is not None else RWLock()
        # Pre-completed so that the first size installs rather than waits.
        self.size_info = AtomicRef(SizeInfo(0))
        self.debug = debug
        self.summing = False
        self.exclusion_violations = 0

    def update_metadata(self, tid: int, delta: int) -> None:
        if self.debug and self.summing:
            self.exclusion_violations += 1
        self.metadata_counters.add(tid, delta)

    def _sum_locked(self) -> int:
        counters = self.metadata_counters
        total = 0

        def visit(start, stop):
            nonlocal total
            for tid in range(start, stop):
                total += counters.get(tid)

        self.lock.acquire_exclusive()
        try:
            probe("lock.acquired")
            self.summing = True
            scan_ids(self.registry, visit)
            self.summing = False
            probe("lock.summed")
        finally:
            self.lock.release_exclusive()
        probe("lock.released")
        return total

    def compute(self) -> int:
        # A SizeInfo already in flight when we start may have summed before
        # our invocation, so its value is not ours to return; wait it out and
        # use the next one. Anything installed after we started is fine.
        returnable = False
        while True:
            current = self.size_info.get()
            if current.is_done():
                fresh = SizeInfo()
                witnessed = self.size_info.compare_and_exchange(current, fresh)
                if witnessed is current:
                    size = self._sum_locked()
                    fresh.size.set(size)
                    return size
                current = witnessed
                returnable = True
            size = wait_for_size(current)
            if returnable:
                return size
            returnable = True


class LockedSet:

    def __init__(self, structure, calc: LocksSizeCalculator):
        self.structure = structure
        self.calc = calc

    def _update(self, kind: int, key) -> bool:
        calc = self.calc
        tid = calc.registry.current()
        present = self.structure.contains(key)
        if present == (kind == INSERT):
            return False
        lock = calc.lock
        lock.acquire_shared()
        try:
            if kind == INSERT:
                ok = self.structure.insert(key)
            else:
                ok = self.structure.delete(key)
            if ok:
                calc.update_metadata(tid, 1 if kind == INSERT else -1)
        finally:
            lock.release_shared()
        return ok

    def insert(self, key) -> bool:
        return self._update(INSERT, key)

    def delete(self, key) -> bool:
        return self._update(DELETE, key)

    def contains(self, key) -> bool:
        return self.structure.contains(key)

    def size(self) -> int:
        return self.calc.compute()
