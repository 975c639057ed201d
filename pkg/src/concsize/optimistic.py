"""Optimistic size: sum net counters while no update window is open.

Updaters bracket each modification attempt with two increments of their
activity counter, so an odd value means "inside a window". A size reads all
activity counters (waiting out odd ones), sums the net counters, and
re-reads the activity counters; if nothing changed, no update ran during the
sum. After ``max_tries`` failed attempts a size registers in
``awaiting_sizes`` and updaters start helping it compute before they begin
their own operation.
"""

from __future__ import annotations

from .atomics import AtomicInt, AtomicRef, Backoff, PaddedArray
from .core import DELETE, INSERT
from .instrument import probe, spin
from .registry import ThreadRegistry, default_registry
from .sizeinfo import SizeInfo, obtain_active
from .sp import INVALID_SIZE

MAX_TRIES = 3


class OptimisticSizeCalculator:

    def __init__(self, registry: ThreadRegistry | None = None, max_tries: int = MAX_TRIES):
        if max_tries < 1:
            raise ValueError("max_tries must be positive")
        self.registry = registry or default_registry
        n = self.registry.max_threads
        self.max_tries = max_tries
        self.metadata_counters = PaddedArray(n, 0)
        self.activity_counters = PaddedArray(n, 0)
        self.awaiting_sizes = AtomicInt(0)
        self.size_info = AtomicRef(SizeInfo())
        # Bench bookkeeping: sizes that had to ask updaters for help.
        self.escalations = AtomicInt(0)

    def increment_activity_counter(self, tid: int) -> None:
        self.activity_counters.add(tid, 1)

    def update_metadata(self, tid: int, delta: int) -> None:
        self.metadata_counters.add(tid, delta)

    def help_size(self) -> None:
        if self.awaiting_sizes.get() == 0:
            return
        probe("opt.help")
        current = self.size_info.get()
        while True:
            if current.is_done():
                return
            size = self.try_compute_size()
            if size != INVALID_SIZE:
                current.publish(size)
                return

    def _read_activity_counters(self) -> list[int]:
        # No nextId re-check: a thread registered mid-read shows up as a
        # changed counter in _retry_activity_counters.
        activity = self.activity_counters
        status = []
        for tid in range(self.registry.max_observed_threads()):
            value = activity.get(tid)
            if value & 1:
                backoff = Backoff()
                while value & 1:
                    spin("wait.even")
                    backoff()
                    value = activity.get(tid)
            status.append(value)
        return status

    def _retry_activity_counters(self, status: list[int]) -> bool:
        activity = self.activity_counters
        n = self.registry.max_observed_threads()
        if n != len(status):
            # Ids issued since the first read: fine only if still untouched.
            for tid in range(len(status), n):
                if activity.get(tid) != 0:
                    return False
        for tid, value in enumerate(status):
            if activity.get(tid) != value:
                return False
        return True

    def try_compute_size(self) -> int:
        status = self._read_activity_counters()
        counters = self.metadata_counters
        total = 0
        for tid in range(len(status)):
            total += counters.get(tid)
        if self._retry_activity_counters(status):
            return total
        return INVALID_SIZE

    def obtain_active_size_info(self) -> tuple[SizeInfo, bool]:
        return obtain_active(self.size_info)

    def compute(self) -> int:
        max_tries = self.max_tries
        count = 0
        active, returnable = self.obtain_active_size_info()
        while True:
            size = active.size.get()
            if size != INVALID_SIZE:
                if returnable:
                    break
                active, _ = self.obtain_active_size_info()
                returnable = True
            if count == max_tries:
                self.awaiting_sizes.get_and_add(1)
                self.escalations.get_and_add(1)
            if count <= max_tries:
                count += 1
            size = self.try_compute_size()
            if size != INVALID_SIZE:
                active.publish(size)
                break
        if count == max_tries + 1:
            self.awaiting_sizes.get_and_add(-1)
        return size


class OptimisticSet:
    """Wraps a structure with activity-counter windows around modifications."""

    def __init__(self, structure, calc: OptimisticSizeCalculator):
        self.structure = structure
        self.calc = calc

    def _update(self, kind: int, key) -> bool:
        calc = self.calc
        tid = calc.registry.current()
        calc.help_size()
        present = self.structure.contains(key)
        if present == (kind == INSERT):
            return False
        calc.increment_activity_counter(tid)
        probe("opt.window_open")
        if kind == INSERT:
            ok = self.structure.insert(key)
        else:
            ok = self.structure.delete(key)
        probe("opt.attempt")
        if ok:
            calc.update_metadata(tid, 1 if kind == INSERT else -1)
        calc.increment_activity_counter(tid)
        probe("opt.window_close")
        return ok

    def insert(self, key) -> bool:
        return self._update(INSERT, key)

    def delete(self, key) -> bool:
        return self._update(DELETE, key)

    def contains(self, key) -> bool:
        return self.structure.contains(key)

    def size(self) -> int:
        return self.calc.compute()
