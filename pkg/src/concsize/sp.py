"""Wait-free size via per-thread insert/delete counters and a helped snapshot.

Each thread owns an (inserts, deletes) counter pair. A successful update
publishes an :class:`~concsize.core.UpdateInfo` naming the counter value it
moves from; any thread may apply it, and the counter CAS makes the
increment happen exactly once. A size operation shares a
:class:`CountersSnapshot` with every concurrent size: all of them collect
counter values into it, and the first to flip ``collecting`` to ``False``
fixes the linearization point. Updaters that see a collecting snapshot
forward their post-update counter value into it (max-wins), so a cell
collected before the update still accounts for it.
"""

from __future__ import annotations

from .atomics import AtomicRef, PaddedArray, stripe_for
from .core import DELETE, INSERT, UpdateInfo
from .registry import ThreadRegistry, default_registry, scan_ids

INVALID = -1
INVALID_SIZE = -(1 << 63)


class CountersSnapshot:
    __slots__ = ("cells", "collecting", "size", "_lock")

    def __init__(self, max_threads: int, collecting: bool = True):
        self.cells = PaddedArray(max_threads, INVALID, width=2)
        self.collecting = collecting
        self.size = INVALID_SIZE
        self._lock = stripe_for(self)

    def add(self, tid: int, kind: int, value: int) -> None:
        """Collector install: only fills a cell nobody has filled yet."""
        self.cells.compare_and_set(tid, INVALID, value, kind)

    def forward(self, tid: int, kind: int, value: int) -> None:
        """Updater install: raise the cell to ``value`` unless it is already higher."""
        cells = self.cells
        while True:
            cur = cells.get(tid, kind)
            if cur != INVALID and cur >= value:
                return
            if cells.compare_and_set(tid, cur, value, kind):
                return

    def stop_collecting(self) -> bool:
        """Flip ``collecting`` to False. True for the single caller that flipped it."""
        with self._lock:
            if not self.collecting:
                return False
            self.collecting = False
            return True

    def slow_sum(self, collected: int, n: int) -> int:
        """Sum inserts minus deletes over ids ``[0, n)``.

        Ids from ``collected`` on were issued after the collect finished;
        their counters were zero then, so an unfilled cell counts as 0.
        """
        cells = self.cells
        total = 0
        for tid in range(n):
            ins = cells.get(tid, INSERT)
            dels = cells.get(tid, DELETE)
            if ins == INVALID or dels == INVALID:
                if tid < collected:
                    raise AssertionError(f"snapshot cell {tid} never collected")
                ins = 0 if ins == INVALID else ins
                dels = 0 if dels == INVALID else dels
            total += ins - dels
        return total

    def publish(self, value: int) -> int:
        """Write ``size`` once; return whichever value won."""
        with self._lock:
            if self.size == INVALID_SIZE:
                self.size = value
            return self.size


class SPSizeCalculator:
    """Counters, helping and snapshot collection shared by the SP and handshake methods."""

    snapshot_class = CountersSnapshot

    def __init__(self, registry: ThreadRegistry | None = None):
        self.registry = registry or default_registry
        n = self.registry.max_threads
        self.counters = PaddedArray(n, 0, width=2)
        self.snapshot = AtomicRef(self.snapshot_class(n, collecting=False))

    # -- update side -----------------------------------------------------------

    def create_update_info(self, kind: int) -> UpdateInfo:
        tid = self.registry.current()
        return UpdateInfo(kind, tid, self.counters.get(tid, kind))

    def update_metadata(self, info: UpdateInfo) -> None:
        tid, kind, target = info.tid, info.op_kind, info.target
        counters = self.counters
        if counters.get(tid, kind) == info.counter_before:
            counters.compare_and_set(tid, info.counter_before, target, kind)
        snap = self.snapshot.get()
        if snap.collecting and counters.get(tid, kind) == target:
            snap.forward(tid, kind, target)

    # -- size side -------------------------------------------------------------

    def collect(self, snap: CountersSnapshot) -> int:
        """Fill every issued id's cells; return the id bound covered."""
        counters = self.counters

        def visit(start, stop):
            for tid in range(start, stop):
                snap.add(tid, INSERT, counters.get(tid, INSERT))
                snap.add(tid, DELETE, counters.get(tid, DELETE))

        return scan_ids(self.registry, visit)

    def _obtain_collecting(self) -> CountersSnapshot:
        current = self.snapshot.get()
        if current.collecting:
            return current
        fresh = self.snapshot_class(self.registry.max_threads)
        witnessed = self.snapshot.compare_and_exchange(current, fresh)
        return fresh if witnessed is current else witnessed

    def compute(self) -> int:
        snap = self._obtain_collecting()
        collected = self.collect(snap)
        snap.stop_collecting()
        if snap.size != INVALID_SIZE:
            return snap.size
        n = self.registry.max_observed_threads()
        return snap.publish(snap.slow_sum(collected, n))

    # -- inspection ------------------------------------------------------------

    def counter_totals(self) -> tuple[int, int]:
        return sum(self.counters.values(INSERT)), sum(self.counters.values(DELETE))
