import threading

from concsize.lincheck import check_linearizable, scripted_schedule
from concsize.locks import LockedSet, LocksSizeCalculator, RWLock
from concsize.registry import ThreadRegistry
from concsize.sets import make_set


class CountingLock(RWLock):
    def __init__(self):
        super().__init__()
        self.shared = 0

    def acquire_shared(self):
        self.shared += 1
        super().acquire_shared()


def test_failing_insert_never_locks(registry):
    lock = CountingLock()
    s = LockedSet(make_set("list", "none").structure, LocksSizeCalculator(registry, lock))
    assert s.insert(1)
    assert not s.insert(1)
    assert lock.shared == 1


def test_successful_delete_decrements(registry):
    s = make_set("hash", "lock", registry)
    s.insert(4)
    s.delete(4)
    assert s.calc.metadata_counters.get(registry.current()) == 0
    assert s.size() == 0


def test_quiescent_size(registry):
    s = make_set("list", "lock", registry)
    for k in range(12):
        s.insert(k)
    assert s.size() == 12
    assert s.size() == 12


def test_readers_share_writer_excludes():
    lock = RWLock()
    lock.acquire_shared()
    lock.acquire_shared()
    assert lock.readers() == 2
    got = threading.Event()

    def writer():
        lock.acquire_exclusive()
        got.set()
        lock.release_exclusive()

    t = threading.Thread(target=writer)
    t.start()
    assert not got.wait(0.05)
    lock.release_shared()
    lock.release_shared()
    t.join(5)
    assert got.is_set()
    assert lock.readers() == 0 and not lock.write_locked()


def test_size_waiting_on_earlier_sum_does_not_return_stale_value():
    # T0 has summed 0 and released the lock but not yet published; T1's insert
    # completes; T2's size starts only then, so it must see the insert.
    reg = ThreadRegistry(8)
    s = make_set("list", "lock", reg)
    programs = [[("SIZE", None)], [("INSERT", 1)], [("SIZE", None)]]
    steps = [(0, "lock.released"), (1, "respond"), (2, "respond")]
    h = scripted_schedule(s, programs, steps, reg)
    sizes = {o.thread: o.result for o in h.operations() if o.op == "SIZE"}
    assert sizes == {0: 0, 2: 1}
    assert check_linearizable(h)


def test_no_counter_write_during_summation():
    reg = ThreadRegistry(8)
    s = make_set("hash", "lock", reg, debug=True)
    stop = threading.Event()

    def upd(base):
        with reg.registered():
            for k in range(base, base + 2000):
                s.insert(k)
                s.delete(k)

    def sizer():
        with reg.registered():
            while not stop.is_set():
                s.size()

    ws = [threading.Thread(target=upd, args=(b,)) for b in (0, 10_000, 20_000)]
    sz = threading.Thread(target=sizer)
    sz.start()
    for t in ws:
        t.start()
    for t in ws:
        t.join()
    stop.set()
    sz.join()
    assert s.calc.exclusion_violations == 0
    with reg.registered():
        assert s.size() == 0
