import pytest

from concsize.core import DELETE, INSERT
from concsize.registry import ThreadRegistry
from concsize.sets import make_set
from concsize.sp import INVALID, INVALID_SIZE, CountersSnapshot, SPSizeCalculator


def test_collector_add_only_fills_empty_cells():
    snap = CountersSnapshot(4)
    snap.add(0, INSERT, 3)
    snap.add(0, INSERT, 5)
    assert snap.cells.get(0, INSERT) == 3


def test_forward_is_max_wins():
    snap = CountersSnapshot(4)
    snap.forward(1, DELETE, 4)
    snap.forward(1, DELETE, 2)
    assert snap.cells.get(1, DELETE) == 4
    snap.forward(1, DELETE, 6)
    assert snap.cells.get(1, DELETE) == 6


def test_stop_collecting_and_publish_are_single_shot():
    snap = CountersSnapshot(2)
    assert snap.stop_collecting()
    assert not snap.stop_collecting()
    assert snap.size == INVALID_SIZE
    assert snap.publish(7) == 7
    assert snap.publish(9) == 7


def test_slow_sum_treats_late_ids_as_zero():
    snap = CountersSnapshot(4)
    snap.add(0, INSERT, 5)
    snap.add(0, DELETE, 2)
    assert snap.slow_sum(1, 3) == 3
    with pytest.raises(AssertionError):
        snap.slow_sum(2, 3)
    assert snap.cells.get(2, INSERT) == INVALID


def test_initial_snapshot_is_not_collecting(registry):
    calc = SPSizeCalculator(registry)
    assert not calc.snapshot.get().collecting
    assert calc.compute() == 0
    assert not calc.snapshot.get().collecting


@pytest.mark.parametrize("structure", ["list", "hash"])
def test_sequential_size(structure, registry):
    s = make_set(structure, "sp", registry)
    for k in range(10):
        s.insert(k)
    for k in range(0, 10, 3):
        s.delete(k)
    assert s.size() == 6 == s.structure.count()


def test_updates_forward_into_collecting_snapshot(registry):
    calc = SPSizeCalculator(registry)
    snap = calc._obtain_collecting()
    calc.collect(snap)
    info = calc.create_update_info(INSERT)
    calc.update_metadata(info)
    assert snap.cells.get(registry.current(), INSERT) == 1
    snap.stop_collecting()
    assert snap.slow_sum(1, 1) == 1


def test_size_sees_threads_registered_before_it():
    reg = ThreadRegistry(4)
    s = make_set("list", "sp", reg)
    import threading

    def fill(base):
        with reg.registered():
            for k in range(base, base + 5):
                s.insert(k)

    ts = [threading.Thread(target=fill, args=(b,)) for b in (0, 100, 200)]
    for t in ts:
        t.start()
    for t in ts:
        t.join()
    with reg.registered():
        assert s.size() == 15
