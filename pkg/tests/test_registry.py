import threading

import pytest

from concsize.atomics import CACHE_LINE_SLOTS, AtomicInt, AtomicRef, PaddedArray
from concsize.registry import (AlreadyRegistered, NotRegistered, ThreadRegistry, TooManyThreads,
                               scan_ids)


def in_thread(fn):
    out = []

    def run():
        try:
            out.append(fn())
        except Exception as exc:
            out.append(exc)

    t = threading.Thread(target=run)
    t.start()
    t.join()
    if isinstance(out[0], Exception):
        raise out[0]
    return out[0]


def test_first_ids_are_sequential():
    reg = ThreadRegistry(8)
    assert reg.register() == 0
    assert in_thread(reg.register) == 1
    assert in_thread(reg.register) == 2
    assert reg.max_observed_threads() == 3


def test_released_ids_reused_smallest_first():
    reg = ThreadRegistry(8)
    ids = {}
    release = threading.Event()
    registered = threading.Barrier(4)

    def hold(name):
        ids[name] = reg.register()
        registered.wait()
        release.wait()
        if name in ("b", "c"):
            reg.deregister()

    ts = [threading.Thread(target=hold, args=(n,)) for n in "abc"]
    for t in ts:
        t.start()
    registered.wait()
    release.set()
    for t in ts:
        t.join()
    assert sorted(ids.values()) == [0, 1, 2]
    assert in_thread(reg.register) == min(ids["b"], ids["c"])
    assert reg.max_observed_threads() == 3


def test_too_many_threads():
    reg = ThreadRegistry(2)
    reg.register()
    in_thread(reg.register)
    with pytest.raises(TooManyThreads, match="Too many threads"):
        in_thread(reg.register)
    assert reg.max_observed_threads() == 2


def test_registration_errors():
    reg = ThreadRegistry(4)
    with pytest.raises(NotRegistered, match="Thread not registered"):
        reg.current()
    with pytest.raises(NotRegistered):
        reg.deregister()
    reg.register()
    with pytest.raises(AlreadyRegistered, match="Thread already registered"):
        reg.register()
    reg.deregister()
    assert not reg.is_registered()


def test_registered_context_releases():
    reg = ThreadRegistry(4)
    with reg.registered() as tid:
        assert reg.current() == tid
    assert not reg.is_registered()


def test_scan_ids_picks_up_late_registrations():
    reg = ThreadRegistry(8)
    reg.register()
    seen = []

    def visit(start, stop):
        seen.extend(range(start, stop))
        if len(seen) == 1:
            in_thread(reg.register)

    assert scan_ids(reg, visit) == 2
    assert seen == [0, 1]


def test_padded_array_keeps_entries_on_separate_lines():
    arr = PaddedArray(4, 0, width=2)
    arr.set(1, 5)
    arr.set(1, 7, 1)
    arr.add(2, 3)
    assert arr.values() == [0, 5, 3, 0]
    assert arr.values(1) == [0, 7, 0, 0]
    assert len(arr._slots) == 4 * CACHE_LINE_SLOTS
    assert arr.compare_and_set(3, 0, 9)
    assert not arr.compare_and_set(3, 0, 1)
    with pytest.raises(ValueError):
        PaddedArray(2, width=CACHE_LINE_SLOTS + 1)


def test_atomic_int_concurrent_adds():
    a = AtomicInt(0)

    def bump():
        for _ in range(5000):
            a.get_and_add(1)

    ts = [threading.Thread(target=bump) for _ in range(4)]
    for t in ts:
        t.start()
    for t in ts:
        t.join()
    assert a.get() == 20000
    assert not a.compare_and_set(0, 1)
    assert a.compare_and_set(20000, 1)


def test_atomic_ref_exchange_by_identity():
    x, y = [1], [1]
    r = AtomicRef(x)
    assert r.compare_and_exchange(y, "z") is x
    assert r.get() is x
    assert r.compare_and_exchange(x, "z") is x
    assert r.get() == "z"
