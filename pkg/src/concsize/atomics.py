"""Atomic cells and padded per-thread arrays.

CPython gives atomic single-attribute reads and writes, but nothing like a
hardware compare-and-swap. Read-modify-write operations here take a lock
drawn from a fixed pool of stripes, keyed by the identity of the cell (and
index, for array cells). Plain reads never lock. Any write that may race
with a CAS on the same cell must go through the locked path too.
"""

from __future__ import annotations

import threading
import time

_N_STRIPES = 128
_STRIPE_MASK = _N_STRIPES - 1
_STRIPES = tuple(threading.Lock() for _ in range(_N_STRIPES))

# Python list slots are 8-byte pointers: 8 slots per 64-byte cache line.
CACHE_LINE_SLOTS = 8


def stripe_for(obj: object, index: int = 0) -> threading.Lock:
    return _STRIPES[((id(obj) >> 4) ^ (index * 0x9E3779B1)) & _STRIPE_MASK]


class AtomicInt:
    __slots__ = ("_value", "_lock")

    def __init__(self, value: int = 0):
        self._value = value
        self._lock = stripe_for(self)

    def get(self) -> int:
        return self._value

    def set(self, value: int) -> None:
        with self._lock:
            self._value = value

    def compare_and_set(self, expected: int, new: int) -> bool:
        with self._lock:
            if self._value == expected:
                self._value = new
                return True
            return False

    def get_and_add(self, delta: int) -> int:
        with self._lock:
            old = self._value
            self._value = old + delta
            return old

    def __repr__(self) -> str:
        return f"AtomicInt({self._value})"


class AtomicRef:
    """Reference cell; CAS compares by identity."""

    __slots__ = ("_value", "_lock")

    def __init__(self, value=None):
        self._value = value
        self._lock = stripe_for(self)

    def get(self):
        return self._value

    def set(self, value) -> None:
        with self._lock:
            self._value = value

    def compare_and_set(self, expected, new) -> bool:
        with self._lock:
            if self._value is expected:
                self._value = new
                return True
            return False

    def compare_and_exchange(self, expected, new):
        """Install ``new`` if the cell holds ``expected``; return the witnessed value."""
        with self._lock:
            witnessed = self._value
            if witnessed is expected:
                self._value = new
            return witnessed


class PaddedArray:
    """Fixed-length array of per-thread values, one cache line per entry.

    Each logical entry owns ``width`` consecutive slots at the start of its own
    ``CACHE_LINE_SLOTS``-slot stride, so neighbouring threads never write into
    the same line of the backing pointer array.
    """

    __slots__ = ("length", "width", "_slots")

    def __init__(self, length: int, initial=0, width: int = 1):
        if width > CACHE_LINE_SLOTS:
            raise ValueError("entry wider than a cache line")
        self.length = length
        self.width = width
        self._slots = [initial] * (length * CACHE_LINE_SLOTS)

    def get(self, i: int, j: int = 0):
        return self._slots[i * CACHE_LINE_SLOTS + j]

    def set(self, i: int, value, j: int = 0) -> None:
        # Plain store: for single-writer cells only.
        self._slots[i * CACHE_LINE_SLOTS + j] = value

    def add(self, i: int, delta: int, j: int = 0) -> None:
        # Owner-only read-then-write, no lock: matches a volatile get/set pair.
        slot = i * CACHE_LINE_SLOTS + j
        self._slots[slot] = self._slots[slot] + delta

    def set_locked(self, i: int, value, j: int = 0) -> None:
        slot = i * CACHE_LINE_SLOTS + j
        with stripe_for(self, slot):
            self._slots[slot] = value

    def compare_and_set(self, i: int, expected, new, j: int = 0) -> bool:
        slot = i * CACHE_LINE_SLOTS + j
        with stripe_for(self, slot):
            if self._slots[slot] == expected:
                self._slots[slot] = new
                return True
            return False

    def values(self, j: int = 0) -> list:
        return self._slots[j::CACHE_LINE_SLOTS]


class Backoff:
    """Spin helper for blocking waits.

    Yields the GIL on every call, then sleeps for exponentially growing
    intervals capped at ``max_sleep``.
    """

    __slots__ = ("_spins", "_delay", "max_sleep")

    def __init__(self, max_sleep: float = 1e-3):
        self._spins = 0
        self._delay = 1e-6
        self.max_sleep = max_sleep

    def __call__(self) -> None:
        self._spins += 1
        if self._spins < 16:
            time.sleep(0)
            return
        time.sleep(self._delay)
        if self._delay < self.max_sleep:
            self._delay *= 2
