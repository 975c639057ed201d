"""Per-thread identities for indexing metadata arrays."""

from __future__ import annotations

import heapq
import threading
from contextlib import contextmanager

from .atomics import AtomicInt

MAX_THREADS = 128


class RegistrationError(RuntimeError):
    pass


class AlreadyRegistered(RegistrationError):
    pass


class NotRegistered(RegistrationError):
    pass


class TooManyThreads(RegistrationError):
    pass


class ThreadRegistry:
    """Hands out small integer ids in ``[0, max_threads)``, reusing released ones.

    Released ids go to a min-heap so the smallest is reused first. Ids are
    never reset on reuse: counters indexed by a recycled id keep accumulating.
    """

    def __init__(self, max_threads: int = MAX_THREADS):
        if max_threads < 1:
            raise ValueError("max_threads must be positive")
        self.max_threads = max_threads
        self._next_id = AtomicInt(0)
        self._pool: list[int] = []
        self._pool_lock = threading.Lock()
        self._local = threading.local()

    def register(self) -> int:
        if getattr(self._local, "tid", None) is not None:
            raise AlreadyRegistered("Thread already registered")
        with self._pool_lock:
            tid = heapq.heappop(self._pool) if self._pool else None
        if tid is None:
            tid = self._next_id.get_and_add(1)
            if tid >= self.max_threads:
                raise TooManyThreads("Too many threads")
        self._local.tid = tid
        return tid

    def deregister(self) -> None:
        tid = getattr(self._local, "tid", None)
        if tid is None:
            raise NotRegistered("Thread not registered")
        with self._pool_lock:
            heapq.heappush(self._pool, tid)
        self._local.tid = None

    def current(self) -> int:
        tid = getattr(self._local, "tid", None)
        if tid is None:
            raise NotRegistered("Thread not registered")
        return tid

    def is_registered(self) -> bool:
        return getattr(self._local, "tid", None) is not None

    def max_observed_threads(self) -> int:
        """Upper bound on the ids issued so far (the ``nextId`` counter).

        A fresh id past ``max_threads`` may bump the raw counter before the
        caller raises, so the result is clamped to the array length.
        """
        return min(self._next_id.get(), self.max_threads)

    @contextmanager
    def registered(self):
        tid = self.register()
        try:
            yield tid
        finally:
            self.deregister()


default_registry = ThreadRegistry()


def scan_ids(registry: ThreadRegistry, visit) -> int:
    """Call ``visit(start, stop)`` over issued ids until no new id shows up.

    ``visit`` covers ids ``[start, stop)``; when registrations race with the
    scan the newly issued range is visited on the next round.
    """
    start = 0
    stop = registry.max_observed_threads()
    while True:
        visit(start, stop)
        again = registry.max_observed_threads()
        if again == stop:
            return stop
        start, stop = stop, again
