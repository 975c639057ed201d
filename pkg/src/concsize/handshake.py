"""Handshake size: fast unsynchronized updates until a size asks for help.

A global ``size_phase`` (starting at 4) tells updaters which mode to run in.
``phase % 4 == 0`` means no size is active and updates take the fast path,
bumping a private net counter. A size installer moves the phase to
``base+1`` and waits for every busy thread to acknowledge it (first
handshake), then to ``base+2`` and waits again (second handshake). After the
second handshake no running update has ever overlapped a fast one, so the
SP snapshot machinery plus a plain sum of the now-frozen fast counters gives
a linearizable size. Finishing moves the phase to ``base+4``.
"""

from __future__ import annotations

import threading

from .atomics import AtomicInt, Backoff, PaddedArray
from .core import DELETE, INSERT
from .instrument import probe, spin
from .registry import ThreadRegistry, scan_ids
from .sp import INVALID_SIZE, CountersSnapshot, SPSizeCalculator

IDLE_PHASE = 0
FAST_PHASE = 1
INITIAL_SIZE_PHASE = 4


class HandshakeCountersSnapshot(CountersSnapshot):
    __slots__ = ()

    def compute_size(self, fast_size: int, collected: int, n: int) -> int:
        size = fast_size + self.slow_sum(collected, n)
        self.size = size
        return size


class HandshakeSizeCalculator(SPSizeCalculator):
    """Size calculator for the handshake method.

    ``handshakes=1`` runs only the first handshake before collecting. It
    exists to demonstrate the resulting linearizability violation and is not
    a supported configuration.

    With ``debug=True`` every ``size_phase`` write is logged to
    ``phase_log`` and fast-counter writes inside a size's frozen window are
    counted in ``frozen_violations``.
    """

    snapshot_class = HandshakeCountersSnapshot

    def __init__(self, registry: ThreadRegistry | None = None, *,
                 handshakes: int = 2, join_previous: bool = True, debug: bool = False):
        super().__init__(registry)
        if handshakes not in (1, 2):
            raise ValueError("handshakes must be 1 or 2")
        n = self.registry.max_threads
        self.size_phase = AtomicInt(INITIAL_SIZE_PHASE)
        self.fast_counters = PaddedArray(n, 0)
        self.op_phase = PaddedArray(n, IDLE_PHASE)
        self.handshakes = handshakes
        self.join_previous = join_previous
        self.debug = debug
        self.phase_log: list[int] = [INITIAL_SIZE_PHASE]
        self.frozen = AtomicInt(0)
        self.frozen_violations = 0
        self._log_lock = threading.Lock()

    # -- updater side ----------------------------------------------------------

    def get_size_phase(self) -> int:
        return self.size_phase.get()

    def set_op_phase(self, tid: int, phase: int) -> None:
        self.op_phase.set(tid, phase)

    def set_op_phase_volatile(self, tid: int, phase: int) -> None:
        # Python has no weaker store; the distinction is kept for readability.
        self.op_phase.set(tid, phase)

    def fast_update_metadata(self, tid: int, delta: int) -> None:
        if self.debug and self.frozen.get() > 0:
            self.frozen_violations += 1
        self.fast_counters.add(tid, delta)

    # -- size side -------------------------------------------------------------

    def _write_phase(self, value: int) -> None:
        if not self.debug:
            self.size_phase.set(value)
            return
        with self._log_lock:
            self.size_phase.set(value)
            self.phase_log.append(value)

    def _cas_phase(self, expected: int, value: int) -> bool:
        if not self.debug:
            return self.size_phase.compare_and_set(expected, value)
        with self._log_lock:
            ok = self.size_phase.compare_and_set(expected, value)
            if ok:
                self.phase_log.append(value)
            return ok

    def perform_handshake(self, target: int) -> None:
        op_phase = self.op_phase

        def visit(start, stop):
            for tid in range(start, stop):
                backoff = None
                while True:
                    p = op_phase.get(tid)
                    if p == IDLE_PHASE or p >= target:
                        break
                    spin("wait.handshake")
                    if backoff is None:
                        backoff = Backoff()
                    backoff()

        scan_ids(self.registry, visit)

    def do_first_and_second_handshakes(self) -> int:
        phase = self.size_phase.get()
        if self.join_previous and phase % 4 == 2:
            if self._cas_phase(phase, phase + 4):
                probe("size.joined")
                return phase + 4
            phase = self.size_phase.get()
        backoff = None
        while phase % 4 != 0:
            spin("wait.phase")
            if backoff is None:
                backoff = Backoff()
            backoff()
            phase = self.size_phase.get()
        self._write_phase(phase + 1)
        probe("size.phase1")
        self.perform_handshake(phase + 1)
        probe("size.handshake1")
        self._write_phase(phase + 2)
        probe("size.phase2")
        if self.handshakes == 2:
            self.perform_handshake(phase + 2)
            probe("size.handshake2")
        return phase + 2

    def compute_fast_size(self) -> int:
        fast = self.fast_counters
        total = 0

        def visit(start, stop):
            nonlocal total
            for tid in range(start, stop):
                total += fast.get(tid)

        scan_ids(self.registry, visit)
        return total

    def compute(self) -> int:
        current = self.snapshot.get()
        if not current.collecting:
            fresh = HandshakeCountersSnapshot(self.registry.max_threads)
            witnessed = self.snapshot.compare_and_exchange(current, fresh)
            if witnessed is current:
                probe("size.installed")
                phase = self.do_first_and_second_handshakes()
                self.frozen.get_and_add(1)
                collected = self.collect(fresh)
                probe("size.collected")
                fast_size = self.compute_fast_size()
                # Fast counters are never read again, so the frozen window
                # closes here, before a later size can install and join.
                self.frozen.get_and_add(-1)
                fresh.stop_collecting()
                probe("size.linearized")
                size = fresh.compute_size(fast_size, collected,
                                          self.registry.max_observed_threads())
                if self.join_previous:
                    self._cas_phase(phase, phase + 2)
                else:
                    self._write_phase(phase + 2)
                probe("size.advanced")
                return size
            current = witnessed
        return self.wait_for_computing(current)

    def wait_for_computing(self, snap: HandshakeCountersSnapshot) -> int:
        backoff = None
        while True:
            size = snap.size
            if size != INVALID_SIZE:
                return size
            spin("wait.computing")
            if backoff is None:
                backoff = Backoff()
            backoff()


class HandshakeSet:
    """Wraps a list or hash table with the handshake fast/slow path transformation."""

    def __init__(self, structure, calc: HandshakeSizeCalculator):
        self.structure = structure
        self.calc = calc

    def _update(self, kind: int, key) -> bool:
        calc = self.calc
        tid = calc.registry.current()
        calc.set_op_phase_volatile(tid, FAST_PHASE)
        probe("hs.enter")
        phase = calc.get_size_phase()
        probe("hs.read_phase")
        if phase % 4 == 0:
            if kind == INSERT:
                ok = self.structure.insert(key)
            else:
                ok = self.structure.delete(key)
            if ok:
                probe("fast.modified")
                calc.fast_update_metadata(tid, 1 if kind == INSERT else -1)
                probe("fast.metadata")
        else:
            calc.set_op_phase(tid, phase)
            if kind == INSERT:
                ok = self.structure.slow_insert(key, calc)
            else:
                ok = self.structure.slow_delete(key, calc)
        calc.set_op_phase(tid, IDLE_PHASE)
        probe("hs.idle")
        return ok

    def insert(self, key) -> bool:
        return self._update(INSERT, key)

    def delete(self, key) -> bool:
        return self._update(DELETE, key)

    def contains(self, key) -> bool:
        return self.structure.slow_contains(key, self.calc)

    def size(self) -> int:
        return self.calc.compute()
