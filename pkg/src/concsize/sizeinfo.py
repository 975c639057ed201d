"""Single-shot shared size result used by the optimistic and lock methods."""

from __future__ import annotations

from .atomics import AtomicInt, AtomicRef, Backoff
from .instrument import spin
from .sp import INVALID_SIZE


class SizeInfo:
    __slots__ = ("size",)

    def __init__(self, size: int = INVALID_SIZE):
        self.size = AtomicInt(size)

    def publish(self, value: int) -> bool:
        return self.size.compare_and_set(INVALID_SIZE, value)

    def is_done(self) -> bool:
        return self.size.get() != INVALID_SIZE


def obtain_active(slot: AtomicRef) -> tuple[SizeInfo, bool]:
    """Return the in-flight SizeInfo, installing a fresh one if the current is done.

    The flag is True when the returned instance was installed after this call
    started (by us or by a racer), i.e. any value later published into it
    was computed inside the caller's interval.
    """
    current = slot.get()
    if not current.is_done():
        return current, False
    fresh = SizeInfo()
    witnessed = slot.compare_and_exchange(current, fresh)
    if witnessed is current:
        return fresh, True
    return witnessed, True


def wait_for_size(info: SizeInfo) -> int:
    backoff = Backoff()
    while True:
        size = info.size.get()
        if size != INVALID_SIZE:
            return size
        spin("wait.computing")
        backoff()
