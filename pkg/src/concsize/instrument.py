"""Labelled yield points inside the size protocols.

The calculators and list operations call :func:`probe` at protocol steps.
With no hook installed this is one global load and a ``None`` test. The
schedule controller in :mod:`concsize.lincheck.schedule` and the random
yield injector used by the history recorder install hooks here.

Labels that mark a thread spinning on another thread's progress go through
:func:`spin` instead, so a controller can tell "blocked" apart from "reached
a step".
"""

from __future__ import annotations

from contextlib import contextmanager

# Labels emitted by the library. Controllers reject anything else.
LABELS = frozenset({
    # history recorder
    "invoke", "respond",
    # list operations
    "list.found", "list.linked", "list.marked",
    # slow (helping) path
    "slow.modified", "slow.metadata",
    # handshake-transformed updates
    "hs.enter", "hs.read_phase", "fast.modified", "fast.metadata", "hs.idle",
    # handshake size
    "size.installed", "size.phase1", "size.handshake1", "size.phase2",
    "size.handshake2", "size.joined", "size.collected", "size.linearized",
    "size.advanced",
    # optimistic / lock wrappers
    "opt.help", "opt.window_open", "opt.window_close", "opt.attempt",
    "lock.acquired", "lock.summed", "lock.released",
    # spin waits
    "wait.phase", "wait.handshake", "wait.computing", "wait.even",
    "wait.read_lock", "wait.write_lock",
})

_hook = None


def probe(label: str) -> None:
    hook = _hook
    if hook is not None:
        hook(label, False)


def spin(label: str) -> None:
    hook = _hook
    if hook is not None:
        hook(label, True)


def installed() -> bool:
    return _hook is not None


@contextmanager
def hooked(hook):
    """Install ``hook(label, spinning)`` for the duration of the block."""
    global _hook
    if _hook is not None:
        raise RuntimeError("an instrumentation hook is already installed")
    _hook = hook
    try:
        yield hook
    finally:
        _hook = None
