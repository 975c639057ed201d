"""Deterministic, step-by-step execution of set programs.

Only one worker thread runs at a time. A step ``(thread, label)`` resumes
``thread`` until it next passes the probe ``label`` and parks it there. If
the thread instead hits a spin probe (it is waiting on someone else), the
step stays pending and is retried after every later step. When the script
runs out, all threads are run to completion, lowest index first.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

from ..instrument import LABELS, hooked
from ..registry import ThreadRegistry
from .history import History
from .recorder import Stamper

# Round-robin passes without any thread finishing before giving up.
STALL_ROUNDS = 2000


class UnknownLabel(ValueError):
    pass


class Deadlock(RuntimeError):
    pass


@dataclass
class _Worker:
    index: int
    program: list
    go: threading.Semaphore
    goal: str | None = None
    # "reached", "spin", "finished" or "error"
    status: str | None = None
    where: str | None = None
    error: BaseException | None = None
    thread: threading.Thread | None = None


def scripted_schedule(target, programs: list[list[tuple]], steps, registry: ThreadRegistry,
                      *, timeout: float = 10.0) -> History:
    """Run ``programs`` (one list of ``(op, key)`` per thread) on ``target`` under ``steps``.

    Worker ``i`` registers with ``registry`` in index order before the script
    starts, so thread ids are deterministic.
    """
    steps = [(int(t), label) for t, label in steps]
    for t, label in steps:
        if label not in LABELS:
            raise UnknownLabel(f"unknown probe label {label!r}")
        if not 0 <= t < len(programs):
            raise ValueError(f"step names thread {t}, but only {len(programs)} programs given")
    stamper = Stamper()
    back = threading.Semaphore(0)
    local = threading.local()
    workers = [_Worker(i, list(p), threading.Semaphore(0)) for i, p in enumerate(programs)]

    def park(w: _Worker, status: str, where: str | None) -> None:
        w.status, w.where = status, where
        back.release()
        w.go.acquire()

    def hook(label, spinning):
        w = getattr(local, "worker", None)
        if w is None:
            return
        if spinning:
            park(w, "spin", label)
        elif w.goal is not None and label == w.goal:
            w.goal = None
            park(w, "reached", label)

    def body(w: _Worker):
        local.worker = w
        try:
            registry.register()
            park(w, "ready", None)
            for op, key in w.program:
                stamper.call(w.index, target, op, key)
            registry.deregister()
            w.status, w.where = "finished", None
        except BaseException as exc:  # reported by the controller
            w.status, w.error = "error", exc
        back.release()

    def resume(w: _Worker) -> str:
        w.go.release()
        if not back.acquire(timeout=timeout):
            raise Deadlock(f"thread {w.index} did not yield within {timeout}s")
        if w.status == "error":
            raise w.error
        return w.status

    def advance(w: _Worker) -> bool:
        """Resume ``w`` toward its goal; True once the goal is met."""
        status = resume(w)
        if status == "reached":
            return True
        if status == "finished":
            raise Deadlock(f"thread {w.index} finished without reaching {w.goal!r}")
        return False

    with hooked(hook):
        for w in workers:
            w.thread = threading.Thread(target=body, args=(w,), daemon=True)
            w.thread.start()
            back.acquire()
            if w.status == "error":
                raise w.error
        pending: list[_Worker] = []

        def retry_pending() -> None:
            progressed = True
            while progressed and pending:
                progressed = False
                for p in list(pending):
                    if advance(p):
                        pending.remove(p)
                        progressed = True

        for t, label in steps:
            w = workers[t]
            if w.goal is not None:
                raise Deadlock(f"thread {t} still waiting to reach {w.goal!r}")
            if w.status == "finished":
                raise Deadlock(f"thread {t} already finished; cannot reach {label!r}")
            w.goal = label
            if not advance(w):
                pending.append(w)
            else:
                retry_pending()
        retry_pending()

        alive = [w for w in workers if w.status != "finished"]
        stalled = 0
        while alive:
            finished_any = False
            for w in list(alive):
                status = resume(w)
                if status == "finished":
                    if w.goal is not None:
                        raise Deadlock(f"thread {w.index} finished without reaching {w.goal!r}")
                    alive.remove(w)
                    finished_any = True
                elif status == "reached":
                    pass
            stalled = 0 if finished_any else stalled + 1
            if stalled > STALL_ROUNDS:
                where = ", ".join(f"T{w.index}@{w.where}" for w in alive)
                raise Deadlock(f"no thread can finish: {where}")
        for w in workers:
            w.thread.join()
    return stamper.history()
