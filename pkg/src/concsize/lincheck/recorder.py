"""Run set programs on real threads and record the resulting history."""

from __future__ import annotations

import itertools
import random
import sys
import threading
import time
import warnings
from dataclasses import dataclass, field

from ..instrument import hooked, probe
from ..registry import ThreadRegistry
from ..sets import make_set
from .history import INVOKE, RESPOND, Event, History

# Checking budget the defaults are sized for.
MAX_THREADS = 4
MAX_OPS_PER_THREAD = 8
MAX_KEYS = 3


class ConfigTooLarge(UserWarning):
    pass


@dataclass
class HarnessConfig:
    structure: str = "list"
    method: str = "sp"
    threads: int = 3
    ops_per_thread: int = 6
    keys: tuple = (1, 2, 3)
    min_size_ops: int = 1
    seed: int | None = None
    # Chance of yielding the GIL at each protocol probe.
    yield_prob: float = 0.3
    set_options: dict = field(default_factory=dict)


def perform(target, op: str, key):
    if op == "INSERT":
        return target.insert(key)
    if op == "DELETE":
        return target.delete(key)
    if op == "CONTAINS":
        return target.contains(key)
    if op == "SIZE":
        return target.size()
    raise ValueError(f"unknown operation {op!r}")


class Stamper:
    """Global sequence stamps. ``next`` on ``itertools.count`` is atomic under the GIL."""

    def __init__(self):
        self._counter = itertools.count()
        self.events: list[Event] = []

    def call(self, thread: int, target, op: str, key):
        probe("invoke")
        self.events.append(Event(next(self._counter), thread, INVOKE, op, key))
        result = perform(target, op, key)
        self.events.append(Event(next(self._counter), thread, RESPOND, op, key, result))
        probe("respond")
        return result

    def history(self) -> History:
        return History(sorted(self.events, key=lambda e: e.seq))


def random_programs(config: HarnessConfig, rng: random.Random) -> list[list[tuple]]:
    programs = [[] for _ in range(config.threads)]
    for prog in programs:
        for _ in range(config.ops_per_thread):
            op = rng.choice(("INSERT", "DELETE", "CONTAINS", "SIZE"))
            prog.append((op, None if op == "SIZE" else rng.choice(config.keys)))
    slots = [(t, i) for t in range(config.threads) for i in range(config.ops_per_thread)]
    have = sum(op == "SIZE" for prog in programs for op, _ in prog)
    rng.shuffle(slots)
    for t, i in slots[:max(0, config.min_size_ops - have)]:
        while programs[t][i][0] == "SIZE":
            t, i = rng.choice(slots)
        programs[t][i] = ("SIZE", None)
    return programs


def record(config: HarnessConfig, programs: list[list[tuple]] | None = None) -> History:
    if (config.threads > MAX_THREADS or config.ops_per_thread > MAX_OPS_PER_THREAD
            or len(config.keys) > MAX_KEYS):
        warnings.warn(f"{config.threads} threads x {config.ops_per_thread} ops over "
                      f"{len(config.keys)} keys may exceed the checking budget", ConfigTooLarge)
    rng = random.Random(config.seed)
    if programs is None:
        programs = random_programs(config, rng)
    registry = ThreadRegistry(max(len(programs), 1))
    target = make_set(config.structure, config.method, registry, **config.set_options)
    stamper = Stamper()
    start = threading.Barrier(len(programs))
    errors: list[BaseException] = []
    yield_prob = config.yield_prob
    local_rng = threading.local()

    def hook(label, spinning):
        r = getattr(local_rng, "rng", None)
        if spinning or (r is not None and r.random() < yield_prob):
            time.sleep(0)

    def worker(index: int, prog, seed: int):
        local_rng.rng = random.Random(seed)
        try:
            with registry.registered():
                start.wait()
                for op, key in prog:
                    stamper.call(index, target, op, key)
        except BaseException as exc:  # surfaced to the caller below
            errors.append(exc)
            start.abort()

    threads = [threading.Thread(target=worker, args=(i, p, rng.getrandbits(64)), daemon=True)
               for i, p in enumerate(programs)]
    old_interval = sys.getswitchinterval()
    sys.setswitchinterval(1e-6)
    try:
        with hooked(hook):
            for t in threads:
                t.start()
            for t in threads:
                t.join()
    finally:
        sys.setswitchinterval(old_interval)
    if errors:
        raise errors[0]
    return stamper.history()
