"""Linearizability checking against the sequential set specification.

The search extends a sequential order one operation at a time, only picking
operations that no unordered completed operation precedes in real time
(``a`` precedes ``b`` iff ``a`` responded before ``b`` was invoked). States
``(ordered set, contents)`` already known to be dead ends are not explored
again. Without size operations every key is an independent set, so each
key's sub-history is checked on its own.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .history import History, Operation

DEFAULT_BUDGET = 2_000_000


class SearchBudgetExceeded(RuntimeError):
    def __init__(self, states: int):
        super().__init__(f"linearizability search gave up after {states} states")
        self.states = states


@dataclass
class Verdict:
    linearizable: bool
    # For a violation: the longest legal prefix found and the operations left over.
    witness: list[Operation] = field(default_factory=list)
    remaining: list[Operation] = field(default_factory=list)
    states: int = 0

    @property
    def label(self) -> str:
        return "LINEARIZABLE" if self.linearizable else "VIOLATION"

    def __bool__(self) -> bool:
        return self.linearizable

    def explain(self) -> str:
        if self.linearizable:
            return "LINEARIZABLE"
        prefix = ", ".join(o.describe() for o in self.witness) or "(empty)"
        rest = ", ".join(o.describe() for o in self.remaining)
        return f"VIOLATION\n  longest legal prefix: {prefix}\n  cannot extend with any of: {rest}"


def apply(op: Operation, contents: frozenset):
    """Run ``op`` on the sequential set. Returns new contents, or None if its result is illegal."""
    kind, key = op.op, op.key
    if kind == "SIZE":
        if op.pending or op.result == len(contents):
            return contents
        return None
    present = key in contents
    if kind == "CONTAINS":
        expected = present
        after = contents
    elif kind == "INSERT":
        expected = not present
        after = contents | {key} if expected else contents
    elif kind == "DELETE":
        expected = present
        after = contents - {key} if expected else contents
    else:
        raise ValueError(f"unknown operation {kind!r}")
    if not op.pending and op.result != expected:
        return None
    return after


def _search(ops: list[Operation], initial: frozenset, budget: int) -> Verdict:
    n = len(ops)
    required = 0
    for i, o in enumerate(ops):
        if not o.pending:
            required |= 1 << i
    inf = float("inf")
    dead: set = set()
    best: list[int] = []
    path: list[int] = []
    states = 0

    def dfs(done: int, contents: frozenset) -> bool:
        nonlocal states, best
        if done & required == required:
            return True
        state = (done, contents)
        if state in dead:
            return False
        states += 1
        if states > budget:
            raise SearchBudgetExceeded(states)
        if len(path) > len(best):
            best = list(path)
        horizon = inf
        for i in range(n):
            if not done >> i & 1 and ops[i].respond is not None and ops[i].respond < horizon:
                horizon = ops[i].respond
        for i in range(n):
            if done >> i & 1:
                continue
            o = ops[i]
            if o.invoke > horizon:
                continue
            after = apply(o, contents)
            if after is None:
                continue
            path.append(i)
            if dfs(done | 1 << i, after):
                return True
            path.pop()
        dead.add(state)
        return False

    if dfs(0, initial):
        return Verdict(True, states=states)
    used = set(best)
    return Verdict(False, [ops[i] for i in best],
                   [o for i, o in enumerate(ops) if i not in used and not o.pending], states)


def check_linearizable(history: History | list[Operation], initial=(),
                       budget: int = DEFAULT_BUDGET) -> Verdict:
    ops = history.operations() if isinstance(history, History) else list(history)
    initial = frozenset(initial)
    if any(o.op == "SIZE" for o in ops):
        return _search(ops, initial, budget)
    by_key: dict = {}
    for o in ops:
        by_key.setdefault(o.key, []).append(o)
    total = 0
    for key in sorted(by_key):
        part = by_key[key]
        verdict = _search(part, initial & {key}, budget)
        total += verdict.states
        if not verdict:
            verdict.states = total
            return verdict
    return Verdict(True, states=total)


def naive_check(history: History | list[Operation], initial=()) -> bool:
    """Brute force over every order of every admissible subset. Small inputs only."""
    ops = history.operations() if isinstance(history, History) else list(history)
    initial = frozenset(initial)
    done = [o for o in ops if not o.pending]
    pending = [o for o in ops if o.pending]
    for r in range(len(pending) + 1):
        for chosen in itertools.combinations(pending, r):
            for order in itertools.permutations(done + list(chosen)):
                if _respects_real_time(order) and _legal(order, initial):
                    return True
    return False


def _respects_real_time(order) -> bool:
    for i, a in enumerate(order):
        for b in order[i + 1:]:
            if b.respond is not None and b.respond < a.invoke:
                return False
    return True


def _legal(order, contents: frozenset) -> bool:
    for o in order:
        contents = apply(o, contents)
        if contents is None:
            return False
    return True
