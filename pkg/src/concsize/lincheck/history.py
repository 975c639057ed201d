"""Operation histories and their line-oriented text form.

One event per line, tab separated::

    seq  threadId  kind  op  key  result

``kind`` is ``INVOKE`` or ``RESPOND``; ``op`` is one of ``INSERT``,
``DELETE``, ``CONTAINS``, ``SIZE``. A missing key (size) or result (invoke
events) is written as ``-``. Boolean results are ``true``/``false``; size
results are integers. Lines starting with ``#`` and blank lines are skipped.
"""

from __future__ import annotations

from dataclasses import dataclass, field

INVOKE = "INVOKE"
RESPOND = "RESPOND"
OPS = ("INSERT", "DELETE", "CONTAINS", "SIZE")


class HistoryFormatError(ValueError):
    pass


@dataclass(frozen=True)
class Event:
    seq: int
    thread: int
    kind: str
    op: str
    key: int | None = None
    result: bool | int | None = None

    def to_line(self) -> str:
        key = "-" if self.key is None else str(self.key)
        if self.result is None:
            result = "-"
        elif isinstance(self.result, bool):
            result = "true" if self.result else "false"
        else:
            result = str(self.result)
        return f"{self.seq}\t{self.thread}\t{self.kind}\t{self.op}\t{key}\t{result}"

    @classmethod
    def from_line(cls, line: str) -> "Event":
        parts = line.rstrip("\n").split("\t")
        if len(parts) != 6:
            raise HistoryFormatError(f"expected 6 tab-separated fields, got {len(parts)}: {line!r}")
        seq, thread, kind, op, key, result = parts
        if kind not in (INVOKE, RESPOND):
            raise HistoryFormatError(f"bad event kind {kind!r}")
        if op not in OPS:
            raise HistoryFormatError(f"bad operation {op!r}")
        if result == "-":
            value = None
        elif result in ("true", "false"):
            value = result == "true"
        else:
            value = int(result)
        return cls(int(seq), int(thread), kind, op, None if key == "-" else int(key), value)


@dataclass(frozen=True)
class Operation:
    """An invoke/respond pair; ``respond`` is None while pending."""

    index: int
    thread: int
    op: str
    key: int | None
    result: bool | int | None
    invoke: int
    respond: int | None

    @property
    def pending(self) -> bool:
        return self.respond is None

    def describe(self) -> str:
        arg = "" if self.key is None else str(self.key)
        res = "?" if self.pending else str(self.result).lower()
        return f"T{self.thread}:{self.op.lower()}({arg})->{res}"


@dataclass
class History:
    events: list[Event] = field(default_factory=list)

    @property
    def complete(self) -> bool:
        return all(not o.pending for o in self.operations())

    def validate(self) -> None:
        last = None
        open_calls: dict[int, Event] = {}
        for e in self.events:
            if last is not None and e.seq <= last:
                raise HistoryFormatError(f"seq {e.seq} does not increase")
            last = e.seq
            if e.kind == INVOKE:
                if e.thread in open_calls:
                    raise HistoryFormatError(f"thread {e.thread} invokes twice without responding")
                open_calls[e.thread] = e
            else:
                inv = open_calls.pop(e.thread, None)
                if inv is None or inv.op != e.op or inv.key != e.key:
                    raise HistoryFormatError(f"response at seq {e.seq} matches no invoke")

    def operations(self) -> list[Operation]:
        self.validate()
        ops: list[Operation] = []
        open_calls: dict[int, Event] = {}
        done: dict[int, Event] = {}
        order: list[Event] = []
        for e in self.events:
            if e.kind == INVOKE:
                open_calls[e.thread] = e
                order.append(e)
            else:
                done[id(open_calls.pop(e.thread))] = e
        for i, inv in enumerate(order):
            resp = done.get(id(inv))
            ops.append(Operation(i, inv.thread, inv.op, inv.key,
                                 None if resp is None else resp.result,
                                 inv.seq, None if resp is None else resp.seq))
        return ops

    def to_text(self) -> str:
        return "".join(e.to_line() + "\n" for e in self.events)

    @classmethod
    def from_text(cls, text: str) -> "History":
        events = [Event.from_line(line) for line in text.splitlines()
                  if line.strip() and not line.startswith("#")]
        h = cls(events)
        h.validate()
        return h

    @classmethod
    def from_operations(cls, spans) -> "History":
        """Build from ``(thread, op, key, result, invoke_seq, respond_seq)`` tuples.

        A ``respond_seq`` of None leaves the call pending. Handy for
        hand-written test histories.
        """
        events = []
        for thread, op, key, result, inv, resp in spans:
            events.append(Event(inv, thread, INVOKE, op, key))
            if resp is not None:
                events.append(Event(resp, thread, RESPOND, op, key, result))
        events.sort(key=lambda e: e.seq)
        h = cls(events)
        h.validate()
        return h
