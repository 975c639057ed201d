"""Lock-free sorted linked-list set and a fixed-bucket hash table built on it.

Deletion is two-step: a marking step (the linearization point of a
successful delete) followed by physical unlinking that any traversing
thread may perform. A node counts as deleted when its ``next`` link carries
the mark bit *or* its ``delete_info`` holds an :class:`UpdateInfo`. The
first is the original marking scheme used by plain and fast operations; the
second is how the helping (slow) path marks nodes so that other threads can
finish its metadata update.

Every operation comes in two flavours:

* ``insert`` / ``delete`` / ``contains``: the original algorithm. Never
  touches size metadata and never helps.
* ``slow_insert`` / ``slow_delete`` / ``slow_contains``: the helping variant.
  Successful updates publish an ``UpdateInfo`` in the node and call
  ``calc.update_metadata`` before returning; any operation that relies on a
  node with a pending ``UpdateInfo`` completes that update first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .atomics import stripe_for
from .instrument import probe

INSERT = 0
DELETE = 1

_NEG_INF = -math.inf
_POS_INF = math.inf


@dataclass(frozen=True, eq=False)
class UpdateInfo:
    op_kind: int
    tid: int
    counter_before: int

    @property
    def target(self) -> int:
        return self.counter_before + 1


class Node:
    __slots__ = ("key", "next", "insert_info", "delete_info")

    def __init__(self, key, succ=None, insert_info=None):
        self.key = key
        # (successor, marked) pair, replaced wholesale so reads are atomic.
        self.next = (succ, False)
        self.insert_info = insert_info
        self.delete_info = None

    def is_deleted(self) -> bool:
        return self.next[1] or self.delete_info is not None

    def cas_next(self, exp_succ, new_succ) -> bool:
        """Swing an unmarked link from ``exp_succ`` to ``new_succ``."""
        with stripe_for(self):
            succ, marked = self.next
            if succ is exp_succ and not marked:
                self.next = (new_succ, False)
                return True
            return False

    def mark_fast(self, exp_succ) -> bool:
        """Original marking step. Fails if the node is already deleted either way."""
        with stripe_for(self):
            succ, marked = self.next
            if succ is exp_succ and not marked and self.delete_info is None:
                self.next = (succ, True)
                return True
            return False

    def install_delete_info(self, info: UpdateInfo) -> bool:
        """Helping-path marking step. Mutually exclusive with :meth:`mark_fast`."""
        with stripe_for(self):
            if self.delete_info is None and not self.next[1]:
                self.delete_info = info
                return True
            return False

    def set_mark(self) -> None:
        """Freeze the link of a node already deleted by ``delete_info``."""
        with stripe_for(self):
            succ, marked = self.next
            if not marked:
                self.next = (succ, True)

    def __repr__(self) -> str:
        return f"Node({self.key!r}, deleted={self.is_deleted()})"


class LockFreeList:
    """Harris-Michael style sorted set with head/tail sentinels."""

    def __init__(self):
        self.tail = Node(_POS_INF)
        self.head = Node(_NEG_INF, self.tail)

    def _find(self, key, calc=None):
        """Return ``(pred, curr)`` with ``curr`` the first live node with key >= ``key``.

        Deleted nodes met on the way are unlinked. With ``calc`` given, the
        metadata update of a ``delete_info``-marked node is completed before
        unlinking it; nodes marked only by the mark bit are unlinked without
        helping.
        """
        head = self.head
        while True:
            pred = head
            curr = pred.next[0]
            restart = False
            while True:
                succ, marked = curr.next
                info = curr.delete_info
                while marked or info is not None:
                    if info is not None:
                        if calc is not None:
                            calc.update_metadata(info)
                        if not marked:
                            curr.set_mark()
                            succ = curr.next[0]
                    if not pred.cas_next(curr, succ):
                        restart = True
                        break
                    curr = succ
                    succ, marked = curr.next
                    info = curr.delete_info
                if restart:
                    break
                if curr.key >= key:
                    return pred, curr
                pred = curr
                curr = succ

    def _locate(self, key):
        """Wait-free traversal with no unlinking: first node with key >= ``key``."""
        curr = self.head.next[0]
        while curr.key < key:
            curr = curr.next[0]
        return curr

    # -- original operations -------------------------------------------------

    def insert(self, key) -> bool:
        while True:
            pred, curr = self._find(key)
            if curr.key == key:
                return False
            node = Node(key, curr)
            if pred.cas_next(curr, node):
                probe("list.linked")
                return True

    def delete(self, key) -> bool:
        while True:
            pred, curr = self._find(key)
            if curr.key != key:
                return False
            succ = curr.next[0]
            if curr.mark_fast(succ):
                probe("list.marked")
                pred.cas_next(curr, succ)
                return True

    def contains(self, key) -> bool:
        curr = self._locate(key)
        return curr.key == key and not curr.is_deleted()

    # -- helping operations --------------------------------------------------

    def slow_insert(self, key, calc) -> bool:
        while True:
            pred, curr = self._find(key, calc)
            if curr.key == key:
                info = curr.insert_info
                if info is not None:
                    calc.update_metadata(info)
                return False
            info = calc.create_update_info(INSERT)
            node = Node(key, curr, info)
            if pred.cas_next(curr, node):
                probe("slow.modified")
                calc.update_metadata(info)
                node.insert_info = None
                probe("slow.metadata")
                return True

    def slow_delete(self, key, calc) -> bool:
        while True:
            pred, curr = self._find(key, calc)
            if curr.key != key:
                return False
            ins = curr.insert_info
            if ins is not None:
                calc.update_metadata(ins)
            info = calc.create_update_info(DELETE)
            if curr.install_delete_info(info):
                probe("slow.modified")
                calc.update_metadata(info)
                probe("slow.metadata")
                curr.set_mark()
                pred.cas_next(curr, curr.next[0])
                return True
            # Lost the marking race; _find helps and unlinks on retry.

    def slow_contains(self, key, calc) -> bool:
        curr = self._locate(key)
        if curr.key != key:
            return False
        info = curr.delete_info
        if info is not None:
            calc.update_metadata(info)
            return False
        if curr.next[1]:
            return False
        info = curr.insert_info
        if info is not None:
            calc.update_metadata(info)
        return True

    # -- quiescent inspection ------------------------------------------------

    def keys(self) -> list:
        out = []
        curr = self.head.next[0]
        while curr is not self.tail:
            if not curr.is_deleted():
                out.append(curr.key)
            curr = curr.next[0]
        return out

    def count(self) -> int:
        return len(self.keys())


def hash_bucket(key: int, bucket_count: int) -> int:
    """Fibonacci-style multiplicative hash of a 64-bit key into ``[0, bucket_count)``."""
    if bucket_count == 1:
        return 0
    h = (key * 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF
    h ^= h >> 29
    h = (h * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
    h ^= h >> 32
    return h % bucket_count


class HashTable:
    """Fixed array of :class:`LockFreeList` buckets. No resizing."""

    def __init__(self, bucket_count: int = 1024):
        if bucket_count < 1:
            raise ValueError("bucket_count must be >= 1")
        self.bucket_count = bucket_count
        self.buckets = [LockFreeList() for _ in range(bucket_count)]

    def _bucket(self, key) -> LockFreeList:
        return self.buckets[hash_bucket(key, self.bucket_count)]

    def insert(self, key) -> bool:
        return self._bucket(key).insert(key)

    def delete(self, key) -> bool:
        return self._bucket(key).delete(key)

    def contains(self, key) -> bool:
        return self._bucket(key).contains(key)

    def slow_insert(self, key, calc) -> bool:
        return self._bucket(key).slow_insert(key, calc)

    def slow_delete(self, key, calc) -> bool:
        return self._bucket(key).slow_delete(key, calc)

    def slow_contains(self, key, calc) -> bool:
        return self._bucket(key).slow_contains(key, calc)

    def keys(self) -> list:
        out = []
        for b in self.buckets:
            out.extend(b.keys())
        return sorted(out)

    def count(self) -> int:
        return sum(b.count() for b in self.buckets)
