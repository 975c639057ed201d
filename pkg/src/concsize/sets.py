"""Factory for a base structure wrapped with one of the size methods."""

from __future__ import annotations

from .core import HashTable, LockFreeList
from .handshake import HandshakeSet, HandshakeSizeCalculator
from .locks import LockedSet, LocksSizeCalculator
from .optimistic import MAX_TRIES, OptimisticSet, OptimisticSizeCalculator
from .registry import ThreadRegistry, default_registry
from .sp import SPSizeCalculator

STRUCTURES = ("list", "hash")
METHODS = ("none", "sp", "handshake", "optimistic", "lock")


class SizeNotSupported(RuntimeError):
    pass


class PlainSet:
    """The base structure with no size support (the benchmark baseline)."""

    def __init__(self, structure):
        self.structure = structure
        self.calc = None

    def insert(self, key) -> bool:
        return self.structure.insert(key)

    def delete(self, key) -> bool:
        return self.structure.delete(key)

    def contains(self, key) -> bool:
        return self.structure.contains(key)

    def size(self) -> int:
        raise SizeNotSupported("method 'none' has no size operation")


class SPSet:
    """Every update runs the helping path and feeds the per-thread counters."""

    def __init__(self, structure, calc: SPSizeCalculator):
        self.structure = structure
        self.calc = calc

    def insert(self, key) -> bool:
        return self.structure.slow_insert(key, self.calc)

    def delete(self, key) -> bool:
        return self.structure.slow_delete(key, self.calc)

    def contains(self, key) -> bool:
        return self.structure.slow_contains(key, self.calc)

    def size(self) -> int:
        return self.calc.compute()


def make_base(structure: str, bucket_count: int = 1024):
    if structure == "list":
        return LockFreeList()
    if structure == "hash":
        return HashTable(bucket_count)
    raise ValueError(f"unknown structure {structure!r}")


def make_set(structure: str = "list", method: str = "sp", registry: ThreadRegistry | None = None,
             *, bucket_count: int = 1024, max_tries: int = MAX_TRIES, handshakes: int = 2,
             join_previous: bool = True, debug: bool = False):
    """Build a set; ``keys()``/``count()`` on ``.structure`` give the traversal oracle."""
    registry = registry or default_registry
    base = make_base(structure, bucket_count)
    if method == "none":
        return PlainSet(base)
    if method == "sp":
        return SPSet(base, SPSizeCalculator(registry))
    if method == "handshake":
        calc = HandshakeSizeCalculator(registry, handshakes=handshakes,
                                       join_previous=join_previous, debug=debug)
        return HandshakeSet(base, calc)
    if method == "optimistic":
        return OptimisticSet(base, OptimisticSizeCalculator(registry, max_tries))
    if method == "lock":
        return LockedSet(base, LocksSizeCalculator(registry, debug=debug))
    raise ValueError(f"unknown method {method!r}")
