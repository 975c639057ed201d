"""Benchmark workloads: operation mixes, key draws and prefill."""

from __future__ import annotations

import bisect
import itertools
import math
from dataclasses import dataclass

INSERT = "INSERT"
DELETE = "DELETE"
CONTAINS = "CONTAINS"

_MASK = (1 << 64) - 1

# (insert, delete, contains) percentages.
MIXES = {
    "update": (30, 20, 50),
    "read": (3, 2, 95),
}

DEFAULT_PREFILL = 100_000


class SplitMix64:
    """Steele, Lea and Flood's SplitMix64; same stream in any language."""

    __slots__ = ("state",)

    def __init__(self, seed: int = 0):
        self.state = seed & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def next_float(self) -> float:
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def next_below(self, n: int) -> int:
        """Uniform in ``[0, n)`` by rejection, so no modulo bias."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (1 << 64) - (1 << 64) % n
        while True:
            x = self.next_u64()
            if x < limit:
                return x % n


class ZipfianGenerator:
    """Zipf(theta) ranks in ``[0, n)``, rank 0 hottest, by inverse CDF.

    The cumulative table costs O(n) memory once; each draw is one uniform
    and a binary search.
    """

    def __init__(self, n: int, theta: float):
        if n < 1:
            raise ValueError("n must be at least 1")
        if not 0 < theta < 1:
            raise ValueError("theta must lie in (0, 1)")
        self.n = n
        self.theta = theta
        weights = (i ** -theta for i in range(1, n + 1))
        self._cdf = list(itertools.accumulate(weights))
        self.zetan = self._cdf[-1]

    def pmf(self, rank: int) -> float:
        return (rank + 1) ** -self.theta / self.zetan

    def rank(self, rng: SplitMix64) -> int:
        u = rng.next_float() * self.zetan
        return min(bisect.bisect_right(self._cdf, u), self.n - 1)


class ScrambledZipfian:
    """Zipfian ranks spread over keys ``[1, n]`` by a fixed affine permutation."""

    def __init__(self, n: int, theta: float):
        self.zipf = ZipfianGenerator(n, theta)
        self.n = n
        a = 0x9E3779B97F4A7C15 % n or 1
        while math.gcd(a, n) != 1:
            a += 1
        self._a = a
        self._b = 0xD1B54A32D192ED03 % n

    def key_for_rank(self, rank: int) -> int:
        return (self._a * rank + self._b) % self.n + 1

    def next_key(self, rng: SplitMix64) -> int:
        return self.key_for_rank(self.zipf.rank(rng))


def scrambled_zipfian(n: int, theta: float, rng: SplitMix64) -> int:
    """One-off draw; build a :class:`ScrambledZipfian` to draw repeatedly."""
    return ScrambledZipfian(n, theta).next_key(rng)


def balance_key_range(prefill: int, insert_pct: float, delete_pct: float) -> int:
    """Key range whose steady-state expected size is ``prefill``.

    A size-s set over r keys grows by ``insert_pct * (1 - s/r)`` and shrinks
    by ``delete_pct * s/r`` per op; these balance at
    ``r = s * (insert_pct + delete_pct) / insert_pct``.
    """
    if prefill <= 0:
        return 1
    if insert_pct <= 0:
        return prefill
    return max(prefill, round(prefill * (insert_pct + delete_pct) / insert_pct))


@dataclass
class WorkloadSpec:
    insert_pct: int = 30
    delete_pct: int = 20
    contains_pct: int = 50
    key_range: int | None = None
    prefill: int = DEFAULT_PREFILL
    duration_s: float = 1.0
    threads: int = 1
    size_threads: int = 0
    size_delay_us: float = 0.0
    zipf_theta: float | None = None
    seed: int = 0
    label: str = "update"

    def __post_init__(self):
        if self.insert_pct + self.delete_pct + self.contains_pct != 100:
            raise ValueError("operation percentages must sum to 100")
        if min(self.insert_pct, self.delete_pct, self.contains_pct) < 0:
            raise ValueError("operation percentages must be non-negative")
        if self.key_range is None:
            self.key_range = balance_key_range(self.prefill, self.insert_pct, self.delete_pct)
        if self.key_range < 1:
            raise ValueError("key range must be positive")
        if self.prefill > self.key_range:
            raise ValueError("prefill exceeds the key range")

    @classmethod
    def from_mix(cls, name: str, **kwargs) -> "WorkloadSpec":
        try:
            ins, dele, con = MIXES[name]
        except KeyError:
            raise ValueError(f"unknown workload {name!r}; expected one of {sorted(MIXES)}") from None
        return cls(ins, dele, con, label=name, **kwargs)


class OpStream:
    """One thread's operation stream. Keys are uniform, or Zipfian for contains."""

    def __init__(self, spec: WorkloadSpec, seed: int, zipf: ScrambledZipfian | None = None):
        self.spec = spec
        self.rng = SplitMix64(seed)
        if zipf is None and spec.zipf_theta is not None:
            zipf = ScrambledZipfian(spec.key_range, spec.zipf_theta)
        self.zipf = zipf

    def next_op(self) -> tuple[str, int]:
        return next_op(self.spec, self.rng, self.zipf)

    def __iter__(self):
        while True:
            yield self.next_op()


def next_op(spec: WorkloadSpec, rng: SplitMix64, zipf: ScrambledZipfian | None = None) -> tuple[str, int]:
    d = rng.next_below(100)
    if d < spec.insert_pct:
        kind = INSERT
    elif d < spec.insert_pct + spec.delete_pct:
        kind = DELETE
    else:
        kind = CONTAINS
        if zipf is not None:
            return kind, zipf.next_key(rng)
    return kind, rng.next_below(spec.key_range) + 1


def prefill_keys(spec: WorkloadSpec, seed: int | None = None) -> list[int]:
    """``spec.prefill`` distinct uniform keys, largest first.

    Descending order makes every insert into a sorted list land at the head.
    """
    rng = SplitMix64(spec.seed if seed is None else seed)
    chosen: set[int] = set()
    while len(chosen) < spec.prefill:
        chosen.add(rng.next_below(spec.key_range) + 1)
    return sorted(chosen, reverse=True)


def prefill(target, spec: WorkloadSpec, seed: int | None = None) -> int:
    """Insert the prefill keys into ``target`` (calling thread must be registered)."""
    keys = prefill_keys(spec, seed)
    for k in keys:
        target.insert(k)
    return len(keys)
