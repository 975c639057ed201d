from collections import Counter

import pytest

from concsize.registry import ThreadRegistry
from concsize.sets import make_set
from concsize.workload import (CONTAINS, DELETE, INSERT, OpStream, ScrambledZipfian, SplitMix64,
                               WorkloadSpec, ZipfianGenerator, balance_key_range, next_op, prefill,
                               prefill_keys, scrambled_zipfian)


def test_splitmix_reference_vector():
    rng = SplitMix64(0)
    assert [rng.next_u64() for _ in range(3)] == [
        0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F]


def test_next_below_range():
    rng = SplitMix64(5)
    draws = [rng.next_below(7) for _ in range(2000)]
    assert set(draws) == set(range(7))


def test_insert_only_mix():
    spec = WorkloadSpec(100, 0, 0, prefill=0, key_range=10)
    rng = SplitMix64(1)
    assert all(next_op(spec, rng)[0] == INSERT for _ in range(1000))


def test_update_heavy_mix_frequencies():
    spec = WorkloadSpec.from_mix("update", prefill=1000)
    rng = SplitMix64(42)
    n = 1_000_000
    counts = Counter(next_op(spec, rng)[0] for _ in range(n))
    for kind, pct in ((INSERT, 30), (DELETE, 20), (CONTAINS, 50)):
        assert abs(counts[kind] / n * 100 - pct) < 0.5


def test_same_seed_same_stream():
    spec = WorkloadSpec.from_mix("read", prefill=100, zipf_theta=0.99)
    a, b = OpStream(spec, 9), OpStream(spec, 9)
    assert [a.next_op() for _ in range(500)] == [b.next_op() for _ in range(500)]


def test_zipf_top_ranks_match_pmf():
    n, draws = 10_000, 1_000_000
    z = ZipfianGenerator(n, 0.99)
    rng = SplitMix64(7)
    counts = Counter(z.rank(rng) for _ in range(draws))
    zetan = sum(i ** -0.99 for i in range(1, n + 1))
    for rank in range(10):
        expected = (rank + 1) ** -0.99 / zetan
        assert z.pmf(rank) == pytest.approx(expected)
        assert abs(counts[rank] / draws - expected) / expected < 0.02


def test_zipf_contains_hot_key():
    r = 10_000
    spec = WorkloadSpec.from_mix("read", prefill=5000, key_range=r, zipf_theta=0.99)
    stream = OpStream(spec, 3)
    keys = Counter()
    while sum(keys.values()) < 200_000:
        kind, key = stream.next_op()
        if kind == CONTAINS:
            keys[key] += 1
    top = keys.most_common(1)[0][1] / sum(keys.values())
    assert top >= 10 / r
    # Analytic mass of rank 0, the hottest key.
    assert top == pytest.approx(1 / sum(i ** -0.99 for i in range(1, r + 1)), rel=0.05)


def test_updates_stay_uniform_under_zipf():
    spec = WorkloadSpec(50, 50, 0, prefill=0, key_range=100, zipf_theta=0.99)
    stream = OpStream(spec, 4)
    counts = Counter(stream.next_op()[1] for _ in range(100_000))
    assert max(counts.values()) / 100_000 < 0.02


def test_scrambled_zipfian_n1():
    rng = SplitMix64(0)
    assert {scrambled_zipfian(1, 0.5, rng) for _ in range(20)} == {1}


def test_scramble_is_a_permutation():
    z = ScrambledZipfian(1000, 0.99)
    assert sorted(z.key_for_rank(r) for r in range(1000)) == list(range(1, 1001))
    assert z.key_for_rank(0) != 1


def test_low_theta_nearly_uniform():
    n = 20
    z = ScrambledZipfian(n, 0.01)
    rng = SplitMix64(11)
    draws = 200_000
    counts = Counter(z.next_key(rng) for _ in range(draws))
    assert set(counts) == set(range(1, n + 1))
    assert max(abs(c / draws - 1 / n) for c in counts.values()) < 0.01


def test_balance_key_range():
    assert balance_key_range(1000, 30, 20) == 1667
    assert balance_key_range(1000, 3, 2) == 1667
    assert balance_key_range(0, 30, 20) == 1


def test_balanced_range_holds_size_steady():
    spec = WorkloadSpec.from_mix("update", prefill=1000)
    contents = set(prefill_keys(spec))
    rng = SplitMix64(99)
    sizes = []
    for i in range(200_000):
        kind, key = next_op(spec, rng)
        if kind == INSERT:
            contents.add(key)
        elif kind == DELETE:
            contents.discard(key)
        if i % 100 == 0:
            sizes.append(len(contents))
    late = sizes[len(sizes) // 2:]
    assert abs(sum(late) / len(late) - 1000) / 1000 < 0.05


def test_prefill_zero_is_noop():
    reg = ThreadRegistry(2)
    s = make_set("list", "sp", reg)
    spec = WorkloadSpec.from_mix("update", prefill=0)
    with reg.registered():
        assert prefill(s, spec) == 0
    assert s.structure.count() == 0


@pytest.mark.parametrize("structure", ["list", "hash"])
def test_prefill_exact_count(structure):
    reg = ThreadRegistry(2)
    s = make_set(structure, "sp", reg)
    spec = WorkloadSpec.from_mix("update", prefill=1000)
    with reg.registered():
        prefill(s, spec)
        assert s.size() == 1000
    assert s.structure.count() == 1000
    keys = prefill_keys(spec)
    assert keys == sorted(keys, reverse=True)
    assert all(1 <= k <= spec.key_range for k in keys)


def test_spec_validation():
    with pytest.raises(ValueError):
        WorkloadSpec(50, 50, 50)
    with pytest.raises(ValueError):
        WorkloadSpec(30, 20, 50, prefill=10, key_range=5)
    with pytest.raises(ValueError):
        WorkloadSpec.from_mix("write")
    with pytest.raises(ValueError):
        ZipfianGenerator(10, 1.0)
