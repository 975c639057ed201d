"""Acceptance criteria, one test each. Tolerances are fixed here, not tuned.

Each test records a PASS/FAIL line that the terminal summary prints.
"""

import random
import threading
import time
from pathlib import Path

import pytest


from concsize.bench import attach_overheads, emit_csv, run_experiment, sweep_max_tries
from concsize.lincheck import (HarnessConfig, History, check_linearizable, naive_check, record,
                               scripted_schedule)
from concsize.registry import ThreadRegistry
from concsize.sets import make_set
from concsize.stress import conservation_stress, phase_stress
from concsize.workload import WorkloadSpec
from conftest import ACCEPTANCE_LINES
from histgen import random_history

METHODS = ("sp", "handshake", "optimistic", "lock")
STRUCTURES = ("list", "hash")
GOLDEN = Path(__file__).parent / "data" / "golden"
RESULTS = Path(__file__).resolve().parent.parent / "acceptance_results"

# Pinned parameters.
SWEEP_RUNS = 1000
SWEEP_BUDGET_S = 600
SCRIPT_BUDGET_S = 1.0
PHASE_STRESS_S = 60.0
EXACTNESS_RUNS = 100
CONSERVATION_REPS = 10
CONSERVATION_KEYS = 10_000
CONSERVATION_PREFILL = 1000
NAIVE_HISTORIES = 5000

pytestmark = pytest.mark.slow


def report(n: int, ok: bool, detail: str) -> None:
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def test_1_linearizability_sweep():
    start = time.monotonic()
    failures = []
    for structure in STRUCTURES:
        for method in METHODS:
            for seed in range(SWEEP_RUNS):
                h = record(HarnessConfig(structure=structure, method=method, threads=3,
                                         ops_per_thread=6, keys=(1, 2, 3), min_size_ops=1,
                                         seed=seed))
                assert any(o.op == "SIZE" for o in h.operations())
                if not check_linearizable(h):
                    failures.append((structure, method, seed, h.to_text()))
    elapsed = time.monotonic() - start
    ok = not failures and elapsed < SWEEP_BUDGET_S
    report(1, ok, f"{len(STRUCTURES) * len(METHODS) * SWEEP_RUNS} histories, "
                  f"{len(failures)} violations, {elapsed:.1f}s")
    assert not failures, failures[0]
    assert elapsed < SWEEP_BUDGET_S


FIG3_PROGRAMS = [[("SIZE", None)], [("DELETE", 1)], [("INSERT", 1)]]
FIG3_STEPS = [(1, "hs.read_phase"), (0, "size.phase1"), (2, "slow.modified"),
              (1, "respond"), (0, "respond"), (2, "respond")]


def test_2_single_handshake_counterexample():
    start = time.monotonic()
    verdicts = {}
    for handshakes in (1, 2):
        reg = ThreadRegistry(8)
        s = make_set("list", "handshake", reg, handshakes=handshakes)
        h = scripted_schedule(s, FIG3_PROGRAMS, FIG3_STEPS, reg)
        verdicts[handshakes] = check_linearizable(h).label
    elapsed = time.monotonic() - start
    ok = (verdicts == {1: "VIOLATION", 2: "LINEARIZABLE"}) and elapsed < SCRIPT_BUDGET_S
    report(2, ok, f"one handshake: {verdicts[1]}, two handshakes: {verdicts[2]}, {elapsed:.3f}s")
    assert verdicts == {1: "VIOLATION", 2: "LINEARIZABLE"}
    assert elapsed < SCRIPT_BUDGET_S


def test_3_phase_protocol_invariants():
    rep = phase_stress(PHASE_STRESS_S, structure="hash", threads=8, size_threads=2)
    ok = rep.ok and rep.transitions > 0
    report(3, ok, f"{rep.transitions} phase transitions, {rep.sizes} sizes, {rep.updates} updates, "
                  f"{len(rep.bad_transitions)} bad transitions, "
                  f"{rep.frozen_violations} frozen-window writes")
    assert rep.transitions > 0
    assert rep.bad_transitions == []
    assert rep.frozen_violations == 0


def _exactness_run(method: str, structure: str, rng: random.Random) -> tuple[int, int, int | None]:
    reg = ThreadRegistry(8)
    s = make_set(structure, method, reg)
    keys = range(1, 41)
    if rng.random() < 0.5:
        model = set()
        with reg.registered():
            for _ in range(rng.randint(0, 200)):
                k = rng.choice(keys)
                op = rng.choice(("insert", "delete", "contains"))
                getattr(s, op)(k)
                if op == "insert":
                    model.add(k)
                elif op == "delete":
                    model.discard(k)
            size = s.size()
        return size, s.structure.count(), len(model)

    seeds = [rng.getrandbits(32) for _ in range(4)]

    def worker(seed):
        r = random.Random(seed)
        with reg.registered():
            for _ in range(100):
                op = r.choice(("insert", "delete", "contains", "size"))
                if op == "size":
                    s.size()
                else:
                    getattr(s, op)(r.choice(keys))

    ts = [threading.Thread(target=worker, args=(sd,)) for sd in seeds]
    for t in ts:
        t.start()
    for t in ts:
        t.join()
    with reg.registered():
        size = s.size()
    return size, s.structure.count(), None


def test_4_quiescent_exactness():
    rng = random.Random(2024)
    mismatches = []
    for method in METHODS:
        for i in range(EXACTNESS_RUNS):
            structure = STRUCTURES[i % 2]
            size, oracle, model = _exactness_run(method, structure, rng)
            if size != oracle or (model is not None and model != oracle):
                mismatches.append((method, structure, i, size, oracle, model))
    report(4, not mismatches, f"{len(METHODS) * EXACTNESS_RUNS} runs, {len(mismatches)} mismatches")
    assert not mismatches


def test_5_stress_conservation():
    bad = []
    calls = 0
    for method in METHODS:
        for rep in range(CONSERVATION_REPS):
            r = conservation_stress("hash", method, threads=8, keys_per_thread=CONSERVATION_KEYS,
                                    size_threads=2, prefill=CONSERVATION_PREFILL)
            calls += r.size_calls
            if not r.ok:
                bad.append((method, rep, r.final_size, r.size_min, r.size_max, r.out_of_range[:5]))
    report(5, not bad, f"{len(METHODS)} methods x {CONSERVATION_REPS} reps, {calls} sizes checked, "
                       f"{len(bad)} failing runs")
    assert not bad


def test_6_optimistic_accounting():
    spec = WorkloadSpec.from_mix("update", prefill=10_000, threads=8, size_threads=1,
                                 duration_s=1.0, seed=6)
    rows = sweep_max_tries(spec, "hash", [2, 16], reps=10, warmup=2)
    low, high = rows
    balanced = all(r.awaiting_sizes_after == 0 for r in rows)
    ok = balanced and low.escalations_per_size_op > high.escalations_per_size_op
    report(6, ok, f"awaitingSizes after runs {[r.awaiting_sizes_after for r in rows]}, "
                  f"escalations/size MAX_TRIES=2: {low.escalations_per_size_op:.5f}, "
                  f"MAX_TRIES=16: {high.escalations_per_size_op:.5f}")
    assert balanced
    assert low.escalations_per_size_op > high.escalations_per_size_op


def test_7_checker_validation():
    files = sorted(GOLDEN.glob("*.txt"))
    wrong = []
    for f in files:
        expected = f.name.startswith("legal_")
        if bool(check_linearizable(History.from_text(f.read_text()))) != expected:
            wrong.append(f.name)
    rng = random.Random(7)
    disagree = 0
    for _ in range(NAIVE_HISTORIES):
        h = random_history(rng, max_ops=6)
        if bool(check_linearizable(h)) != naive_check(h):
            disagree += 1
    legal = sum(f.name.startswith("legal_") for f in files)
    ok = len(files) >= 20 and not wrong and disagree == 0
    report(7, ok, f"golden corpus {len(files)} ({legal} legal), {len(wrong)} misclassified; "
                  f"{NAIVE_HISTORIES} random histories of <=6 ops, {disagree} disagreements")
    assert len(files) >= 20
    assert not wrong, wrong
    assert disagree == 0


def test_7_golden_corpus_is_balanced():
    names = [f.name for f in GOLDEN.glob("*.txt")]
    legal = sum(n.startswith("legal_") for n in names)
    assert legal >= 10 and len(names) - legal >= 10


def test_8_lock_vs_sp_throughput_on_hash():
    rows = []
    for method in ("none", "sp", "lock"):
        spec = WorkloadSpec.from_mix("update", threads=9 if method == "none" else 8,
                                     size_threads=0 if method == "none" else 1,
                                     size_delay_us=0.0, seed=8)
        rows.append(run_experiment(spec, "hash", method, reps=10, warmup=5))
    attach_overheads(rows)
    RESULTS.mkdir(exist_ok=True)
    out = RESULTS / "criterion8_lock_vs_sp.csv"
    emit_csv(rows, out)
    _, sp, lock = rows
    ok = lock.ops_per_second < sp.ops_per_second
    report(8, ok, f"hash, update-heavy, w=8, one zero-delay size thread: "
                  f"LOCK {lock.ops_per_second:.0f} ops/s vs SP {sp.ops_per_second:.0f} ops/s "
                  f"(ratio {lock.ops_per_second / sp.ops_per_second:.3f}); CSV at {out}")
    print(out.read_text())
    assert lock.ops_per_second < sp.ops_per_second
