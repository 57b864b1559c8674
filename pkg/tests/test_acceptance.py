"""Acceptance checks, one test per criterion.

Each test prints a single ``[PASS]`` / ``[FAIL]`` line; the lines are
repeated in the pytest terminal summary under "acceptance criteria".
Run alone with ``python3 tests/test_acceptance.py``.
"""

import random
import time
import timeit
from fractions import Fraction as F
from pathlib import Path

import numpy as np
import pytest

from oracles import dyadic_feasible, grid_marginals, library_flags
from simpson_reversal import (
    CellCounts,
    MixtureSpec,
    Reversal,
    StratifiedTable,
    SynthesisSpec,
    build_figure,
    cond_prob,
    detect_reversal,
    mixture_predict,
    pool,
    render_svg,
    synthesize_reverser,
    verify,
)
from simpson_reversal import _kernels as K
from simpson_reversal import sweep as S
from simpson_reversal.errors import InfeasibleAtResolution
from simpson_reversal.ingest import ColumnMapping, aggregate, disaggregate

GOLDEN = Path(__file__).parent / "golden" / "recovery.svg"
RECOVERY = StratifiedTable(
    (("male", CellCounts(7, 3, 18, 12)), ("female", CellCounts(9, 21, 2, 8)))
)


RESULTS = []  # read by the terminal-summary hook in conftest.py


def report(number, title, ok, detail=""):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}"
    if detail:
        line += f" ({detail})"
    print(line)
    RESULTS.append(line)
    return ok


@pytest.fixture(scope="module")
def swept():
    """Exhaustive sweep (per-stratum totals <= 12) plus 10,000 random larger tables."""
    start = time.perf_counter()
    exhaustive = S.sweep(S.iter_exhaustive(12))
    rng = np.random.default_rng(20240611)
    rows = S.random_tables(10_000, rng, max_cell=200)
    randomized = S.sweep(rows)
    elapsed = time.perf_counter() - start
    # the integer kernel against the Fraction library path on a sample
    pick = np.concatenate(list(S.iter_exhaustive(12, block=512)))[:: 997]
    sample = np.concatenate([pick, rows[:1000]])
    mismatches = sum(
        not np.array_equal(f, library_flags(r)) for r, f in zip(sample, K.sweep_flags(sample))
    )
    return exhaustive, randomized, elapsed, len(sample), mismatches


def violations(swept, name):
    exhaustive, randomized = swept[:2]
    return exhaustive.violations[name] + randomized.violations[name]


def test_criterion_1_recovery_exact():
    r = detect_reversal(RECOVERY)
    p = pool(RECOVERY)
    ok = (
        [cond_prob(RECOVERY["male"]), cond_prob(RECOVERY["male"], exposed=False)] == [F(7, 10), F(18, 30)]
        and [cond_prob(RECOVERY["female"]), cond_prob(RECOVERY["female"], exposed=False)] == [F(9, 30), F(2, 10)]
        and (cond_prob(p), cond_prob(p, exposed=False)) == (F(16, 40), F(20, 40))
        and r.weights_u[0] == F(1, 4)
        and r.weights_v[0] == F(3, 4)
        and r.reversal is Reversal.STRICT
        and not r.mirror
    )
    seconds = min(timeit.repeat(lambda: detect_reversal(RECOVERY), number=50, repeat=5)) / 50
    ok_time = seconds < 1e-3
    report(1, "recovery example, exact", ok and ok_time, f"detect_reversal {seconds * 1e6:.0f} us")
    assert ok
    assert ok_time


def test_criterion_2_mixture():
    value = mixture_predict(MixtureSpec.from_pairs(["0.7", "0.3", "0.4"], ["0.25", "0.25", "0.5"]))
    ok = value == F(9, 20)
    report(2, "mixture prediction", ok, f"{value}")
    assert ok


def test_criterion_3_necessary_condition(swept):
    exhaustive, randomized, elapsed, n_sample, mismatches = swept
    bad = violations(swept, "necessity")
    weak = exhaustive.count(K.WEAK) + randomized.count(K.WEAK)
    ok = bad == 0 and weak > 0 and mismatches == 0 and elapsed < 60
    report(
        3,
        "reversal implies Min < Max",
        ok,
        f"{exhaustive.tables} exhaustive + {randomized.tables} random tables, {weak} reversals, "
        f"{bad} counterexamples, library cross-check {n_sample - mismatches}/{n_sample}, {elapsed:.1f} s",
    )
    assert bad == 0 and weak > 0
    assert mismatches == 0
    assert elapsed < 60


def test_criterion_4_sufficient_avoidance(swept):
    exhaustive, randomized = swept[:2]
    bad = violations(swept, "avoidance")
    covered = exhaustive.count(K.SUFFICIENT) + randomized.count(K.SUFFICIENT)
    ok = bad == 0 and covered > 0
    report(4, "Min >= Max implies no reversal", ok, f"{covered} tables with Min >= Max, {bad} counterexamples")
    assert ok


def test_criterion_5_pooled_dependence_bound(swept):
    exhaustive, randomized = swept[:2]
    bad = violations(swept, "pooled_bound")
    covered = exhaustive.count(K.GAP_PREMISE) + randomized.count(K.GAP_PREMISE)
    ok = bad == 0 and covered > 0
    report(5, "pooled dependence bound", ok, f"{covered} tables meet the premise, {bad} counterexamples")
    assert ok


def test_criterion_6_identities(swept):
    exhaustive, randomized = swept[:2]
    bad = {n: violations(swept, n) for n in ("weighted_average", "dissection", "containment")}
    defined = exhaustive.count(K.DEFINED) + randomized.count(K.DEFINED)
    ok = not any(bad.values()) and defined == exhaustive.tables + randomized.tables
    report(6, "weighted-average and dissection identities", ok, f"{defined} tables, failures {bad}")
    assert ok


def test_criterion_7_synthesis_completeness():
    start = time.perf_counter()
    grid = grid_marginals(20)
    failures = []
    for cells in grid:
        spec = SynthesisSpec(CellCounts(*cells))
        try:
            if not verify(synthesize_reverser(spec), spec):
                failures.append(cells)
        except InfeasibleAtResolution:
            failures.append(cells)
    disagree = []
    for cells in random.Random(7).sample(grid, 100):
        for eps in (None, F(1, 4)):
            spec = SynthesisSpec(CellCounts(*cells), margin_epsilon=eps, max_level=5)
            want = dyadic_feasible(cells, spec.epsilon, spec.target.as_int(), steps=32)
            try:
                got = bool(verify(synthesize_reverser(spec), spec))
            except InfeasibleAtResolution:
                got = False
            if got != want:
                disagree.append((cells, eps))
    elapsed = time.perf_counter() - start
    ok = not failures and not disagree and elapsed < 120
    report(
        7,
        "synthesis completeness",
        ok,
        f"{len(grid)} grid tables, {len(failures)} failures, 100-case oracle disagreements "
        f"{len(disagree)}, {elapsed:.1f} s",
    )
    assert not failures, failures[:5]
    assert not disagree, disagree[:5]
    assert elapsed < 120


def test_criterion_8_figure():
    m = build_figure(RECOVERY)
    marks_ok = (
        m.top_marks == (F(3, 10), F(7, 10), F(2, 5))
        and m.bottom_marks == (F(1, 5), F(3, 5), F(1, 2))
        and m.ratio_texts == ("1:3", "3:1")
    )
    golden_ok = render_svg(m).encode("utf-8") == GOLDEN.read_bytes()
    report(8, "figure fidelity", marks_ok and golden_ok, f"marks {marks_ok}, golden bytes {golden_ok}")
    assert marks_ok
    assert golden_ok


def test_criterion_9_round_trip():
    mapping = ColumnMapping("x", "y")
    records = disaggregate(RECOVERY, mapping, "sex")
    recovery_ok = len(records) == 80 and aggregate(records, mapping, "sex") == RECOVERY
    rng = random.Random(99)
    bad = 0
    for _ in range(1000):
        k = rng.randint(1, 6)
        strata = []
        for i in range(k):
            cells = [rng.randint(0, 15) for _ in range(4)]
            if sum(cells) == 0:
                cells[rng.randrange(4)] = 1
            strata.append((f"z{i}", CellCounts(*cells)))
        st = StratifiedTable(tuple(strata))
        bad += aggregate(disaggregate(st, mapping, "z"), mapping, "z") != st
    ok = recovery_ok and bad == 0
    report(9, "ingestion round trip", ok, f"recovery example from 80 records {recovery_ok}, 1000 random, {bad} mismatches")
    assert ok


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-s", "-p", "no:cacheprovider"]))
