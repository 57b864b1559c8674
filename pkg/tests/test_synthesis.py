import dataclasses
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import dyadic_feasible, grid_marginals
from simpson_reversal import _kernels as K
from simpson_reversal import (
    CellCounts,
    Reversal,
    Sign,
    StratifiedTable,
    SynthesisSpec,
    synthesize_reverser,
    verify,
)
from simpson_reversal.errors import (
    DegenerateMarginal,
    ExtremeDependence,
    InfeasibleAtResolution,
    ValidationError,
    ZeroMargin,
)
from simpson_reversal.synthesis import FRACTIONAL, INTEGER

RECOVERY_MARGINAL = CellCounts(16, 24, 20, 20)
BACKENDS = ("numpy",) + (("numba",) if K.HAVE_NUMBA else ())


@pytest.mark.parametrize("backend", BACKENDS)
@pytest.mark.parametrize("mode", (FRACTIONAL, INTEGER))
def test_recovery_marginal_witness(mode, backend):
    spec = SynthesisSpec(RECOVERY_MARGINAL, mode=mode)
    r = synthesize_reverser(spec, backend=backend)
    assert verify(r, spec)
    assert r.stratified["z"].cells == (8, 0, 20, 10)
    assert r.stratified["z'"].cells == (8, 24, 0, 10)
    assert r.split_fractions == (F(1, 2), 0, 1, F(1, 2))
    assert r.level == 1
    c = r.certificate
    assert c.reversal is Reversal.STRICT and not c.mirror
    assert all(m.delta > 0 for m in c.per_stratum) and c.pooled.delta < 0
    # the stratum z is under-represented among the exposed
    assert c.weights_u[0] < c.weights_v[0]


def test_larger_margin_needs_finer_grid():
    spec = SynthesisSpec(RECOVERY_MARGINAL, margin_epsilon=F(3, 10))
    r = synthesize_reverser(spec)
    assert r.level == 2 and verify(r, spec)
    assert all(m.delta >= F(3, 10) for m in r.certificate.per_stratum)


def test_tampered_result_fails_verify():
    spec = SynthesisSpec(RECOVERY_MARGINAL)
    r = synthesize_reverser(spec)
    z = r.stratified["z"]
    bumped = StratifiedTable(
        (("z", CellCounts(z.a + 1, z.b, z.c, z.d)), ("z'", r.stratified["z'"]))
    )
    v = verify(dataclasses.replace(r, stratified=bumped), spec)
    assert not v
    assert any("pooling mismatch" in p for p in v.problems)


def test_forged_certificate_fails_verify():
    spec = SynthesisSpec(RECOVERY_MARGINAL)
    r = synthesize_reverser(spec)
    other = synthesize_reverser(SynthesisSpec(CellCounts(24, 16, 20, 20)))
    v = verify(dataclasses.replace(r, certificate=other.certificate), spec)
    assert not v and any("certificate" in p for p in v.problems)


def test_direction_of_reversal():
    spec = SynthesisSpec(CellCounts(24, 16, 20, 20))
    r = synthesize_reverser(spec)
    assert spec.target is Sign.NEGATIVE
    assert r.certificate.mirror and all(m.delta < 0 for m in r.certificate.per_stratum)
    with pytest.raises(ValidationError):
        SynthesisSpec(RECOVERY_MARGINAL, target_direction="negative").target


def test_degenerate_marginal():
    spec = SynthesisSpec(CellCounts(1, 1, 1, 1))
    with pytest.raises(DegenerateMarginal):
        synthesize_reverser(spec)
    for target in ("positive", "negative"):
        spec = SynthesisSpec(CellCounts(1, 1, 1, 1), allow_degenerate=True, target_direction=target)
        r = synthesize_reverser(spec)
        assert verify(r, spec)
        sign = Sign(target).as_int()
        assert all(sign * m.delta >= F(1, 100) for m in r.certificate.per_stratum)


def test_input_errors():
    with pytest.raises(ExtremeDependence):
        synthesize_reverser(SynthesisSpec(CellCounts(5, 0, 3, 3)))
    with pytest.raises(ExtremeDependence):
        synthesize_reverser(SynthesisSpec(CellCounts(3, 3, 0, 5)))
    with pytest.raises(ZeroMargin):
        synthesize_reverser(SynthesisSpec(CellCounts(0, 0, 3, 3)))
    with pytest.raises(ValidationError):
        synthesize_reverser(SynthesisSpec(CellCounts(F(1, 2), 1, 1, 2), mode=INTEGER))
    with pytest.raises(ValidationError):
        SynthesisSpec(RECOVERY_MARGINAL, margin_epsilon=0)
    with pytest.raises(ValidationError):
        SynthesisSpec(RECOVERY_MARGINAL, mode="other")


def test_integer_mode_infeasible_small_totals():
    with pytest.raises(InfeasibleAtResolution) as exc:
        synthesize_reverser(SynthesisSpec(CellCounts(1, 1, 1, 2), mode=INTEGER))
    assert exc.value.step == F(1, 2 ** exc.value.level)
    # the same table is fine with fractional strata
    spec = SynthesisSpec(CellCounts(1, 1, 1, 2))
    assert verify(synthesize_reverser(spec), spec)


def test_fractional_probability_input():
    spec = SynthesisSpec(CellCounts(F(1, 5), F(3, 10), F(1, 4), F(1, 4)))
    r = synthesize_reverser(spec)
    assert verify(r, spec)
    assert sum(sum(t.cells) for t in r.stratified.tables) == 1


def test_default_epsilon():
    assert SynthesisSpec(RECOVERY_MARGINAL).epsilon == F(1, 1000)
    assert SynthesisSpec(CellCounts(1, 1, 1, 1), allow_degenerate=True).epsilon == F(1, 100)


cells = st.integers(1, 60)


@settings(max_examples=150, deadline=None)
@given(cells, cells, cells, cells, st.sampled_from((FRACTIONAL, INTEGER)))
def test_random_marginals(a, b, c, d, mode):
    spec = SynthesisSpec(CellCounts(a, b, c, d), mode=mode, allow_degenerate=True)
    try:
        r = synthesize_reverser(spec)
    except InfeasibleAtResolution:
        assert mode == INTEGER
        return
    v = verify(r, spec)
    assert v, v.problems
    assert r.stratified.tables[0] + r.stratified.tables[1] == spec.marginal


def test_grid_sample_against_dyadic_oracle():
    grid = grid_marginals(12)
    sample = random.Random(1).sample(grid, 40)
    outcomes = set()
    for cells in sample:
        for eps in (None, F(1, 10), F(1, 4)):
            spec = SynthesisSpec(CellCounts(*cells), margin_epsilon=eps, max_level=5)
            want = dyadic_feasible(cells, spec.epsilon, spec.target.as_int(), steps=32)
            try:
                got = verify(synthesize_reverser(spec), spec).ok
            except InfeasibleAtResolution:
                got = False
            assert got == want, (cells, eps)
            outcomes.add(got)
    assert outcomes == {True, False}
