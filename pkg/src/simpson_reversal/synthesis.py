"""Construct a binary stratifier that reverses a given marginal association.

Any marginal 2x2 table whose two conditional success rates are strictly
between 0 and 1 can be split into two strata that both show the opposite
association.  The search below is deterministic: each of the four cells is
split by a dyadic fraction ``j / 2**level``, levels run coarse to fine, and
within a level the feasible split with the smallest ``p(z|y) - p(z|y')``
wins (the stratum ``z`` is pushed out of the exposed arm and into the
unexposed one first).  Ties go to the first candidate in cell order.

Every returned split is re-checked exactly with :func:`verify`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from . import _kernels
from .analysis import Reversal, ReversalReport, detect_reversal
from .errors import (
    DegenerateMarginal,
    ExtremeDependence,
    InfeasibleAtResolution,
    ValidationError,
    ZeroMargin,
)
from .tables import CellCounts, Sign, StratifiedTable, association, cond_prob, pool, to_fraction

FRACTIONAL = "fractional"
INTEGER = "integer"
DEFAULT_MAX_LEVEL = 6
STRATUM_LABELS = ("z", "z'")


@dataclass(frozen=True)
class SynthesisSpec:
    marginal: CellCounts
    margin_epsilon: Optional[Fraction] = None
    target_direction: Optional[Sign] = None
    mode: str = FRACTIONAL
    allow_degenerate: bool = False
    max_level: int = DEFAULT_MAX_LEVEL

    def __post_init__(self):
        if not isinstance(self.marginal, CellCounts):
            object.__setattr__(self, "marginal", CellCounts.of(self.marginal))
        if self.margin_epsilon is not None:
            eps = to_fraction(self.margin_epsilon)
            if eps <= 0:
                raise ValidationError("margin_epsilon must be > 0")
            object.__setattr__(self, "margin_epsilon", eps)
        if self.target_direction is not None:
            target = Sign(self.target_direction)
            if target is Sign.ZERO:
                raise ValidationError("target_direction must be positive or negative")
            object.__setattr__(self, "target_direction", target)
        if self.mode not in (FRACTIONAL, INTEGER):
            raise ValidationError(f"unknown mode {self.mode!r}")
        if self.max_level < 1:
            raise ValidationError("max_level must be >= 1")

    @property
    def marginal_delta(self) -> Fraction:
        return association(self.marginal).delta

    @property
    def epsilon(self) -> Fraction:
        """Required strict gap inside each stratum.

        Defaults to 1/100 of the marginal |delta|, or 1/100 when the
        marginal delta is zero.
        """
        if self.margin_epsilon is not None:
            return self.margin_epsilon
        delta = abs(self.marginal_delta)
        return delta / 100 if delta else Fraction(1, 100)

    @property
    def target(self) -> Sign:
        sign = association(self.marginal).sign
        if sign is Sign.ZERO:
            return self.target_direction or Sign.POSITIVE
        wanted = sign.flipped()
        if self.target_direction is not None and self.target_direction is not wanted:
            raise ValidationError(
                f"target_direction {self.target_direction.value} does not reverse a "
                f"{sign.value} marginal association"
            )
        return wanted


@dataclass(frozen=True)
class SynthesisResult:
    stratified: StratifiedTable
    certificate: ReversalReport
    split_fractions: tuple  # share of each marginal cell (a, b, c, d) placed in stratum z
    level: int
    mode: str


@dataclass(frozen=True)
class Verdict:
    ok: bool
    problems: tuple = ()

    def __bool__(self):
        return self.ok


def _validate(spec: SynthesisSpec) -> None:
    m = spec.marginal
    if m.exposed == 0 or m.unexposed == 0:
        raise ZeroMargin("marginal table has an empty exposure arm")
    for exposed in (True, False):
        p = cond_prob(m, True, exposed)
        if p == 0 or p == 1:
            arm = "y" if exposed else "y'"
            raise ExtremeDependence(f"p(x|{arm}) = {p} is extreme; no reversing split exists")
    if spec.marginal_delta == 0 and not spec.allow_degenerate:
        raise DegenerateMarginal(
            "marginal association is zero; pass allow_degenerate to request a common-direction split"
        )
    if spec.mode == INTEGER and not m.is_integral:
        raise ValidationError("integer mode needs integer counts")


def _scaled_cells(m: CellCounts) -> tuple[list[int], int]:
    cells = [Fraction(v) for v in m.cells]
    scale = math.lcm(*(c.denominator for c in cells))
    return [int(c * scale) for c in cells], scale


def _candidates(spec: SynthesisSpec, base: list[int], level: int):
    steps = 2**level
    if spec.mode == FRACTIONAL:
        totals = [n * steps for n in base]
        cols = [[j * n for j in range(steps + 1)] for n in base]
    else:
        totals = list(base)
        cols = [sorted({n * j // steps for j in range(steps + 1)}) for n in base]
    lens = [len(c) for c in cols]
    width = max(lens)
    cands = np.zeros((4, width), dtype=object)
    for r, col in enumerate(cols):
        cands[r, : len(col)] = col
    return totals, cands, lens, cols


def _finest_level(spec: SynthesisSpec, base: list[int]) -> int:
    if spec.mode == INTEGER:
        # beyond 2**level >= max count every integer split is already on the grid
        full = max(1, math.ceil(math.log2(max(base))))
        return min(spec.max_level, full)
    return spec.max_level


def synthesize_reverser(spec: SynthesisSpec, backend: Optional[str] = None) -> SynthesisResult:
    """Split ``spec.marginal`` into two strata that reverse its association.

    Fractional mode always succeeds for non-extreme marginals; integer mode
    can raise :class:`InfeasibleAtResolution` for small totals.
    """
    _validate(spec)
    base, _ = _scaled_cells(spec.marginal)
    sign = spec.target.as_int()
    eps = spec.epsilon
    top = _finest_level(spec, base)
    for level in range(1, top + 1):
        totals, cands, lens, cols = _candidates(spec, base, level)
        hit = _kernels.best_split(
            totals,
            cands,
            lens,
            sign,
            eps.numerator,
            eps.denominator,
            backend=backend,
        )
        if hit is None:
            continue
        result = _build(spec, level, [cols[r][hit[r]] for r in range(4)], totals)
        verdict = verify(result, spec)
        if not verdict:
            raise AssertionError(f"search returned an invalid split: {verdict.problems}")
        return result
    step = Fraction(1, 2**top)
    raise InfeasibleAtResolution(
        f"no reversing split with margin {eps} found down to step {step} ({spec.mode} mode)",
        level=top,
        step=step,
    )


def _build(spec: SynthesisSpec, level: int, z_values, totals) -> SynthesisResult:
    marginal = spec.marginal
    fracs = tuple(Fraction(z, t) if t else Fraction(0) for z, t in zip(z_values, totals))
    if spec.mode == FRACTIONAL:
        z_cells = [f * Fraction(c) for f, c in zip(fracs, marginal.cells)]
    else:
        z_cells = list(z_values)
    rest = [c - z for c, z in zip(marginal.cells, z_cells)]
    stratified = StratifiedTable(
        (
            (STRATUM_LABELS[0], CellCounts(*z_cells)),
            (STRATUM_LABELS[1], CellCounts(*rest)),
        )
    )
    return SynthesisResult(
        stratified=stratified,
        certificate=detect_reversal(stratified, small_margin=0),
        split_fractions=fracs,
        level=level,
        mode=spec.mode,
    )


def verify(result: SynthesisResult, spec: SynthesisSpec) -> Verdict:
    """Re-check a synthesis result from scratch.

    Pooling must reproduce the marginal cell for cell, the reversal verdict
    must recompute identically, and each stratum delta must sit on the
    target side by at least the requested epsilon.
    """
    problems = []
    st = result.stratified
    if len(st) != 2:
        problems.append(f"expected 2 strata, got {len(st)}")
        return Verdict(False, tuple(problems))
    pooled = pool(st)
    if pooled.cells != spec.marginal.cells:
        problems.append(f"pooling mismatch: {pooled.cells} != {spec.marginal.cells}")
    for idx, (frac, total) in enumerate(zip(result.split_fractions, spec.marginal.cells)):
        if st[0].cells[idx] != frac * total:
            problems.append(f"split fraction {frac} does not match cell {'abcd'[idx]}")
    try:
        fresh = detect_reversal(st, small_margin=0)
    except ValidationError as exc:
        problems.append(f"certificate cannot be recomputed: {exc}")
        return Verdict(False, tuple(problems))
    cert = result.certificate
    if (fresh.reversal, fresh.mirror) != (cert.reversal, cert.mirror):
        problems.append(
            f"certificate says {cert.reversal.value}/mirror={cert.mirror}, "
            f"recomputed {fresh.reversal.value}/mirror={fresh.mirror}"
        )
    if fresh.per_stratum != cert.per_stratum:
        problems.append("per-stratum deltas differ from certificate")
    try:
        sign = spec.target.as_int()
        eps = spec.epsilon
    except ValidationError as exc:
        problems.append(str(exc))
        return Verdict(False, tuple(problems))
    if spec.marginal_delta != 0 and fresh.reversal is Reversal.NONE:
        problems.append("no reversal in the synthesized strata")
    for label, m in zip(fresh.labels, fresh.per_stratum):
        if sign * m.delta < eps:
            problems.append(f"stratum {label!r} delta {m.delta} misses margin {eps}")
    return Verdict(not problems, tuple(problems))
