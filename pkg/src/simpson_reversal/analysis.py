"""Reversal detection and the interval / weight analysis of 2x2xK tables.

Notation used in comments: ``p(x|y,z_k)`` is the success rate of the
exposed arm inside stratum k, ``u_k = p(z_k|y)`` and ``v_k = p(z_k|y')``
are the stratum weights of the exposed and unexposed arms.  For K = 2 the
first stratum plays the role of ``z`` and the second of ``z'``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import NamedTuple

from .errors import (
    DegenerateSegment,
    EmptyStratifiedTable,
    EmptyTable,
    NotBinaryStratifier,
    ZeroMargin,
)
from .tables import (
    AssociationMeasure,
    CellCounts,
    Sign,
    StratifiedTable,
    association,
    cond_prob,
    pool,
)

# Conditioning margins below this are flagged; the analysis itself assumes
# large counts and ignores sampling noise.
SMALL_MARGIN = 30


class Reversal(str, enum.Enum):
    NONE = "none"
    WEAK = "weak"
    STRICT = "strict"


class CaseLabel(str, enum.Enum):
    CASE1 = "Case1"
    CASE2 = "Case2"
    CASE3 = "Case3"
    CASE4 = "Case4"
    MIXED = "mixed"


@dataclass(frozen=True)
class ReversalReport:
    labels: tuple
    per_stratum: tuple  # AssociationMeasure per stratum, same order as labels
    pooled: AssociationMeasure
    reversal: Reversal
    mirror: bool
    necessary_condition_holds: bool
    sufficient_avoidance_holds: bool
    case_label: CaseLabel
    weights_u: tuple  # p(z_k | y)
    weights_v: tuple  # p(z_k | y')
    exposed_rates: tuple  # p(x | y, z_k)
    unexposed_rates: tuple  # p(x | y', z_k)
    pooled_exposed_rate: Fraction
    pooled_unexposed_rate: Fraction
    interval_conditions_extended: bool = False
    skipped: tuple = ()
    small_margins: tuple = ()

    @property
    def weight_gaps(self) -> tuple:
        """``v_k - u_k`` per stratum; no threshold is applied to these."""
        return tuple(v - u for u, v in zip(self.weights_u, self.weights_v))

    @property
    def detected(self) -> bool:
        return self.reversal is not Reversal.NONE

    def reversed_under(self, strict: bool) -> bool:
        if strict:
            return self.reversal is Reversal.STRICT
        return self.detected


def _rates(t: CellCounts, label):
    return (
        cond_prob(t, True, True, stratum=label),
        cond_prob(t, True, False, stratum=label),
    )


def _has_margins(t: CellCounts) -> bool:
    return t.exposed > 0 and t.unexposed > 0


def _usable(stratified: StratifiedTable, skip_empty: bool):
    kept, skipped = [], []
    for label, t in stratified:
        if _has_margins(t):
            kept.append((label, t))
        elif skip_empty:
            side = "y" if t.exposed == 0 else "y'"
            skipped.append((label, f"empty conditioning margin {side}"))
        else:
            side = "y" if t.exposed == 0 else "y'"
            raise ZeroMargin(
                f"conditioning margin {side} is empty in stratum {label!r}",
                stratum=label,
                margin=side,
            )
    return kept, skipped


def reversal_verdict(stratum_signs, pooled_sign: Sign) -> tuple[Reversal, bool]:
    """Classify signs into (reversal, mirror).

    Weak: every stratum difference >= 0 and the pooled one < 0.  Strict:
    every stratum difference > 0.  ``mirror`` marks the sign-flipped
    instance.  Ties inside strata never count towards strict.
    """
    if pooled_sign is Sign.NEGATIVE:
        if all(s is not Sign.NEGATIVE for s in stratum_signs):
            strict = all(s is Sign.POSITIVE for s in stratum_signs)
            return (Reversal.STRICT if strict else Reversal.WEAK), False
    elif pooled_sign is Sign.POSITIVE:
        if all(s is not Sign.POSITIVE for s in stratum_signs):
            strict = all(s is Sign.NEGATIVE for s in stratum_signs)
            return (Reversal.STRICT if strict else Reversal.WEAK), True
    return Reversal.NONE, False


def _case_of(pz, pz_, qz, qz_) -> CaseLabel:
    # pz = p(x|y,z), pz_ = p(x|y,z'), qz = p(x|y',z), qz_ = p(x|y',z').
    # Weak predicates tried in order; the first match wins on ties.
    if pz >= pz_ and qz >= qz_:
        return CaseLabel.CASE1
    if pz <= pz_ and qz <= qz_:
        return CaseLabel.CASE2
    if pz <= pz_ and qz >= qz_:
        return CaseLabel.CASE3
    return CaseLabel.CASE4


def _case_from_rates(exposed_rates, unexposed_rates) -> CaseLabel:
    if len(exposed_rates) == 2:
        return _case_of(exposed_rates[0], exposed_rates[1], unexposed_rates[0], unexposed_rates[1])
    labels = {
        _case_of(exposed_rates[i], exposed_rates[j], unexposed_rates[i], unexposed_rates[j])
        for i, j in combinations(range(len(exposed_rates)), 2)
    }
    return labels.pop() if len(labels) == 1 else CaseLabel.MIXED


def _min_lt_max(exposed_rates, unexposed_rates) -> bool:
    return min(exposed_rates) < max(unexposed_rates)


def detect_reversal(
    stratified: StratifiedTable,
    *,
    skip_empty: bool = False,
    small_margin: int = SMALL_MARGIN,
) -> ReversalReport:
    """Full reversal report for a 2x2xK table.

    With ``skip_empty`` set, strata with an empty conditioning margin are
    dropped and listed in ``report.skipped`` instead of raising.

    For K > 2 the interval conditions use Min/Max over all strata; this is
    an extension and is marked with ``interval_conditions_extended``.
    """
    stratified.require_strata(2)
    kept, skipped = _usable(stratified, skip_empty)
    if len(kept) < 2:
        raise EmptyStratifiedTable(
            f"only {len(kept)} stratum left after skipping empty margins"
        )
    sub = StratifiedTable(tuple(kept))
    pooled_t = pool(sub)

    labels = sub.labels
    measures = tuple(association(t, stratum=label) for label, t in kept)
    pooled_m = association(pooled_t)
    reversal, mirror = reversal_verdict([m.sign for m in measures], pooled_m.sign)

    rates = [_rates(t, label) for label, t in kept]
    exposed_rates = tuple(r[0] for r in rates)
    unexposed_rates = tuple(r[1] for r in rates)
    ey, eyp = Fraction(pooled_t.exposed), Fraction(pooled_t.unexposed)
    weights_u = tuple(t.exposed / ey for t in sub.tables)
    weights_v = tuple(t.unexposed / eyp for t in sub.tables)

    necessary = _min_lt_max(exposed_rates, unexposed_rates)

    small = []
    if small_margin:
        for label, t in kept:
            if t.exposed < small_margin:
                small.append((label, "y"))
            if t.unexposed < small_margin:
                small.append((label, "y'"))

    return ReversalReport(
        labels=labels,
        per_stratum=measures,
        pooled=pooled_m,
        reversal=reversal,
        mirror=mirror,
        necessary_condition_holds=necessary,
        sufficient_avoidance_holds=not necessary,
        case_label=_case_from_rates(exposed_rates, unexposed_rates),
        weights_u=weights_u,
        weights_v=weights_v,
        exposed_rates=exposed_rates,
        unexposed_rates=unexposed_rates,
        pooled_exposed_rate=cond_prob(pooled_t, True, True),
        pooled_unexposed_rate=cond_prob(pooled_t, True, False),
        interval_conditions_extended=len(kept) > 2,
        skipped=tuple(skipped),
        small_margins=tuple(small),
    )


def _binary_rates(stratified: StratifiedTable, extended: bool = False):
    if len(stratified) != 2 and not (extended and len(stratified) > 2):
        raise NotBinaryStratifier(
            f"this condition is defined for a binary stratifier, got K={len(stratified)}"
        )
    rates = [_rates(t, label) for label, t in stratified]
    return [r[0] for r in rates], [r[1] for r in rates]


def check_necessary_condition(stratified: StratifiedTable, *, extended: bool = False) -> bool:
    """True iff min_k p(x|y,z_k) < max_k p(x|y',z_k).

    The two intervals spanned by the exposed and the unexposed stratum
    rates must overlap for a reversal in the ``p(x|y) < p(x|y')`` direction.
    ``extended=True`` admits K > 2.
    """
    ex, un = _binary_rates(stratified, extended)
    return _min_lt_max(ex, un)


def check_sufficient_avoidance(stratified: StratifiedTable, *, extended: bool = False) -> bool:
    """True iff min_k p(x|y,z_k) >= max_k p(x|y',z_k); then no reversal occurs."""
    ex, un = _binary_rates(stratified, extended)
    return not _min_lt_max(ex, un)


class Dissection(NamedTuple):
    left: Fraction  # p(x|side) - p(x|side,z')
    right: Fraction  # p(x|side,z) - p(x|side)

    def normalized(self) -> tuple[Fraction, Fraction]:
        total = self.left + self.right
        return self.left / total, self.right / total


def dissection(stratified: StratifiedTable, exposed: bool = True) -> Dissection:
    """Split of the segment between the two stratum rates by the pooled rate.

    The pooled rate on one exposure arm cuts ``[p(x|.,z'), p(x|.,z)]`` into
    pieces standing in the ratio ``p(z|.) : p(z'|.)``.  Raises
    :class:`DegenerateSegment` if the two stratum rates coincide.
    """
    ex, un = _binary_rates(stratified)
    rz, rz_ = (ex if exposed else un)
    if rz == rz_:
        side = "y" if exposed else "y'"
        raise DegenerateSegment(f"stratum rates on side {side} coincide at {rz}")
    marginal = cond_prob(pool(stratified), True, exposed)
    return Dissection(marginal - rz_, rz - marginal)


def stratum_weights(stratified: StratifiedTable, exposed: bool = True) -> tuple:
    """``p(z_k | y)`` (or ``| y'``) for every stratum."""
    total = Fraction(pool(stratified).margin(exposed))
    if total == 0:
        raise ZeroMargin("pooled conditioning margin is empty", margin="y" if exposed else "y'")
    return tuple(t.margin(exposed) / total for t in stratified.tables)


def classify_case(stratified: StratifiedTable) -> CaseLabel:
    """Order of the stratum rates on each arm.

    Case1: p(x|y,z) >= p(x|y,z') and p(x|y',z) >= p(x|y',z').  Case2: both
    orderings reversed.  Case3: exposed arm reversed only.  Case4: unexposed
    arm reversed only.  Ties go to the first weak match in that order.  For
    K > 2 every pair of strata is classified and disagreement gives ``mixed``.
    """
    stratified.require_strata(2)
    ex, un = _binary_rates(stratified, extended=True)
    return _case_from_rates(ex, un)


def _joint_parts(stratified: StratifiedTable):
    n = stratified.total
    if n == 0:
        raise EmptyTable("grand total is zero")
    return Fraction(n), pool(stratified)


def independence_gap(stratified: StratifiedTable) -> tuple[Fraction, tuple]:
    """``(p(x,y) - p(x)p(y), [p(x,y|z_k) - p(x|z_k)p(y|z_k)])``.

    Non-negative conditional gaps with a negative marginal gap is the same
    reversal seen through dependence rather than risk differences.
    """
    n, pooled_t = _joint_parts(stratified)
    marginal = Fraction(pooled_t.a) / n - (pooled_t.successes / n) * (pooled_t.exposed / n)
    gaps = []
    for label, t in stratified:
        tk = Fraction(t.total)
        if tk == 0:
            raise ZeroMargin(f"stratum {label!r} is empty", stratum=label)
        gaps.append(t.a / tk - (t.successes / tk) * (t.exposed / tk))
    return marginal, tuple(gaps)


def pooled_dependence_bound(stratified: StratifiedTable) -> tuple[Fraction, Fraction]:
    """Both sides of ``p(x,y) >= p(x)p(y) - (p(x,z)p(y,z') + p(x,z')p(y,z))``.

    The inequality is guaranteed when both conditional gaps are
    non-negative; dropping the bracketed cross term is what lets the pooled
    dependence turn negative.  Returns ``(lhs, rhs)``.
    """
    if len(stratified) != 2:
        raise NotBinaryStratifier(f"needs a binary stratifier, got K={len(stratified)}")
    n, pooled_t = _joint_parts(stratified)
    tz, tz_ = stratified.tables
    lhs = Fraction(pooled_t.a) / n
    px, py = pooled_t.successes / n, pooled_t.exposed / n
    cross = (tz.successes / n) * (tz_.exposed / n) + (tz_.successes / n) * (tz.exposed / n)
    return lhs, px * py - cross


def conditional_dependence_nonnegative(stratified: StratifiedTable) -> bool:
    _, gaps = independence_gap(stratified)
    return all(g >= 0 for g in gaps)
