"""Independent brute-force checks shared by the test modules."""

from fractions import Fraction
from itertools import combinations

import numpy as np

from simpson_reversal import _kernels as K
from simpson_reversal.analysis import (
    Reversal,
    check_necessary_condition,
    check_sufficient_avoidance,
    detect_reversal,
    independence_gap,
    pooled_dependence_bound,
)
from simpson_reversal.sweep import row_to_table


def grid_marginals(max_den=20):
    """Joint tables (a, b, c, d) with positive cells k/m, m <= max_den, reduced and deduplicated."""
    seen = set()
    out = []
    for m in range(4, max_den + 1):
        for cuts in combinations(range(1, m), 3):
            parts = (cuts[0], cuts[1] - cuts[0], cuts[2] - cuts[1], m - cuts[2])
            cells = tuple(Fraction(p, m) for p in parts)
            if cells in seen:
                continue
            seen.add(cells)
            a, b, c, d = cells
            if a * d != b * c:  # nonzero delta
                out.append(cells)
    return out


def dyadic_feasible(cells, eps, sign, steps=32):
    """Is there a split with every cell fraction in {j/steps} reversing the sign by >= eps?

    Plain numpy over the full (steps+1)**4 grid, exact in int64.
    """
    den = 1
    for c in cells:
        den = den * c.denominator // np.gcd(den, c.denominator)
    n = [int(c * den) for c in cells]
    j = np.arange(steps + 1, dtype=np.int64)
    za, zb, zc, zd = np.meshgrid(j * n[0], j * n[1], j * n[2], j * n[3], indexing="ij", sparse=True)
    wa, wb, wc, wd = (steps * n[0] - za, steps * n[1] - zb, steps * n[2] - zc, steps * n[3] - zd)
    en, ed = eps.numerator, eps.denominator

    def side(a, b, c, d):
        my, mq = a + b, c + d
        return (my > 0) & (mq > 0) & (sign * (a * d - b * c) * ed >= en * my * mq)

    return bool((side(za, zb, zc, zd) & side(wa, wb, wc, wd)).any())


def library_flags(row):
    """The same flags computed through the Fraction-based library path."""
    st = row_to_table(row)
    r = detect_reversal(st, small_margin=0)
    out = np.zeros(K.NFLAGS, dtype=np.uint8)
    out[K.DEFINED] = 1
    out[K.WEAK] = r.reversal is not Reversal.NONE and not r.mirror
    out[K.STRICT] = r.reversal is Reversal.STRICT and not r.mirror
    out[K.MIRROR] = r.reversal is not Reversal.NONE and r.mirror
    out[K.MIRROR_STRICT] = r.reversal is Reversal.STRICT and r.mirror
    out[K.NECESSARY] = check_necessary_condition(st)
    out[K.SUFFICIENT] = check_sufficient_avoidance(st)
    _, gaps = independence_gap(st)
    out[K.GAP_PREMISE] = all(g >= 0 for g in gaps)
    lhs, rhs = pooled_dependence_bound(st)
    out[K.GAP_BOUND] = lhs >= rhs
    ok = True
    inside = True
    for rates, w, pooled in (
        (r.exposed_rates, r.weights_u, r.pooled_exposed_rate),
        (r.unexposed_rates, r.weights_v, r.pooled_unexposed_rate),
    ):
        ok &= sum(a * b for a, b in zip(w, rates)) == pooled
        inside &= min(rates) <= pooled <= max(rates)
    out[K.WAVG_OK] = ok
    out[K.DISSECT_OK] = ok
    out[K.CONTAINED] = inside
    return out
