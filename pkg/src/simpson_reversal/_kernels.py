"""Hot loops: the table sweep and the split-grid search.

Both kernels work on integer counts with cross-multiplied comparisons, so
they are exact as long as the products fit in int64 (callers check the
bounds).  Each kernel has a numba implementation and a pure-numpy one with
identical results.  Set ``SIMPSON_REVERSAL_DISABLE_NUMBA=1`` to force the
numpy path; it is also used when numba cannot be imported.
"""

from __future__ import annotations

import os

import numpy as np

_DISABLED = os.environ.get("SIMPSON_REVERSAL_DISABLE_NUMBA", "").strip().lower() in (
    "1",
    "true",
    "yes",
    "on",
)

try:
    if _DISABLED:
        raise ImportError("disabled by SIMPSON_REVERSAL_DISABLE_NUMBA")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

BACKEND = "numba" if HAVE_NUMBA else "numpy"

# Column order of the sweep flag matrix.
DEFINED = 0  # all four conditioning margins > 0
WEAK = 1  # stratum deltas >= 0, pooled < 0
STRICT = 2  # stratum deltas > 0, pooled < 0
MIRROR = 3  # stratum deltas <= 0, pooled > 0
NECESSARY = 4  # min exposed rate < max unexposed rate
SUFFICIENT = 5  # min exposed rate >= max unexposed rate
GAP_PREMISE = 6  # both conditional dependence gaps >= 0
GAP_BOUND = 7  # p(x,y) >= p(x)p(y) - cross term
WAVG_OK = 8  # weighted-average identity, both arms
DISSECT_OK = 9  # dissection identity, both arms
CONTAINED = 10  # pooled rate inside the stratum-rate interval, both arms
MIRROR_STRICT = 11
NFLAGS = 12

# Largest cell the sweep kernels accept; keeps every product below 2**62.
MAX_SWEEP_CELL = 250


def _sign(v):
    if v > 0:
        return 1
    if v < 0:
        return -1
    return 0


def _table_flags(t, out):
    a1, b1, c1, d1, a2, b2, c2, d2 = t[0], t[1], t[2], t[3], t[4], t[5], t[6], t[7]
    y1 = a1 + b1
    q1 = c1 + d1
    y2 = a2 + b2
    q2 = c2 + d2
    for f in range(NFLAGS):
        out[f] = 0
    if y1 <= 0 or q1 <= 0 or y2 <= 0 or q2 <= 0:
        return
    out[DEFINED] = 1
    A = a1 + a2
    B = b1 + b2
    C = c1 + c2
    D = d1 + d2
    Y = y1 + y2
    Q = q1 + q2
    s1 = _sign(a1 * d1 - b1 * c1)
    s2 = _sign(a2 * d2 - b2 * c2)
    sp = _sign(A * D - B * C)
    if sp < 0 and s1 >= 0 and s2 >= 0:
        out[WEAK] = 1
        if s1 > 0 and s2 > 0:
            out[STRICT] = 1
    if sp > 0 and s1 <= 0 and s2 <= 0:
        out[MIRROR] = 1
        if s1 < 0 and s2 < 0:
            out[MIRROR_STRICT] = 1
    # p = a/m < r = c/n  <=>  a*n < c*m
    nec = (
        a1 * q1 < c1 * y1
        or a1 * q2 < c2 * y1
        or a2 * q1 < c1 * y2
        or a2 * q2 < c2 * y2
    )
    if nec:
        out[NECESSARY] = 1
    else:
        out[SUFFICIENT] = 1
    t1 = y1 + q1
    t2 = y2 + q2
    x1 = a1 + c1
    x2 = a2 + c2
    if t1 * a1 >= x1 * y1 and t2 * a2 >= x2 * y2:
        out[GAP_PREMISE] = 1
    n = t1 + t2
    if n * A >= (x1 + x2) * Y - (x1 * y2 + x2 * y1):
        out[GAP_BOUND] = 1
    # (y1/Y)(a1/y1) + (y2/Y)(a2/y2) == A/Y, kept unreduced on purpose
    ok_y = (y1 * a1 * y2 + y2 * a2 * y1) * Y == A * (Y * y1 * y2)
    ok_q = (q1 * c1 * q2 + q2 * c2 * q1) * Q == C * (Q * q1 * q2)
    if ok_y and ok_q:
        out[WAVG_OK] = 1
    # (A/Y - a2/y2) * y2/Y == (a1/y1 - A/Y) * y1/Y
    l_num = (A * y2 - a2 * Y) * y2
    r_num = (a1 * Y - A * y1) * y1
    ok_y = l_num * (Y * y1 * Y) == r_num * (Y * y2 * Y)
    l_num = (C * q2 - c2 * Q) * q2
    r_num = (c1 * Q - C * q1) * q1
    ok_q = l_num * (Q * q1 * Q) == r_num * (Q * q2 * Q)
    if ok_y and ok_q:
        out[DISSECT_OK] = 1
    # min(a1/y1, a2/y2) <= A/Y <= max(...)
    in_y = (a1 * Y <= A * y1 or a2 * Y <= A * y2) and (A * y1 <= a1 * Y or A * y2 <= a2 * Y)
    in_q = (c1 * Q <= C * q1 or c2 * Q <= C * q2) and (C * q1 <= c1 * Q or C * q2 <= c2 * Q)
    if in_y and in_q:
        out[CONTAINED] = 1


def _sweep_loop(tables, out):
    for i in range(tables.shape[0]):
        _table_flags(tables[i], out[i])


def sweep_flags_numpy(tables: np.ndarray) -> np.ndarray:
    """Vectorised flag matrix for an ``(n, 8)`` array of 2x2x2 tables."""
    t = np.asarray(tables, dtype=np.int64)
    a1, b1, c1, d1, a2, b2, c2, d2 = (t[:, i] for i in range(8))
    out = np.zeros((t.shape[0], NFLAGS), dtype=np.uint8)
    y1, q1, y2, q2 = a1 + b1, c1 + d1, a2 + b2, c2 + d2
    defined = (y1 > 0) & (q1 > 0) & (y2 > 0) & (q2 > 0)
    A, B, C, D = a1 + a2, b1 + b2, c1 + c2, d1 + d2
    Y, Q = y1 + y2, q1 + q2
    s1 = np.sign(a1 * d1 - b1 * c1)
    s2 = np.sign(a2 * d2 - b2 * c2)
    sp = np.sign(A * D - B * C)
    out[:, DEFINED] = defined
    out[:, WEAK] = defined & (sp < 0) & (s1 >= 0) & (s2 >= 0)
    out[:, STRICT] = defined & (sp < 0) & (s1 > 0) & (s2 > 0)
    out[:, MIRROR] = defined & (sp > 0) & (s1 <= 0) & (s2 <= 0)
    out[:, MIRROR_STRICT] = defined & (sp > 0) & (s1 < 0) & (s2 < 0)
    nec = (
        (a1 * q1 < c1 * y1)
        | (a1 * q2 < c2 * y1)
        | (a2 * q1 < c1 * y2)
        | (a2 * q2 < c2 * y2)
    )
    out[:, NECESSARY] = defined & nec
    out[:, SUFFICIENT] = defined & ~nec
    t1, t2 = y1 + q1, y2 + q2
    x1, x2 = a1 + c1, a2 + c2
    out[:, GAP_PREMISE] = defined & (t1 * a1 >= x1 * y1) & (t2 * a2 >= x2 * y2)
    n = t1 + t2
    out[:, GAP_BOUND] = defined & (n * A >= (x1 + x2) * Y - (x1 * y2 + x2 * y1))
    ok_y = (y1 * a1 * y2 + y2 * a2 * y1) * Y == A * (Y * y1 * y2)
    ok_q = (q1 * c1 * q2 + q2 * c2 * q1) * Q == C * (Q * q1 * q2)
    out[:, WAVG_OK] = defined & ok_y & ok_q
    ok_y = ((A * y2 - a2 * Y) * y2) * (Y * y1 * Y) == ((a1 * Y - A * y1) * y1) * (Y * y2 * Y)
    ok_q = ((C * q2 - c2 * Q) * q2) * (Q * q1 * Q) == ((c1 * Q - C * q1) * q1) * (Q * q2 * Q)
    out[:, DISSECT_OK] = defined & ok_y & ok_q
    in_y = ((a1 * Y <= A * y1) | (a2 * Y <= A * y2)) & ((A * y1 <= a1 * Y) | (A * y2 <= a2 * Y))
    in_q = ((c1 * Q <= C * q1) | (c2 * Q <= C * q2)) & ((C * q1 <= c1 * Q) | (C * q2 <= c2 * Q))
    out[:, CONTAINED] = defined & in_y & in_q
    return out


def _best_split_loop(totals, cands, lens, sign, e_num, e_den, best):
    ta, tb, tc, td = totals[0], totals[1], totals[2], totals[3]
    ty = ta + tb
    tq = tc + td
    found = False
    best_key = 0
    for i in range(lens[0]):
        za = cands[0, i]
        for j in range(lens[1]):
            zb = cands[1, j]
            my = za + zb
            my2 = ty - my
            if my <= 0 or my2 <= 0:
                continue
            for k in range(lens[2]):
                zc = cands[2, k]
                for m in range(lens[3]):
                    zd = cands[3, m]
                    mq = zc + zd
                    mq2 = tq - mq
                    if mq <= 0 or mq2 <= 0:
                        continue
                    if sign * (za * zd - zb * zc) * e_den < e_num * my * mq:
                        continue
                    wa = ta - za
                    wb = tb - zb
                    wc = tc - zc
                    wd = td - zd
                    if sign * (wa * wd - wb * wc) * e_den < e_num * my2 * mq2:
                        continue
                    key = my * tq - mq * ty
                    if not found or key < best_key:
                        found = True
                        best_key = key
                        best[0] = i
                        best[1] = j
                        best[2] = k
                        best[3] = m
    return found


def best_split_numpy(totals, cands, lens, sign, e_num, e_den):
    """Numpy twin of the split search; also handles object (bigint) arrays.

    Returns candidate indices ``(i, j, k, m)`` of the feasible split with
    the smallest ``p(z|y) - p(z|y')`` (first in index order on ties), or
    ``None``.
    """
    ta, tb, tc, td = (totals[0], totals[1], totals[2], totals[3])
    ty, tq = ta + tb, tc + td
    zc = cands[2][: lens[2]][:, None]
    zd = cands[3][: lens[3]][None, :]
    mq = zc + zd
    mq2 = tq - mq
    q_ok = (mq > 0) & (mq2 > 0)
    wc, wd = tc - zc, td - zd
    best = None
    best_key = None
    for i in range(lens[0]):
        za = cands[0][i]
        for j in range(lens[1]):
            zb = cands[1][j]
            my = za + zb
            my2 = ty - my
            if my <= 0 or my2 <= 0:
                continue
            wa, wb = ta - za, tb - zb
            ok = q_ok & (sign * (za * zd - zb * zc) * e_den >= e_num * my * mq)
            ok &= sign * (wa * wd - wb * wc) * e_den >= e_num * my2 * mq2
            if not ok.any():
                continue
            key = my * tq - mq * ty
            flat = np.flatnonzero(ok.ravel())
            kv = key.ravel()[flat]
            pos = int(np.argmin(kv))  # first minimum -> index order on ties
            if best is None or kv[pos] < best_key:
                best_key = kv[pos]
                k, m = divmod(int(flat[pos]), int(lens[3]))
                best = (i, j, k, m)
    return best


if HAVE_NUMBA:
    _sign = njit(cache=True)(_sign)
    _table_flags = njit(cache=True)(_table_flags)
    _sweep_loop = njit(cache=True)(_sweep_loop)
    _best_split_loop = njit(cache=True)(_best_split_loop)

    def sweep_flags_numba(tables: np.ndarray) -> np.ndarray:
        t = np.ascontiguousarray(tables, dtype=np.int64)
        out = np.zeros((t.shape[0], NFLAGS), dtype=np.uint8)
        _sweep_loop(t, out)
        return out

    def best_split_numba(totals, cands, lens, sign, e_num, e_den):
        best = np.full(4, -1, dtype=np.int64)
        found = _best_split_loop(
            np.asarray(totals, dtype=np.int64),
            np.ascontiguousarray(cands, dtype=np.int64),
            np.asarray(lens, dtype=np.int64),
            np.int64(sign),
            np.int64(e_num),
            np.int64(e_den),
            best,
        )
        return tuple(int(v) for v in best) if found else None

else:
    sweep_flags_numba = None
    best_split_numba = None


def _check_sweep_range(tables: np.ndarray) -> None:
    if tables.size and (tables.min() < 0 or tables.max() > MAX_SWEEP_CELL):
        raise ValueError(f"sweep cells must lie in [0, {MAX_SWEEP_CELL}]")


def sweep_flags(tables, backend: str | None = None) -> np.ndarray:
    """Flag matrix (``uint8``, shape ``(n, NFLAGS)``) for 2x2x2 tables.

    Rows of ``tables`` are ``(a1, b1, c1, d1, a2, b2, c2, d2)``.
    """
    t = np.asarray(tables, dtype=np.int64)
    if t.ndim != 2 or t.shape[1] != 8:
        raise ValueError("tables must have shape (n, 8)")
    _check_sweep_range(t)
    backend = backend or BACKEND
    if backend == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError("numba backend requested but unavailable")
        return sweep_flags_numba(t)
    return sweep_flags_numpy(t)


INT64_SAFE = 2**62


def best_split(totals, cands, lens, sign, e_num, e_den, backend: str | None = None):
    """Dispatch the split search; falls back to Python ints on overflow risk."""
    big = max(int(v) for v in totals)
    bound = 4 * big * big * max(int(e_num), int(e_den), 1)
    if bound >= INT64_SAFE:
        obj = np.array([[int(v) for v in row] for row in cands], dtype=object)
        return best_split_numpy(
            [int(v) for v in totals], obj, [int(v) for v in lens], int(sign), int(e_num), int(e_den)
        )
    backend = backend or BACKEND
    if backend == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError("numba backend requested but unavailable")
        return best_split_numba(totals, cands, lens, sign, e_num, e_den)
    return best_split_numpy(
        np.asarray(totals, dtype=np.int64),
        np.asarray(cands, dtype=np.int64),
        [int(v) for v in lens],
        np.int64(sign),
        np.int64(e_num),
        np.int64(e_den),
    )
