"""Exhaustive and randomized property sweeps over 2x2x2 count tables.

Rows are ``(a1, b1, c1, d1, a2, b2, c2, d2)``: the first stratum is ``z``,
the second ``z'``.  The flags come from :mod:`simpson_reversal._kernels`
and every check is an exact integer comparison.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np

from . import _kernels as K
from .tables import CellCounts, StratifiedTable

# property name -> (premise flag, conclusion flag); a row violates the
# property when the premise is set and the conclusion is not
PROPERTIES = {
    "necessity": (K.WEAK, K.NECESSARY),
    "avoidance": (K.SUFFICIENT, None),
    "pooled_bound": (K.GAP_PREMISE, K.GAP_BOUND),
    "weighted_average": (K.DEFINED, K.WAVG_OK),
    "dissection": (K.DEFINED, K.DISSECT_OK),
    "containment": (K.DEFINED, K.CONTAINED),
}


def enumerate_strata(max_total: int, defined_only: bool = True) -> np.ndarray:
    """All 2x2 count tables with total <= ``max_total``, shape ``(m, 4)``."""
    r = np.arange(max_total + 1)
    a, b, c, d = np.meshgrid(r, r, r, r, indexing="ij")
    cells = np.stack([a.ravel(), b.ravel(), c.ravel(), d.ravel()], axis=1)
    cells = cells[cells.sum(axis=1) <= max_total]
    if defined_only:
        cells = cells[(cells[:, 0] + cells[:, 1] > 0) & (cells[:, 2] + cells[:, 3] > 0)]
    return cells.astype(np.int64)


def iter_exhaustive(max_total: int, block: int = 128, defined_only: bool = True) -> Iterator[np.ndarray]:
    """Every ordered pair of strata, in chunks of ``block`` first strata."""
    strata = enumerate_strata(max_total, defined_only)
    m = len(strata)
    for start in range(0, m, block):
        first = strata[start : start + block]
        rows = np.empty((len(first) * m, 8), dtype=np.int64)
        rows[:, :4] = np.repeat(first, m, axis=0)
        rows[:, 4:] = np.tile(strata, (len(first), 1))
        yield rows


def random_tables(n: int, rng: np.random.Generator, max_cell: int = 200) -> np.ndarray:
    """``n`` tables with cells uniform on ``[0, max_cell]`` and defined margins."""
    out = np.empty((0, 8), dtype=np.int64)
    while len(out) < n:
        t = rng.integers(0, max_cell + 1, size=(2 * (n - len(out)) + 16, 8), dtype=np.int64)
        ok = (
            (t[:, 0] + t[:, 1] > 0)
            & (t[:, 2] + t[:, 3] > 0)
            & (t[:, 4] + t[:, 5] > 0)
            & (t[:, 6] + t[:, 7] > 0)
        )
        out = np.concatenate([out, t[ok]])
    return out[:n]


def row_to_table(row, labels=("z", "z'")) -> StratifiedTable:
    row = [int(v) for v in row]
    return StratifiedTable(((labels[0], CellCounts(*row[:4])), (labels[1], CellCounts(*row[4:]))))


@dataclass
class SweepSummary:
    tables: int = 0
    flag_counts: np.ndarray = field(default_factory=lambda: np.zeros(K.NFLAGS, dtype=np.int64))
    violations: dict = field(default_factory=lambda: {name: 0 for name in PROPERTIES})
    examples: dict = field(default_factory=dict)  # first counterexample row per property

    def add(self, rows: np.ndarray, flags: np.ndarray) -> None:
        self.tables += len(rows)
        self.flag_counts += flags.sum(axis=0, dtype=np.int64)
        for name, (premise, conclusion) in PROPERTIES.items():
            bad = flags[:, premise].astype(bool)
            if name == "avoidance":
                bad &= (flags[:, K.WEAK] | flags[:, K.MIRROR]).astype(bool)
            else:
                bad &= ~flags[:, conclusion].astype(bool)
            count = int(bad.sum())
            if count:
                self.violations[name] += count
                self.examples.setdefault(name, rows[np.flatnonzero(bad)[0]].tolist())

    @property
    def clean(self) -> bool:
        return not any(self.violations.values())

    def count(self, flag: int) -> int:
        return int(self.flag_counts[flag])


def sweep(chunks, backend: Optional[str] = None) -> SweepSummary:
    """Run the kernel over an array or an iterable of ``(n, 8)`` arrays."""
    if isinstance(chunks, np.ndarray):
        chunks = [chunks]
    summary = SweepSummary()
    for rows in chunks:
        summary.add(rows, K.sweep_flags(rows, backend=backend))
    return summary
