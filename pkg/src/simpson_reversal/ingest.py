"""Record files to stratified tables, and the covariate scan."""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .analysis import Reversal, ReversalReport, detect_reversal
from .errors import (
    EmptyInput,
    EmptyStratifiedTable,
    NonBinaryValue,
    TooManyStrata,
    UnknownColumn,
    ValidationError,
    ZeroMargin,
)
from .tables import CellCounts, StratifiedTable

MISSING = frozenset({"", "NA", "N/A", "NaN", "nan", "null", "None"})
DEFAULT_MAX_STRATA = 16


class MissingValueWarning(UserWarning):
    pass


@dataclass(frozen=True)
class ColumnMapping:
    outcome: str
    exposure: str
    stratifiers: tuple = ()
    success_label: str = "1"
    exposed_label: str = "1"
    failure_label: Optional[str] = None
    unexposed_label: Optional[str] = None
    max_strata: int = DEFAULT_MAX_STRATA

    def __post_init__(self):
        if isinstance(self.stratifiers, str):
            object.__setattr__(self, "stratifiers", (self.stratifiers,))
        else:
            object.__setattr__(self, "stratifiers", tuple(self.stratifiers))


def sniff_delimiter(path, sample: str) -> str:
    if str(path).endswith((".tsv", ".tab")):
        return "\t"
    try:
        return csv.Sniffer().sniff(sample, delimiters=",;\t|").delimiter
    except csv.Error:
        return ","


def read_records(path, delimiter: Optional[str] = None) -> list[dict]:
    """Read a delimiter-separated file with a header row."""
    text = Path(path).read_text(encoding="utf-8-sig")
    if delimiter is None:
        delimiter = sniff_delimiter(path, text[:4096])
    reader = csv.DictReader(text.splitlines(), delimiter=delimiter)
    records = [dict(row) for row in reader]
    if reader.fieldnames is None:
        raise EmptyInput(f"{path}: no header row")
    return records


def write_records(path, records: Sequence[dict], fieldnames: Sequence[str], delimiter=",") -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=list(fieldnames), delimiter=delimiter)
        w.writeheader()
        w.writerows(records)


class _BinaryColumn:
    """Maps a text column onto True/False given the positive label."""

    def __init__(self, column, positive, negative=None):
        self.column = column
        self.positive = str(positive)
        self.negative = None if negative is None else str(negative)

    def __call__(self, value: str) -> bool:
        if value == self.positive:
            return True
        if self.negative is None:
            self.negative = value
            return False
        if value == self.negative:
            return False
        raise NonBinaryValue(
            f"column {self.column!r} has a third value {value!r} "
            f"(expected {self.positive!r} or {self.negative!r})",
            column=self.column,
            label=value,
        )


def _is_missing(v) -> bool:
    return v is None or str(v).strip() in MISSING


def _check_columns(records, names: Iterable[str]) -> None:
    header = set(records[0].keys())
    for name in names:
        if name not in header:
            raise UnknownColumn(f"column {name!r} not found; have {sorted(header)}")


def aggregate(records: Sequence[dict], mapping: ColumnMapping, stratifier: str) -> StratifiedTable:
    """Count records per (outcome, exposure, stratum); strata in order of first appearance.

    Records with a missing value in any of the three columns are dropped
    and reported through a :class:`MissingValueWarning`.
    """
    if not records:
        raise EmptyInput("no records")
    _check_columns(records, (mapping.outcome, mapping.exposure, stratifier))
    outcome = _BinaryColumn(mapping.outcome, mapping.success_label, mapping.failure_label)
    exposure = _BinaryColumn(mapping.exposure, mapping.exposed_label, mapping.unexposed_label)
    counts: dict[str, list[int]] = {}
    dropped = 0
    for rec in records:
        xv, yv, zv = rec.get(mapping.outcome), rec.get(mapping.exposure), rec.get(stratifier)
        if _is_missing(xv) or _is_missing(yv) or _is_missing(zv):
            dropped += 1
            continue
        x, y = outcome(str(xv).strip()), exposure(str(yv).strip())
        z = str(zv).strip()
        cell = counts.get(z)
        if cell is None:
            if len(counts) >= mapping.max_strata:
                raise TooManyStrata(
                    f"column {stratifier!r} has more than {mapping.max_strata} distinct values"
                )
            cell = counts[z] = [0, 0, 0, 0]
        cell[(0 if y else 2) + (0 if x else 1)] += 1
    if dropped:
        warnings.warn(
            f"dropped {dropped} record(s) with a missing value in "
            f"{mapping.outcome!r}, {mapping.exposure!r} or {stratifier!r}",
            MissingValueWarning,
            stacklevel=2,
        )
    if not counts:
        raise EmptyInput("every record had a missing value")
    return StratifiedTable(tuple((z, CellCounts(*c)) for z, c in counts.items()))


def disaggregate(
    stratified: StratifiedTable, mapping: ColumnMapping, stratifier: str
) -> list[dict]:
    """Expand integer counts back into one record per unit."""
    fail = mapping.failure_label if mapping.failure_label is not None else "0"
    unexp = mapping.unexposed_label if mapping.unexposed_label is not None else "0"
    if fail == mapping.success_label or unexp == mapping.exposed_label:
        raise ValidationError("success/failure (or exposed/unexposed) labels must differ")
    records = []
    for label, t in stratified:
        if not t.is_integral:
            raise ValidationError("only integer counts can be expanded into records")
        for n, x, y in (
            (t.a, mapping.success_label, mapping.exposed_label),
            (t.b, fail, mapping.exposed_label),
            (t.c, mapping.success_label, unexp),
            (t.d, fail, unexp),
        ):
            records.extend(
                {mapping.outcome: x, mapping.exposure: y, stratifier: label} for _ in range(n)
            )
    return records


@dataclass(frozen=True)
class ScanEntry:
    name: str
    report: Optional[ReversalReport] = None
    skip_reason: Optional[str] = None
    distortion: Optional[Fraction] = None  # |pooled delta - weighted mean stratum delta|


@dataclass(frozen=True)
class ScanResult:
    entries: tuple

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    @property
    def flagged(self) -> tuple:
        return tuple(e.name for e in self.entries if e.report is not None and e.report.detected)


_STATUS_RANK = {Reversal.STRICT: 0, Reversal.WEAK: 1, Reversal.NONE: 2}


def _distortion(st: StratifiedTable, rep: ReversalReport) -> Fraction:
    kept = {label: t for label, t in st if label in rep.labels}
    total = Fraction(sum(t.total for t in kept.values()))
    mean = sum(
        (kept[label].total / total * m.delta for label, m in zip(rep.labels, rep.per_stratum)),
        Fraction(0),
    )
    return abs(rep.pooled.delta - mean)


def scan_covariates(
    records: Sequence[dict], mapping: ColumnMapping, *, skip_empty: bool = False
) -> ScanResult:
    """Aggregate and analyse every candidate stratifier column.

    Order: strict reversals, weak reversals, no reversal, skipped; inside a
    group, larger gap between the pooled delta and the size-weighted mean of
    the stratum deltas first; then input order.
    """
    if not mapping.stratifiers:
        return ScanResult(())
    if not records:
        raise EmptyInput("no records")
    _check_columns(records, (mapping.outcome, mapping.exposure, *mapping.stratifiers))
    scored = []
    for pos, name in enumerate(mapping.stratifiers):
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", MissingValueWarning)
                st = aggregate(records, mapping, name)
            rep = detect_reversal(st, skip_empty=skip_empty)
        except (ZeroMargin, EmptyStratifiedTable, TooManyStrata) as exc:
            scored.append(((3, 0, pos), ScanEntry(name, skip_reason=str(exc))))
            continue
        dist = _distortion(st, rep)
        scored.append(((_STATUS_RANK[rep.reversal], -dist, pos), ScanEntry(name, rep, None, dist)))
    scored.sort(key=lambda item: item[0])
    return ScanResult(tuple(entry for _, entry in scored))
