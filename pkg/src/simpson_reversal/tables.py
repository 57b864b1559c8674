"""Exact 2x2 and 2x2xK count tables.

Cell naming follows the usual epidemiological layout, with X the outcome
(success ``x`` / failure ``x'``) and Y the exposure (exposed ``y`` /
unexposed ``y'``)::

                 x     x'
        y        a     b
        y'       c     d

Counts are kept as Python ints, or as :class:`fractions.Fraction` when a
table holds probabilities or fractional weights.  Nothing is ever rounded.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Iterator, Mapping, Sequence, Union

from .errors import EmptyStratifiedTable, EmptyTable, ValidationError, ZeroMargin

Number = Union[int, Fraction]

# Sign decisions on tables built from float inputs treat |delta| <= this as zero.
FLOAT_TOLERANCE = Fraction(1, 10**12)


def as_rational(value) -> tuple[Number, bool]:
    """Convert ``value`` to an exact number; returns ``(number, came_from_float)``.

    Floats go through their shortest decimal repr, so ``0.7`` becomes
    ``7/10`` rather than the binary expansion.  Strings may be ``"7/10"``,
    ``"0.7"`` or ``"7"``.
    """
    if isinstance(value, bool):
        raise ValidationError(f"expected a number, got {value!r}")
    if isinstance(value, int):
        return value, False
    if isinstance(value, Rational):
        f = Fraction(value)
        return (f.numerator if f.denominator == 1 else f), False
    if isinstance(value, float):
        if value != value or value in (float("inf"), float("-inf")):
            raise ValidationError(f"non-finite value {value!r}")
        f = Fraction(repr(value))
        return (f.numerator if f.denominator == 1 else f), True
    if isinstance(value, Decimal):
        f = Fraction(value)
        return (f.numerator if f.denominator == 1 else f), False
    if isinstance(value, str):
        try:
            f = Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise ValidationError(f"cannot parse {value!r} as a number") from None
        return (f.numerator if f.denominator == 1 else f), False
    raise ValidationError(f"expected a number, got {type(value).__name__}")


def to_fraction(value) -> Fraction:
    return Fraction(as_rational(value)[0])


@dataclass(frozen=True)
class CellCounts:
    """One 2x2 table; ``a=n(x,y)``, ``b=n(x',y)``, ``c=n(x,y')``, ``d=n(x',y')``."""

    a: Number
    b: Number
    c: Number
    d: Number
    inexact: bool = field(default=False, compare=False)

    def __post_init__(self):
        inexact = self.inexact
        for name in "abcd":
            v, from_float = as_rational(getattr(self, name))
            if v < 0:
                raise ValidationError(f"cell {name} is negative ({v})")
            inexact = inexact or from_float
            object.__setattr__(self, name, v)
        object.__setattr__(self, "inexact", inexact)

    @classmethod
    def of(cls, cells: Sequence) -> "CellCounts":
        if len(cells) != 4:
            raise ValidationError(f"a 2x2 table needs 4 cells, got {len(cells)}")
        return cls(*cells)

    @property
    def cells(self) -> tuple:
        return (self.a, self.b, self.c, self.d)

    @property
    def total(self) -> Number:
        return self.a + self.b + self.c + self.d

    @property
    def exposed(self) -> Number:
        return self.a + self.b

    @property
    def unexposed(self) -> Number:
        return self.c + self.d

    @property
    def successes(self) -> Number:
        return self.a + self.c

    @property
    def failures(self) -> Number:
        return self.b + self.d

    def margin(self, exposed: bool = True) -> Number:
        return self.exposed if exposed else self.unexposed

    @property
    def is_integral(self) -> bool:
        return all(isinstance(v, int) for v in self.cells)

    def __add__(self, other: "CellCounts") -> "CellCounts":
        if not isinstance(other, CellCounts):
            return NotImplemented
        return CellCounts(
            self.a + other.a,
            self.b + other.b,
            self.c + other.c,
            self.d + other.d,
            inexact=self.inexact or other.inexact,
        )

    def scaled(self, factor) -> "CellCounts":
        f = to_fraction(factor)
        return CellCounts(*(_norm(v * f) for v in self.cells), inexact=self.inexact)

    def __repr__(self):
        return f"CellCounts({', '.join(str(v) for v in self.cells)})"


def _norm(v) -> Number:
    if isinstance(v, Fraction) and v.denominator == 1:
        return v.numerator
    return v


@dataclass(frozen=True)
class StratifiedTable:
    """K labelled strata of a stratifier Z, each a :class:`CellCounts`.

    Construction accepts K >= 1 so that aggregation of a single-valued
    column is representable; the reversal analyses require K >= 2.
    """

    strata: tuple

    def __post_init__(self):
        items = self.strata.items() if isinstance(self.strata, Mapping) else self.strata
        norm = []
        seen = set()
        for label, counts in items:
            label = str(label)
            if label in seen:
                raise ValidationError(f"duplicate stratum label {label!r}")
            seen.add(label)
            if not isinstance(counts, CellCounts):
                counts = CellCounts.of(counts)
            norm.append((label, counts))
        if not norm:
            raise EmptyStratifiedTable("a stratified table needs at least one stratum")
        object.__setattr__(self, "strata", tuple(norm))

    @classmethod
    def from_counts(cls, counts: Mapping[str, Sequence]) -> "StratifiedTable":
        return cls(tuple((k, CellCounts.of(v)) for k, v in counts.items()))

    def __len__(self) -> int:
        return len(self.strata)

    def __iter__(self) -> Iterator[tuple[str, CellCounts]]:
        return iter(self.strata)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.strata)

    @property
    def tables(self) -> tuple[CellCounts, ...]:
        return tuple(t for _, t in self.strata)

    @property
    def total(self) -> Number:
        return sum((t.total for t in self.tables), 0)

    @property
    def inexact(self) -> bool:
        return any(t.inexact for t in self.tables)

    def __getitem__(self, key) -> CellCounts:
        if isinstance(key, int):
            return self.strata[key][1]
        for label, t in self.strata:
            if label == key:
                return t
        raise KeyError(key)

    def require_strata(self, k_min: int = 2) -> None:
        if len(self) < k_min:
            raise EmptyStratifiedTable(
                f"need at least {k_min} strata, got {len(self)}"
            )


class Sign(str, enum.Enum):
    POSITIVE = "positive"
    ZERO = "zero"
    NEGATIVE = "negative"

    def as_int(self) -> int:
        return {"positive": 1, "zero": 0, "negative": -1}[self.value]

    def flipped(self) -> "Sign":
        return {
            Sign.POSITIVE: Sign.NEGATIVE,
            Sign.NEGATIVE: Sign.POSITIVE,
            Sign.ZERO: Sign.ZERO,
        }[self]


@dataclass(frozen=True)
class AssociationMeasure:
    """Risk difference ``p(x|y) - p(x|y')`` and its sign."""

    delta: Fraction
    sign: Sign

    @classmethod
    def from_delta(cls, delta, inexact: bool = False) -> "AssociationMeasure":
        delta = Fraction(delta)
        if inexact and abs(delta) <= FLOAT_TOLERANCE:
            return cls(delta, Sign.ZERO)
        if delta > 0:
            return cls(delta, Sign.POSITIVE)
        if delta < 0:
            return cls(delta, Sign.NEGATIVE)
        return cls(delta, Sign.ZERO)


def cond_prob(
    table: CellCounts, success: bool = True, exposed: bool = True, *, stratum=None
) -> Fraction:
    """``p(outcome | exposure)`` as an exact fraction of counts.

    >>> cond_prob(CellCounts(7, 3, 18, 12))
    Fraction(7, 10)
    """
    margin = table.margin(exposed)
    if margin == 0:
        side = "y" if exposed else "y'"
        where = f" in stratum {stratum!r}" if stratum is not None else ""
        raise ZeroMargin(
            f"conditioning margin {side} is empty{where}", stratum=stratum, margin=side
        )
    if exposed:
        num = table.a if success else table.b
    else:
        num = table.c if success else table.d
    return Fraction(num) / Fraction(margin)


def pool(stratified: StratifiedTable) -> CellCounts:
    """Cell-wise sum over all strata."""
    out = CellCounts(0, 0, 0, 0)
    for t in stratified.tables:
        out = out + t
    return out


def association(table: CellCounts, *, stratum=None) -> AssociationMeasure:
    delta = cond_prob(table, True, True, stratum=stratum) - cond_prob(
        table, True, False, stratum=stratum
    )
    return AssociationMeasure.from_delta(delta, table.inexact)


def to_joint(stratified: StratifiedTable) -> StratifiedTable:
    """Normalise to the joint distribution ``p(x, y, z)``; entries sum to 1."""
    n = stratified.total
    if n == 0:
        raise EmptyTable("grand total is zero")
    inv = Fraction(1) / Fraction(n)
    return StratifiedTable(
        tuple(
            (label, CellCounts(*(Fraction(v) * inv for v in t.cells), inexact=t.inexact))
            for label, t in stratified
        )
    )


def relabel_outcome(obj):
    """Swap the success and failure labels of X.

    Works on a :class:`CellCounts` or a :class:`StratifiedTable`; every risk
    difference changes sign.
    """
    if isinstance(obj, CellCounts):
        return CellCounts(obj.b, obj.a, obj.d, obj.c, inexact=obj.inexact)
    return StratifiedTable(tuple((label, relabel_outcome(t)) for label, t in obj))


def relabel_exposure(obj):
    """Swap the exposed and unexposed labels of Y."""
    if isinstance(obj, CellCounts):
        return CellCounts(obj.c, obj.d, obj.a, obj.b, inexact=obj.inexact)
    return StratifiedTable(tuple((label, relabel_exposure(t)) for label, t in obj))


def stack(tables: Iterable[tuple[str, CellCounts]]) -> StratifiedTable:
    return StratifiedTable(tuple(tables))
