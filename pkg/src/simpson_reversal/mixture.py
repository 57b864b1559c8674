"""Predictions that average over an unknown selection mechanism.

If a new case may have been drawn from one stratum or from the pooled
population, and the draw mechanism ``T`` is independent of everything
else, then ``p(x | y) = sum_t p(x | y, T=t) p(T=t)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import PriorNotNormalized, ValidationError
from .tables import StratifiedTable, cond_prob, pool, to_fraction


@dataclass(frozen=True)
class Mechanism:
    label: str
    prior: Fraction
    conditional: Fraction

    def __post_init__(self):
        prior = to_fraction(self.prior)
        cond = to_fraction(self.conditional)
        if prior < 0:
            raise ValidationError(f"prior of {self.label!r} is negative")
        if not 0 <= cond <= 1:
            raise ValidationError(f"conditional of {self.label!r} is outside [0, 1]")
        object.__setattr__(self, "prior", prior)
        object.__setattr__(self, "conditional", cond)


@dataclass(frozen=True)
class MixtureSpec:
    mechanisms: tuple

    def __post_init__(self):
        mechs = tuple(m if isinstance(m, Mechanism) else Mechanism(*m) for m in self.mechanisms)
        if not mechs:
            raise ValidationError("a mixture needs at least one mechanism")
        object.__setattr__(self, "mechanisms", mechs)

    @classmethod
    def from_pairs(cls, conditionals: Sequence, priors: Sequence, labels=None) -> "MixtureSpec":
        if len(conditionals) != len(priors):
            raise ValidationError("conditionals and priors differ in length")
        labels = labels or [f"T={i + 1}" for i in range(len(priors))]
        return cls(tuple(Mechanism(l, p, c) for l, c, p in zip(labels, conditionals, priors)))


def mixture_predict(spec: MixtureSpec) -> Fraction:
    """Exact prior-weighted average of the mechanism conditionals.

    >>> mixture_predict(MixtureSpec.from_pairs(["0.7", "0.3", "0.4"], ["0.25", "0.25", "0.5"]))
    Fraction(9, 20)
    """
    total = sum((m.prior for m in spec.mechanisms), Fraction(0))
    if total != 1:
        raise PriorNotNormalized(f"priors sum to {total}, deficit {1 - total}", deficit=1 - total)
    return sum((m.prior * m.conditional for m in spec.mechanisms), Fraction(0))


def mixture_from_table(
    stratified: StratifiedTable,
    priors: Sequence,
    *,
    success: bool = True,
    exposed: bool = True,
) -> Fraction:
    """Mixture over "draw from stratum k" for each stratum plus "draw from the pool".

    ``priors`` lists one weight per stratum, in table order, followed by the
    weight of the pooled population.
    """
    if len(priors) != len(stratified) + 1:
        raise ValidationError(
            f"expected {len(stratified) + 1} priors (strata then pooled), got {len(priors)}"
        )
    labels = list(stratified.labels) + ["pooled"]
    conds = [cond_prob(t, success, exposed, stratum=label) for label, t in stratified]
    conds.append(cond_prob(pool(stratified), success, exposed, stratum="pooled"))
    return mixture_predict(MixtureSpec.from_pairs(conds, priors, labels))
