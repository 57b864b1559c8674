"""JSON documents for tables, reports and synthesis results.

Rationals in reports are written as ``{"num": 1, "den": 4, "decimal": "0.25"}``.
Table cells are written as plain integers, or as ``"num/den"`` strings when
fractional.  The layout is described in ``docs/formats.md``.
"""

from __future__ import annotations

import json
from fractions import Fraction

from .analysis import ReversalReport
from .errors import ValidationError
from .synthesis import SynthesisResult
from .tables import CellCounts, StratifiedTable, pool

CELL_KEYS = ("exposed_success", "exposed_failure", "unexposed_success", "unexposed_failure")


def rational(x) -> dict:
    f = Fraction(x)
    return {"num": f.numerator, "den": f.denominator, "decimal": f"{float(f):.12g}"}


def _cell(v):
    if isinstance(v, int):
        return v
    f = Fraction(v)
    return f.numerator if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def counts_to_dict(t: CellCounts) -> dict:
    return dict(zip(CELL_KEYS, (_cell(v) for v in t.cells)))


def counts_from_dict(d: dict) -> CellCounts:
    missing = [k for k in CELL_KEYS if k not in d]
    if missing:
        raise ValidationError(f"table cell(s) missing: {', '.join(missing)}")
    return CellCounts(*(d[k] for k in CELL_KEYS))


def table_to_dict(st: StratifiedTable) -> dict:
    return {"strata": [{"label": label, **counts_to_dict(t)} for label, t in st]}


def table_from_dict(doc: dict) -> StratifiedTable:
    if not isinstance(doc, dict) or not isinstance(doc.get("strata"), list):
        raise ValidationError('table JSON needs a "strata" list')
    strata = []
    for i, item in enumerate(doc["strata"]):
        if not isinstance(item, dict):
            raise ValidationError(f"stratum #{i} is not an object")
        strata.append((item.get("label", str(i)), counts_from_dict(item)))
    return StratifiedTable(tuple(strata))


def marginal_from_dict(doc: dict) -> CellCounts:
    """A single 2x2 table: either ``{"marginal": {...}}`` or a stratified table, pooled."""
    if isinstance(doc, dict) and isinstance(doc.get("marginal"), dict):
        return counts_from_dict(doc["marginal"])
    return pool(table_from_dict(doc))


def _measure(m) -> dict:
    return {"delta": rational(m.delta), "sign": m.sign.value}


def report_to_dict(r: ReversalReport) -> dict:
    strata = []
    for i, label in enumerate(r.labels):
        strata.append(
            {
                "label": label,
                "association": _measure(r.per_stratum[i]),
                "p_x_given_y": rational(r.exposed_rates[i]),
                "p_x_given_not_y": rational(r.unexposed_rates[i]),
                "weight_u": rational(r.weights_u[i]),
                "weight_v": rational(r.weights_v[i]),
                "weight_gap": rational(r.weight_gaps[i]),
            }
        )
    return {
        "reversal": r.reversal.value,
        "mirror": r.mirror,
        "case_label": r.case_label.value,
        "necessary_condition_holds": r.necessary_condition_holds,
        "sufficient_avoidance_holds": r.sufficient_avoidance_holds,
        "interval_conditions_extended": r.interval_conditions_extended,
        "pooled": {
            "association": _measure(r.pooled),
            "p_x_given_y": rational(r.pooled_exposed_rate),
            "p_x_given_not_y": rational(r.pooled_unexposed_rate),
        },
        "strata": strata,
        "skipped": [{"label": label, "reason": why} for label, why in r.skipped],
        "small_margins": [{"label": label, "margin": side} for label, side in r.small_margins],
    }


def synthesis_to_dict(res: SynthesisResult) -> dict:
    return {
        "mode": res.mode,
        "level": res.level,
        "split_fractions": dict(zip(CELL_KEYS, (rational(f) for f in res.split_fractions))),
        "table": table_to_dict(res.stratified),
        "report": report_to_dict(res.certificate),
    }


def dumps(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"
