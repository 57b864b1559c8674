"""Two-segment diagram of the stratum rates and the pooled rates.

The upper unit segment carries the exposed arm ``p(x|y,z')``, ``p(x|y,z)``
and the pooled ``p(x|y)``; the lower one the same for ``y'``.  The pooled
mark cuts the segment between the two stratum marks into pieces whose
lengths stand in the ratio ``p(z|.) : p(z'|.)``; those pieces get braces.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Optional
from xml.sax.saxutils import escape

from .analysis import stratum_weights
from .errors import NotBinaryStratifier
from .tables import StratifiedTable, cond_prob, pool

LABEL_STYLES = ("symbols", "values", "both", "none")


@dataclass(frozen=True)
class FigureModel:
    top_marks: tuple  # p(x|y,z'), p(x|y,z), p(x|y)
    bottom_marks: tuple  # p(x|y',z'), p(x|y',z), p(x|y')
    ratio_labels: tuple  # (p(z|y), p(z'|y)) and (p(z|y'), p(z'|y')); None where degenerate
    overlap_interval: Optional[tuple]
    reversal_possible: bool

    @property
    def ratio_texts(self) -> tuple:
        return tuple(None if r is None else ratio_text(*r) for r in self.ratio_labels)


def ratio_text(p: Fraction, q: Fraction) -> str:
    """``1/4, 3/4`` -> ``"1:3"``."""
    p, q = Fraction(p), Fraction(q)
    den = p.denominator * q.denominator // gcd(p.denominator, q.denominator)
    m, n = int(p * den), int(q * den)
    g = gcd(m, n) or 1
    return f"{m // g}:{n // g}"


def build_figure(stratified: StratifiedTable) -> FigureModel:
    if len(stratified) != 2:
        raise NotBinaryStratifier(f"the figure needs a binary stratifier, got K={len(stratified)}")
    (lz, tz), (lz_, tz_) = stratified.strata
    pooled = pool(stratified)
    sides = []
    for exposed in (True, False):
        sides.append(
            (
                cond_prob(tz_, True, exposed, stratum=lz_),
                cond_prob(tz, True, exposed, stratum=lz),
                cond_prob(pooled, True, exposed),
            )
        )
    top, bottom = sides
    ratios = []
    for exposed, marks in ((True, top), (False, bottom)):
        if marks[0] == marks[1]:
            ratios.append(None)
        else:
            w = stratum_weights(stratified, exposed)
            ratios.append((w[0], w[1]))
    lo_t, hi_t = min(top[:2]), max(top[:2])
    lo_b, hi_b = min(bottom[:2]), max(bottom[:2])
    lo, hi = max(lo_t, lo_b), min(hi_t, hi_b)
    return FigureModel(
        top_marks=top,
        bottom_marks=bottom,
        ratio_labels=tuple(ratios),
        overlap_interval=(lo, hi) if lo <= hi else None,
        reversal_possible=lo_t < hi_b and lo_b < hi_t,
    )


def _f(v) -> str:
    return f"{float(v):.6f}"


_SYMBOLS = {
    True: ("p(x|y,z')", "p(x|y,z)", "p(x|y)"),
    False: ("p(x|y',z')", "p(x|y',z)", "p(x|y')"),
}
_WEIGHT_SYMBOLS = {True: ("{p(z|y)}", "{p(z'|y)}"), False: ("{p(z|y')}", "{p(z'|y')}")}


def _mark_label(style, symbol, value):
    if style == "symbols":
        return symbol
    if style == "values":
        return str(value)
    if style == "both":
        return f"{symbol} = {value}"
    return None


def render_svg(
    model: FigureModel,
    width: int = 600,
    labels: str = "symbols",
    padding: int = 90,
) -> str:
    """SVG 1.1 text for ``model``; identical input gives identical bytes.

    Inside the translated group an x coordinate is exactly
    ``probability * width``.
    """
    if labels not in LABEL_STYLES:
        raise ValueError(f"labels must be one of {LABEL_STYLES}")
    y_top, y_bot = 70, 230
    height = 300
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width + 2 * padding}" '
        f'height="{height}" viewBox="0 0 {width + 2 * padding} {height}">',
        '<style>text{font-family:serif;font-size:13px}'
        ".seg{stroke:#808080;stroke-width:2}.link{stroke:#808080;stroke-width:1.5}"
        ".brace{fill:none;stroke:#404040;stroke-width:1}</style>",
        f'<g transform="translate({padding},0)">',
        f'<line class="seg" x1="0" y1="{y_top}" x2="{width}" y2="{y_top}"/>',
        f'<line class="seg" x1="0" y1="{y_bot}" x2="{width}" y2="{y_bot}"/>',
        f'<line class="seg" x1="0" y1="{y_top}" x2="0" y2="{y_bot}"/>',
        f'<line class="seg" x1="{width}" y1="{y_top}" x2="{width}" y2="{y_bot}"/>',
        f'<text x="0" y="{y_bot + 58}" text-anchor="middle">0</text>',
        f'<text x="{width}" y="{y_bot + 58}" text-anchor="middle">1</text>',
    ]
    names = ("z-prime", "z", "pooled")
    for idx, name in enumerate(names):
        xt = _f(model.top_marks[idx] * width)
        xb = _f(model.bottom_marks[idx] * width)
        dash = ' stroke-dasharray="4 3"' if name == "pooled" else ""
        out.append(
            f'<line class="link" data-mark="{name}" x1="{xb}" y1="{y_bot}" '
            f'x2="{xt}" y2="{y_top}"{dash}/>'
        )
    for exposed, marks, y, dy in (
        (True, model.top_marks, y_top, -12),
        (False, model.bottom_marks, y_bot, 22),
    ):
        arm = "y" if exposed else "y-prime"
        for idx, name in enumerate(names):
            x = _f(marks[idx] * width)
            out.append(
                f'<circle data-arm="{arm}" data-mark="{name}" cx="{x}" cy="{y}" r="3"/>'
            )
            text = _mark_label(labels, _SYMBOLS[exposed][idx], marks[idx])
            if text is not None:
                # labels sit outside the band; the pooled label one row further out
                off = dy if name != "pooled" else dy + (-16 if exposed else 16)
                out.append(
                    f'<text x="{x}" y="{y + off}" text-anchor="middle">{escape(text)}</text>'
                )
    for exposed, marks, ratio, y in (
        (True, model.top_marks, model.ratio_labels[0], y_top),
        (False, model.bottom_marks, model.ratio_labels[1], y_bot),
    ):
        if ratio is None:
            continue
        if labels != "none":
            out.append(
                f'<text class="ratio" x="{width + 12}" y="{y + 4}" text-anchor="start">'
                f"{ratio_text(*ratio)}</text>"
            )
        # the piece touching the z' mark is proportional to p(z|.), the other to p(z'|.)
        pieces = ((marks[0], marks[2], 0), (marks[2], marks[1], 1))
        sgn = 1 if exposed else -1
        for start, end, which in pieces:
            x1, x2 = _f(start * width), _f(end * width)
            xm = _f((start + end) / 2 * width)
            yb = y + sgn * 14
            yc = y + sgn * 24
            out.append(
                f'<path class="brace" d="M {x1} {y + sgn * 4} Q {x1} {yb} {xm} {yc} '
                f'Q {x2} {yb} {x2} {y + sgn * 4}"/>'
            )
            if labels == "none":
                continue
            if labels == "symbols":
                text = _WEIGHT_SYMBOLS[exposed][which]
            else:
                text = "{" + str(ratio[which]) + "}"
            out.append(
                f'<text x="{xm}" y="{yc + sgn * 14}" text-anchor="middle">{escape(text)}</text>'
            )
    if not model.reversal_possible:
        out.append(
            f'<text x="{_f(width / 2)}" y="{(y_top + y_bot) // 2}" text-anchor="middle">'
            "no reversal possible</text>"
        )
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
