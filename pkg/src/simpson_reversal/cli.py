"""Command-line entry point: ``simpson-reversal <command> ...``.

Exit status: 0 on success, 1 on invalid input, 2 when synthesis finds no
split at the finest resolution searched.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from pathlib import Path

from . import __version__
from .analysis import detect_reversal
from .errors import InfeasibleAtResolution, ValidationError
from .figure import LABEL_STYLES, build_figure, render_svg
from .ingest import DEFAULT_MAX_STRATA, ColumnMapping, aggregate, read_records, scan_covariates
from .mixture import MixtureSpec, mixture_from_table, mixture_predict
from .serialize import (
    dumps,
    marginal_from_dict,
    rational,
    report_to_dict,
    synthesis_to_dict,
    table_from_dict,
)
from .synthesis import FRACTIONAL, INTEGER, SynthesisSpec, synthesize_reverser
from .tables import CellCounts, Sign, to_fraction

log = logging.getLogger("simpson_reversal")

EXIT_OK, EXIT_INVALID, EXIT_INFEASIBLE = 0, 1, 2


def _split_list(text):
    return [part.strip() for part in text.split(",") if part.strip()]


def _input_format(args) -> str:
    if args.format:
        return args.format
    return "json" if str(args.input).lower().endswith(".json") else "dsv"


def _mapping(args, stratifiers=()) -> ColumnMapping:
    if not args.outcome or not args.exposure:
        raise ValidationError("dsv input needs --outcome and --exposure")
    return ColumnMapping(
        outcome=args.outcome,
        exposure=args.exposure,
        stratifiers=tuple(stratifiers),
        success_label=args.success_label,
        exposed_label=args.exposed_label,
        failure_label=args.failure_label,
        unexposed_label=args.unexposed_label,
        max_strata=args.max_strata,
    )


def _load_json(path):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from None


def _load_table(args):
    if args.input is None:
        raise ValidationError("--input is required")
    if _input_format(args) == "json":
        return table_from_dict(_load_json(args.input))
    if not args.stratifier:
        raise ValidationError("dsv input needs --stratifier")
    records = read_records(args.input, args.delimiter)
    return aggregate(records, _mapping(args), args.stratifier)


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_analyze(args) -> int:
    table = _load_table(args)
    report = detect_reversal(table, skip_empty=args.skip_empty)
    doc = report_to_dict(report)
    doc["criterion"] = "strict" if args.strict else "weak"
    doc["reversal_detected"] = report.reversed_under(args.strict)
    for label, side in report.small_margins:
        log.warning("stratum %r: conditioning margin %s is below 30; counts are small", label, side)
    if args.svg:
        Path(args.svg).write_text(
            render_svg(build_figure(table), width=args.width, labels=args.labels), encoding="utf-8"
        )
    _emit(dumps(doc), args.out)
    return EXIT_OK


def cmd_scan(args) -> int:
    names = []
    for item in args.stratifiers or []:
        names.extend(_split_list(item))
    records = read_records(args.input, args.delimiter)
    result = scan_covariates(records, _mapping(args, names), skip_empty=args.skip_empty)
    rows = []
    for entry in result:
        row = {"name": entry.name}
        if entry.report is None:
            row["status"] = "skipped"
            row["skip_reason"] = entry.skip_reason
        else:
            row["status"] = entry.report.reversal.value
            row["mirror"] = entry.report.mirror
            row["distortion"] = rational(entry.distortion)
            row["report"] = report_to_dict(entry.report)
        rows.append(row)
    _emit(dumps({"candidates": rows}), args.out)
    return EXIT_OK


def cmd_synthesize(args) -> int:
    if args.counts:
        cells = _split_list(args.counts)
        marginal = CellCounts.of(cells)
    elif args.input:
        marginal = marginal_from_dict(_load_json(args.input))
    else:
        raise ValidationError("give --counts a,b,c,d or --input table.json")
    spec = SynthesisSpec(
        marginal=marginal,
        margin_epsilon=to_fraction(args.epsilon) if args.epsilon else None,
        target_direction=Sign(args.target) if args.target else None,
        mode=args.mode,
        allow_degenerate=args.allow_degenerate,
        max_level=args.max_level,
    )
    result = synthesize_reverser(spec)
    _emit(dumps(synthesis_to_dict(result)), args.out)
    return EXIT_OK


def cmd_predict(args) -> int:
    priors = _split_list(args.priors)
    if args.conditionals:
        value = mixture_predict(MixtureSpec.from_pairs(_split_list(args.conditionals), priors))
    else:
        table = _load_table(args)
        value = mixture_from_table(
            table,
            priors,
            success=args.target_outcome == "success",
            exposed=args.arm == "exposed",
        )
    _emit(dumps({"probability": rational(value)}), args.out)
    return EXIT_OK


def cmd_figure(args) -> int:
    table = _load_table(args)
    _emit(render_svg(build_figure(table), width=args.width, labels=args.labels), args.out)
    return EXIT_OK


def _add_input(p, mapping=True):
    p.add_argument("--input", "-i", help="table JSON or delimiter-separated records")
    p.add_argument("--format", choices=("dsv", "json"), help="default: by file extension")
    p.add_argument("--delimiter", help="field delimiter for dsv (default: sniffed)")
    if mapping:
        p.add_argument("--stratifier", help="stratifier column (dsv input)")
    p.add_argument("--outcome", help="outcome column X")
    p.add_argument("--exposure", help="exposure column Y")
    p.add_argument("--success-label", default="1", help="value of X counted as success")
    p.add_argument("--exposed-label", default="1", help="value of Y counted as exposed")
    p.add_argument("--failure-label", help="value of X counted as failure (default: the other one)")
    p.add_argument("--unexposed-label", help="value of Y counted as unexposed")
    p.add_argument("--max-strata", type=int, default=DEFAULT_MAX_STRATA)
    p.add_argument("--out", "-o", help="output file (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="simpson-reversal",
        description="Detect, explain and construct association reversal in 2x2xK tables.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="reversal report for a stratified table")
    _add_input(p)
    crit = p.add_mutually_exclusive_group()
    crit.add_argument("--strict", dest="strict", action="store_true", help="count only strict reversal")
    crit.add_argument("--weak", dest="strict", action="store_false", help="count weak reversal too (default)")
    p.add_argument("--skip-empty", action="store_true", help="skip strata with an empty margin")
    p.add_argument("--svg", help="also write the segment figure here")
    p.add_argument("--width", type=int, default=600)
    p.add_argument("--labels", choices=LABEL_STYLES, default="symbols")
    p.set_defaults(func=cmd_analyze, strict=False)

    p = sub.add_parser("scan", help="check every candidate stratifier column")
    _add_input(p, mapping=False)
    p.add_argument("--stratifiers", action="append", help="comma-separated column names (repeatable)")
    p.add_argument("--skip-empty", action="store_true")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("synthesize", help="build a stratifier that reverses a marginal table")
    p.add_argument("--input", "-i", help='JSON with "marginal" or "strata" (pooled)')
    p.add_argument("--counts", help="marginal cells a,b,c,d (fractions allowed)")
    p.add_argument("--epsilon", help="required gap inside each stratum, e.g. 1/100")
    p.add_argument("--mode", choices=(FRACTIONAL, INTEGER), default=FRACTIONAL)
    p.add_argument("--target", choices=("positive", "negative"))
    p.add_argument("--allow-degenerate", action="store_true", help="accept a zero marginal delta")
    p.add_argument("--max-level", type=int, default=6, help="finest dyadic level 2**-L")
    p.add_argument("--out", "-o")
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("predict", help="mixture prediction over selection mechanisms")
    _add_input(p)
    p.add_argument("--priors", required=True, help="one prior per stratum, then the pooled one")
    p.add_argument("--conditionals", help="use these conditionals instead of a table")
    p.add_argument("--target-outcome", choices=("success", "failure"), default="success")
    p.add_argument("--arm", choices=("exposed", "unexposed"), default="exposed")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("figure", help="SVG of the two-segment diagram")
    _add_input(p)
    p.add_argument("--width", type=int, default=600)
    p.add_argument("--labels", choices=LABEL_STYLES, default="symbols")
    p.set_defaults(func=cmd_figure)
    return parser


def _show_warning(message, category, filename, lineno, file=None, line=None):
    log.warning("%s", message)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s: %(message)s"))
    log.addHandler(handler)
    log.setLevel(logging.INFO)
    log.propagate = False
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            warnings.showwarning = _show_warning
            return args.func(args)
    except InfeasibleAtResolution as exc:
        log.error("%s", exc)
        return EXIT_INFEASIBLE
    except (ValidationError, OSError) as exc:
        log.error("%s", exc)
        return EXIT_INVALID
    finally:
        log.removeHandler(handler)


if __name__ == "__main__":
    sys.exit(main())
