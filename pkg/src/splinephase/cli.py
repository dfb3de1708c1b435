"""``splinephase`` command-line interface.

Exit status: 0 success or passing check, 1 usage or input error,
2 counting-condition failure, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .errors import (
    ConditionsViolated,
    DegenerateChoice,
    IllConditioned,
    KnotSystemError,
    OutOfWindow,
    PreconditionViolated,
    RankDeficient,
    WitnessNotFound,
)
from .knot_core import BasisAtlas, KnotSystem, Window, build_atlas, format_rational, pad_system
from .reconstruction import build_reconstructor, reconstruct
from .sampling_conditions import ConditionReport, SampleSet, check, minimal_sequence
from .squared_space import product_basis, squared_dimension
from .witnesses import WitnessPair, complex_counterexample, real_ambiguity_witness

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_CONDITIONS = 2
EXIT_NUMERICAL = 3

MODE_FLAGS = {"linear-v": "linear_V", "phaseless-v": "phaseless_V", "linear-squared": "linear_squared"}
SPACE_KEYS = ("degree", "breakpoints", "multiplicities", "window", "auto_pad")


class InputError(ValueError):
    """Malformed input file, located by line and column (both 1-based)."""

    def __init__(self, source: str, line: int | None, column: int | None, message: str):
        where = source if line is None else f"{source}:{line}:{column}"
        super().__init__(f"{where}: {message}")
        self.source, self.line, self.column = source, line, column


# -- space files ---------------------------------------------------------------


@dataclass(frozen=True)
class SpaceSpec:
    system: KnotSystem
    window: Window
    auto_pad: bool = False

    def atlas(self) -> BasisAtlas:
        ks, w = pad_system(self.system, self.window) if self.auto_pad else (self.system, self.window)
        return build_atlas(ks, w)


def _split_items(text: str, col0: int):
    """Yield ``(item, column)`` for comma- or whitespace-separated items."""
    pos = 0
    for chunk in text.replace(",", " ").split(" "):
        if chunk:
            yield chunk, col0 + text.index(chunk, pos)
            pos = text.index(chunk, pos) + len(chunk)


def _parse_int(item: str, source, line, col) -> int:
    try:
        return int(item)
    except ValueError:
        raise InputError(source, line, col, f"expected an integer, got {item!r}") from None


def _parse_exact(item: str, source, line, col) -> Fraction:
    try:
        return Fraction(item)
    except (ValueError, ZeroDivisionError):
        raise InputError(source, line, col, f"malformed decimal {item!r}") from None


def parse_space(text: str, source: str = "<space>") -> SpaceSpec:
    """Parse ``key = value`` lines; ``#`` starts a comment.

    Keys: ``degree``, ``breakpoints`` (exact decimals or ``p/q``),
    ``multiplicities`` (default all 1), ``window`` (two storage indices) and
    ``auto_pad`` (``true``/``false``, default false).
    """
    seen: dict[str, tuple] = {}
    for ln, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        if not body.strip():
            continue
        if "=" not in body:
            raise InputError(source, ln, 1, "expected 'key = value'")
        key_part, value = body.split("=", 1)
        key = key_part.strip()
        kcol = len(key_part) - len(key_part.lstrip()) + 1
        if key not in SPACE_KEYS:
            raise InputError(source, ln, kcol, f"unknown key {key!r}")
        if key in seen:
            raise InputError(source, ln, kcol, f"duplicate key {key!r}")
        vcol = len(key_part) + 2
        items = list(_split_items(value, vcol))
        if not items:
            raise InputError(source, ln, vcol, f"missing value for {key!r}")
        seen[key] = (ln, items)

    for key in ("degree", "breakpoints", "window"):
        if key not in seen:
            raise InputError(source, 1, 1, f"missing key {key!r}")

    ln, items = seen["degree"]
    if len(items) != 1:
        raise InputError(source, ln, items[1][1], "degree takes one integer")
    degree = _parse_int(items[0][0], source, ln, items[0][1])

    ln, items = seen["breakpoints"]
    bps = [_parse_exact(it, source, ln, col) for it, col in items]

    if "multiplicities" in seen:
        ln, items = seen["multiplicities"]
        mults = [_parse_int(it, source, ln, col) for it, col in items]
        if len(mults) != len(bps):
            raise InputError(source, ln, items[0][1], f"{len(mults)} multiplicities for {len(bps)} breakpoints")
    else:
        mults = [1] * len(bps)

    ln, items = seen["window"]
    if len(items) != 2:
        raise InputError(source, ln, items[0][1], "window takes two breakpoint indices")
    lo, hi = (_parse_int(it, source, ln, col) for it, col in items)

    auto_pad = False
    if "auto_pad" in seen:
        ln, items = seen["auto_pad"]
        word = items[0][0].lower()
        if word not in ("true", "false", "yes", "no", "1", "0"):
            raise InputError(source, ln, items[0][1], f"auto_pad must be true or false, got {items[0][0]!r}")
        auto_pad = word in ("true", "yes", "1")

    try:
        return SpaceSpec(KnotSystem(degree, tuple(bps), tuple(mults)), Window(lo, hi), auto_pad)
    except KnotSystemError as exc:
        raise InputError(source, None, None, str(exc)) from None


def format_space(spec: SpaceSpec) -> str:
    ks, w = spec.system, spec.window
    return (
        f"degree = {ks.degree}\n"
        f"breakpoints = {', '.join(format_rational(b) for b in ks.breakpoints)}\n"
        f"multiplicities = {', '.join(map(str, ks.multiplicities))}\n"
        f"window = {w.start_index} {w.end_index}\n"
        f"auto_pad = {'true' if spec.auto_pad else 'false'}\n"
    )


# -- sample files --------------------------------------------------------------


@dataclass(frozen=True)
class SampleTable:
    points: tuple[Fraction, ...]
    values: tuple[float, ...] | None
    texts: tuple[str, ...]


def parse_samples(text: str, source: str = "<samples>", need_values: bool = False) -> SampleTable:
    """Parse CSV rows ``x[,value]``. A first row starting with a letter is a header."""
    rows = [(ln, r) for ln, r in enumerate(csv.reader(io.StringIO(text)), start=1) if any(c.strip() for c in r)]
    if rows and rows[0][1][0].strip()[:1].isalpha():
        rows = rows[1:]
    points, values, texts = [], [], []
    for ln, row in rows:
        if len(row) > 2:
            raise InputError(source, ln, len(",".join(row[:2])) + 1, "expected at most two columns")
        cell = row[0].strip()
        points.append(_parse_exact(cell, source, ln, 1))
        texts.append(cell)
        if len(row) == 2:
            vcol = len(row[0]) + 2
            try:
                v = float(row[1])
            except ValueError:
                raise InputError(source, ln, vcol, f"malformed value {row[1].strip()!r}") from None
            if not math.isfinite(v):
                raise InputError(source, ln, vcol, "value is not finite")
            values.append(v)
        elif need_values:
            raise InputError(source, ln, len(row[0]) + 1, "missing value column")
    if values and len(values) != len(points):
        raise InputError(source, rows[-1][0], 1, "some rows have values and some do not")
    seen = {}
    for (ln, _), p in zip(rows, points):
        if p in seen:
            raise InputError(source, ln, 1, f"duplicate abscissa {format_rational(p)} (first on line {seen[p]})")
        seen[p] = ln
    return SampleTable(tuple(points), tuple(values) if values else None, tuple(texts))


def format_samples(points: Sequence, values: Sequence[float] | None = None) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    for j, p in enumerate(points):
        w.writerow([format_rational(p)] if values is None else [format_rational(p), _num(values[j])])
    return out.getvalue()


def _num(v: float) -> str:
    return format(float(v), ".17g")


# -- commands ------------------------------------------------------------------


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InputError(path, None, None, exc.strerror or str(exc)) from None


def _load_space(path: str) -> BasisAtlas:
    spec = parse_space(_read(path), path)
    try:
        return spec.atlas()
    except KnotSystemError as exc:
        raise InputError(path, None, None, str(exc)) from None


def _report_dict(report: ConditionReport) -> dict:
    return {
        "mode": report.mode,
        "passed": report.passed,
        "violations": [
            {"condition": v.condition, "interval": list(v.interval), "required": v.required, "actual": v.actual}
            for v in report.violations
        ],
    }


def _write_report(report: ConditionReport, out, as_json: bool) -> None:
    if as_json:
        json.dump(_report_dict(report), out, indent=2)
        out.write("\n")
        return
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["mode", report.mode])
    w.writerow(["passed", "true" if report.passed else "false"])
    if report.violations:
        w.writerow(["condition", "i", "j", "required", "actual"])
        for v in report.violations:
            idx = list(v.interval) + [""] * (2 - len(v.interval))
            w.writerow([v.condition, *idx, v.required, v.actual])


def cmd_check(args, out) -> int:
    atlas = _load_space(args.space)
    table = parse_samples(_read(args.samples), args.samples)
    report = check(atlas, SampleSet.of(table.points), MODE_FLAGS[args.mode])
    _write_report(report, out, args.json)
    return EXIT_OK if report.passed else EXIT_CONDITIONS


def cmd_reconstruct(args, out) -> int:
    atlas = _load_space(args.space)
    table = parse_samples(_read(args.samples), args.samples, need_values=True)
    grid = parse_samples(_read(args.grid), args.grid)
    order = sorted(range(len(table.points)), key=lambda j: table.points[j])
    E = SampleSet(table.points[j] for j in order)
    F = [table.values[j] for j in order]
    try:
        op = build_reconstructor(product_basis(atlas), E)
    except ConditionsViolated as exc:
        _write_report(exc.report, sys.stderr, False)
        return EXIT_CONDITIONS
    values = reconstruct(op, F, list(grid.points))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "value"])
    for text, v in zip(grid.texts, values):
        w.writerow([text, _num(v)])
    if args.output:
        Path(args.output).write_text(buf.getvalue())
    else:
        out.write(buf.getvalue())
    return EXIT_OK


def _witness_dict(wp: WitnessPair) -> dict:
    ver = wp.verification

    def coeffs(f):
        if f.scalar_kind == "complex":
            return [[complex(c).real, complex(c).imag] for c in f.coefficients]
        return [float(c) for c in f.coefficients]

    pairs = [[p.i, p.l] for p in wp.f1.atlas.pairs]
    return {
        "kind": wp.kind,
        "construction": wp.construction,
        "pairs": pairs,
        "f1": coeffs(wp.f1),
        "f2": coeffs(wp.f2),
        "verification": {
            "passed": ver.passed,
            "modulus_gap": ver.modulus_gap,
            "margin": ver.margin,
            "reasons": list(ver.reasons),
        },
    }


def _write_witness(wp: WitnessPair, out, as_json: bool) -> None:
    d = _witness_dict(wp)
    if as_json:
        json.dump(d, out, indent=2)
        out.write("\n")
        return
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["kind", d["kind"]])
    w.writerow(["construction", d["construction"]])
    complex_kind = wp.kind.startswith("complex")
    if complex_kind:
        w.writerow(["i", "l", "f1_re", "f1_im", "f2_re", "f2_im"])
    else:
        w.writerow(["i", "l", "f1", "f2"])
    for (i, l), a, b in zip(d["pairs"], d["f1"], d["f2"]):
        vals = [*a, *b] if complex_kind else [a, b]
        w.writerow([i, l, *map(_num, vals)])
    ver = d["verification"]
    w.writerow(["verification", "pass" if ver["passed"] else "fail"])
    w.writerow(["modulus_gap", _num(ver["modulus_gap"])])
    w.writerow(["margin", _num(ver["margin"])])


def cmd_witness(args, out) -> int:
    if args.complex is not None:
        signs = None
        if args.signs:
            try:
                signs = [int(s) for s in args.signs.replace(",", " ").split()]
            except ValueError:
                raise InputError("--signs", 1, 1, f"malformed sign list {args.signs!r}") from None
        try:
            wp = complex_counterexample(args.complex, signs)
        except DegenerateChoice as exc:
            print(f"degenerate choice: {exc}", file=sys.stderr)
            return EXIT_CONDITIONS
    else:
        if args.space is None or args.samples is None:
            raise InputError("witness", None, None, "need SPACE and SAMPLES files, or --complex N")
        atlas = _load_space(args.space)
        table = parse_samples(_read(args.samples), args.samples)
        try:
            wp = real_ambiguity_witness(atlas, SampleSet.of(table.points))
        except PreconditionViolated:
            out.write("sequence passes the phaseless conditions; no witness exists\n")
            return EXIT_CONDITIONS
    _write_witness(wp, out, args.json)
    return EXIT_OK if wp.verification.passed else EXIT_NUMERICAL


def cmd_dim(args, out) -> int:
    atlas = _load_space(args.space)
    if args.json:
        json.dump({"N": len(atlas), "M": squared_dimension(atlas)}, out)
        out.write("\n")
    else:
        out.write(f"N={len(atlas)} M={squared_dimension(atlas)}\n")
    return EXIT_OK


def cmd_minimal(args, out) -> int:
    atlas = _load_space(args.space)
    E = minimal_sequence(atlas, MODE_FLAGS[args.mode])
    if args.json:
        json.dump([format_rational(x) for x in E], out)
        out.write("\n")
    else:
        out.write(format_samples(E))
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="splinephase", description="Phaseless sampling in spline spaces with arbitrary knots.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def mode_arg(sp, default):
        sp.add_argument("--mode", choices=sorted(MODE_FLAGS), default=default)

    def json_arg(sp):
        sp.add_argument("--json", action="store_true", help="machine-readable JSON instead of CSV")

    sp = sub.add_parser("check", help="check the counting conditions for a sample set")
    sp.add_argument("space")
    sp.add_argument("samples")
    mode_arg(sp, "linear-squared")
    json_arg(sp)
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("reconstruct", help="recover |f|^2 on a grid from samples of |f|^2")
    sp.add_argument("space")
    sp.add_argument("samples", help="CSV rows x,|f(x)|^2")
    sp.add_argument("grid", help="CSV rows x")
    sp.add_argument("-o", "--output", help="write CSV here instead of standard output")
    sp.set_defaults(func=cmd_reconstruct)

    sp = sub.add_parser("witness", help="construct a pair of functions with equal moduli on the samples")
    sp.add_argument("space", nargs="?")
    sp.add_argument("samples", nargs="?")
    sp.add_argument("--complex", type=int, metavar="N", help="complex degree-1 pair with N+1 coefficients")
    sp.add_argument("--signs", help="comma-separated +-1 list of length N+1 for --complex")
    json_arg(sp)
    sp.set_defaults(func=cmd_witness)

    sp = sub.add_parser("dim", help="print the dimensions N and M of the spline and squared spaces")
    sp.add_argument("space")
    json_arg(sp)
    sp.set_defaults(func=cmd_dim)

    sp = sub.add_parser("minimal", help="print a smallest sample set for a mode")
    sp.add_argument("space")
    mode_arg(sp, "linear-squared")
    json_arg(sp)
    sp.set_defaults(func=cmd_minimal)
    return p


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except (InputError, OutOfWindow, KnotSystemError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        # includes a malformed SPLINEPHASE_RTOL
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (RankDeficient, IllConditioned, WitnessNotFound) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
