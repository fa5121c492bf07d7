"""Command-line front end: ``ilwc {encode,decode,analyze,model}``.

Exit codes: 0 ok, 1 usage, 2 I/O, 3 strict-decode integrity failure,
4 invalid parameter file.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path

from . import corpus, flash, metrics
from .codec import ILWCError, SegmentConfig, verify_perfect_parameters
from .container import ContainerFormatError, IntegrityError, decode_file, encode_file

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_INTEGRITY, EXIT_PARAMS = range(5)
PARAMS_ENV = "ILWC_PARAMS"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _segment(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if n not in (2, 4, 8):
        raise argparse.ArgumentTypeError("segment size must be 2, 4 or 8")
    return n


def _segment_list(text: str) -> list[int]:
    return [_segment(part) for part in text.split(",") if part.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ilwc", description="Perfect n/2 inverted limited-weight coding tools.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    enc = sub.add_parser("encode", help="encode a file into an ILWC container")
    enc.add_argument("--segment", type=_segment, default=8, help="segment width n (2, 4 or 8)")
    enc.add_argument("--input", required=True)
    enc.add_argument("--output", required=True)

    dec = sub.add_parser("decode", help="decode an ILWC container")
    dec.add_argument("--input", required=True)
    dec.add_argument("--output", required=True)
    dec.add_argument("--lenient", action="store_true",
                     help="decode invalid codewords by the flag rule and record them")
    dec.add_argument("--errors", help="error-record sidecar (default: OUTPUT.errors.json)")

    ana = sub.add_parser("analyze", help="measure a file corpus")
    ana.add_argument("inputs", nargs="+", metavar="INPUT")
    ana.add_argument("--segment", type=_segment_list, default=[2, 4, 8],
                     help="comma-separated segment widths (default 2,4,8)")
    ana.add_argument("--format", choices=("json", "csv"), default="json")
    ana.add_argument("--output", required=True, help="report path, or - for stdout")
    ana.add_argument("--recursive", action="store_true", help="descend into directories")
    ana.add_argument("--ext", type=lambda s: [e.strip() for e in s.split(",") if e.strip()],
                     help="comma-separated extensions to keep, e.g. pdf,mp3")
    ana.add_argument("--params", help="flash parameter file (default: $ILWC_PARAMS)")
    ana.add_argument("--jobs", type=int, default=os.cpu_count() or 1, help="worker processes")
    ana.add_argument("--bin-width", type=float, default=corpus.DEFAULT_BIN_WIDTH,
                     help="histogram bin width in p1")
    ana.add_argument("--level", choices=("slc", "mlc"), default="mlc",
                     help="cell level used for energy columns and aggregates")

    mod = sub.add_parser("model", help="evaluate flash-model formulas for given scalars")
    mod.add_argument("--params", help="flash parameter file (default: $ILWC_PARAMS)")
    mod.add_argument("--ispp-dv", type=float, help="threshold shift to program (V)")
    mod.add_argument("--field-before", type=float, help="mean V_th before coding")
    mod.add_argument("--field-after", type=float, help="mean V_th after coding")
    mod.add_argument("--worst-case-dv-before", type=float, help="largest V_th swing without coding")
    mod.add_argument("--worst-case-dv-after", type=float, help="largest V_th swing with coding")
    mod.add_argument("--vth", type=float, help="cell V_th for field, disturb and error models")
    mod.add_argument("--cell-error", action="store_true", help="evaluate the cell error model at --vth")
    for key in flash.ERROR_MODEL_KEYS:
        mod.add_argument(f"--{key}", type=float, help="cell error model coefficient")
    mod.add_argument("--overhead", type=float, help="code overhead (k - n)/n")
    mod.add_argument("--p1", type=float, help="ones probability of the coded stream")
    mod.add_argument("--pe", type=float, help="program energy reduction")
    mod.add_argument("--cg", type=float, help="coding gain (computed from --overhead/--p1 if omitted)")
    mod.add_argument("--segment", type=int, help="report perfect-code parameters for width n")
    return parser


def _params(path: str | None) -> flash.FlashParams:
    return flash.load_params(path or os.environ.get(PARAMS_ENV) or None)


def _same_file(a: str, b: str) -> bool:
    try:
        return os.path.samefile(a, b)
    except OSError:
        return False


def _atomic_output(path: str):
    target = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{target.name}.", dir=target.parent or ".")
    return os.fdopen(fd, "wb"), tmp


def cmd_encode(args) -> int:
    if _same_file(args.input, args.output):
        raise UsageError("refusing to overwrite the input file")
    with open(args.input, "rb") as src:
        dst, tmp = _atomic_output(args.output)
        try:
            with dst:
                encode_file(src, dst, args.segment)
            os.replace(tmp, args.output)
        except BaseException:
            os.unlink(tmp)
            raise
    return EXIT_OK


def cmd_decode(args) -> int:
    if _same_file(args.input, args.output):
        raise UsageError("refusing to overwrite the input file")
    mode = "lenient" if args.lenient else "strict"
    with open(args.input, "rb") as src:
        dst, tmp = _atomic_output(args.output)
        try:
            with dst:
                records = decode_file(src, dst, mode)
            os.replace(tmp, args.output)
        except BaseException:
            os.unlink(tmp)
            raise
    if args.lenient or args.errors:
        sidecar = args.errors or f"{args.output}.errors.json"
        with open(args.input, "rb") as fh:
            n = fh.read(6)[5]
        doc = {"mode": mode, "segment_n": n, "error_count": len(records),
               "errors": [r.as_dict(n + 1) for r in records]}
        Path(sidecar).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
        if records:
            print(f"ilwc: {len(records)} invalid codeword(s) decoded leniently; see {sidecar}",
                  file=sys.stderr)
    return EXIT_OK


def cmd_analyze(args) -> int:
    if args.jobs < 1:
        raise UsageError("--jobs must be at least 1")
    if args.bin_width <= 0 or args.bin_width > 1:
        raise UsageError("--bin-width must lie in (0, 1]")
    p = _params(args.params)
    report = corpus.analyze_corpus(args.inputs, recursive=args.recursive, extensions=args.ext,
                                   configs=args.segment, p=p, parallelism=args.jobs,
                                   bin_width=args.bin_width, level=args.level)
    for s in report.skipped:
        print(f"ilwc: skipped {s['path']}: {s['reason']}", file=sys.stderr)
    if args.output == "-":
        corpus.emit_report(report, args.format, sys.stdout)
    else:
        corpus.emit_report(report, args.format, args.output)
    return EXIT_OK


def cmd_model(args) -> int:
    p = _params(args.params)
    overrides = {k: getattr(args, k) for k in flash.ERROR_MODEL_KEYS if getattr(args, k) is not None}
    if overrides:
        p = p.with_(**overrides)
    out: list[tuple[str, object]] = []

    if args.segment is not None:
        try:
            k, m, holds = verify_perfect_parameters(args.segment)
        except ILWCError as exc:
            raise UsageError(str(exc)) from None
        out += [("n", args.segment), ("k", k), ("m", m), ("perfect", str(holds).lower()),
                ("overhead", SegmentConfig(args.segment).overhead)]
        if args.segment <= metrics.ENUMERATION_LIMIT:
            out.append(("expected_ones_uniform", float(metrics.expected_ones_uniform(args.segment))))
    if args.ispp_dv is not None:
        steps = flash.ispp_steps(args.ispp_dv, p)
        out += [("n_steps", steps), ("program_time", flash.program_time(steps, p))]
    if (args.field_before is None) != (args.field_after is None):
        raise UsageError("--field-before and --field-after go together")
    if args.field_before is not None:
        out += [("e_ox_before", flash.intrinsic_field(args.field_before, p)),
                ("e_ox_after", flash.intrinsic_field(args.field_after, p)),
                ("rel_field_change", flash.relative_field_change(args.field_before, args.field_after, p))]
    if (args.worst_case_dv_before is None) != (args.worst_case_dv_after is None):
        raise UsageError("--worst-case-dv-before and --worst-case-dv-after go together")
    if args.worst_case_dv_before is not None:
        before = flash.worst_case_coupling(args.worst_case_dv_before, p)
        after = flash.worst_case_coupling(args.worst_case_dv_after, p)
        out += [("coupling_before", before), ("coupling_after", after)]
        if before:
            out.append(("coupling_reduction", (before - after) / before))
        steps_b = flash.ispp_steps(args.worst_case_dv_before, p)
        steps_a = flash.ispp_steps(args.worst_case_dv_after, p)
        out += [("worst_case_steps_before", steps_b), ("worst_case_steps_after", steps_a)]
        if steps_b:
            out.append(("step_reduction", (steps_b - steps_a) / steps_b))
    if args.vth is not None:
        out += [("intrinsic_field", flash.intrinsic_field(args.vth, p)),
                ("read_disturb_field", flash.read_disturb_field(args.vth, p))]
    if args.cell_error:
        if args.vth is None:
            raise UsageError("--cell-error needs --vth")
        if not p.has_error_model:
            raise UsageError("--cell-error needs alpha1, beta1, alpha2, beta2 "
                             "(parameter file or flags); no defaults exist")
        out.append(("cell_error_rate", flash.cell_error_rate(args.vth, p)))
    cg = args.cg
    if args.overhead is not None or args.p1 is not None:
        if args.overhead is None or args.p1 is None:
            raise UsageError("--overhead and --p1 go together")
        cg = metrics.coding_gain(args.overhead, args.p1)
        out.append(("coding_gain", cg))
    if args.pe is not None:
        if cg is None:
            raise UsageError("--pe needs --cg or --overhead/--p1")
        out.append(("energy_gain", metrics.energy_gain(args.pe, cg)))
    if not out:
        raise UsageError("model: give at least one quantity to evaluate")
    for key, value in out:
        sys.stdout.write(f"{key}={value!r}\n" if isinstance(value, float) else f"{key}={value}\n")
    return EXIT_OK


COMMANDS = {"encode": cmd_encode, "decode": cmd_decode, "analyze": cmd_analyze, "model": cmd_model}


def run(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"ilwc: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except flash.ParamFileError as exc:
        print(f"ilwc: invalid parameter file: {exc}", file=sys.stderr)
        return EXIT_PARAMS
    except IntegrityError as exc:
        print(f"ilwc: {exc}", file=sys.stderr)
        return EXIT_INTEGRITY
    except ContainerFormatError as exc:
        print(f"ilwc: malformed container: {exc}", file=sys.stderr)
        return EXIT_IO
    except (OSError, corpus.NoFilesError) as exc:
        print(f"ilwc: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, ZeroDivisionError) as exc:
        print(f"ilwc: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
