"""Command line front end: ``eftlab round|fts|extract|check|sweep``."""

from __future__ import annotations

import argparse
import json
import re
import sys

from .algorithms import ModeTriple, extract_scalar, fast_two_sum, mixed_triples, uniform_triples
from .conditions import CONDITIONS, check, clauses, parse_condition
from .core import FormatConfig, parse_dyadic, to_fp
from .rounding import parse_mode, round_dyadic
from .verifier import ReportError, SweepSpec, Target, emit_report, sweep

EXIT_CLEAN, EXIT_VIOLATIONS, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _fmt(text):
    try:
        return FormatConfig.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _float(args, name):
    text = getattr(args, name)
    try:
        return to_fp(parse_dyadic(text), args.fmt)
    except ValueError as exc:
        raise UsageError(f"--{name}: {exc}") from None


def _triple(text):
    return ModeTriple.parse(text, ",")


def _print_json(obj):
    print(json.dumps(obj, indent=2))


def cmd_round(args):
    r = parse_dyadic(args.value)
    x = round_dyadic(r, parse_mode(args.mode), args.fmt)
    _print_json({"r": str(r), "mode": args.mode, "x": x.literal(), "fp": x.to_dict()})
    return EXIT_CLEAN


def cmd_fts(args):
    trace = fast_two_sum(_float(args, "a"), _float(args, "b"), _triple(args.modes), args.fmt)
    _print_json(trace.to_dict())
    return EXIT_CLEAN


def cmd_extract(args):
    trace = extract_scalar(_float(args, "sigma"), _float(args, "x"), _triple(args.modes), args.fmt)
    _print_json(trace.to_dict())
    return EXIT_CLEAN


def cmd_check(args):
    cond = parse_condition(args.cond)
    a, b = _float(args, "a"), _float(args, "b")
    extra = None
    if CONDITIONS[cond].post_hoc:
        if args.x is None:
            raise UsageError(f"{cond} depends on the computed sum; pass --x")
        extra = _float(args, "x")
    ok = check(cond, a, b, args.fmt, extra)
    print("true" if ok else "false")
    _print_json({"condition": cond.value, "a": a.literal(), "b": b.literal(), "holds": ok,
                 "clauses": clauses(cond, a, b, args.fmt, extra)})
    return EXIT_CLEAN


def _sweep_modes(text, target):
    if text in (None, "claimed"):
        return ()
    if target is Target.DELTA:
        return tuple(parse_mode(m) for m in text.split(","))
    if text == "uniform":
        return tuple(uniform_triples())
    if text == "mixed":
        return tuple(mixed_triples())
    return tuple(ModeTriple.parse(t, "/") for t in text.split(","))


def cmd_sweep(args):
    target = Target(args.target)
    spec = SweepSpec(
        fmt=args.fmt, target=target,
        condition=None if args.cond in (None, "none") else args.cond,
        modes=_sweep_modes(args.modes, target), pair_filter=args.filter,
        adversarial=args.adversarial_fr, max_violations=args.max_violations,
        k=args.k, wide=args.wide if target is Target.DOUBLE else None,
    )
    report = sweep(spec, jobs=args.jobs, allow_large=args.allow_large)
    if args.out:
        emit_report(report, args.format, args.out)
    summary = {
        "target": target.value, "condition": args.cond or "none", "fmt": args.fmt.id,
        "pairs_total": report.pairs_total, "pairs_condition_true": report.pairs_condition_true,
        "evaluations": report.evaluations, "violations_total": report.violations_total,
        "guarantee_holds_outside_condition": report.guarantee_holds_outside_condition,
    }
    if report.control is not None:
        summary["control_failures"] = report.control["failures"]
    _print_json(summary)
    return EXIT_CLEAN if report.clean else EXIT_VIOLATIONS


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="eftlab", description="Small-format floating-point EFT laboratory.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--fmt", type=_fmt, default=FormatConfig(4, -10, 10), help="p,emin,emax")
        return p

    p = common(sub.add_parser("round", help="round a dyadic literal"))
    p.add_argument("value")
    p.add_argument("--mode", default="rne")
    p.set_defaults(func=cmd_round)

    p = common(sub.add_parser("fts", help="trace FastTwoSum"))
    p.add_argument("--modes", default="rne", help="one mode or o1,o2,o3")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.set_defaults(func=cmd_fts)

    p = common(sub.add_parser("extract", help="trace ExtractScalar"))
    p.add_argument("--modes", default="ro", help="one mode or o1,o2,o3")
    p.add_argument("--sigma", required=True)
    p.add_argument("--x", required=True)
    p.set_defaults(func=cmd_extract)

    p = common(sub.add_parser("check", help="evaluate a condition"))
    p.add_argument("--cond", required=True)
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--x", help="computed sum, for conditions that depend on it")
    p.set_defaults(func=cmd_check)

    p = common(sub.add_parser("sweep", help="exhaustive soundness sweep"))
    p.add_argument("--target", required=True, choices=[t.value for t in Target])
    p.add_argument("--cond", help="condition id or 'none'")
    p.add_argument("--modes", help="claimed | uniform | mixed | comma list (triples as o1/o2/o3)")
    p.add_argument("--filter", help="abs_sum_le_omega | abs_sum_gt_omega | nonzero")
    p.add_argument("--adversarial-fr", action="store_true", help="add the RD/RU branches per step")
    p.add_argument("--k", type=int, help="split anchor exponent (default: all admissible)")
    p.add_argument("--wide", type=_fmt, default=FormatConfig(8, -15, 10),
                   help="intermediate format of double-round sweeps")
    p.add_argument("--out")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--max-violations", type=int, default=100)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--allow-large", action="store_true", help="ignore the pair budget")
    p.set_defaults(func=cmd_sweep)
    return parser


_NEGATIVE_LITERAL = re.compile(r"^-\d")


def _attach_negative_values(argv: list[str]) -> list[str]:
    # argparse reads "--b -1/16" as two flags; rewrite it to "--b=-1/16"
    out: list[str] = []
    for token in argv:
        if out and out[-1].startswith("--") and "=" not in out[-1] and _NEGATIVE_LITERAL.match(token):
            out[-1] = f"{out[-1]}={token}"
        else:
            out.append(token)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parser.parse_args(_attach_negative_values(argv))
        return args.func(args)
    except (UsageError, ValueError, ReportError) as exc:
        print(f"eftlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
