"""Command-line front end: list, eval, verify, suite, report, baseline."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from typing import Optional, Sequence

from .catalog import DomainViolation, UnknownIdentity, catalog_list, eval_side, lookup
from .kernels import NoConvergence, TruncationSchedule
from .precision import PoleError, complex_decimal, working_precision
from .report import (
    compare_reports,
    csv_rows,
    dumps,
    exit_code,
    read_report,
    summary_lines,
    write_report,
)
from .verify import SampleConfig, SuiteReport, verify_identity, verify_suite

CONFIG_KEYS = {
    "seed", "samples", "arities", "margin", "q_band", "pole_threshold", "schedule", "precision_bits", "probe_bits",
    "complex_q", "max_ratio", "max_transient", "identities", "workers", "exact_points", "ladder_points", "defect",
}
SCHEDULE_KEYS = {"initial_radius", "growth", "max_radius", "tol"}


class ConfigError(ValueError):
    pass


def _num(v) -> float:
    return float(v) if isinstance(v, str) else v


def load_config(path: str) -> tuple[SampleConfig, float]:
    """Parse a suite config file; returns the config and the (test-only) RHS defect."""
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    unknown = set(raw) - CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    sched = raw.get("schedule", {})
    if set(sched) - SCHEDULE_KEYS:
        raise ConfigError(f"unknown schedule keys: {', '.join(sorted(set(sched) - SCHEDULE_KEYS))}")
    try:
        schedule = TruncationSchedule(
            initial_radius=int(sched.get("initial_radius", 4)),
            growth=int(sched.get("growth", 2)),
            max_radius=int(sched.get("max_radius", 32)),
            tol=_num(sched.get("tol", 1e-12)),
        )
        kwargs = dict(
            seed=int(raw.get("seed", 0)),
            samples_per_identity=int(raw.get("samples", 20)),
            arities=tuple(int(n) for n in raw.get("arities", (1, 2, 3))),
            margin=_num(raw.get("margin", 0.2)),
            q_band=tuple(_num(v) for v in raw.get("q_band", (0.2, 0.7))),
            pole_threshold=_num(raw.get("pole_threshold", 1e-4)),
            schedule=schedule,
            precision_bits=int(raw.get("precision_bits", 128)),
            probe_bits=int(raw.get("probe_bits", 256)),
            complex_q=bool(raw.get("complex_q", False)),
            max_ratio=_num(raw.get("max_ratio", 0.05)),
            max_transient=_num(raw.get("max_transient", 12.0)),
            workers=int(raw.get("workers", 1)),
            exact_points=int(raw.get("exact_points", 20)),
            ladder_points=int(raw.get("ladder_points", 10)),
        )
        if "identities" in raw:
            for i in raw["identities"]:
                lookup(i)
            kwargs["identities"] = tuple(raw["identities"])
        return SampleConfig(**kwargs), _num(raw.get("defect", 0.0))
    except (TypeError, ValueError, UnknownIdentity) as exc:
        raise ConfigError(f"invalid config: {exc}") from exc


def _cmd_list(args) -> int:
    for entry in catalog_list():
        meta = entry.metadata()
        print(f"{meta['id']}  {meta['title']}  [{meta['arity']}, {meta['mode']}]")
        print(f"     anchor: {meta['anchor']}")
        print(f"     roles:  {', '.join(meta['roles'])}")
        print(f"     domain: {meta['domain']}")
    return 0


def _cmd_eval(args) -> int:
    try:
        with open(args.point, encoding="utf-8") as fh:
            point = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read point file {args.point}: {exc}") from exc
    schedule = TruncationSchedule(tol=args.tol, max_radius=args.max_radius)
    with working_precision(args.prec):
        side = eval_side(args.identity, args.side, point, schedule)
        re, im = complex_decimal(side.value)
    print(json.dumps({"identity": args.identity, "side": args.side, "value": [re, im],
                      "err_estimate": repr(side.err_estimate), "radius_used": side.radius,
                      "precision_bits": args.prec}))
    return 0


def _cmd_verify(args) -> int:
    config = SampleConfig(
        seed=args.seed,
        samples_per_identity=args.samples,
        arities=tuple(args.n) if args.n else (1, 2, 3),
        schedule=TruncationSchedule(tol=args.tol, max_radius=args.max_radius),
        precision_bits=args.prec,
        probe_bits=args.prec + 128,
        workers=args.workers,
    )
    records = verify_identity(args.identity, config)
    report = SuiteReport(config, records)
    for r in records:
        err = f"{r.rel_err:.3e}" if r.rel_err is not None else "-"
        print(f"{r.identity} n={r.n} #{r.index}: {r.status} rel_err={err} radius={r.radius_used} {r.detail}".rstrip())
    print(summary_lines(report)[-1])
    if args.out:
        write_report(report, "json", args.out)
    return exit_code(r.status for r in records)


def _cmd_suite(args) -> int:
    config, defect = load_config(args.config)
    if args.workers is not None:
        config = replace(config, workers=args.workers)
    report = verify_suite(config, defect=defect)
    for line in summary_lines(report):
        print(line)
    if args.out:
        write_report(report, "json", args.out)
        write_report(report, "csv", args.out)
    return exit_code(r.status for r in report.records)


def _cmd_report(args) -> int:
    data = read_report(args.input)
    if args.format == "json":
        sys.stdout.write(dumps(data))
    else:
        sys.stdout.write(csv_rows(data["records"]))
    return 0


def _cmd_baseline(args) -> int:
    problems = compare_reports(read_report(args.compare[0]), read_report(args.compare[1]))
    for p in problems:
        print(f"regression: {p}")
    if not problems:
        print("no regressions")
    return 2 if problems else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qlv", description="Verify classical and A_n multilateral q-series identities.")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("list", help="print the identity catalog")

    p = sub.add_parser("eval", help="evaluate one side of an identity at a point")
    p.add_argument("--identity", required=True)
    p.add_argument("--side", required=True, choices=["lhs", "rhs"])
    p.add_argument("--point", required=True, help="JSON point file")
    p.add_argument("--prec", type=int, default=128)
    p.add_argument("--tol", type=float, default=1e-14)
    p.add_argument("--max-radius", type=int, default=128)

    p = sub.add_parser("verify", help="verify one identity at sampled points")
    p.add_argument("--identity", required=True)
    p.add_argument("--n", type=int, action="append", help="arity (repeatable)")
    p.add_argument("--samples", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--prec", type=int, default=128)
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--max-radius", type=int, default=32)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="directory for report.json")

    p = sub.add_parser("suite", help="run the full verification suite")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.add_argument("--workers", type=int)

    p = sub.add_parser("report", help="re-export a suite report")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--format", choices=["json", "csv"], default="json")

    p = sub.add_parser("baseline", help="compare two reports for regressions")
    p.add_argument("--compare", nargs=2, required=True, metavar=("OLD", "NEW"))
    return parser


COMMANDS = {
    "list": _cmd_list, "eval": _cmd_eval, "verify": _cmd_verify, "suite": _cmd_suite,
    "report": _cmd_report, "baseline": _cmd_baseline,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    try:
        if getattr(args, "identity", None) is not None:
            lookup(args.identity)
        return COMMANDS[args.command](args)
    except UnknownIdentity as exc:
        print(f"qlv: unknown identity {exc.args[0]!r}; run 'qlv list'", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    except (ConfigError, ValueError, KeyError, OSError) as exc:
        print(f"qlv: {exc}", file=sys.stderr)
        return 1
    except DomainViolation as exc:
        print(f"qlv: {exc}", file=sys.stderr)
        return 1
    except (NoConvergence, PoleError) as exc:
        print(f"qlv: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
