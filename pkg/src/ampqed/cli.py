"""Command line interface: ``ampqed run|validate|export``."""

import argparse
import sys
from pathlib import Path

from . import report as report_io
from .config import bundled_scenarios, load_config
from .errors import ConfigError
from .suites import run


def _cmd_run(args):
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    rep = run(cfg)
    out = Path(args.output) if args.output else Path(f"{cfg.name}.report.json")
    report_io.save(rep, out)
    for a in rep.analyses:
        line = f"{a['name']:<18} {a['status'].upper()}"
        if a["reason"]:
            line += f"  ({a['reason']})"
        print(line)
    print(f"report written to {out}")
    return 0 if rep.passed else 1


def _cmd_validate(args):
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return 2
    print(f"valid: {cfg.name} ({cfg.grid.n} nodes, {len(cfg.omegas)} frequencies, "
          f"analyses: {', '.join(cfg.analyses) or 'none'})")
    return 0


def _cmd_export(args):
    try:
        rep = report_io.load(args.report)
        paths = report_io.export(rep, args.format, args.out_dir, timestamp=args.timestamp)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for p in paths:
        print(p)
    return 0


def build_parser():
    p = argparse.ArgumentParser(
        prog="ampqed",
        description="Verify vacuum-field quantization identities for absorbing and amplifying media.")
    sub = p.add_subparsers(dest="command", required=True)
    bundled = ", ".join(bundled_scenarios())
    r = sub.add_parser("run", help="run the analyses requested by a scenario")
    r.add_argument("config", help=f"scenario TOML file or bundled name ({bundled})")
    r.add_argument("-o", "--output", help="report path (default: <name>.report.json)")
    r.set_defaults(func=_cmd_run)
    v = sub.add_parser("validate", help="check a scenario file without running it")
    v.add_argument("config")
    v.set_defaults(func=_cmd_validate)
    e = sub.add_parser("export", help="export a report as JSON or flat CSV tables")
    e.add_argument("report")
    e.add_argument("--format", choices=("json", "csv"), required=True)
    e.add_argument("--out-dir", default=".")
    e.add_argument("--timestamp", action="store_true", help="add an export timestamp")
    e.set_defaults(func=_cmd_export)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
