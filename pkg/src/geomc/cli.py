"""Command line entry point.

    geomc run CONFIG.json
    geomc preset NAME [--override key=value ...] [--dump]
    geomc validate CONFIG.json

Exit codes: 0 success, 1 runtime or numeric failure, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import json
import sys

from geomc.config import PRESETS, load_config, preset
from geomc.errors import ConfigError, GeomcError

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _overrides(items):
    out = {}
    for item in items or []:
        if "=" not in item:
            raise ConfigError(f"--override expects key=value, got {item!r}")
        key, val = item.split("=", 1)
        out[key.strip()] = _parse_value(val)
    return out


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="geomc", description="Geodesic Monte Carlo experiments")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run the experiment in a JSON config")
    r.add_argument("config")
    s = sub.add_parser("preset", help="run a named preset")
    s.add_argument("name", help=", ".join(PRESETS))
    s.add_argument("--override", action="append", metavar="KEY=VALUE",
                   help="dotted-path override, value parsed as JSON when possible")
    s.add_argument("--dump", action="store_true", help="print the resolved config and exit")
    v = sub.add_parser("validate", help="check a config without running it")
    v.add_argument("config")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "preset":
            cfg = preset(args.name, _overrides(args.override))
            if args.dump:
                print(cfg.dumps())
                return EXIT_OK
        else:
            cfg = load_config(args.config)
            if args.command == "validate":
                print(f"ok: {cfg.experiment} -> {cfg.output}")
                return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    from geomc.experiments import run_experiment

    try:
        summary = run_experiment(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (GeomcError, RuntimeError, ArithmeticError, ValueError, OSError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return EXIT_RUNTIME
    print(f"wrote {cfg.output}/summary.json ({summary['wall_seconds']:.1f} s)")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
