"""Command line entry point: ``mkdvlab <experiment> [options]``.

Exit codes: 0 all acceptance windows pass, 1 acceptance failure,
2 usage or configuration error, 3 numeric error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import ConfigError
from .experiments import (DEFAULT_SEED, EXIT_USAGE, EXPERIMENTS, KEYS, emit_csv, exit_code,
                          parse_config, run)

_FLAG_KEYS = [k for k in KEYS if k not in ("experiment", "seed", "out", "format")]


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="mkdvlab",
        description="Spectral experiments for the modified KdV equation.")
    ap.add_argument("experiment", choices=EXPERIMENTS)
    ap.add_argument("--config", metavar="PATH", help="flat key = value config file")
    ap.add_argument("--seed", metavar="U64", help=f"master seed (default {DEFAULT_SEED})")
    ap.add_argument("--out", metavar="DIR", help="write <experiment>.csv/.json here")
    ap.add_argument("--format", choices=("csv", "json", "both"), default=None)
    keys = ap.add_argument_group("parameter overrides (take precedence over --config)")
    for k in _FLAG_KEYS:
        keys.add_argument(f"--{k}", metavar=KEYS[k][1].split()[0].upper(), default=None)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else 0
    text = ""
    if args.config:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            print(f"error: cannot read config: {exc}", file=sys.stderr)
            return EXIT_USAGE
    overrides = {k: getattr(args, k) for k in _FLAG_KEYS}
    overrides.update(experiment=args.experiment, seed=args.seed, out=args.out,
                     format=args.format)
    try:
        cfg = parse_config(text, overrides)
    except ConfigError as exc:
        for msg in exc.errors:
            print(f"config error: {msg}", file=sys.stderr)
        return EXIT_USAGE
    report = run(cfg)
    fmt = cfg.get("format", "csv")
    out = cfg.get("out")
    csv_text = emit_csv(report)
    if out:
        d = Path(out)
        d.mkdir(parents=True, exist_ok=True)
        if fmt in ("csv", "both"):
            (d / f"{cfg.experiment}.csv").write_text(csv_text)
        if fmt in ("json", "both"):
            (d / f"{cfg.experiment}.json").write_text(report.to_json())
    else:
        sys.stdout.write(csv_text if fmt == "csv" else report.to_json() + "\n")
        if fmt == "both":
            sys.stdout.write(csv_text)
    if report.error:
        print(f"error: {report.error['type']}: {report.error['message']}", file=sys.stderr)
    else:
        status = "pass" if report.passed else "FAIL"
        print(f"{cfg.experiment}: {status} (fitted exponent {report.fitted_exponent:.6g}, "
              f"window {report.window})", file=sys.stderr)
    return exit_code(report)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
