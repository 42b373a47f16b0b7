"""Command-line interface: run or validate scenario configurations.

    multibath run --config cfg.json [--out table.csv] [--threads N]
    multibath validate --config cfg.json

Exit codes: 0 success, 2 configuration error, 3 solver error.  When
``--threads`` is absent the environment variable ``MULTIBATH_THREADS`` is
consulted, defaulting to 1.
"""

from __future__ import annotations

import argparse
import os
import sys

from .errors import ConfigError, MultibathError
from .harness import emit_csv, parse_config, run_scenario

THREADS_ENV_VAR = "MULTIBATH_THREADS"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="multibath",
        description="Exact vs. additive open-system dynamics for multiple reservoirs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a scenario and write its CSV table")
    run.add_argument("--config", required=True, help="path to a JSON scenario document")
    run.add_argument("--out", help="output CSV path (overrides the config's 'output')")
    run.add_argument("--threads", type=int, help="worker threads for sweep scenarios")

    validate = sub.add_parser("validate", help="check a configuration without running it")
    validate.add_argument("--config", required=True, help="path to a JSON scenario document")
    return parser


def _read_config(path: str):
    try:
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise ConfigError("io-error", f"cannot read config {path!r}: {exc}") from exc
    return parse_config(text)


def _resolve_threads(arg_value) -> int:
    if arg_value is not None:
        threads = arg_value
    else:
        raw = os.environ.get(THREADS_ENV_VAR)
        if raw is None:
            return 1
        try:
            threads = int(raw)
        except ValueError:
            raise ConfigError(
                "invalid-value", f"{THREADS_ENV_VAR}={raw!r} is not an integer"
            ) from None
    if threads < 1:
        raise ConfigError("invalid-value", f"threads must be >= 1, got {threads}")
    return threads


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _read_config(args.config)
        if args.command == "validate":
            print(f"ok: scenario {cfg.scenario!r}")
            return 0
        threads = _resolve_threads(args.threads)
        out_path = args.out if args.out is not None else cfg.output
        if out_path is None:
            raise ConfigError(
                "missing-parameter",
                "no output path: set 'output' in the config or pass --out",
            )
        table = run_scenario(cfg, threads=threads)
        emit_csv(table, out_path)
        print(f"wrote {out_path} ({len(table.rows)} rows)")
        return 0
    except ConfigError as exc:
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return 2
    except MultibathError as exc:
        print(f"error[solver]: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
