"""Command-line entry point.

Exit codes: 0 success, 1 verification failure, 2 config parse error,
3 guard violation, 4 norm-leakage overflow.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import canonical
from .errors import ConfigError, NormLeakageError, SpacsimError
from .scenarios import CONFIG_SCHEMA, ScenarioError, parse_config, run, sweep, wigner_grid

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_PARSE = 2
EXIT_GUARD = 3
EXIT_LEAKAGE = 4


def _error_payload(exc: Exception) -> tuple[int, dict]:
    if isinstance(exc, ConfigError):
        return EXIT_PARSE, {"type": "parse", "field": exc.field, "message": str(exc)}
    cause = exc.cause if isinstance(exc, ScenarioError) else exc
    field = exc.field if isinstance(exc, ScenarioError) else None
    if isinstance(cause, ConfigError):
        return EXIT_PARSE, {"type": "parse", "field": cause.field or field, "message": str(exc)}
    if isinstance(cause, NormLeakageError):
        return EXIT_LEAKAGE, {"type": "norm-leakage", "field": field, "message": str(exc)}
    return EXIT_GUARD, {"type": "guard", "error": type(cause).__name__, "field": field, "message": str(exc)}


def _fail(exc: Exception) -> int:
    code, payload = _error_payload(exc)
    sys.stderr.write(canonical.dumps({"error": payload}))
    return code


def _load(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}", field=None) from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}", field=None) from exc
    return parse_config(raw)


def _write(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8", newline="\n")


def _flatten(prefix: str, obj, into: dict) -> None:
    if isinstance(obj, dict):
        for k in sorted(obj):
            _flatten(f"{prefix}.{k}" if prefix else k, obj[k], into)
    elif isinstance(obj, (int, float)) and not isinstance(obj, bool):
        into[prefix] = float(obj)


def cmd_simulate(args) -> int:
    report = run(_load(args.config))
    _write(canonical.dumps(report.to_dict()), args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    config = _load(args.config)
    try:
        values = [float(v) for v in args.values.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"values: {exc}", field="values") from exc
    if not values:
        raise ConfigError("values: empty list", field="values")
    reports = [r.to_dict() for r in sweep(config, args.param, values)]
    if args.format == "json":
        text = canonical.dumps({"parameter": args.param, "values": values, "reports": reports})
    else:
        flat = []
        for r in reports:
            row: dict = {}
            for section in ("probabilities", "fidelities", "references"):
                _flatten(section, r[section], row)
            flat.append(row)
        columns = sorted(set().union(*flat))
        rows = [[v, *(row.get(c, "") for c in columns)] for v, row in zip(values, flat)]
        text = canonical.csv_text([args.param, *columns], rows)
    _write(text, args.out)
    return EXIT_OK


def cmd_wigner(args) -> int:
    grid = wigner_grid(_load(args.config))
    _write(canonical.csv_text(["x", "p", "w"], grid.rows()), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verification import format_table, run_checks

    checks = run_checks()
    print(format_table(checks))
    ok = all(c.passed for c in checks if c.asserted)
    return EXIT_OK if ok else EXIT_VERIFY_FAILED


def cmd_schema(args) -> int:
    _write(canonical.dumps(CONFIG_SCHEMA), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spacsim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one scenario and emit a JSON report")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="run a scenario over a list of parameter values")
    p.add_argument("--config", required=True)
    p.add_argument("--param", required=True, choices=["lambda", "alpha", "nbar", "n_amplifiers"])
    p.add_argument("--values", required=True, help="comma-separated numbers")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("wigner", help="sample the Wigner function of the configured target as CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_wigner)

    p = sub.add_parser("verify", help="run the built-in acceptance checks")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("schema", help="print the config JSON schema")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_schema)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SpacsimError as exc:
        return _fail(exc)


if __name__ == "__main__":
    sys.exit(main())
