"""Command-line harness.

    chronos list
    chronos run --experiment NAME [--config FILE] [--key value ...] --out PATH --format csv|json

Exit status is 0 when every check passes, 1 when a check fails or the
numerics break down, and 2 for configuration errors. CHRONOS_SEED overrides
the seed of experiments that take one.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

from chronos.errors import ChronosError, ConfigError
from chronos.experiments import EXPERIMENTS, Check

log = logging.getLogger("chronos")

FORMATS = ("csv", "json")


@dataclass
class ExperimentConfig:
    experiment: str
    params: dict
    out: Path | None = None
    format: str = "csv"


@dataclass
class ExperimentReport:
    experiment: str
    params: dict
    checks: list[Check] = field(default_factory=list)
    info: dict = field(default_factory=dict)
    wall_time: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _json_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if value != value or value in (float("inf"), float("-inf")):
            return json.dumps(str(value))
        text = format(value, ".17g")
        # keep floats recognisable as floats
        return text if any(c in text for c in ".en") else text + ".0"
    return json.dumps(value)


def read_config_file(path) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment. A JSON object is also accepted."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from None
    if text.lstrip().startswith("{"):
        data = json.loads(text)
        if not isinstance(data, dict) or any(isinstance(v, (dict, list)) for v in data.values()):
            raise ConfigError("config", "JSON config must be a flat object")
        return {k: v for k, v in data.items()}
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        sep = "=" if "=" in line else ":" if ":" in line else None
        if sep is None:
            raise ConfigError("config", f"line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split(sep, 1))
        values[key] = value
    return values


def build_config(experiment: str | None, raw: dict, out=None, fmt="csv", env=None) -> ExperimentConfig:
    """Validate raw key/value settings against the experiment's schema."""
    env = os.environ if env is None else env
    raw = dict(raw)
    experiment = experiment or raw.pop("experiment", None)
    raw.pop("experiment", None)
    if experiment not in EXPERIMENTS:
        raise ConfigError("experiment", f"unknown experiment {experiment!r}; choose from {sorted(EXPERIMENTS)}")
    if fmt not in FORMATS:
        raise ConfigError("format", f"must be one of {FORMATS}, got {fmt!r}")
    _, schema = EXPERIMENTS[experiment]
    unknown = sorted(set(raw) - set(schema))
    if unknown:
        raise ConfigError(unknown[0], f"not a parameter of {experiment}")
    if "seed" in schema and env.get("CHRONOS_SEED"):
        raw["seed"] = env["CHRONOS_SEED"]
    params = {}
    for name, param in schema.items():
        params[name] = param.parse(name, raw[name]) if name in raw else param.default
    return ExperimentConfig(experiment, params, Path(out) if out else None, fmt)


def run(config: ExperimentConfig) -> ExperimentReport:
    func, _ = EXPERIMENTS[config.experiment]
    start = time.perf_counter()
    outcome = func(config.params)
    report = ExperimentReport(config.experiment, dict(config.params), outcome.checks, outcome.info)
    report.wall_time = time.perf_counter() - start
    if config.out is not None:
        emit(report, config.format, config.out)
    return report


def render_csv(report: ExperimentReport) -> str:
    lines = ["metric,value,tolerance,pass"]
    for c in report.checks:
        lines.append(f"{c.metric},{_fmt(c.value)},{_fmt(c.tolerance)},{_fmt(c.passed)}")
    return "\n".join(lines) + "\n"


def render_json(report: ExperimentReport) -> str:
    """Flat object; wall time is left out so reruns are byte-identical."""
    items = [("experiment", report.experiment), ("passed", report.passed)]
    items += [(f"param.{k}", v) for k, v in report.params.items()]
    for c in report.checks:
        items += [
            (f"metric.{c.metric}", c.value),
            (f"tolerance.{c.metric}", c.tolerance),
            (f"pass.{c.metric}", c.passed),
        ]
    items += [(f"info.{k}", v) for k, v in report.info.items()]
    body = ",\n".join(f"  {json.dumps(k)}: {_json_value(v)}" for k, v in items)
    return "{\n" + body + "\n}\n"


def emit(report: ExperimentReport, fmt: str, path) -> Path:
    path = Path(path)
    text = render_csv(report) if fmt == "csv" else render_json(report)
    try:
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc.strerror}") from exc
    return path


def _split_overrides(extra: list[str]) -> dict:
    overrides = {}
    it = iter(extra)
    for token in it:
        if not token.startswith("--"):
            raise ConfigError(token, "expected --key value")
        key = token[2:]
        if "=" in key:
            key, value = key.split("=", 1)
        else:
            value = next(it, None)
            if value is None:
                raise ConfigError(key, "missing value")
        overrides[key] = value
    return overrides


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chronos", description="Time-operator numerical experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("list", help="list experiments and their parameters")
    run_p = sub.add_parser("run", help="run one experiment")
    run_p.add_argument("--experiment", required=False)
    run_p.add_argument("--config")
    run_p.add_argument("--out", required=True)
    run_p.add_argument("--format", default="csv")
    return parser


def cmd_list() -> None:
    for name, (_, schema) in EXPERIMENTS.items():
        print(name)
        for key, param in schema.items():
            print(f"  {key:<10} {param.kind.__name__:<5} default={param.default!r:<10} {param.help}")


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(message)s", stream=sys.stderr)
    args, extra = _parser().parse_known_args(argv)
    if args.command == "list":
        if extra:
            _parser().error(f"unexpected arguments: {' '.join(extra)}")
        cmd_list()
        return 0
    try:
        raw = read_config_file(args.config) if args.config else {}
        raw.update(_split_overrides(extra))
        config = build_config(args.experiment, raw, args.out, args.format)
    except ConfigError as exc:
        print(f"chronos: config error: {exc}", file=sys.stderr)
        return 2
    try:
        report = run(config)
    except ChronosError as exc:
        residual = getattr(exc, "residual", None)
        extra_info = f" (residual {residual:.3e})" if residual is not None else ""
        print(f"chronos: numerical failure in {config.experiment}: {exc}{extra_info}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"chronos: {exc}", file=sys.stderr)
        return 1
    for c in report.checks:
        log.info("%-4s %s = %.3e (tol %.1e)", "PASS" if c.passed else "FAIL", c.metric, c.value, c.tolerance)
    log.info("%s finished in %.2fs -> %s", report.experiment, report.wall_time, config.out)
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
