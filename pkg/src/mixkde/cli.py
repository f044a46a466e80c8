"""Command line front end: run experiments, validate configs, dump partitions.

Exit codes: 0 on success (and a passing verdict for `run`), 1 for I/O, usage,
or config parse problems, 2 when an admissibility gate or partition
precondition rejects the request, 3 when the experiment ran but its verdict
failed.

Config files are flat `key = value` lines with dotted key prefixes; `#`
starts a comment. run.base_seed is required so no run is ever silently
nondeterministic. Lists are comma separated. See the README for the schema.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time
from pathlib import Path

from . import __version__
from .bandwidth import BandwidthSchedule
from .blocking import build_partition, partition_to_csv
from .estimator import Grid
from .experiments import (
    ExperimentConfig,
    GateError,
    check_gates,
    config_to_dict,
    run_experiment,
    validate_shape,
)
from .kernels import kernel_from_name
from .processes import ProcessModel
from .util import dumps_json, fmt_float

THREADS_ENV_VAR = "MIXKDE_THREADS"

REPORT_NAME = "report.json"
PER_N_NAME = "per_n.csv"
PLOTDATA_NAME = "plotdata.csv"
MANIFEST_NAME = "manifest.json"


class ConfigError(ValueError):
    pass


class _CliUsageError(Exception):
    pass


_KNOWN_KEYS = (
    "experiment.kind",
    "model.family",
    "model.phi",
    "model.weights",
    "model.innovation_sd",
    "kernel.family",
    "bandwidth.c",
    "bandwidth.delta",
    "bandwidth.slowly_varying",
    "grid.lo",
    "grid.hi",
    "grid.m",
    "run.n_list",
    "run.replicates",
    "run.eval_points",
    "run.p",
    "run.base_seed",
    "block.alpha",
    "block.beta",
)

_REQUIRED_KEYS = (
    "experiment.kind",
    "model.family",
    "kernel.family",
    "bandwidth.delta",
    "run.n_list",
    "run.replicates",
    "run.base_seed",
)


def parse_config_text(text: str, origin: str = "<config>") -> dict[str, str]:
    """The raw key/value table of one config file."""
    table: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{origin}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or not value:
            raise ConfigError(f"{origin}:{lineno}: empty key or value in {raw.strip()!r}")
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"{origin}:{lineno}: unknown key {key!r}")
        if key in table:
            raise ConfigError(f"{origin}:{lineno}: duplicate key {key!r}")
        table[key] = value
    return table


def _conv_float(key: str, value: str) -> float:
    try:
        out = float(value)
    except ValueError:
        raise ConfigError(f"key {key!r}: expected a number, got {value!r}") from None
    if not math.isfinite(out):
        raise ConfigError(f"key {key!r}: value must be finite, got {value!r}")
    return out


def _conv_int(key: str, value: str) -> int:
    try:
        return int(value, base=10)
    except ValueError:
        raise ConfigError(f"key {key!r}: expected an integer, got {value!r}") from None


def _conv_float_list(key: str, value: str) -> tuple[float, ...]:
    items = [item.strip() for item in value.split(",") if item.strip()]
    if not items:
        raise ConfigError(f"key {key!r}: expected a comma-separated list, got {value!r}")
    return tuple(_conv_float(key, item) for item in items)


def _conv_int_list(key: str, value: str) -> tuple[int, ...]:
    items = [item.strip() for item in value.split(",") if item.strip()]
    if not items:
        raise ConfigError(f"key {key!r}: expected a comma-separated list, got {value!r}")
    return tuple(_conv_int(key, item) for item in items)


def build_config(table: dict[str, str]) -> ExperimentConfig:
    """Typed ExperimentConfig from a raw key/value table."""
    missing = [key for key in _REQUIRED_KEYS if key not in table]
    if missing:
        raise ConfigError(f"missing required config keys: {', '.join(missing)}")

    family = table["model.family"]
    try:
        model = ProcessModel(
            family=family,
            phi=_conv_float("model.phi", table["model.phi"]) if "model.phi" in table else 0.0,
            weights=(
                _conv_float_list("model.weights", table["model.weights"])
                if "model.weights" in table
                else ()
            ),
            innovation_sd=(
                _conv_float("model.innovation_sd", table["model.innovation_sd"])
                if "model.innovation_sd" in table
                else 1.0
            ),
        )
        kernel = kernel_from_name(table["kernel.family"])
        schedule = BandwidthSchedule(
            c=_conv_float("bandwidth.c", table.get("bandwidth.c", "1.0")),
            delta=_conv_float("bandwidth.delta", table["bandwidth.delta"]),
            slowly_varying=table.get("bandwidth.slowly_varying", "one"),
        )
        grid = Grid(
            lo=_conv_float("grid.lo", table.get("grid.lo", "-2.0")),
            hi=_conv_float("grid.hi", table.get("grid.hi", "2.0")),
            m=_conv_int("grid.m", table.get("grid.m", "401")),
        )
        config = ExperimentConfig(
            kind=table["experiment.kind"],
            model=model,
            kernel=kernel,
            schedule=schedule,
            n_list=_conv_int_list("run.n_list", table["run.n_list"]),
            replicates=_conv_int("run.replicates", table["run.replicates"]),
            base_seed=_conv_int("run.base_seed", table["run.base_seed"]),
            grid=grid,
            eval_points=(
                _conv_float_list("run.eval_points", table["run.eval_points"])
                if "run.eval_points" in table
                else ()
            ),
            p=_conv_float("run.p", table.get("run.p", "2.0")),
            block_alpha=_conv_float("block.alpha", table.get("block.alpha", "0.5")),
            block_beta=_conv_float("block.beta", table.get("block.beta", "0.25")),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return config


def parse_config_file(path) -> ExperimentConfig:
    text = Path(path).read_text(encoding="utf-8")
    return build_config(parse_config_text(text, origin=str(path)))


def _csv_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return fmt_float(value)
    return str(value)


def _write_rows_csv(path: Path, rows: list[dict]) -> None:
    if not rows:
        path.write_text("", encoding="utf-8")
        return
    header = list(rows[0].keys())
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_csv_cell(row.get(key)) for key in header))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _plotdata_rows(report) -> list[dict]:
    kind = report.kind
    if kind in ("clt_density", "clt_cdf_centered", "clt_cdf_true"):
        return [
            {"x": row["x"], "ks": row["ks"], "mean": row["mean"], "variance": row["variance"]}
            for row in report.rows
        ]
    if kind in ("rate_sup_lp", "rate_integral_lp", "uniform_as"):
        value_key = "error" if kind.startswith("rate") else "ratio"
        fit = report.slope
        out = []
        for row in report.rows:
            log_n = math.log(row["n"])
            out.append(
                {
                    "log_n": log_n,
                    f"log_{value_key}": math.log(row[value_key]),
                    "fitted_line": fit["intercept"] + fit["slope"] * log_n,
                }
            )
        return out
    if kind == "bias":
        first_x = report.rows[0]["x"]
        fit = report.slope
        out = []
        for row in report.rows:
            if row["x"] != first_x:
                continue
            log_h = math.log(row["h"])
            out.append(
                {
                    "log_h": log_h,
                    "log_abs_bias": math.log(row["abs_bias"]),
                    "fitted_line": fit["intercept"] + fit["slope"] * log_h,
                }
            )
        return out
    return [{"k": row["k"], "ratio": row["ratio"]} for row in report.rows]


def _resolve_cli_threads(option: int | None) -> int | None:
    """--threads wins; otherwise the environment; otherwise auto (0)."""
    if option is not None:
        return option
    raw = os.environ.get(THREADS_ENV_VAR)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(
            f"environment variable {THREADS_ENV_VAR} must be an integer, got {raw!r}"
        ) from None


def cmd_run(config_path, out_dir, threads: int | None = None) -> int:
    started = time.monotonic()
    try:
        threads = _resolve_cli_threads(threads)
        config = parse_config_file(config_path)
        validate_shape(config)
    except (OSError, ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    try:
        report = run_experiment(config, threads=threads)
    except GateError as exc:
        print(f"gate rejection ({exc.condition}): {exc}", file=sys.stderr)
        return 2

    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        (out / REPORT_NAME).write_text(report.to_json(), encoding="utf-8")
        _write_rows_csv(out / PER_N_NAME, report.rows)
        _write_rows_csv(out / PLOTDATA_NAME, _plotdata_rows(report))
        manifest = {
            "tool_version": __version__,
            "config_path": str(config_path),
            "out_dir": str(out_dir),
            "config": config_to_dict(config),
            "files": [REPORT_NAME, PER_N_NAME, PLOTDATA_NAME, MANIFEST_NAME],
            "duration_seconds": time.monotonic() - started,
        }
        (out / MANIFEST_NAME).write_text(dumps_json(manifest), encoding="utf-8")
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    print(f"{report.kind}: verdict {report.verdict} (outputs in {out})")
    return 0 if report.verdict == "pass" else 3


def cmd_validate(config_path) -> int:
    try:
        config = parse_config_file(config_path)
        validate_shape(config)
    except (OSError, ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    checks = check_gates(config)
    ok = True
    for check in checks:
        tag = "PASS" if check.passed else "FAIL"
        ok = ok and check.passed
        print(f"{tag} {check.condition}: {check.detail}")
    return 0 if ok else 2


def cmd_partition(k: int, alpha: float, beta: float, out_path) -> int:
    try:
        partition = build_partition(k, alpha, beta)
    except ValueError as exc:
        print(f"partition rejected: {exc}", file=sys.stderr)
        return 2
    try:
        partition_to_csv(partition, out_path)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(
        f"k={partition.k}: p={partition.p_k} q={partition.q_k} r={partition.r_k} "
        f"bracket_ok={str(partition.bracket_ok).lower()} (table in {out_path})"
    )
    return 0


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise _CliUsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog="mixkde",
        description="Kernel density estimation experiments for dependent Gaussian sequences",
    )
    parser.add_argument("--version", action="version", version=f"mixkde {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment config and write reports")
    p_run.add_argument("config", help="experiment config file")
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.add_argument(
        "--threads",
        type=int,
        default=None,
        help=f"worker thread cap; 0 means one per CPU (default: ${THREADS_ENV_VAR} or 0)",
    )

    p_val = sub.add_parser("validate", help="check a config and print gate verdicts")
    p_val.add_argument("config", help="experiment config file")

    p_part = sub.add_parser("partition", help="write one dyadic block partition as CSV")
    p_part.add_argument("--k", type=int, required=True, help="dyadic level")
    p_part.add_argument("--alpha", type=float, required=True, help="big-block exponent")
    p_part.add_argument("--beta", type=float, required=True, help="small-block exponent")
    p_part.add_argument("--out", required=True, help="output CSV path")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _CliUsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.command == "run":
        return cmd_run(args.config, args.out, threads=args.threads)
    if args.command == "validate":
        return cmd_validate(args.config)
    return cmd_partition(args.k, args.alpha, args.beta, args.out)


if __name__ == "__main__":
    sys.exit(main())
