"""Command-line front end: run, sweep, compare, oracle.

Config files are flat `key = value` text (UTF-8, `#` comments); energies
are given in decimal units and converted exactly to milli-units. CLI
flags override file values. Every output starts with a comment header
echoing the fully resolved configuration.

Exit codes: 0 success, 1 configuration/validation error, 2 runtime error.
If the EHSIM_OUTPUT_DIR environment variable is set, relative --out paths
are resolved against it.
"""

from __future__ import annotations

import argparse
import io
import os
import sys
from pathlib import Path

from .core import PolicyKind, SimConfig, milli_to_str, to_milli
from .engine import run, write_trace_csv
from .errors import ConfigError, EhsimError, ParseError, ValidationError
from .oracle import analyze
from .sweep import (
    SweepSpec,
    compare_policies,
    find_optimum,
    run_sweep,
    write_comparison_csv,
    write_sweep_csv,
)

_ENERGY_KEYS = ("packet_energy", "e_task", "e_meas", "e_cap")
_INT_KEYS = ("buffer_cap", "period", "t_max")
_FLOAT_KEYS = ("p", "lambda")
_ALL_KEYS = _FLOAT_KEYS + _ENERGY_KEYS + _INT_KEYS + ("policy", "seed")


def parse_seed(text: str) -> int:
    """Seed as decimal or 0x-prefixed hex."""
    try:
        value = int(text, 16) if text.lower().startswith("0x") else int(text)
    except ValueError as exc:
        raise ValidationError("seed", f"not a valid integer: {text!r}") from exc
    if not (0 <= value < 2**64):
        raise ValidationError("seed", "must fit in 64 unsigned bits")
    return value


def _coerce(key: str, raw: str):
    if key in _FLOAT_KEYS:
        try:
            return float(raw)
        except ValueError as exc:
            raise ValidationError(key, f"not a number: {raw!r}") from exc
    if key in _ENERGY_KEYS:
        return to_milli(raw)
    if key in _INT_KEYS:
        try:
            return int(raw)
        except ValueError as exc:
            raise ValidationError(key, f"not an integer: {raw!r}") from exc
    if key == "policy":
        try:
            return PolicyKind(raw.lower())
        except ValueError as exc:
            raise ValidationError(key, "must be 'eb' or 'ea'") from exc
    if key == "seed":
        return parse_seed(raw)
    raise ValidationError(key, "unknown key")


def read_config_file(path: str) -> dict:
    """Parse a key=value config file into coerced SimConfig field values."""
    values: dict = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(0, f"cannot read {path}: {exc}") from exc
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ParseError(line_no, f"expected 'key = value', got {line.strip()!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        raw = raw.strip()
        if key not in _ALL_KEYS:
            raise ParseError(line_no, f"unknown key {key!r}")
        if key in values:
            raise ParseError(line_no, f"duplicate key {key!r}")
        if not raw:
            raise ParseError(line_no, f"missing value for {key!r}")
        values[key] = _coerce(key, raw)
    return values


def build_config(args: argparse.Namespace) -> SimConfig:
    """Resolve defaults <- config file <- CLI flags into a validated SimConfig."""
    values: dict = {}
    if getattr(args, "config", None):
        values.update(read_config_file(args.config))
    for key in _ALL_KEYS:
        attr = "lam" if key == "lambda" else key
        flag = getattr(args, attr, None)
        if flag is not None:
            values[key] = _coerce(key, str(flag)) if key != "seed" else parse_seed(str(flag))
    period_flag = getattr(args, "F", None)
    if period_flag is not None:
        values["period"] = int(period_flag)
        values.setdefault("policy", PolicyKind.EB)
    period_flag = getattr(args, "Q", None)
    if period_flag is not None:
        values["period"] = int(period_flag)
        values.setdefault("policy", PolicyKind.EA)
    if "lambda" in values:
        values["lam"] = values.pop("lambda")
    return SimConfig(**values).validate()


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key=value config file")
    parser.add_argument("--p", type=float, help="task arrival probability")
    parser.add_argument("--lambda", dest="lam", type=float, help="mean energy packets per slot")
    parser.add_argument("--packet-energy", dest="packet_energy", help="energy units per packet")
    parser.add_argument("--e-task", dest="e_task", help="task execution energy, units")
    parser.add_argument("--e-meas", dest="e_meas", help="measurement energy, units")
    parser.add_argument("--e-cap", dest="e_cap", help="storage capacity, units")
    parser.add_argument("--buffer-cap", dest="buffer_cap", type=int, help="task buffer size")
    parser.add_argument("--period", type=int, help="policy period (F or Q)")
    parser.add_argument("--F", type=int, help="EB task execution period (implies --policy eb)")
    parser.add_argument("--Q", type=int, help="EA measurement period (implies --policy ea)")
    parser.add_argument("--policy", choices=["eb", "ea"], help="scheduling policy")
    parser.add_argument("--t-max", dest="t_max", type=int, help="number of slots")
    parser.add_argument("--seed", help="master seed, decimal or 0x-hex")


def _resolve_out(path: str | None):
    if path is None:
        return None
    p = Path(path)
    base = os.environ.get("EHSIM_OUTPUT_DIR")
    if base and not p.is_absolute():
        p = Path(base) / p
    return p


def _emit(text: str, out_path) -> None:
    if out_path is None:
        sys.stdout.write(text)
    else:
        out_path.parent.mkdir(parents=True, exist_ok=True)
        out_path.write_text(text, encoding="utf-8", newline="")


def _audit_header(config: SimConfig, extra=()) -> str:
    lines = [f"# {k} = {v}" for k, v in config.as_audit_items()]
    lines += [f"# {k} = {v}" for k, v in extra]
    return "\n".join(lines) + "\n"


def _cmd_run(args: argparse.Namespace) -> int:
    config = build_config(args)
    result = run(config, collect_trace=args.trace is not None)
    buf = io.StringIO()
    buf.write(_audit_header(config))
    c = result.counters
    buf.write(f"arrived = {c.arrived}\n")
    buf.write(f"dropped = {c.dropped}\n")
    buf.write(f"executed = {c.executed}\n")
    buf.write(f"attempts = {c.attempts}\n")
    buf.write(f"failed_attempts = {c.failed_attempts}\n")
    buf.write(f"measurements = {c.measurements}\n")
    buf.write(f"final_energy = {milli_to_str(result.final_energy)}\n")
    buf.write(f"final_buffer_occupancy = {result.final_buffer_occupancy}\n")
    buf.write(f"completion_rate = {format(result.completion_rate, '.10g')}\n")
    buf.write(f"vacuous = {str(result.vacuous).lower()}\n")
    _emit(buf.getvalue(), _resolve_out(args.out))
    if args.trace is not None:
        trace_buf = io.StringIO()
        write_trace_csv(trace_buf, result)
        _emit(trace_buf.getvalue(), _resolve_out(args.trace))
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    config = build_config(args)
    if args.param == "F":
        config = config.replace(policy=PolicyKind.EB)
    else:
        config = config.replace(policy=PolicyKind.EA)
    spec = SweepSpec(
        base_config=config,
        swept_param=args.param,
        values=list(range(args.start, args.stop + 1)),
        replicates=args.replicates,
        master_seed=parse_seed(args.master_seed),
    )
    curve = run_sweep(spec)
    value, rate = find_optimum(curve)
    buf = io.StringIO()
    write_sweep_csv(buf, spec, curve)
    buf.write(f"# optimum: {spec.swept_param} = {value}, mean_rate = {format(rate, '.10g')}\n")
    _emit(buf.getvalue(), _resolve_out(args.out))
    return 0


def _cmd_compare(args: argparse.Namespace) -> int:
    config = build_config(args)
    values = list(range(args.start, args.stop + 1))
    master_seed = parse_seed(args.master_seed)
    report = compare_policies(
        config, values, replicates=args.replicates, master_seed=master_seed
    )
    buf = io.StringIO()
    write_comparison_csv(buf, report, args.replicates, master_seed)
    _emit(buf.getvalue(), _resolve_out(args.out))
    return 0


def _cmd_oracle(args: argparse.Namespace) -> int:
    config = build_config(args)
    result = analyze(config)
    buf = io.StringIO()
    buf.write(_audit_header(config))
    buf.write("rate,states,iterations,residual\n")
    buf.write(
        f"{format(result.rate, '.10g')},{result.state_count},"
        f"{result.iterations},{format(result.residual, '.3e')}\n"
    )
    _emit(buf.getvalue(), _resolve_out(args.out))
    return 0


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ehsim",
        description="Energy-harvesting IoT task-scheduling simulator (EB/EA)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="single simulation run")
    _add_config_flags(p_run)
    p_run.add_argument("--out", help="write report here instead of stdout")
    p_run.add_argument("--trace", help="write per-slot trace CSV to this file")
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="sweep F or Q and report the optimum")
    _add_config_flags(p_sweep)
    p_sweep.add_argument("--param", choices=["F", "Q"], required=True)
    p_sweep.add_argument("--from", dest="start", type=int, default=1)
    p_sweep.add_argument("--to", dest="stop", type=int, default=30)
    p_sweep.add_argument("--replicates", type=int, default=5)
    p_sweep.add_argument("--master-seed", dest="master_seed", default="1")
    p_sweep.add_argument("--out", help="write CSV here instead of stdout")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_cmp = sub.add_parser("compare", help="EB vs EA grid at matched periods")
    _add_config_flags(p_cmp)
    p_cmp.add_argument("--from", dest="start", type=int, default=1)
    p_cmp.add_argument("--to", dest="stop", type=int, default=30)
    p_cmp.add_argument("--replicates", type=int, default=5)
    p_cmp.add_argument("--master-seed", dest="master_seed", default="1")
    p_cmp.add_argument("--out", help="write CSV here instead of stdout")
    p_cmp.set_defaults(func=_cmd_compare)

    p_oracle = sub.add_parser("oracle", help="exact stationary completion rate")
    _add_config_flags(p_oracle)
    p_oracle.add_argument("--out", help="write CSV here instead of stdout")
    p_oracle.set_defaults(func=_cmd_oracle)

    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"ehsim: configuration error: {exc}", file=sys.stderr)
        return 1
    except EhsimError as exc:
        print(f"ehsim: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
