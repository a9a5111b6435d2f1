"""Command-line front end: simulate | certify | sweep | bound | witness.

Outputs are offline-friendly: trajectory and sweep CSVs use shortest
round-trip decimal floats (17 significant digits), and every command prints a
line-oriented ``key=value`` report block next to the human-readable text.
Exit codes partition outcomes: 0 success, 1 validation/config error,
2 numerical failure (stall or blow-up), 3 property failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Optional

import numpy as np

from .analytic import settling_bound
from .certify import check_dissipation, find_nonautonomy_witness
from .core import (
    BarrierParams,
    BlowUpError,
    NumericPolicy,
    StallError,
    TimeBarrierError,
    validate_params,
)
from .integrate import Trajectory, settling_report, simulate
from .sweep import SweepConfig, SweepResult, run_sweep
from .systems import make_time_barrier_componentwise, make_time_barrier_scalar

__all__ = ["main", "entry", "render_trajectory_csv", "parse_trajectory_csv", "render_sweep_csv"]

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERIC = 2
EXIT_PROPERTY = 3


class ConfigError(ValueError):
    """Invalid or unknown configuration content."""


# ----------------------------------------------------------------- formatting

def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def render_trajectory_csv(traj: Trajectory) -> str:
    """CSV with header t,x_1..x_n,V,W; floats round-trip exactly."""
    dim = traj.spec.dim
    header = ["t"] + [f"x_{i + 1}" for i in range(dim)] + ["V", "W"]
    lines = [",".join(header)]
    for s in traj.samples:
        cells = [_fmt(s.t)]
        cells.extend(_fmt(s.x[i]) for i in range(dim))
        cells.append(_fmt(s.v) if s.v is not None else "nan")
        cells.append(_fmt(s.w) if s.w is not None else "nan")
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def parse_trajectory_csv(text: str):
    """Inverse of :func:`render_trajectory_csv`; returns (header, rows array)."""
    lines = [ln for ln in text.splitlines() if ln]
    header = lines[0].split(",")
    rows = np.array([[float(cell) for cell in ln.split(",")] for ln in lines[1:]])
    return header, rows


_SWEEP_COLUMNS = (
    "index", "tc", "beta", "q", "alpha", "m", "admissible", "x0",
    "converged_at", "tau_bound", "reaches_zero", "deadline_pass",
    "certificate_pass", "bound_gap", "oracle_error", "oracle_pass",
    "terminal_norm", "step_count", "error",
)


def render_sweep_csv(result: SweepResult) -> str:
    lines = [",".join(_SWEEP_COLUMNS)]
    for row in result.rows:
        cells = []
        for col in _SWEEP_COLUMNS:
            value = getattr(row, col)
            cells.append(value if col == "error" else _fmt(value))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def _print_block(pairs) -> None:
    for key, value in pairs:
        print(f"{key}={_fmt(value)}")


# -------------------------------------------------------------------- config

_SCHEMA = {
    "params": {"tc", "beta", "q", "alpha"},
    "policy": {"eps_conv", "delta_end", "rel_tol", "abs_tol", "sign_eps", "residual_tol"},
    "simulate": {"x0", "bias"},
    "sweep": {"tc", "beta", "q", "alpha", "x0_decades", "law", "checks", "seed", "workers", "dim"},
    "output": {"trajectory", "report", "sweep"},
}


def load_config(path: Optional[str]) -> dict:
    """Strict JSON config: unknown sections or keys are rejected by name."""
    if path is None:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path!r} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config root must be an object of sections")
    for section, content in data.items():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown config key: {section}")
        if not isinstance(content, dict):
            raise ConfigError(f"config section {section!r} must be an object")
        for key in content:
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown config key: {section}.{key}")
    return data


def _resolve(args, flag: str, config: dict, section: str, key: str, default):
    value = getattr(args, flag, None)
    if value is not None:
        return value
    section_map = config.get(section, {})
    if key in section_map:
        return section_map[key]
    return default


def _policy_from_config(config: dict) -> NumericPolicy:
    section = config.get("policy", {})
    try:
        return NumericPolicy(**section)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid policy: {exc}") from exc


def _params_from(args, config: dict) -> BarrierParams:
    return BarrierParams(
        tc=float(_resolve(args, "tc", config, "params", "tc", 1.0)),
        beta=float(_resolve(args, "beta", config, "params", "beta", 2.0)),
        q=float(_resolve(args, "q", config, "params", "q", 1.0)),
        alpha=float(_resolve(args, "alpha", config, "params", "alpha", 0.5)),
    )


def _check_structural(p: BarrierParams) -> None:
    """Constructor preconditions: positivity of tc and alpha's range.

    Inadmissible exponents (m < 1) are allowed here; commands that require the
    full admissibility verdict check it separately.
    """
    for name in ("tc", "beta", "q", "alpha"):
        if not math.isfinite(getattr(p, name)):
            raise ValueError(f"non-finite parameter: {name}")
    if p.tc <= 0.0:
        raise ValueError("tc must be > 0")
    if p.beta < 0.0:
        raise ValueError("beta must be >= 0")
    if p.q < 0.0:
        raise ValueError("q must be >= 0")
    if not 0.0 < p.alpha < 1.0:
        raise ValueError("alpha in (0,1) violated")


def _parse_x0(text: str) -> np.ndarray:
    try:
        return np.array([float(part) for part in str(text).split(",")])
    except ValueError as exc:
        raise ValueError(f"invalid --x0 value {text!r}") from exc


# ------------------------------------------------------------------ commands

def _cmd_simulate(args, config: dict) -> int:
    p = _params_from(args, config)
    _check_structural(p)
    policy = _policy_from_config(config)
    x0 = _parse_x0(_resolve(args, "x0", config, "simulate", "x0", "1.0"))
    if x0.size == 1:
        spec = make_time_barrier_scalar(p, policy)
    else:
        spec = make_time_barrier_componentwise(p, x0.size, policy)
    traj = simulate(spec, x0, p, policy)
    report = settling_report(traj, p)

    out_path = args.out or config.get("output", {}).get("trajectory")
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(render_trajectory_csv(traj))
        if not args.quiet:
            print(f"trajectory written to {out_path} ({len(traj.samples)} samples)")

    _print_block(
        [
            ("converged_at", report.converged_at),
            ("tau_bound", report.tau_bound),
            ("deadline_pass", report.deadline_pass),
        ]
    )
    if not args.quiet:
        verdict = "PASS" if report.deadline_pass else "FAIL"
        print(f"deadline check: {verdict} (deadline tc={_fmt(p.tc)})")
    return EXIT_OK if report.deadline_pass else EXIT_PROPERTY


def _cmd_certify(args, config: dict) -> int:
    p = _params_from(args, config)
    _check_structural(p)
    verdict = validate_params(p)
    if not verdict.admissible:
        raise ValueError(f"inadmissible parameters: {verdict.reason}")
    policy = _policy_from_config(config)
    bias = float(_resolve(args, "bias", config, "simulate", "bias", 0.0))
    spec = make_time_barrier_scalar(p, policy, bias=bias)
    x0 = _parse_x0(_resolve(args, "x0", config, "simulate", "x0", "1.0"))
    traj = simulate(spec, x0, p, policy)
    report = check_dissipation(traj, p, policy)

    pairs = [
        ("violations", len(report.violations)),
        ("max_residual", report.max_residual),
        ("w_monotone", report.w_monotone),
        ("converged_at", traj.converged_at),
    ]
    _print_block(pairs)
    out_path = args.out or config.get("output", {}).get("report")
    if out_path:
        lines = [f"{k}={_fmt(v)}" for k, v in pairs]
        lines += [
            f"violation={_fmt(v.t)},{_fmt(v.v)},{_fmt(v.lhs)},{_fmt(v.rhs_bound)},{_fmt(v.residual)}"
            for v in report.violations
        ]
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
    if not args.quiet:
        state = "PASS" if report.passed else "FAIL"
        print(
            f"dissipation certificate: {state} "
            f"({len(report.violations)} violations over {report.checked_samples} samples)"
        )
    return EXIT_OK if report.passed else EXIT_PROPERTY


def _sweep_config_from(config: dict) -> SweepConfig:
    section = dict(config.get("sweep", {}))
    kwargs = {}
    for key, target in (
        ("tc", "tc_values"), ("beta", "beta_values"),
        ("q", "q_values"), ("alpha", "alpha_values"),
    ):
        if key in section:
            kwargs[target] = tuple(float(v) for v in section.pop(key))
    if "x0_decades" in section:
        lo, hi = section.pop("x0_decades")
        kwargs["x0_decades"] = (int(lo), int(hi))
    if "checks" in section:
        kwargs["checks"] = tuple(section.pop("checks"))
    for key in ("law",):
        if key in section:
            kwargs[key] = section.pop(key)
    for key in ("seed", "workers", "dim"):
        if key in section:
            kwargs[key] = int(section.pop(key))
    try:
        return SweepConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"invalid sweep config: {exc}") from exc


def _cmd_sweep(args, config: dict) -> int:
    cfg = _sweep_config_from(config)
    policy = _policy_from_config(config)
    result = run_sweep(cfg, policy)
    out_path = args.out or config.get("output", {}).get("sweep", "sweep.csv")
    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write(render_sweep_csv(result))
    summary = result.summary
    _print_block(sorted(summary.items()))
    if not args.quiet:
        print(f"sweep written to {out_path} ({summary['rows']} rows)")
        print(
            f"deadline failures: {summary['deadline_failures']} "
            f"(inadmissible rows excluded: {summary['inadmissible_rows']})"
        )
    return EXIT_OK if summary["check_failures"] == 0 else EXIT_PROPERTY


def _cmd_bound(args, config: dict) -> int:
    p = _params_from(args, config)
    _check_structural(p)
    x0 = _parse_x0(_resolve(args, "x0", config, "simulate", "x0", "1.0"))
    v0 = float(np.max(np.abs(x0)))
    sb = settling_bound(p, v0)
    _print_block(
        [("tau_bound", sb.tau_bound), ("reaches_zero", sb.reaches_zero), ("v0", sb.v0)]
    )
    if not args.quiet:
        print(f"settling bound for v0={_fmt(v0)}: {_fmt(sb.tau_bound)} (deadline {_fmt(p.tc)})")
    return EXIT_OK


def _cmd_witness(args, config: dict) -> int:
    p = _params_from(args, config)
    _check_structural(p)
    witness = find_nonautonomy_witness(p, args.vlevel, args.t1, args.t2)
    _print_block(
        [
            ("v_level", witness.v_level),
            ("t1", witness.t1),
            ("t2", witness.t2),
            ("vdot1", witness.vdot1),
            ("vdot2", witness.vdot2),
            ("gap", witness.gap),
        ]
    )
    if not args.quiet:
        note = witness.note or "decay rate depends on time at a fixed level"
        print(f"witness: {note}")
    return EXIT_OK


# -------------------------------------------------------------------- parser

class _Parser(argparse.ArgumentParser):
    """argparse exits usage errors with code 2; here that code means a
    numerical failure, so flag mistakes are validation errors instead."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="timebarrier",
        description="Simulate, certify, and stress-test decay laws with a hard convergence deadline.",
    )
    parser.add_argument("--config", metavar="PATH", default=None,
                        help="JSON config file with strict keys (default: none)")
    parser.add_argument("--out", metavar="PATH", default=None,
                        help="output file path (default: command-specific)")
    parser.add_argument("--quiet", action="store_true", default=False,
                        help="suppress human-readable text, keep key=value lines (default: off)")
    # same globals accepted after the subcommand; SUPPRESS keeps the
    # subparser from clobbering values parsed before it
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", metavar="PATH", default=argparse.SUPPRESS,
                        help="JSON config file with strict keys (default: none)")
    shared.add_argument("--out", metavar="PATH", default=argparse.SUPPRESS,
                        help="output file path (default: command-specific)")
    shared.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS,
                        help="suppress human-readable text, keep key=value lines (default: off)")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add_params(sp):
        sp.add_argument("--tc", type=float, default=None,
                        help="convergence deadline, > 0 (default: 1.0)")
        sp.add_argument("--beta", type=float, default=None,
                        help="barrier exponent, >= 0 (default: 2.0)")
        sp.add_argument("--q", type=float, default=None,
                        help="decay gain, >= 0 (default: 1.0)")
        sp.add_argument("--alpha", type=float, default=None,
                        help="decay exponent in (0,1) (default: 0.5)")

    sp = sub.add_parser("simulate", parents=[shared], help="integrate the decay law and report settling")
    add_params(sp)
    sp.add_argument("--x0", default=None,
                    help="initial state, scalar or comma-separated vector (default: 1.0)")
    sp.set_defaults(func=_cmd_simulate)

    sp = sub.add_parser("certify", parents=[shared], help="check the dissipation inequality along a trajectory")
    add_params(sp)
    sp.add_argument("--x0", default=None,
                    help="initial state, scalar or comma-separated vector (default: 1.0)")
    sp.add_argument("--bias", type=float, default=None,
                    help="additive bias injected into the dynamics (default: 0.0)")
    sp.set_defaults(func=_cmd_certify)

    sp = sub.add_parser("sweep", parents=[shared], help="run a parameter/initial-condition grid with checks")
    sp.set_defaults(func=_cmd_sweep)

    sp = sub.add_parser("bound", parents=[shared], help="print the analytic settling bound")
    add_params(sp)
    sp.add_argument("--x0", default=None,
                    help="initial state, scalar or comma-separated vector (default: 1.0)")
    sp.set_defaults(func=_cmd_bound)

    sp = sub.add_parser("witness", parents=[shared], help="show the decay rate at one level and two times")
    add_params(sp)
    sp.add_argument("--vlevel", type=float, default=0.25,
                    help="Lyapunov level to probe, > 0 (default: 0.25)")
    sp.add_argument("--t1", type=float, default=0.0,
                    help="first probe time (default: 0.0)")
    sp.add_argument("--t2", type=float, default=0.5,
                    help="second probe time (default: 0.5)")
    sp.set_defaults(func=_cmd_witness)
    return parser


def main(argv=None) -> int:
    """Run one command; always returns an exit code in {0, 1, 2, 3}."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help (0) or a usage error (1)
        return int(exc.code or 0)
    try:
        config = load_config(args.config)
        return args.func(args, config)
    except (StallError, BlowUpError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except TimeBarrierError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
