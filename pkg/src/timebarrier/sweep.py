"""Batch experiments over parameter grids and initial conditions.

A sweep is the finite surrogate for "every initial condition": it simulates,
certifies, and compares against the closed forms for each (params, x0) cell.
Failures are data, not exceptions -- the point of a sweep is to map the
failure boundary (for example the non-reaching regime below exponent 1).
Rows may be computed concurrently but are always reduced in lexicographic
grid order, so a sweep with a fixed config is bit-reproducible.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .analytic import exact_solution_scalar, settling_bound
from .certify import check_dissipation
from .core import BarrierParams, NumericPolicy, TimeBarrierError, validate_params
from .integrate import simulate
from .systems import make_autonomous_power_law, make_time_barrier_componentwise, make_time_barrier_scalar

__all__ = [
    "SweepConfig",
    "SweepRow",
    "SweepResult",
    "SeparationRow",
    "ALL_CHECKS",
    "DEFAULT_GRID",
    "run_sweep",
    "separation_table",
]

ALL_CHECKS = ("deadline", "certificate", "bound_tightness", "oracle_error")
_LAWS = ("time_barrier", "time_barrier_componentwise")


@dataclass(frozen=True)
class SweepConfig:
    """Grid of parameter values, initial-condition decades, and checks to run."""

    tc_values: tuple[float, ...] = (0.5, 1.0, 2.0)
    beta_values: tuple[float, ...] = (2.0, 3.0, 4.0)
    q_values: tuple[float, ...] = (0.5, 1.0, 2.0)
    alpha_values: tuple[float, ...] = (0.2, 0.4, 0.5)
    x0_decades: tuple[int, int] = (-6, 6)
    law: str = "time_barrier"
    checks: tuple[str, ...] = ALL_CHECKS
    seed: int = 0
    workers: int = 1
    dim: int = 2  # only used by the componentwise law

    def __post_init__(self):
        for name in ("tc_values", "beta_values", "q_values", "alpha_values"):
            values = getattr(self, name)
            if len(values) == 0:
                raise ValueError(f"{name} must be non-empty")
            if not all(math.isfinite(v) for v in values):
                raise ValueError(f"{name} contains non-finite values")
        lo, hi = self.x0_decades
        if lo > hi:
            raise ValueError(f"x0_decades lower {lo} exceeds upper {hi}")
        if self.law not in _LAWS:
            raise ValueError(f"unknown law {self.law!r}; expected one of {_LAWS}")
        unknown = set(self.checks) - set(ALL_CHECKS)
        if unknown:
            raise ValueError(f"unknown checks {sorted(unknown)}; expected subset of {ALL_CHECKS}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    def grid(self) -> list[BarrierParams]:
        return [
            BarrierParams(tc, beta, q, alpha)
            for tc in self.tc_values
            for beta in self.beta_values
            for q in self.q_values
            for alpha in self.alpha_values
        ]

    def x0_values(self) -> list[float]:
        lo, hi = self.x0_decades
        return [10.0**k for k in range(lo, hi + 1)]


DEFAULT_GRID = SweepConfig()


@dataclass(frozen=True)
class SweepRow:
    """Results for one (params, x0) cell; check fields are None when skipped."""

    index: int
    tc: float
    beta: float
    q: float
    alpha: float
    m: float
    admissible: bool
    x0: float
    converged_at: Optional[float]
    tau_bound: Optional[float]
    reaches_zero: Optional[bool]
    deadline_pass: Optional[bool]
    certificate_pass: Optional[bool]
    bound_gap: Optional[float]
    oracle_error: Optional[float]
    oracle_pass: Optional[bool]
    terminal_norm: Optional[float]
    step_count: Optional[int]
    error: str = ""


@dataclass(frozen=True)
class SweepResult:
    """Ordered rows plus failure counts and worst-case row identifiers."""

    config: SweepConfig
    rows: list[SweepRow]
    summary: dict = field(default_factory=dict)


def _oracle_tolerance(x0: float, policy: NumericPolicy) -> float:
    return max(1e-6 * abs(x0), 10.0 * policy.eps_conv)


def _compute_row(args) -> SweepRow:
    index, p, x0, cfg, policy = args
    verdict = validate_params(p)
    base = dict(
        index=index, tc=p.tc, beta=p.beta, q=p.q, alpha=p.alpha, m=p.m,
        admissible=verdict.admissible, x0=x0,
    )
    try:
        if cfg.law == "time_barrier":
            spec = make_time_barrier_scalar(p, policy)
            start = x0
        else:
            spec = make_time_barrier_componentwise(p, cfg.dim, policy)
            start = np.full(cfg.dim, x0)
        traj = simulate(spec, start, p, policy)
    except TimeBarrierError as exc:
        return SweepRow(
            **base, converged_at=None, tau_bound=None, reaches_zero=None,
            deadline_pass=False if "deadline" in cfg.checks else None,
            certificate_pass=False if "certificate" in cfg.checks else None,
            bound_gap=None, oracle_error=None,
            oracle_pass=False if "oracle_error" in cfg.checks else None,
            terminal_norm=None, step_count=None,
            error=f"{type(exc).__name__}: {exc}",
        )

    sb = settling_bound(p, abs(x0))
    deadline_pass = None
    if "deadline" in cfg.checks:
        deadline_pass = traj.converged_at is not None and traj.converged_at <= traj.t_end
    certificate_pass = None
    if "certificate" in cfg.checks:
        certificate_pass = check_dissipation(traj, p, policy).passed
    bound_gap = None
    if "bound_tightness" in cfg.checks and traj.converged_at is not None:
        bound_gap = abs(traj.converged_at - sb.tau_bound)
    oracle_error = None
    oracle_pass = None
    if "oracle_error" in cfg.checks and cfg.law == "time_barrier":
        times = traj.times
        sim = traj.states[:, 0]
        exact = np.array([exact_solution_scalar(p, x0, t) for t in times])
        oracle_error = float(np.max(np.abs(sim - exact)))
        oracle_pass = oracle_error <= _oracle_tolerance(x0, policy)
    return SweepRow(
        **base,
        converged_at=traj.converged_at,
        tau_bound=sb.tau_bound,
        reaches_zero=sb.reaches_zero,
        deadline_pass=deadline_pass,
        certificate_pass=certificate_pass,
        bound_gap=bound_gap,
        oracle_error=oracle_error,
        oracle_pass=oracle_pass,
        terminal_norm=traj.terminal_norm,
        step_count=traj.step_count,
    )


def run_sweep(cfg: SweepConfig, policy: Optional[NumericPolicy] = None) -> SweepResult:
    """Run every (params, x0) cell, in lexicographic grid order.

    Deterministic for a fixed config and seed; simulation failures land in
    the row's ``error`` field instead of raising.
    """
    policy = policy if policy is not None else NumericPolicy()
    tasks = []
    index = 0
    for p in cfg.grid():
        for x0 in cfg.x0_values():
            tasks.append((index, p, x0, cfg, policy))
            index += 1
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            rows = list(pool.map(_compute_row, tasks))
    else:
        rows = [_compute_row(task) for task in tasks]

    admissible_rows = [r for r in rows if r.admissible]
    inadmissible = len(rows) - len(admissible_rows)
    numeric_errors = sum(1 for r in rows if r.error)

    def failures(rows_, attr):
        return sum(1 for r in rows_ if getattr(r, attr) is False)

    summary = {
        "rows": len(rows),
        "admissible_rows": len(admissible_rows),
        "inadmissible_rows": inadmissible,
        "numeric_errors": numeric_errors,
        "deadline_failures": failures(admissible_rows, "deadline_pass"),
        "certificate_failures": failures(admissible_rows, "certificate_pass"),
        "oracle_failures": failures(rows, "oracle_pass"),
    }
    if "bound_tightness" in cfg.checks:
        bound_failures = 0
        worst_gap = 0.0
        worst_gap_row = None
        for r in admissible_rows:
            if r.bound_gap is None:
                if not r.error and r.converged_at is None:
                    bound_failures += 1
                continue
            if r.bound_gap > 1e-4 * r.tc:
                bound_failures += 1
            if r.bound_gap > worst_gap:
                worst_gap, worst_gap_row = r.bound_gap, r.index
        summary["bound_failures"] = bound_failures
        summary["worst_bound_gap"] = worst_gap
        summary["worst_bound_gap_row"] = worst_gap_row
    if "oracle_error" in cfg.checks:
        worst_err = 0.0
        worst_err_row = None
        for r in rows:
            if r.oracle_error is not None and r.oracle_error > worst_err:
                worst_err, worst_err_row = r.oracle_error, r.index
        summary["worst_oracle_error"] = worst_err
        summary["worst_oracle_error_row"] = worst_err_row

    checked_failures = summary["deadline_failures"] + summary["certificate_failures"]
    checked_failures += summary.get("bound_failures", 0) + summary["oracle_failures"]
    summary["check_failures"] = checked_failures + numeric_errors
    return SweepResult(config=cfg, rows=rows, summary=summary)


@dataclass(frozen=True)
class SeparationRow:
    """One line of the deadline-versus-state-decay comparison table."""

    x0: float
    barrier_settling: Optional[float]
    autonomous_settling: float
    autonomous_exceeds_deadline: bool


def separation_table(
    tc: float,
    q: float,
    alpha: float,
    x0_list,
    policy: Optional[NumericPolicy] = None,
) -> list[SeparationRow]:
    """Compare deadline-enforced settling against the power-law comparator.

    The barrier exponent is set to 1/(1-alpha), the minimal admissible value,
    which makes the comparison least favorable to the deadline law. The
    comparator settling time |x0|**(1-alpha) / (q*(1-alpha)) grows without
    bound in |x0| while the simulated settling stays below tc.
    """
    policy = policy if policy is not None else NumericPolicy()
    beta = 1.0 / (1.0 - alpha)
    p = BarrierParams(tc, beta, q, alpha)
    law, _ = make_autonomous_power_law(q, alpha)
    spec = make_time_barrier_scalar(p, policy)
    rows = []
    for x0 in x0_list:
        traj = simulate(spec, float(x0), p, policy)
        auto = law.settling_time(abs(float(x0)))
        rows.append(
            SeparationRow(
                x0=float(x0),
                barrier_settling=traj.converged_at,
                autonomous_settling=auto,
                autonomous_exceeds_deadline=auto > tc,
            )
        )
    return rows
