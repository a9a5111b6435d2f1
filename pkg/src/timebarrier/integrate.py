"""Singularity-aware adaptive integration up to the convergence deadline.

The stepper is an embedded Dormand-Prince 5(4) pair with proportional-integral
step-size control and a quartic dense-output interpolant. Two things make it
deadline-aware:

* the step size is clamped to 0.5 * (tc - t), so steps shrink geometrically
  into the barrier and the locally huge coefficient beta/(tc - t) never
  straddles a step;
* a convergence event fires on the first accepted step that ends with
  max|x_i| <= eps_conv; the crossing is refined on the dense output, the state
  is clamped to exactly zero from there on (the dynamics must keep the origin
  an equilibrium), and the reported settling instant adds the closed-form
  remaining time of the reference law, capped at tc - delta_end.

Each simulate() call owns its mutable state; returned trajectories are
immutable and safe to share.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .analytic import remaining_settling_time, settling_bound
from .core import (
    BarrierParams,
    BlowUpError,
    DynamicsSpec,
    NumericPolicy,
    StallError,
    w_transform,
)

__all__ = [
    "TrajectorySample",
    "Trajectory",
    "SettlingReport",
    "simulate",
    "resample",
    "settling_report",
]

# Dormand-Prince 5(4) tableau with the Shampine quartic interpolant.
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0])
_A = (
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
)
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84])
_E = np.array(
    [71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40]
)
_P = np.array(
    [
        [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
        [0.0, 0.0, 0.0, 0.0],
        [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
        [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
        [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
        [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
        [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
    ]
)

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0
_KAPPA = 0.5  # geometric clamp h <= _KAPPA * (tc - t)
_MAX_STEPS = 1_000_000
_OUTPUT_POINTS = 512
_THETA_EXP = np.arange(1.0, 5.0)


@dataclass(frozen=True)
class TrajectorySample:
    """One recorded point: time, state, and the Lyapunov/barrier values."""

    t: float
    x: np.ndarray
    v: Optional[float]
    w: Optional[float]
    vdot: Optional[float]


@dataclass(frozen=True)
class SettlingReport:
    """Measured settling estimate versus the analytic bound."""

    converged_at: Optional[float]
    tau_bound: float
    reaches_zero: bool
    deadline_pass: bool
    v0: float
    tc: float


@dataclass
class Trajectory:
    """Integration record with dense-output support.

    ``event_time`` is the refined instant where max|x_i| crossed eps_conv;
    ``converged_at`` adds the closed-form remaining settling time of the
    reference law from that point, capped at ``t_end = tc - delta_end``. All
    recorded samples past ``event_time`` are exactly zero (clamped).
    """

    spec: DynamicsSpec
    params: BarrierParams
    policy: NumericPolicy
    samples: list[TrajectorySample]
    converged_at: Optional[float]
    event_time: Optional[float]
    terminal_norm: float
    step_count: int
    rejected_steps: int
    t_end: float
    _seg_t0: np.ndarray
    _seg_h: np.ndarray
    _seg_x0: np.ndarray
    _seg_coef: np.ndarray
    _x_final: np.ndarray

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.samples])

    @property
    def states(self) -> np.ndarray:
        return np.array([s.x for s in self.samples])

    @property
    def v_values(self) -> np.ndarray:
        return np.array(
            [s.v if s.v is not None else np.nan for s in self.samples]
        )

    @property
    def w_values(self) -> np.ndarray:
        return np.array(
            [s.w if s.w is not None else np.nan for s in self.samples]
        )


def _maxnorm(x: np.ndarray) -> float:
    if x.size == 1:
        return abs(float(x[0]))
    return float(np.max(np.abs(x))) if x.size else 0.0


def _rms(x: np.ndarray) -> float:
    return math.sqrt(float(x @ x) / x.size)


def _checked_rhs(spec: DynamicsSpec, x: np.ndarray, t: float) -> np.ndarray:
    f = spec.rhs(x, t)
    if not isinstance(f, np.ndarray) or f.dtype != np.float64:
        f = np.asarray(f, dtype=float)
    if f.shape != x.shape:
        raise ValueError(
            f"rhs returned shape {f.shape}, expected {x.shape} ({spec.label})"
        )
    if x.size == 1:
        finite = math.isfinite(f[0])
    else:
        finite = bool(np.all(np.isfinite(f)))
    if not finite:
        raise BlowUpError(
            f"dynamics blow-up: non-finite derivative at t={t!r}, x={x!r}", t, x
        )
    return f


def _initial_step(spec, x0, f0, scale, limit):
    d0 = _rms(x0 / scale)
    d1 = _rms(f0 / scale)
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h0 = min(h0, limit)
    if h0 <= 0.0:
        return limit
    x1 = x0 + h0 * f0
    f1 = _checked_rhs(spec, x1, h0)
    d2 = _rms((f1 - f0) / scale) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, limit)


def _dense_value(x0: np.ndarray, h: float, coef: np.ndarray, theta: float) -> np.ndarray:
    powers = np.array([theta, theta**2, theta**3, theta**4])
    return x0 + h * (coef @ powers)


def simulate(
    spec: DynamicsSpec,
    x0,
    p: BarrierParams,
    policy: Optional[NumericPolicy] = None,
) -> Trajectory:
    """Integrate ``spec`` from ``x0`` on [0, tc - delta_end].

    Raises :class:`StallError` on step-size underflow before the deadline and
    :class:`BlowUpError` when the dynamics return a non-finite derivative.
    """
    policy = policy if policy is not None else NumericPolicy()
    x0 = np.atleast_1d(np.asarray(x0, dtype=float)).copy()
    if x0.shape != (spec.dim,):
        raise ValueError(f"x0 shape {x0.shape} does not match dim={spec.dim}")
    if not np.all(np.isfinite(x0)):
        raise ValueError(f"x0 must be finite, got {x0!r}")
    tc = p.tc
    if not (math.isfinite(tc) and tc > 0.0):
        raise ValueError(f"tc must be finite and > 0, got {tc!r}")
    if spec.tc is not None and spec.tc < tc:
        raise ValueError(
            f"spec domain ends at {spec.tc!r}, before the deadline {tc!r}"
        )
    delta = policy.resolve_delta_end(tc)
    t_end = tc - delta
    eps_conv = policy.eps_conv
    rtol, atol = policy.rel_tol, policy.abs_tol

    seg_t0: list[float] = []
    seg_h: list[float] = []
    seg_x0: list[np.ndarray] = []
    seg_coef: list[np.ndarray] = []
    step_count = 0
    rejected = 0
    event: Optional[tuple[float, float]] = None

    if _maxnorm(x0) <= eps_conv:
        event = (0.0, _maxnorm(x0))
        x_final = np.zeros_like(x0)
    else:
        # overflow inside a trial step is handled by rejection or the
        # blow-up check, not by floating-point warnings
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            t = 0.0
            x = x0.copy()
            f = _checked_rhs(spec, x, t)
            n = spec.dim
            K = np.empty((7, n))
            scale0 = atol + rtol * np.abs(x)
            h_prop = _initial_step(spec, x, f, scale0, min(_KAPPA * tc, t_end))
            err_prev = 1e-4

            end_guard = 8.0 * math.ulp(t_end)
            while True:
                remaining = t_end - t
                if remaining <= end_guard:
                    t = t_end
                    break
                if step_count + rejected >= _MAX_STEPS:
                    raise StallError(
                        f"step budget exhausted at t={t!r} without convergence", t, x
                    )
                h = min(h_prop, _KAPPA * (tc - t), remaining)
                t_new = t_end if h >= remaining else t + h
                h_eff = t_new - t
                if h_eff <= 4.0 * math.ulp(t):
                    raise StallError(
                        f"step size underflow (stall) at t={t!r}", t, x
                    )

                K[0] = f
                for s in range(1, 6):
                    xs = x + h_eff * (_A[s - 1] @ K[:s])
                    K[s] = _checked_rhs(spec, xs, t + _C[s] * h_eff)
                x_new = x + h_eff * (_B @ K[:6])
                f_new = _checked_rhs(spec, x_new, t_new)
                K[6] = f_new
                err_vec = h_eff * (_E @ K)
                scale = atol + rtol * np.maximum(np.abs(x), np.abs(x_new))
                err_norm = _rms(err_vec / scale)

                if err_norm <= 1.0:
                    coef = K.T @ _P
                    seg_t0.append(t)
                    seg_h.append(h_eff)
                    seg_x0.append(x.copy())
                    seg_coef.append(coef)
                    step_count += 1
                    if err_norm == 0.0:
                        factor = _MAX_FACTOR
                    else:
                        factor = _SAFETY * err_norm**-0.14 * err_prev**0.08
                    factor = min(_MAX_FACTOR, max(_MIN_FACTOR, factor))
                    err_prev = max(err_norm, 1e-12)
                    h_prop = h_eff * factor

                    if _maxnorm(x_new) <= eps_conv:
                        lo, hi = 0.0, 1.0
                        for _ in range(60):
                            mid = 0.5 * (lo + hi)
                            if _maxnorm(_dense_value(x, h_eff, coef, mid)) <= eps_conv:
                                hi = mid
                            else:
                                lo = mid
                        t_event = t + hi * h_eff
                        v_event = _maxnorm(_dense_value(x, h_eff, coef, hi))
                        event = (t_event, v_event)
                        t = t_new
                        break
                    t = t_new
                    x = x_new
                    f = f_new
                else:
                    rejected += 1
                    h_prop = h_eff * max(_MIN_FACTOR, _SAFETY * err_norm**-0.2)
                    if h_prop <= 4.0 * math.ulp(max(t, 0.01 * t_end)):
                        raise StallError(
                            f"step size underflow (stall) at t={t!r}", t, x
                        )
        x_final = np.zeros_like(x0) if event is not None else x

    n_seg = len(seg_t0)
    seg_t0_arr = np.array(seg_t0) if n_seg else np.zeros(0)
    seg_h_arr = np.array(seg_h) if n_seg else np.zeros(0)
    seg_x0_arr = np.array(seg_x0) if n_seg else np.zeros((0, spec.dim))
    seg_coef_arr = np.array(seg_coef) if n_seg else np.zeros((0, spec.dim, 4))

    event_time = event[0] if event is not None else None
    if event is not None:
        rem = remaining_settling_time(p, event[1], event[0])
        if rem.reaches_zero:
            converged_at = min(max(rem.tau_bound, event[0]), t_end)
        else:
            converged_at = event[0]
    else:
        converged_at = None

    extra = [0.0, t_end]
    if event_time is not None:
        extra.append(event_time)
    sample_times = np.unique(
        np.concatenate(
            [np.linspace(0.0, t_end, _OUTPUT_POINTS), seg_t0_arr, np.array(extra)]
        )
    )

    traj = Trajectory(
        spec=spec,
        params=p,
        policy=policy,
        samples=[],
        converged_at=converged_at,
        event_time=event_time,
        terminal_norm=0.0,
        step_count=step_count,
        rejected_steps=rejected,
        t_end=t_end,
        _seg_t0=seg_t0_arr,
        _seg_h=seg_h_arr,
        _seg_x0=seg_x0_arr,
        _seg_coef=seg_coef_arr,
        _x_final=x_final,
    )
    states = _eval_trajectory(traj, sample_times, x0)
    samples = []
    for t_i, x_i in zip(sample_times, states):
        if spec.v is not None:
            v_i = spec.v(x_i, float(t_i))
            w_i = w_transform(v_i, float(t_i), p)
            vd_i = spec.vdot(x_i, float(t_i)) if spec.vdot is not None else None
        else:
            v_i = w_i = vd_i = None
        samples.append(TrajectorySample(float(t_i), x_i, v_i, w_i, vd_i))
    traj.samples = samples
    traj.terminal_norm = _maxnorm(states[-1])
    return traj


def _eval_trajectory(traj: Trajectory, times: np.ndarray, x_start=None) -> np.ndarray:
    """Dense-output evaluation at sorted times within [0, t_end]."""
    dim = traj.spec.dim
    out = np.zeros((times.size, dim))
    n_seg = traj._seg_t0.size
    zero_from = traj.event_time if traj.event_time is not None else np.inf

    if n_seg == 0:
        # immediate convergence: the initial state holds only at t = 0
        start = x_start if x_start is not None else traj._x_final
        out[times == 0.0] = start
        return out

    idx = np.searchsorted(traj._seg_t0, times, side="right") - 1
    idx = np.clip(idx, 0, n_seg - 1)
    boundaries = np.flatnonzero(np.diff(idx)) + 1
    chunks = np.split(np.arange(times.size), boundaries)
    for chunk in chunks:
        if chunk.size == 0:
            continue
        k = idx[chunk[0]]
        t0 = traj._seg_t0[k]
        h = traj._seg_h[k]
        theta = (times[chunk] - t0) / h
        powers = theta[:, None] ** _THETA_EXP
        out[chunk] = traj._seg_x0[k] + h * (powers @ traj._seg_coef[k].T)
    t_last = traj._seg_t0[-1] + traj._seg_h[-1]
    exact_end = times == t_last
    if np.any(exact_end) and zero_from >= t_last:
        out[exact_end] = traj._x_final
    out[times > zero_from] = 0.0
    return out


def resample(traj: Trajectory, times) -> np.ndarray:
    """Dense-output states at the requested (nondecreasing) times.

    Uses the same interpolation path as the recorded samples, so evaluating at
    a recorded sample time reproduces the stored value bit for bit; past the
    convergence event the result is exactly zero.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if times.size == 0:
        return np.zeros((0, traj.spec.dim))
    if np.any(np.diff(times) < 0.0):
        raise ValueError("times must be nondecreasing")
    if times[0] < 0.0 or times[-1] > traj.t_end:
        raise ValueError(
            f"times outside [0, {traj.t_end!r}] (last sample time)"
        )
    x_start = traj.samples[0].x if traj.samples else None
    return _eval_trajectory(traj, times, x_start)


def settling_report(traj: Trajectory, p: Optional[BarrierParams] = None) -> SettlingReport:
    """Compare the measured settling instant against the analytic bound."""
    p = p if p is not None else traj.params
    first = traj.samples[0]
    v0 = first.v if first.v is not None else _maxnorm(first.x)
    sb = settling_bound(p, v0)
    deadline_pass = traj.converged_at is not None and traj.converged_at <= traj.t_end
    return SettlingReport(
        converged_at=traj.converged_at,
        tau_bound=sb.tau_bound,
        reaches_zero=sb.reaches_zero,
        deadline_pass=deadline_pass,
        v0=v0,
        tc=p.tc,
    )
