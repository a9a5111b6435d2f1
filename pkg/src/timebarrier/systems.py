"""Built-in dynamics: the scalar deadline-decay law, its componentwise vector
extension, and the autonomous power-law comparator.

Constructors are pure and the returned evaluators are stateless, so specs can
be shared freely between concurrent workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .core import BarrierParams, DomainError, DynamicsSpec, NumericPolicy

__all__ = [
    "AutonomousLaw",
    "make_time_barrier_scalar",
    "make_time_barrier_componentwise",
    "make_autonomous_power_law",
]


@dataclass(frozen=True)
class AutonomousLaw:
    """A state-only decay law phi(V), with its parameters for reporting.

    ``settling_time(v0)``, when present, is the closed form of the settling
    integral; the generic quadrature route lives in
    :func:`timebarrier.analytic.autonomous_settling_integral`.
    """

    phi: Callable[[float], float]
    label: str
    params: dict = field(default_factory=dict)
    settling_time: Optional[Callable[[float], float]] = None


def _check_law_params(p: BarrierParams) -> None:
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


def make_time_barrier_scalar(
    p: BarrierParams, policy: Optional[NumericPolicy] = None, bias: float = 0.0
) -> DynamicsSpec:
    """Scalar law dx/dt = -beta*x/(tc-t) - q*|x|**alpha * sgn(x) (+ bias).

    Admissibility (m >= 1, q > 0) is deliberately not required: q = 0 gives
    the pure-barrier flow whose closed form is the best integrator oracle, and
    m < 1 maps the non-reaching regime. ``bias`` adds a constant to the
    right-hand side; it exists to construct dissipation counterexamples and
    breaks the equilibrium at the origin on purpose.

    The Lyapunov pair is V = |x| with its derivative along trajectories;
    sgn() follows the policy (sign_eps > 0 regularizes, 0 keeps the exact
    sign for event-detection handling). Note that the regularized law only
    satisfies the strict dissipation bound outside the regularization width:
    inside |x| < sign_eps the decay term is scaled down and a certificate
    check will truthfully flag that layer.
    """
    spec = make_time_barrier_componentwise(p, 1, policy, _bias=float(bias))
    label = f"time-barrier scalar (tc={p.tc:g}, beta={p.beta:g}, q={p.q:g}, alpha={p.alpha:g})"
    if bias:
        label += f" + bias {bias:g}"
    return DynamicsSpec(
        dim=1, rhs=spec.rhs, label=label, v=spec.v, vdot=spec.vdot, tc=p.tc
    )


def make_time_barrier_componentwise(
    p: BarrierParams,
    dim: int,
    policy: Optional[NumericPolicy] = None,
    _bias: float = 0.0,
) -> DynamicsSpec:
    """Vector law where every coordinate follows the scalar dynamics.

    The max-norm V(x) = max_i |x_i| satisfies the same dissipation bound with
    unchanged (beta, q, alpha), so the scalar certificate applies per
    coordinate.
    """
    _check_law_params(p)
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim!r}")
    policy = policy if policy is not None else NumericPolicy()
    tc, beta, q, alpha = p.tc, p.beta, p.q, p.alpha
    sign_eps = policy.sign_eps
    bias = _bias

    if dim == 1:
        # scalar fast path: the integrator calls rhs thousands of times
        def rhs(x: np.ndarray, t: float) -> np.ndarray:
            if not 0.0 <= t < tc:
                raise DomainError(f"domain exceeded: t={t!r} not in [0, tc={tc!r})")
            xi = float(x[0])
            ax = abs(xi)
            if sign_eps > 0.0:
                sgn = xi / max(ax, sign_eps)
            else:
                sgn = float((xi > 0.0) - (xi < 0.0))
            return np.array([-beta * xi / (tc - t) - q * ax**alpha * sgn + bias])

        def v(x: np.ndarray, t: float) -> float:
            return abs(float(x[0]))

    else:
        def rhs(x: np.ndarray, t: float) -> np.ndarray:
            if not 0.0 <= t < tc:
                raise DomainError(f"domain exceeded: t={t!r} not in [0, tc={tc!r})")
            ax = np.abs(x)
            if sign_eps > 0.0:
                sgn = x / np.maximum(ax, sign_eps)
            else:
                sgn = np.sign(x)
            return -beta * x / (tc - t) - q * ax**alpha * sgn + bias

        def v(x: np.ndarray, t: float) -> float:
            return float(np.max(np.abs(x)))

    def vdot(x: np.ndarray, t: float) -> float:
        if not 0.0 <= t < tc:
            raise DomainError(f"domain exceeded: t={t!r} not in [0, tc={tc!r})")
        av = v(x, t)
        if av == 0.0:
            return 0.0
        decay = q * av**alpha
        if sign_eps > 0.0 and av < sign_eps:
            decay *= av / sign_eps
        value = -beta * av / (tc - t) - decay
        if bias:
            # derivative of the max coordinate; for the biased scalar demo
            # this is sgn(x)*rhs(x, t)
            i = int(np.argmax(np.abs(x)))
            s = 1.0 if x[i] > 0 else -1.0
            value += bias * s
        return value

    label = (
        f"time-barrier componentwise n={dim} "
        f"(tc={tc:g}, beta={beta:g}, q={q:g}, alpha={alpha:g})"
    )
    return DynamicsSpec(dim=dim, rhs=rhs, label=label, v=v, vdot=vdot, tc=tc)


def make_autonomous_power_law(q: float, alpha: float):
    """Comparator phi(V) = q * V**alpha and its scalar dynamics.

    The power law is the classical finite-time decay; its settling integral
    has the closed form v0**(1-alpha) / (q*(1-alpha)), which grows without
    bound in v0 -- the numeric heart of the separation from deadline-enforced
    convergence. Returns the (law, dynamics) pair.
    """
    if not (math.isfinite(q) and q > 0.0):
        raise ValueError("q must be > 0")
    if not (math.isfinite(alpha) and 0.0 < alpha < 1.0):
        raise ValueError("alpha in (0,1) violated")

    def phi(value: float) -> float:
        return q * value**alpha

    def settling_time(v0: float) -> float:
        return v0 ** (1.0 - alpha) / (q * (1.0 - alpha))

    law = AutonomousLaw(
        phi=phi,
        label=f"power-law decay (q={q:g}, alpha={alpha:g})",
        params={"q": q, "alpha": alpha},
        settling_time=settling_time,
    )

    def rhs(x: np.ndarray, t: float) -> np.ndarray:
        return -q * np.abs(x) ** alpha * np.sign(x)

    def v(x: np.ndarray, t: float) -> float:
        return float(np.max(np.abs(x)))

    def vdot(x: np.ndarray, t: float) -> float:
        av = float(np.max(np.abs(x)))
        return 0.0 if av == 0.0 else -q * av**alpha

    spec = DynamicsSpec(
        dim=1, rhs=rhs, label=law.label, v=v, vdot=vdot, tc=None
    )
    return law, spec
