"""Built-in dynamics constructors: values, symmetries, and Lyapunov data."""

import numpy as np
import pytest

from timebarrier import BarrierParams, DomainError, NumericPolicy
from timebarrier.systems import (
    make_autonomous_power_law,
    make_time_barrier_componentwise,
    make_time_barrier_scalar,
)


@pytest.fixture
def scalar_spec(default_params, default_policy):
    return make_time_barrier_scalar(default_params, default_policy)


def test_scalar_rhs_values(scalar_spec):
    assert scalar_spec.rhs(np.array([1.0]), 0.0)[0] == -3.0
    assert scalar_spec.rhs(np.array([0.0]), 0.5)[0] == 0.0
    assert scalar_spec.rhs(np.array([-1.0]), 0.0)[0] == 3.0


def test_scalar_rhs_domain_error(scalar_spec):
    with pytest.raises(DomainError):
        scalar_spec.rhs(np.array([1.0]), 1.0)
    with pytest.raises(DomainError):
        scalar_spec.rhs(np.array([1.0]), 1.5)
    with pytest.raises(DomainError):
        scalar_spec.vdot(np.array([1.0]), 1.0)


def test_scalar_rhs_odd_symmetry(scalar_spec):
    rng = np.random.default_rng(3)
    for _ in range(200):
        x = np.array([rng.uniform(-1e3, 1e3)])
        t = rng.uniform(0.0, 0.999)
        assert scalar_spec.rhs(-x, t)[0] == -scalar_spec.rhs(x, t)[0]


def test_scalar_rhs_magnitude_grows_in_time(scalar_spec):
    rng = np.random.default_rng(4)
    for _ in range(50):
        x = np.array([rng.uniform(0.01, 100.0) * rng.choice([-1.0, 1.0])])
        ts = np.sort(rng.uniform(0.0, 0.999, 8))
        mags = [abs(scalar_spec.rhs(x, t)[0]) for t in ts]
        assert all(b > a for a, b in zip(mags, mags[1:]))


def test_scalar_vdot_matches_flow_finite_difference(default_params, default_policy):
    spec = make_time_barrier_scalar(default_params, default_policy)
    rng = np.random.default_rng(5)
    for _ in range(100):
        x = np.array([rng.uniform(0.01, 10.0) * rng.choice([-1.0, 1.0])])
        t = rng.uniform(0.05, 0.9)
        h = 1e-7 * max(abs(x[0]), 1.0)
        f = spec.rhs(x, t)
        v_plus = spec.v(x + h * f, t + h)
        v_minus = spec.v(x - h * f, t - h)
        fd = (v_plus - v_minus) / (2 * h)
        assert spec.vdot(x, t) == pytest.approx(fd, rel=1e-4)


def test_componentwise_values(default_params, default_policy):
    spec = make_time_barrier_componentwise(default_params, 2, default_policy)
    np.testing.assert_allclose(
        spec.rhs(np.array([1.0, 0.0]), 0.0), [-3.0, 0.0], rtol=0, atol=0
    )
    np.testing.assert_array_equal(spec.rhs(np.zeros(2), 0.3), np.zeros(2))
    spec3 = make_time_barrier_componentwise(default_params, 3, default_policy)
    np.testing.assert_allclose(
        spec3.rhs(np.ones(3), 0.0), [-3.0, -3.0, -3.0], rtol=0, atol=0
    )


def test_componentwise_max_norm_lyapunov(default_params, default_policy):
    spec = make_time_barrier_componentwise(default_params, 3, default_policy)
    x = np.array([0.5, -2.0, 1.0])
    assert spec.v(x, 0.1) == 2.0
    # derivative of the max coordinate follows the scalar identity
    assert spec.vdot(x, 0.0) == -2 * 2.0 / 1.0 - 1.0 * 2.0**0.5


def test_power_law_values():
    law, spec = make_autonomous_power_law(1.0, 0.5)
    assert spec.rhs(np.array([1.0]), 123.4)[0] == -1.0
    assert spec.rhs(np.array([0.0]), 0.0)[0] == 0.0
    assert law.phi(4.0) == 2.0
    assert law.settling_time(1.0) == 2.0


def test_power_law_phi_positive_sampled():
    law, _ = make_autonomous_power_law(0.7, 0.3)
    rng = np.random.default_rng(6)
    values = 10.0 ** rng.uniform(-12, 6, 500)
    assert all(law.phi(v) > 0.0 for v in values)


def test_power_law_rejects_bad_params():
    with pytest.raises(ValueError):
        make_autonomous_power_law(0.0, 0.5)
    with pytest.raises(ValueError):
        make_autonomous_power_law(1.0, 1.0)


def test_sign_regularization(default_params):
    policy = NumericPolicy(sign_eps=1e-3)
    spec = make_time_barrier_scalar(default_params, policy)
    # below the regularization width the decay term scales linearly in x
    x = np.array([5e-4])
    expected = -2 * 5e-4 / 1.0 - 1.0 * (5e-4) ** 0.5 * (5e-4 / 1e-3)
    assert spec.rhs(x, 0.0)[0] == pytest.approx(expected, rel=1e-12)
    assert spec.vdot(x, 0.0) == pytest.approx(expected, rel=1e-12)


def test_bias_shifts_rhs_and_vdot(default_params, default_policy):
    spec = make_time_barrier_scalar(default_params, default_policy, bias=0.1)
    base = make_time_barrier_scalar(default_params, default_policy)
    x = np.array([0.7])
    t = 0.3
    assert spec.rhs(x, t)[0] == pytest.approx(base.rhs(x, t)[0] + 0.1, rel=1e-14)
    assert spec.vdot(x, t) == pytest.approx(base.vdot(x, t) + 0.1, rel=1e-14)
    xn = np.array([-0.7])
    assert spec.vdot(xn, t) == pytest.approx(base.vdot(xn, t) - 0.1, rel=1e-14)


def test_constructor_allows_q_zero_and_sub_exponent(default_policy):
    make_time_barrier_scalar(BarrierParams(1, 2, 0, 0.5), default_policy)
    make_time_barrier_scalar(BarrierParams(1, 0.5, 1, 0.5), default_policy)
    with pytest.raises(ValueError):
        make_time_barrier_scalar(BarrierParams(-1, 2, 1, 0.5), default_policy)
    with pytest.raises(ValueError):
        make_time_barrier_scalar(BarrierParams(1, 2, 1, 1.2), default_policy)
