"""Grid experiments: determinism, failure mapping, and the separation table."""

import pytest

from timebarrier import (
    BarrierParams,
    NumericPolicy,
    SweepConfig,
    run_sweep,
    separation_table,
    settling_bound,
)
from timebarrier.cli import render_sweep_csv


def test_single_tuple_grid_all_pass(default_policy):
    cfg = SweepConfig(
        tc_values=(1.0,), beta_values=(2.0,), q_values=(1.0,), alpha_values=(0.5,)
    )
    result = run_sweep(cfg, default_policy)
    assert len(result.rows) == 13
    assert all(r.admissible for r in result.rows)
    assert all(r.deadline_pass for r in result.rows)
    assert all(r.certificate_pass for r in result.rows)
    assert all(r.oracle_pass for r in result.rows)
    assert result.summary["check_failures"] == 0
    assert result.summary["deadline_failures"] == 0


def test_rows_ordered_lexicographically(default_policy):
    cfg = SweepConfig(
        tc_values=(1.0, 2.0), beta_values=(2.0, 3.0), q_values=(1.0,),
        alpha_values=(0.5,), x0_decades=(0, 1),
    )
    result = run_sweep(cfg, default_policy)
    assert len(result.rows) == 2 * 2 * 1 * 1 * 2
    key = [(r.tc, r.beta, r.q, r.alpha, r.x0) for r in result.rows]
    assert key == sorted(key)
    assert [r.index for r in result.rows] == list(range(len(result.rows)))


def test_inadmissible_rows_flagged_not_failed(default_policy):
    cfg = SweepConfig(
        tc_values=(1.0,), beta_values=(1.0,), q_values=(1.0,), alpha_values=(0.5,),
        x0_decades=(6, 6),
    )
    result = run_sweep(cfg, default_policy)
    row = result.rows[0]
    assert not row.admissible
    assert row.reaches_zero is False
    assert result.summary["inadmissible_rows"] == 1
    assert result.summary["deadline_failures"] == 0
    assert result.summary["check_failures"] == 0


def test_empty_checks_give_data_only(default_policy):
    cfg = SweepConfig(
        tc_values=(1.0,), beta_values=(2.0,), q_values=(1.0,), alpha_values=(0.5,),
        checks=(), x0_decades=(0, 0),
    )
    result = run_sweep(cfg, default_policy)
    row = result.rows[0]
    assert row.converged_at is not None
    assert row.deadline_pass is None
    assert row.certificate_pass is None
    assert row.bound_gap is None
    assert row.oracle_error is None


def test_determinism_bit_identical(default_policy):
    cfg = SweepConfig(
        tc_values=(0.5, 1.0), beta_values=(2.0, 3.0), q_values=(1.0,),
        alpha_values=(0.4, 0.5), x0_decades=(-2, 2), seed=7,
    )
    first = render_sweep_csv(run_sweep(cfg, default_policy))
    second = render_sweep_csv(run_sweep(cfg, default_policy))
    assert first == second


def test_workers_preserve_order_and_values(default_policy):
    cfg = SweepConfig(
        tc_values=(1.0,), beta_values=(2.0, 3.0), q_values=(1.0,),
        alpha_values=(0.5,), x0_decades=(-1, 1),
    )
    sequential = render_sweep_csv(run_sweep(cfg, default_policy))
    import dataclasses

    threaded = render_sweep_csv(
        run_sweep(dataclasses.replace(cfg, workers=4), default_policy)
    )
    # worker count is not part of the serialized rows
    assert sequential == threaded


def test_bound_tightness_over_subgrid(default_policy):
    cfg = SweepConfig(
        tc_values=(0.5, 2.0), beta_values=(2.0, 4.0), q_values=(0.5, 2.0),
        alpha_values=(0.2, 0.5), x0_decades=(-6, 6),
    )
    result = run_sweep(cfg, default_policy)
    assert result.summary["bound_failures"] == 0
    for row in result.rows:
        if row.admissible and row.bound_gap is not None:
            assert row.bound_gap <= 1e-4 * row.tc


def test_config_validation():
    with pytest.raises(ValueError):
        SweepConfig(tc_values=())
    with pytest.raises(ValueError):
        SweepConfig(x0_decades=(3, -3))
    with pytest.raises(ValueError):
        SweepConfig(law="unknown")
    with pytest.raises(ValueError):
        SweepConfig(checks=("deadline", "bogus"))
    with pytest.raises(ValueError):
        SweepConfig(workers=0)


def test_stall_rows_become_failures(default_policy):
    # absurd tolerances cannot be met; the row reports the error instead of raising
    policy = NumericPolicy(rel_tol=1e-9, abs_tol=1e-12, delta_end=0.999999)
    cfg = SweepConfig(
        tc_values=(1.0,), beta_values=(2.0,), q_values=(1.0,), alpha_values=(0.5,),
        x0_decades=(6, 6),
    )
    result = run_sweep(cfg, policy)
    row = result.rows[0]
    # with delta_end ~ tc the run ends almost immediately and never converges
    assert row.deadline_pass is False or row.error


def test_separation_table_frozen(default_policy):
    rows = separation_table(1.0, 1.0, 0.5, [0.01, 0.25, 1.0, 1e6], default_policy)
    by_x0 = {row.x0: row for row in rows}
    assert by_x0[0.01].autonomous_settling == pytest.approx(0.2, rel=1e-12)
    assert not by_x0[0.01].autonomous_exceeds_deadline
    assert not by_x0[0.25].autonomous_exceeds_deadline  # boundary: 2*sqrt(.25) = 1
    assert by_x0[1.0].autonomous_settling == pytest.approx(2.0, rel=1e-12)
    assert by_x0[1.0].autonomous_exceeds_deadline
    assert by_x0[1e6].autonomous_settling == pytest.approx(2000.0, rel=1e-12)
    assert by_x0[1e6].autonomous_exceeds_deadline
    for row in rows:
        assert row.barrier_settling is not None and row.barrier_settling < 1.0


def test_separation_monotone(default_policy):
    x0s = [10.0**k for k in range(-3, 7)]
    rows = separation_table(1.0, 1.0, 0.5, x0s, default_policy)
    autos = [r.autonomous_settling for r in rows]
    assert all(b > a for a, b in zip(autos, autos[1:]))
    assert all(r.barrier_settling < 1.0 for r in rows)


def test_separation_barrier_settling_matches_bound(default_policy):
    rows = separation_table(1.0, 1.0, 0.5, [1.0], default_policy)
    p = BarrierParams(1.0, 2.0, 1.0, 0.5)
    want = settling_bound(p, 1.0).tau_bound
    assert rows[0].barrier_settling == pytest.approx(want, abs=1e-4)
