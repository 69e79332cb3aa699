"""Congestion-limit indicator oracles and gamma sweep driver tests."""

import math

import numpy as np
import pytest

import fenesim.coupled
from fenesim.config import RunConfig
from fenesim.errors import GridMismatch, NonFinite, ValidationError
from fenesim.grid import Grid1D
from fenesim.limit import (SWEEP_COLUMNS, CongestionField, SweepReport, SweepRow,
                           complementarity_residual, congestion_fraction, excess_norm,
                           gamma_sweep)


@pytest.fixture
def grid():
    return Grid1D(16, 1.0)


def half_over(grid):
    """1.2 on the left half of the domain, 0.8 on the right."""
    rho = np.full(grid.nx, 0.8)
    rho[: grid.nx // 2] = 1.2
    return rho


class TestExcessNorm:
    def test_subcritical_is_zero(self, grid):
        rho = np.full(16, 0.8)
        for p in (1, 2, 4, math.inf):
            assert excess_norm(rho, p, grid) == 0.0

    def test_half_domain_oracles(self, grid):
        rho = half_over(grid)
        assert excess_norm(rho, 1, grid) == pytest.approx(0.1, rel=1e-14)
        assert excess_norm(rho, 2, grid) == pytest.approx(math.sqrt(0.02), rel=1e-14)
        assert excess_norm(rho, 4, grid) == pytest.approx((0.2**4 / 2) ** 0.25,
                                                          rel=1e-14)
        assert excess_norm(rho, math.inf, grid) == pytest.approx(0.2, rel=1e-14)

    def test_rejects_p_below_one(self, grid):
        with pytest.raises(ValidationError):
            excess_norm(np.ones(16), 0.5, grid)

    def test_scalar_threshold_rescales(self, grid):
        rho = np.full(16, 1.5)
        assert excess_norm(rho, 1, grid, threshold=2.0) == 0.0
        assert excess_norm(rho, 1, grid, threshold=1.2) == pytest.approx(0.25,
                                                                         rel=1e-14)

    def test_congestion_field_threshold(self, grid):
        t = np.full(16, 2.0)
        t[:8] = 1.0
        field = CongestionField(t)
        rho = np.full(16, 1.5)
        # over threshold by 0.5 on the left half only
        assert excess_norm(rho, 1, grid, threshold=field) == pytest.approx(0.25,
                                                                           rel=1e-14)


class TestComplementarity:
    def test_at_threshold_zero(self, grid):
        assert complementarity_residual(np.ones(16), 80.0, grid) == 0.0

    def test_subcritical_oracle(self, grid):
        rho = np.full(16, 0.9)
        want = 0.9**80 * 0.1
        assert complementarity_residual(rho, 80.0, grid) == pytest.approx(want,
                                                                          rel=1e-12)

    def test_supercritical_oracle(self, grid):
        rho = np.full(16, 1.05)
        want = 1.05**80 * 0.05
        assert complementarity_residual(rho, 80.0, grid) == pytest.approx(want,
                                                                          rel=1e-12)

    def test_threshold_rescaling(self, grid):
        rho = np.full(16, 0.5)
        assert complementarity_residual(rho, 10.0, grid,
                                        threshold=CongestionField(0.5)) == 0.0


class TestCongestionFraction:
    def test_counts_near_congested_cells(self, grid):
        rho = np.full(16, 0.5)
        rho[:4] = 0.995
        assert congestion_fraction(rho, grid, delta=0.01) == 0.25
        assert congestion_fraction(rho, grid, delta=0.001) == 0.0

    def test_threshold_aware(self, grid):
        rho = np.full(16, 1.9)
        assert congestion_fraction(rho, grid, delta=0.01,
                                   threshold=CongestionField(2.0)) == 0.0
        assert congestion_fraction(rho, grid, delta=0.1,
                                   threshold=CongestionField(2.0)) == 1.0


class TestCongestionField:
    def test_rejects_nonpositive(self):
        with pytest.raises(ValidationError):
            CongestionField(0.0)
        with pytest.raises(ValidationError):
            CongestionField(np.array([1.0, -2.0]))
        with pytest.raises(ValidationError):
            CongestionField(math.nan)

    def test_resolve_scalar(self, grid):
        assert np.array_equal(CongestionField(1.5).resolve(grid), np.full(16, 1.5))

    def test_resolve_field(self, grid):
        t = np.linspace(1.0, 2.0, 16)
        assert np.array_equal(CongestionField(t).resolve(grid), t)
        with pytest.raises(GridMismatch):
            CongestionField(np.ones(8)).resolve(grid)


class TestSweepReport:
    def rows(self):
        mk = lambda g, e, status="ok": SweepRow(
            gamma=g, excess_l1=e, excess_l2=e, excess_l4=e, pressure_l1=1.0,
            complementarity=e, congestion_fraction=0.0, max_rho=1.0, status=status)
        return (mk(4, 0.4), mk(8, math.nan, "failed:NonFinite"), mk(16, 0.1),
                mk(32, 0.05))

    def test_columns_and_ok_rows(self):
        rep = SweepReport(rows=self.rows())
        assert tuple(rep.column("gamma")) == (4, 8, 16, 32)
        assert [r.gamma for r in rep.ok_rows()] == [4, 16, 32]

    def test_decay_ratios_skip_failed_rows(self):
        rep = SweepReport(rows=self.rows())
        ratios = rep.decay_ratios("excess_l2")
        assert ratios == pytest.approx([0.25, 0.5])

    def test_decay_ratio_nan_when_already_zero(self):
        base = self.rows()[0]
        from dataclasses import replace
        rep = SweepReport(rows=(replace(base, excess_l2=0.0),
                                replace(base, gamma=8.0, excess_l2=0.0)))
        assert np.isnan(rep.decay_ratios("excess_l2")).all()

    def test_frozen_columns(self):
        assert SWEEP_COLUMNS == (
            "gamma", "excess_l1", "excess_l2", "excess_l4", "pressure_l1",
            "complementarity", "congestion_fraction", "max_rho", "status",
        )


def tiny_config(**kw):
    base = dict(nx=16, nq=8, T=0.01, epsilon=0.01, rho0=0.7, k=0.3, xi=0.4,
                gammas=(2.0, 4.0, 8.0))
    base.update(kw)
    return RunConfig(**base)


class TestGammaSweep:
    def test_ladder_validation(self):
        cfg = tiny_config()
        with pytest.raises(ValidationError):
            gamma_sweep(cfg, gammas=())
        with pytest.raises(ValidationError):
            gamma_sweep(cfg, gammas=(4.0, 2.0))
        with pytest.raises(ValidationError):
            gamma_sweep(cfg, gammas=(1.2, 4.0))
        with pytest.raises(ValidationError):
            gamma_sweep(tiny_config(T=0.0), gammas=(2.0, 4.0))

    def test_quiescent_uniform_oracle(self):
        # a uniform state at equilibrium never moves, so every indicator has
        # a closed form: pressure mass rho0^gamma, complementarity integral
        # T * rho0^gamma * (1 - rho0), zero excess everywhere
        cfg = tiny_config()
        rep = gamma_sweep(cfg)
        assert [r.status for r in rep.rows] == ["ok"] * 3
        for row in rep.rows:
            assert row.excess_l1 == 0.0
            assert row.excess_l2 == 0.0
            assert row.excess_l4 == 0.0
            assert row.congestion_fraction == 0.0
            assert row.max_rho == pytest.approx(0.7, rel=1e-14)
            assert row.pressure_l1 == pytest.approx(0.7**row.gamma, rel=1e-10)
            assert row.complementarity == pytest.approx(
                cfg.T * 0.3 * 0.7**row.gamma, rel=1e-10)
        assert np.isnan(rep.decay_ratios("excess_l2")).all()
        comp = rep.column("complementarity")
        assert np.all(np.diff(comp) < 0.0)

    def test_budget_guard_rejects_supercritical_initial_density(self):
        cfg = tiny_config(initial_preset="compression", rho0=0.9, amp_rho=0.15,
                          amp_u=0.3, T=0.1)
        with pytest.raises(ValidationError) as exc:
            gamma_sweep(cfg, gammas=(5.0, 2000.0))
        assert any("growth budget" in v for v in exc.value.violations)
        assert any("2000" in v for v in exc.value.violations)

    def test_overflowing_run_recorded_as_failed_row(self):
        # a compression that peaks at the threshold passes the initial budget
        # but blows past it mid-run once gamma is absurd; the collapsed time
        # step must be recorded, not crash the whole ladder
        cfg = tiny_config(initial_preset="compression", rho0=0.8, amp_rho=0.2,
                          amp_u=0.8, T=0.1, mu_s=1.0, mu_b=0.1, k=0.2, xi=0.2)
        rep = gamma_sweep(cfg, gammas=(5.0, 1e7))
        ok, bad = rep.rows
        assert ok.status == "ok"
        assert ok.excess_l2 > 0.0
        assert bad.status == "failed:NonConvergence"
        for name in ("excess_l1", "excess_l2", "excess_l4", "pressure_l1",
                     "complementarity", "congestion_fraction", "max_rho"):
            assert math.isnan(getattr(bad, name)), name
        assert rep.ok_rows() == (ok,)

    def test_midladder_failure_continues(self, monkeypatch):
        real_run = fenesim.coupled.run

        def flaky_run(cfg):
            if cfg.gamma == 4.0:
                raise NonFinite("velocity has non-finite entries", step=3)
            return real_run(cfg)

        monkeypatch.setattr(fenesim.coupled, "run", flaky_run)
        rep = gamma_sweep(tiny_config(), gammas=(2.0, 4.0, 8.0))
        assert [r.status for r in rep.rows] == ["ok", "failed:NonFinite", "ok"]
        assert [r.gamma for r in rep.ok_rows()] == [2.0, 8.0]
