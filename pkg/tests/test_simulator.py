import math

import numpy as np
import pytest

from chemopattern import (
    ModelParams,
    SpectralField,
    lambda_critical,
    linear_rhs,
    make_critical_geometry,
    nonlinear_rhs,
    simulate,
    simulate_full_system,
    step,
)
from chemopattern.core import rho, sigma
from chemopattern.simulator import BlowUpError, InitialCondition, SimConfig

from oracles import nonlinear_by_quadrature

P = ModelParams(8.0, 1.0, 18.0)
G = make_critical_geometry(1, 1, P)


def single_mode(k1, k2, amp=1.0, n=32):
    c = np.zeros((n, n))
    c[k1, k2] = amp
    return SpectralField(c, G)


class TestLinearRhs:
    def test_eigenmode(self):
        out = linear_rhs(single_mode(2, 3), P)
        s = sigma(rho((2, 3), G), P)
        assert out.coeffs[2, 3] == pytest.approx(s, rel=1e-14)
        out.coeffs[2, 3] = 0.0
        assert np.all(out.coeffs == 0.0)

    def test_zero(self):
        out = linear_rhs(SpectralField(np.zeros((32, 32)), G), P)
        assert np.all(out.coeffs == 0.0)

    def test_critical_pair_is_neutral(self):
        c = np.zeros((32, 32))
        c[1, 1] = 1.0
        c[0, 2] = 1.0
        out = linear_rhs(SpectralField(c, G), P)
        assert np.max(np.abs(out.coeffs)) <= 1e-13


class TestNonlinearRhs:
    def test_zero(self):
        out = nonlinear_rhs(SpectralField(np.zeros((32, 32)), G), P)
        assert np.all(out.coeffs == 0.0)

    def test_constant_mode_matches_scalar_arithmetic(self):
        c0 = 0.2
        out = nonlinear_rhs(single_mode(0, 0, c0), P)
        # for a constant the gradient and chemoattraction terms cancel,
        # leaving the pure reaction part -3*alpha*c^2 - alpha*c^3
        want = -3.0 * P.alpha * c0**2 - P.alpha * c0**3
        assert out.coeffs[0, 0] == pytest.approx(want, rel=1e-12)
        out.coeffs[0, 0] = 0.0
        assert np.max(np.abs(out.coeffs)) <= 1e-14

    def test_single_mode_quadratic_content(self):
        # a small (1,1) seed populates exactly the four second-harmonic modes
        # at quadratic order; values are pinned by the quadrature oracle
        p = ModelParams(8.0, 1.0, 19.0)
        eps = 1e-3
        u = single_mode(1, 1, eps)
        out = nonlinear_rhs(u, p).coeffs
        quad_modes = {(0, 0), (2, 0), (0, 2), (2, 2)}
        for k in quad_modes:
            # the (0,2) entry carries the small quadratic-resonance
            # coefficient (1/8)(-6*alpha + lam*rho/(1+rho)) ~ 1/24 here
            assert abs(out[k]) > 1e-2 * eps**2
        mask = np.ones_like(out, dtype=bool)
        for k in quad_modes | {(1, 1), (1, 3), (3, 1), (3, 3)}:
            mask[k] = False
        assert np.max(np.abs(out[mask])) <= 1e-16
        oracle = nonlinear_by_quadrature(u.coeffs, G, p, n_quad=256, out_modes=(4, 4))
        for k in quad_modes:
            assert out[k] == pytest.approx(oracle[k], abs=1e-12)

    def test_quadrature_oracle_agreement_random_fields(self):
        rng = np.random.default_rng(21)
        for _ in range(3):
            c = np.zeros((32, 32))
            c[:5, :5] = rng.uniform(-0.1, 0.1, size=(5, 5))
            u = SpectralField(c, G)
            spec = nonlinear_rhs(u, P).coeffs[:8, :8]
            oracle = nonlinear_by_quadrature(c, G, P, n_quad=512, out_modes=(8, 8))
            assert np.max(np.abs(spec - oracle)) <= 1e-8

    def test_dealias_consistency_across_resolution(self):
        rng = np.random.default_rng(22)
        c = np.zeros((32, 32))
        c[:6, :6] = rng.uniform(-0.2, 0.2, size=(6, 6))
        lo = nonlinear_rhs(SpectralField(c, G), P).coeffs
        c_hi = np.zeros((64, 64))
        c_hi[:32, :32] = c
        hi = nonlinear_rhs(SpectralField(c_hi, G), P).coeffs[:32, :32]
        assert np.max(np.abs(lo - hi)) <= 1e-10

    def test_rejects_insufficient_padding(self):
        with pytest.raises(ValueError, match="dealias"):
            nonlinear_rhs(single_mode(1, 1), P, dealias_factor=1)


class TestStep:
    def test_zero_fixed_point(self):
        out = step(SpectralField(np.zeros((32, 32)), G), P, 0.5)
        assert np.all(out.coeffs == 0.0)

    def test_linear_flow_exact(self):
        u = single_mode(1, 1, 1e-3)
        dt, t_end = 0.5, 10.0
        for _ in range(int(t_end / dt)):
            u = step(u, P, dt, nonlinear=False)
        s = sigma(rho((1, 1), G), P)
        assert u.coeffs[1, 1] == pytest.approx(1e-3 * math.exp(s * t_end), rel=1e-10)

    def test_self_convergence_order(self):
        p = ModelParams(8.0, 1.0, 18.9)
        c0 = np.zeros((32, 32))
        c0[1, 1] = 0.05
        c0[0, 2] = 0.03

        def advance(dt, t=2.0):
            u = SpectralField(c0.copy(), G)
            for _ in range(int(round(t / dt))):
                u = step(u, p, dt)
            return u.coeffs

        ref = advance(0.00625)
        errs = [np.linalg.norm(advance(dt) - ref) for dt in (0.1, 0.05, 0.025)]
        orders = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
        for order in orders:
            assert order >= 1.8
        assert np.mean(orders) == pytest.approx(2.0, abs=0.2)


def sim_config(**kw):
    defaults = dict(params=P, geometry=G, n1=32, n2=32, dt=0.02, t_end=50.0,
                    mode_m=1, mode_n=1)
    defaults.update(kw)
    return SimConfig(**defaults)


class TestSimConfigValidation:
    def test_rejects_non_power_of_two(self):
        with pytest.raises(ValueError, match="powers of two"):
            sim_config(n1=48)

    def test_rejects_small_grid(self):
        with pytest.raises(ValueError, match="powers of two"):
            sim_config(n1=16, n2=16)

    def test_rejects_insufficient_dealias(self):
        with pytest.raises(ValueError, match="dealias"):
            sim_config(dealias_factor=1)

    def test_random_ic_requires_seed(self):
        cfg = sim_config(ic=InitialCondition(kind="random", seed=None))
        with pytest.raises(ValueError, match="seed"):
            simulate(cfg)


class TestSimulate:
    def test_subcritical_decay(self):
        p = ModelParams(8.0, 1.0, 18.0 * 0.99)
        cfg = sim_config(params=p, t_end=800.0,
                         ic=InitialCondition(kind="random", seed=5, amplitude=1e-3))
        diag, final = simulate(cfg)
        assert diag.final_fingerprint == "trivial"
        # after the fast transient the norm decays monotonically
        tail = diag.l2_series[np.asarray(diag.times) >= 20.0]
        assert np.all(np.diff(tail) <= 1e-12)

    def test_invariant_axis_run_saturates_on_roll(self):
        p = ModelParams(8.0, 1.0, 18.36)
        cfg = sim_config(params=p, t_end=600.0,
                         ic=InitialCondition(kind="modes", modes=(((0, 2), 1e-3),)))
        diag, final = simulate(cfg)
        assert np.max(np.abs(diag.mode_series[(1, 1)])) <= 1e-10
        sig_c = sigma(rho((0, 2), G), p)
        b1_local = -3.2462499999999999  # cubic self-coupling at this coupling
        expect = math.sqrt(-sig_c / b1_local)
        assert abs(final.mode((0, 2))) == pytest.approx(expect, rel=0.10)
        assert diag.final_fingerprint == "roll"

    def test_x1_independent_even_subspace_is_invariant(self):
        p = ModelParams(8.0, 1.0, 18.36)
        cfg = sim_config(params=p, t_end=30.0,
                         ic=InitialCondition(kind="modes",
                                             modes=(((0, 2), 5e-3), ((0, 4), 1e-3))))
        _, final = simulate(cfg)
        c = final.coeffs
        assert np.max(np.abs(c[1:, :])) <= 1e-14
        assert np.max(np.abs(c[0, 1::2])) <= 1e-14

    def test_determinism(self):
        cfg = sim_config(t_end=20.0, ic=InitialCondition(kind="random", seed=42))
        d1, f1 = simulate(cfg)
        d2, f2 = simulate(cfg)
        assert np.array_equal(f1.coeffs, f2.coeffs)
        assert np.array_equal(d1.l2_series, d2.l2_series)
        for k in d1.mode_series:
            assert np.array_equal(d1.mode_series[k], d2.mode_series[k])

    def test_snapshots_and_series_shapes(self):
        cfg = sim_config(t_end=10.0, snapshot_times=(0.0, 5.0),
                         ic=InitialCondition(kind="modes", modes=(((1, 1), 1e-3),)))
        diag, _ = simulate(cfg)
        assert len(diag.snapshots) == 2
        assert diag.snapshots[0][1].values.shape == (32, 32)
        n = len(diag.times)
        assert len(diag.l2_series) == n
        assert all(len(v) == n for v in diag.mode_series.values())

    def test_blow_up_reported_with_partial_diagnostics(self):
        cfg = sim_config(t_end=50.0, dt=0.5,
                         ic=InitialCondition(kind="modes", modes=(((1, 1), 50.0),)))
        with pytest.raises(BlowUpError) as err:
            simulate(cfg)
        assert err.value.diagnostics is not None
        assert len(err.value.diagnostics.times) >= 1


class TestFullSystem:
    def test_zero_stays_zero(self):
        cfg = sim_config(t_end=5.0, ic=InitialCondition(kind="modes", modes=()))
        diag, (u, v) = simulate_full_system(cfg)
        assert np.all(u.coeffs == 0.0)
        assert np.all(v.coeffs == 0.0)

    def test_subcritical_decay(self):
        p = ModelParams(8.0, 1.0, 18.0 * 0.99)
        cfg = sim_config(params=p, t_end=600.0,
                         ic=InitialCondition(kind="random", seed=9, amplitude=1e-3))
        diag, (u, v) = simulate_full_system(cfg)
        assert diag.final_fingerprint == "trivial"
        assert u.l2_norm() <= 1e-6
        assert v.l2_norm() <= 1e-5

    def test_linear_growth_rate_matches_quasi_static_model_near_threshold(self):
        # the slow eigenvalue of the coupled pair at the critical wavenumber
        # vanishes exactly at the critical coupling
        p = ModelParams(8.0, 1.0, 18.0)
        cfg = sim_config(params=p, t_end=10.0, nonlinear=False,
                         ic=InitialCondition(kind="modes",
                                             modes=(((1, 1), 1e-4), ((0, 2), 1e-4))))
        diag, (u, v) = simulate_full_system(cfg)
        for k in ((1, 1), (0, 2)):
            series = diag.mode_series[k]
            assert series[-1] == pytest.approx(series[0], rel=1e-4)

    def test_agrees_with_scalar_model(self):
        p = ModelParams(8.0, 1.0, 18.36)
        ic = InitialCondition(kind="random", seed=7, amplitude=1e-3)
        cfg = sim_config(params=p, t_end=500.0, ic=ic)
        diag_s, final_s = simulate(cfg)
        diag_f, (final_f, _) = simulate_full_system(cfg)
        assert diag_f.final_fingerprint == diag_s.final_fingerprint
        a = abs(final_s.mode((0, 2)))
        b = abs(final_f.mode((0, 2)))
        assert b == pytest.approx(a, rel=0.15)
