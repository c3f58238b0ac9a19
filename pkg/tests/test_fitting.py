import numpy as np
import pytest

from chemopattern import fit_saturation, fit_slaving, pattern_fingerprint
from chemopattern.fitting import (
    BranchError,
    FitDegenerateError,
    branch_steady_amplitude,
)
from chemopattern.simulator import Diagnostics


class TestPatternFingerprint:
    @pytest.mark.parametrize("y1,y2,want", [
        (0.0, 0.3, "roll"),
        (0.44, 0.22, "hexagon"),
        (-0.44, 0.22, "hexagon"),
        (0.3, 0.25, "mixed"),
        (0.3, 0.01, "rectangle"),
        (5e-4, -8e-4, "trivial"),
    ])
    def test_bands(self, y1, y2, want):
        assert pattern_fingerprint(y1, y2, noise_floor=1e-3) == want


def synthetic_diag(y1, y2, t, kappa1=0.375, kappa2=0.46875, m=1, n=1, noise=0.0, seed=0):
    rng = np.random.default_rng(seed)

    def jitter(x):
        return x + noise * rng.normal(size=len(t)) if noise else x

    series = {
        (m, n): y1,
        (0, 2 * n): y2,
        (0, 0): jitter(-0.375 * y1**2 - 0.75 * y2**2),
        (2 * m, 0): jitter(kappa2 * y1**2),
        (m, 3 * n): jitter(4.0 * kappa2 * y1 * y2),
        (0, 4 * n): jitter(2.0 * kappa1 * y2**2),
        (2 * m, 2 * n): jitter(kappa1 * y1**2),
    }
    l2 = np.hypot(y1, y2)
    return Diagnostics(times=t, mode_series=series, l2_series=l2)


class TestFitSlaving:
    def test_recovers_exact_relations(self):
        t = np.linspace(0.0, 400.0, 401)
        y1 = 0.2 * np.tanh(t / 60.0) * np.exp(-t / 500.0)
        y2 = 0.15 * np.tanh(t / 80.0)
        fit = fit_slaving(synthetic_diag(y1, y2, t), 1, 1)
        assert fit.coeff_00_1 == pytest.approx(-0.375, rel=1e-10)
        assert fit.coeff_00_2 == pytest.approx(-0.75, rel=1e-10)
        assert fit.kappa1_hat == pytest.approx(0.375, rel=1e-10)
        assert fit.kappa2_hat == pytest.approx(0.46875, rel=1e-10)

    def test_tolerates_small_noise(self):
        t = np.linspace(0.0, 400.0, 401)
        y1 = 0.2 * np.tanh(t / 60.0)
        y2 = 0.15 * np.tanh(t / 80.0)
        fit = fit_slaving(synthetic_diag(y1, y2, t, noise=1e-5, seed=3), 1, 1)
        assert fit.coeff_00_1 == pytest.approx(-0.375, rel=0.02)
        assert fit.kappa2_hat == pytest.approx(0.46875, rel=0.02)

    def test_pure_roll_run_degenerates_kappa2(self):
        # a run that never leaves the roll axis still identifies kappa1 (from
        # the (0,4n) harmonic) but not kappa2 or the y1^2 column
        t = np.linspace(0.0, 400.0, 401)
        y1 = np.zeros_like(t)
        y2 = 0.15 * np.tanh(t / 80.0)
        fit = fit_slaving(synthetic_diag(y1, y2, t), 1, 1)
        assert fit.kappa2_hat is None
        assert any("kappa2" in d for d in fit.degenerate)
        assert fit.kappa1_hat == pytest.approx(0.375, rel=1e-10)
        assert fit.coeff_00_2 == pytest.approx(-0.75, rel=1e-10)
        assert fit.coeff_00_1 is None

    def test_too_few_samples(self):
        t = np.linspace(0.0, 30.0, 31)
        y1 = 0.1 * np.ones_like(t)
        y2 = 0.1 * np.ones_like(t)
        with pytest.raises(FitDegenerateError):
            fit_slaving(synthetic_diag(y1, y2, t), 1, 1, t_min=28.0)

    def test_collinear_columns_flagged(self):
        # an exactly ratio-locked trajectory cannot separate y1^2 from y2^2,
        # but the slaving gains are still identifiable
        t = np.linspace(0.0, 400.0, 401)
        y2 = 0.1 * np.tanh(t / 50.0)
        fit = fit_slaving(synthetic_diag(2.0 * y2, y2, t), 1, 1)
        assert fit.coeff_00_1 is None and fit.coeff_00_2 is None
        assert any("collinear" in d for d in fit.degenerate)
        assert fit.kappa1_hat == pytest.approx(0.375, rel=1e-10)
        assert fit.kappa2_hat == pytest.approx(0.46875, rel=1e-10)

    def test_missing_mode_is_a_key_error(self):
        t = np.linspace(0.0, 100.0, 101)
        diag = synthetic_diag(0.1 * np.ones_like(t), 0.05 * np.ones_like(t), t)
        del diag.mode_series[(2, 2)]
        with pytest.raises(KeyError, match="recorded"):
            fit_slaving(diag, 1, 1)


class TestFitSaturation:
    def test_exact_synthetic_slope(self):
        runs = [(s, np.sqrt(s / 2.0)) for s in (0.02, 0.05, 0.1)]
        fit = fit_saturation(runs, "roll")
        assert fit.branch_coefficient == pytest.approx(-2.0, rel=1e-12)
        assert fit.combination == "b1"
        assert fit.combination_value == pytest.approx(-2.0, rel=1e-12)

    def test_rectangle_branch_maps_to_combination(self):
        runs = [(s, np.sqrt(4.0 * s / 7.875)) for s in (0.02, 0.05, 0.1)]
        fit = fit_saturation(runs, "rectangle")
        assert fit.combination == "b1+2*b2"
        assert fit.combination_value == pytest.approx(-7.875, rel=1e-12)

    def test_hexagon_branch(self):
        runs = [(s, np.sqrt(s / 12.75)) for s in (0.01, 0.02, 0.04)]
        fit = fit_saturation(runs, "hexagon")
        assert fit.combination == "b1+4*b2"
        assert fit.combination_value == pytest.approx(-12.75, rel=1e-12)

    def test_single_run_is_an_error(self):
        with pytest.raises(ValueError, match="at least 3"):
            fit_saturation([(0.05, 0.1)], "roll")

    def test_subcritical_sigma_is_an_error(self):
        with pytest.raises(ValueError, match="supercritical"):
            fit_saturation([(-0.01, 0.0), (0.05, 0.1), (0.1, 0.2)], "roll")

    def test_zero_amplitudes_mismatch_branch(self):
        with pytest.raises(BranchError):
            fit_saturation([(0.02, 0.0), (0.05, 0.0), (0.1, 0.0)], "roll")

    def test_unknown_branch(self):
        with pytest.raises(ValueError, match="branch"):
            fit_saturation([(0.02, 0.1), (0.05, 0.15), (0.1, 0.2)], "stripe")


class TestBranchSteadyAmplitude:
    def test_roll_takes_last_sample(self):
        t = np.linspace(0.0, 100.0, 101)
        y2 = 0.2 * np.tanh(t / 20.0)
        diag = synthetic_diag(np.zeros_like(t), y2, t)
        assert branch_steady_amplitude(diag, 1, 1, "roll") == pytest.approx(y2[-1])

    def test_hexagon_plateau_extraction(self):
        # ratio-locked growth to a plateau, then an escape toward the roll:
        # the plateau value must be recovered, not the final state
        t = np.linspace(0.0, 600.0, 601)
        plateau = 0.0626
        lock = 1.0 / (1.0 + np.exp(-(t - 80.0) / 12.0))
        escape = 1.0 / (1.0 + np.exp(-(t - 350.0) / 18.0))
        y2 = plateau * lock * (1.0 + 1.2 * escape)
        y1 = 2.0 * plateau * lock * (1.0 - escape)
        diag = synthetic_diag(y1, y2, t)
        amp = branch_steady_amplitude(diag, 1, 1, "hexagon")
        assert amp == pytest.approx(plateau, rel=0.05)

    def test_never_locked_raises(self):
        t = np.linspace(0.0, 100.0, 101)
        y2 = 0.1 * np.tanh(t / 20.0)
        diag = synthetic_diag(np.zeros_like(t), y2, t)
        with pytest.raises(BranchError, match="ratio-locked"):
            branch_steady_amplitude(diag, 1, 1, "hexagon")
