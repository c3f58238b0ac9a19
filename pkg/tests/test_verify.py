import pytest

from chemopattern.config import parse_config
from chemopattern.verify import (
    resolve_setup,
    run_linear,
    run_reduce,
    run_verify_theorem1,
    run_verify_theorem2,
)


def cfg_text(kind, extra=""):
    return f"[experiment]\nkind = {kind}\nseed = 2\n{extra}"


class TestResolveSetup:
    def test_defaults_to_critical_geometry_and_coupling(self):
        cfg = parse_config(cfg_text("linear"))
        p, g, crit, m, n = resolve_setup(cfg)
        assert (m, n) == (1, 1)
        assert p.lam == pytest.approx(crit.lambda_c, rel=1e-14)

    def test_lambda_factor(self):
        cfg = parse_config(cfg_text("linear", "[model]\nlambda_factor = 1.05\n"))
        p, g, crit, _, _ = resolve_setup(cfg)
        assert p.lam == pytest.approx(1.05 * crit.lambda_c, rel=1e-14)

    def test_physical_block(self):
        extra = ("[physical]\nd1 = 8\nd2 = 1\nchi = 1\nr1 = 18\nr2 = 1\n"
                 "alpha1 = 1\nalpha2 = 1\n")
        cfg = parse_config(cfg_text("linear", extra))
        p, _, crit, _, _ = resolve_setup(cfg)
        assert (p.mu, p.alpha, p.lam) == (8.0, 1.0, 18.0)

    def test_explicit_geometry(self):
        cfg = parse_config(cfg_text("linear", "[geometry]\nell1 = 4.0\nell2 = 7.0\n"))
        _, g, _, _, _ = resolve_setup(cfg)
        assert (g.ell1, g.ell2) == (4.0, 7.0)


class TestVerifyTheorem1Paths:
    def test_violated_diffusion_hypothesis_short_circuits(self, tmp_path):
        cfg = parse_config(cfg_text("verify-theorem1", "[model]\nmu = 7\nalpha = 1\n"))
        rep = run_verify_theorem1(cfg, str(tmp_path))
        assert not rep.overall
        assert len(rep.checks) == 1
        assert "mu = 8*alpha" in rep.checks[0].name
        assert "violated" in rep.checks[0].note

    def test_subcritical_coupling_skips_supercritical_checks(self, tmp_path):
        cfg = parse_config(cfg_text(
            "verify-theorem1", "[verify]\nlambda_factor = 0.98\nskip_pde = true\n"))
        rep = run_verify_theorem1(cfg, str(tmp_path))
        names = [c.name for c in rep.checks]
        assert "subcritical: all growth rates negative" in names
        assert not any("equilibria" in n for n in names)
        assert any("skipped" in p for p in rep.provenance)
        # the analytic checks all pass on this path
        assert rep.overall

    def test_stage_failures_are_recorded_not_raised(self, tmp_path):
        # a one-entry sigma list is too short for the saturation fit; the
        # stage must record the failure and the run must continue
        cfg = parse_config(cfg_text(
            "verify-theorem1",
            "[verify]\nsigma_list = 0.05\nsigma_list_hex = 0.05\nskip_pde = true\n"
            "slaving_t_end = 60\nslaving_n1 = 32\nslaving_n2 = 32\nslaving_dt = 0.05\n"))
        rep = run_verify_theorem1(cfg, str(tmp_path))
        stage_checks = [c for c in rep.checks if c.name.startswith("stage:")]
        assert stage_checks and not stage_checks[0].passed
        assert (tmp_path / "verify_theorem1_report.tsv").exists()

    def test_report_files_match_report(self, tmp_path):
        cfg = parse_config(cfg_text(
            "verify-theorem1", "[verify]\nlambda_factor = 0.98\nskip_pde = true\n"))
        rep = run_verify_theorem1(cfg, str(tmp_path))
        tsv = (tmp_path / "verify_theorem1_report.tsv").read_text()
        assert tsv == rep.to_tsv()
        txt = (tmp_path / "verify_theorem1_report.txt").read_text()
        assert txt == rep.to_table()
        assert tsv.splitlines()[0] == "check\texpected\tobserved\ttolerance\tpass"


class TestVerifyTheorem2Paths:
    def test_zero_perturbation_degenerates(self, tmp_path):
        cfg = parse_config(cfg_text(
            "verify-theorem2", "[verify]\nell2_perturb = 0\nlambda_perturb = 0\n"))
        rep = run_verify_theorem2(cfg, str(tmp_path))
        by_name = {c.name: c for c in rep.checks}
        # exactly at the degenerate point the quadratic coefficient vanishes
        assert not by_name["quadratic coefficient nonzero"].passed
        assert any("zero perturbation" in p for p in rep.provenance)

    def test_structural_checks_pass(self, tmp_path):
        cfg = parse_config(cfg_text("verify-theorem2"))
        rep = run_verify_theorem2(cfg, str(tmp_path))
        by_name = {c.name: c for c in rep.checks}
        for name in ("no pure-rectangle equilibrium", "nontrivial equilibria",
                     "mixed-pattern equilibria", "ring attractor",
                     "classification flips with the sign of 2*b2-b1"):
            assert by_name[name].passed, name


class TestDriverOutputs:
    def test_linear_tables(self, tmp_path):
        cfg = parse_config(cfg_text("linear", "[geometry]\nk_max = 4\n"))
        paths = run_linear(cfg, str(tmp_path))
        sigma_rows = (tmp_path / "linear_sigma.tsv").read_text().strip().splitlines()
        assert sigma_rows[0].startswith("k1\tk2\trho")
        assert len(sigma_rows) == 1 + 5 * 5 - 1  # all modes but (0, 0)

    def test_reduce_carries_both_conventions(self, tmp_path):
        cfg = parse_config(cfg_text("reduce", "[model]\nlambda_factor = 1.02\n"))
        run_reduce(cfg, str(tmp_path))
        text = (tmp_path / "reduce_coefficients.tsv").read_text()
        assert "b1_formula\t-3.2462" in text
        assert "b1_paper\t-2.1" in text
        eq_text = (tmp_path / "reduce_equilibria.tsv").read_text()
        assert eq_text.count("hexagon") == 4
        assert eq_text.count("mixed") == 2
