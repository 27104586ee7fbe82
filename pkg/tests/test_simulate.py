import numpy as np
import pytest

from strata_bounds import (complier_outcome_bounds, estimate_late,
                           estimate_shares)
from strata_bounds.errors import (InvalidConfig, TooLarge, UnsupportedFamily)
from strata_bounds.simulate import (PRESET_T1, PRESET_T2, PRESETS, STRATA,
                                    DgpConfig, analytic_bounds,
                                    balanced_population, brute_force_sharpness,
                                    generate)


def config(**overrides):
    base = dict(
        strata_probs=(0.2, 0.2, 0.1, 0.3, 0.2),
        outcome_means=((0.0, 0.0, 0.0), (0.1, 0.2, 0.0), (0.0, 0.0, 0.5),
                       (0.3, 0.0, 1.2), (0.0, 0.4, 1.0)),
        outcome_noise=1.0, family="normal", cluster_count=50,
        cluster_size=20, icc=0.0, seed=0)
    base.update(overrides)
    return DgpConfig(**base)


class TestGenerate:
    def test_all_compliers_degenerate(self):
        cfg = config(strata_probs=(0, 0, 0, 1, 0))
        pop = generate(cfg)
        s = pop.sample
        assert np.all(s.d[s.z == 0] == 0)
        assert np.all(s.d[s.z == 1] == 2)

    def test_noiseless_effect_exact(self):
        cfg = config(strata_probs=(0, 0, 0, 1, 0), outcome_noise=0.0,
                     outcome_means=((0, 0, 0),) * 3 + ((0.0, 0.0, 1.0), (0, 0, 0)))
        pop = generate(cfg)
        assert pop.truth.tau02 == pytest.approx(1.0, abs=1e-12)
        assert estimate_late(pop.sample).point == pytest.approx(1.0, abs=1e-12)

    def test_takeup_mapping_and_exclusion(self):
        pop = generate(config(seed=5))
        s = pop.sample
        d_control = np.array([0, 1, 2, 0, 1])
        d_treated = np.array([0, 1, 2, 2, 2])
        expect = np.where(s.z == 1, d_treated[pop.strata], d_control[pop.strata])
        assert np.array_equal(s.d, expect)
        potential = np.stack([pop.y0, pop.y1, pop.y2])
        assert np.array_equal(s.y, potential[s.d, np.arange(s.n)])

    def test_share_recovery_moderate_n(self):
        cfg = config(cluster_count=500, cluster_size=40, seed=1)
        pop = generate(cfg)
        est = estimate_shares(pop.sample).as_array()
        assert np.max(np.abs(est - np.array(cfg.strata_probs))) < 0.03

    def test_truths_both_reported(self):
        pop = generate(config(seed=2))
        for t in (pop.truth, pop.truth_super):
            assert np.isfinite(t.itt)
            assert np.isfinite(t.late)
            assert len(t.pi) == 5

    def test_icc_produces_cluster_correlation(self):
        cfg = config(icc=0.5, cluster_count=200, cluster_size=30, seed=3)
        pop = generate(cfg)
        s = pop.sample
        codes = s.cluster_codes
        means = np.bincount(codes, weights=pop.y0) / np.bincount(codes)
        between = means.var()
        total = pop.y0.var()
        # between-cluster variance share should be near icc (+ 1/size term)
        assert 0.3 < between / total < 0.7

    def test_invalid_configs(self):
        with pytest.raises(InvalidConfig):
            config(strata_probs=(0.5, 0.5, 0.5, 0, 0)).validate()
        with pytest.raises(InvalidConfig):
            config(icc=1.0).validate()
        with pytest.raises(InvalidConfig):
            config(family="cauchy").validate()


class TestAnalyticBounds:
    def test_no_substitutors_point_identified(self):
        cfg = config(strata_probs=(0.2, 0.2, 0.1, 0.5, 0.0))
        comp, sub = analytic_bounds(cfg)
        tau02 = cfg.outcome_means[3][2] - cfg.outcome_means[3][0]
        assert comp[0] == pytest.approx(tau02, abs=1e-8)
        assert comp[1] == pytest.approx(tau02, abs=1e-8)

    def test_uniform_equal_shares_closed_form(self):
        # complier and substitutor Y(2) both uniform on (0, 2): the mixture
        # is U(0, 2) and a half trim gives means 0.5 and 1.5
        cfg = config(
            strata_probs=(0, 0, 0, 0.5, 0.5),
            outcome_means=((0, 0, 0), (0, 0, 0), (0, 0, 0),
                           (0.0, 0.0, 1.0), (0.0, 0.0, 1.0)),
            outcome_noise=1.0 / np.sqrt(3.0), family="uniform")
        comp, _ = analytic_bounds(cfg)
        assert comp[0] == pytest.approx(0.5, abs=1e-8)
        assert comp[1] == pytest.approx(1.5, abs=1e-8)

    def test_two_point_matches_discrete_trim(self):
        cfg = config(
            strata_probs=(0.1, 0.1, 0.0, 0.5, 0.3),
            outcome_means=((0, 0, 0), (0, 0, 0), (0, 0, 0),
                           (0.0, 0.0, 0.6), (0.0, 0.0, 0.4)),
            outcome_noise=0.5, family="two_point")
        comp, sub = analytic_bounds(cfg)
        assert comp[0] <= comp[1]
        # two-point outcomes are bounded by the atom span
        assert comp[1] - comp[0] <= 2 * 0.5 * 2 + 1e-9

    def test_icc_with_non_normal_family_unsupported(self):
        cfg = config(family="uniform", icc=0.2)
        with pytest.raises(UnsupportedFamily):
            analytic_bounds(cfg)


class TestBruteForce:
    def test_enumeration_hand_case(self):
        pop = balanced_population((0, 0, 0, 2, 2), y2_values=(0.0, 1.0, 2.0, 3.0))
        lo, hi = brute_force_sharpness(pop)
        assert lo == pytest.approx(0.5)
        assert hi == pytest.approx(2.5)

    def test_forced_labeling(self):
        pop = balanced_population((0, 0, 0, 1, 0), y2_values=(5.0,))
        lo, hi = brute_force_sharpness(pop)
        assert lo == hi == pytest.approx(5.0)

    def test_matches_trimming_estimator(self, rng):
        for _ in range(25):
            nc = int(rng.integers(1, 7))
            ns = int(rng.integers(0, 7))
            y2 = rng.standard_normal(nc + ns).round(3)
            pop = balanced_population((1, 1, 0, nc, ns), y2_values=y2)
            lo, hi = brute_force_sharpness(pop)
            ob = complier_outcome_bounds(pop.sample)
            assert ob.lower == pytest.approx(lo, abs=1e-9)
            assert ob.upper == pytest.approx(hi, abs=1e-9)

    def test_too_large(self):
        y2 = np.arange(30, dtype=float)
        pop = balanced_population((0, 0, 0, 15, 15), y2_values=y2)
        with pytest.raises(TooLarge):
            brute_force_sharpness(pop)


class TestPresets:
    def test_registry(self):
        assert PRESETS["table7-t1"] is PRESET_T1
        assert PRESETS["table7-t2"] is PRESET_T2

    def test_shares_normalized(self):
        for cfg in (PRESET_T1, PRESET_T2):
            assert sum(cfg.strata_probs) == pytest.approx(1.0, abs=1e-12)

    def test_late_calibration(self):
        for cfg, target in ((PRESET_T1, 1.06), (PRESET_T2, 1.04)):
            pi = np.array(cfg.strata_probs)
            means = np.array(cfg.outcome_means)
            tau02 = means[3, 2] - means[3, 0]
            tau12 = means[4, 2] - means[4, 1]
            late = (pi[3] * tau02 + pi[4] * tau12) / (pi[3] + pi[4])
            assert late == pytest.approx(target, abs=1e-10)

    def test_strata_labels(self):
        assert STRATA == ("never_taker", "govt_adherent", "always_taker",
                          "complier", "substitutor")
