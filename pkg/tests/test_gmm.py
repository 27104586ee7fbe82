import numpy as np
import pytest

from strata_bounds import UnitRecord, asymptotic_variance, fit_gmm, moment_conditions
from strata_bounds.gmm import TARGETS, _moment_matrix, simplified_theta_variance
from strata_bounds.errors import WeakShare
from strata_bounds.simulate import PRESET_T2, DgpConfig, generate


def big_sample(n_clusters=400, size=50, seed=3):
    fields = {k: getattr(PRESET_T2, k) for k in PRESET_T2.__dataclass_fields__}
    fields.update(cluster_count=n_clusters, cluster_size=size, icc=0.0, seed=seed)
    return generate(DgpConfig(**fields)).sample


THETA = (0.2, 0.1, 0.3, 2.0, 0.4, 0.5)
GAMMA = (0.2, 0.3, 0.1, 0.15, 0.25)


class TestMomentConditions:
    def test_control_unit_zeroes_treated_moments(self):
        unit = UnitRecord("u", "c", z=0, d=2, y=1.0)
        m = moment_conditions(unit, THETA, GAMMA)
        # moments 1, 4, 6, 7, 11 carry a Z factor
        for idx in (0, 3, 5, 6, 10):
            assert m[idx] == 0.0

    def test_hand_evaluated_treated_unit(self):
        # z=1, d=2, y=1.5 < c1=2 so the indicator is 1
        unit = UnitRecord("u", "c", z=1, d=2, y=1.5)
        m = moment_conditions(unit, THETA, GAMMA)
        a3 = GAMMA[1] + GAMMA[2] + GAMMA[3]  # 0.55
        expected = np.zeros(11)
        expected[0] = 1.5 - 0.2                          # I(y<c1) y - mu12
        expected[3] = 0.15 * 0.4 + 0.3 - a3 * 1.0        # pi22 k1 + pi02 - a3 I
        expected[6] = 0.2                                # pi00 - I(d=0)
        expected[10] = 0.25                              # k3 - I(d=1)
        assert np.allclose(m, expected, atol=1e-12)

    def test_hand_evaluated_control_unit(self):
        # z=0, d=0: only the control-side moments fire
        unit = UnitRecord("u", "c", z=0, d=0, y=2.5)
        m = moment_conditions(unit, THETA, GAMMA)
        expected = np.zeros(11)
        expected[4] = (0.2 + 0.3) * 2.5 - 0.3 * 0.3 - 0.2 * 0.5
        expected[7] = 0.15 - 0.0                         # pi22 - I(d=2)
        expected[8] = 0.3 + 0.2 - 1.0                    # pi02 + pi00 - I(d=0)
        expected[9] = 0.1 + 0.25 - 0.0                   # pi12 + k3 - I(d=1)
        assert np.allclose(m, expected, atol=1e-12)

    def test_fitted_moment_means_vanish(self):
        s = big_sample()
        model = fit_gmm(s)
        m = _moment_matrix(s.y, s.z.astype(int), s.d.astype(int),
                           model.theta, model.gamma, model.phi)
        mean = m.T @ s.weight / s.weight.sum()
        assert np.all(np.abs(mean) < 1e-8)


class TestSandwich:
    def test_symmetry_and_psd_diagonal(self):
        model = fit_gmm(big_sample())
        V = model.V
        assert np.allclose(V, V.T, rtol=1e-8, atol=1e-12)
        assert np.all(np.diag(V) >= 0)

    def test_jacobian_block_triangular(self):
        model = fit_gmm(big_sample())
        assert np.all(model.H[6:, :6] == 0.0)

    def test_all_targets_finite(self):
        s = big_sample()
        points = {}
        for target in TARGETS:
            rep = asymptotic_variance(s, target)
            assert np.isfinite(rep.point) and rep.se > 0
            points[target] = rep.point
        assert points["tauL_02"] < points["tauU_02"]
        assert points["tauL_12"] < points["tauU_12"]

    def test_matches_direct_bound_estimates(self):
        from strata_bounds import complier_effect_bounds, substitutor_effect_bounds
        s = big_sample()
        cb = complier_effect_bounds(s)
        sb = substitutor_effect_bounds(s, method="direct")
        assert fit_gmm(s, "tauL_02").point == pytest.approx(cb.lower, abs=2e-3)
        assert fit_gmm(s, "tauU_02").point == pytest.approx(cb.upper, abs=2e-3)
        assert fit_gmm(s, "tauL_12").point == pytest.approx(sb.lower, abs=2e-3)
        assert fit_gmm(s, "tauU_12").point == pytest.approx(sb.upper, abs=2e-3)

    def test_simplified_variance_structure(self):
        model = fit_gmm(big_sample())
        simple = simplified_theta_variance(model)
        # first-stage-known simplification: zero cross-covariances
        off = simple - np.diag(np.diag(simple))
        assert np.all(np.abs(off) < 1e-10)
        # Var(mu12) = E21[(I y - mu12)^2] / P_D2Z1, from the Sigma block
        assert simple[0, 0] == model.Sigma[0, 0] / model.H[0, 0] ** 2
        assert np.all(np.diag(simple) >= 0)

    def test_weak_share_raises(self):
        fields = {k: getattr(PRESET_T2, k) for k in PRESET_T2.__dataclass_fields__}
        fields.update(strata_probs=(0.4, 0.3, 0.0, 0.0, 0.3),
                      cluster_count=50, cluster_size=20, icc=0.0, seed=0)
        s = generate(DgpConfig(**fields)).sample
        with pytest.raises(WeakShare):
            fit_gmm(s, floor=0.2)


class TestAgainstBootstrap:
    def test_se_close_to_bootstrap(self):
        from strata_bounds import BootstrapSpec, bootstrap_ci
        s = big_sample(n_clusters=200, size=50, seed=9)
        asym = asymptotic_variance(s, "tauL_02")
        boot = bootstrap_ci(s, "tau02_lower", BootstrapSpec(reps=300, seed=5))
        assert abs(asym.se - boot.se) / boot.se < 0.2
