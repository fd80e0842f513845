import numpy as np
import pytest

from ssate import (
    LSIF,
    UKL,
    DiscreteXDgp,
    GaussianLinearDgp,
    beta_star,
    bound_v_hahn,
    bound_v_ipw,
    bound_v_os,
    bound_v_tilde_os,
    bound_v_tilde_ts,
    bound_v_ts,
    brute_force_riesz,
    sample_one,
    true_ate,
)
from ssate.errors import BadAlpha, DomainViolation, GridExcludesMinimum
from ssate.estimators import score_os_vec
from ssate.oracle import dgp_from_dict, dgp_to_dict


def random_discrete_dgp(rng, two_sample=False):
    s = rng.integers(2, 5)
    masses = rng.uniform(0.2, 1.0, size=s)
    masses /= masses.sum()
    q = None
    if two_sample:
        q = rng.uniform(0.2, 1.0, size=s)
        q /= q.sum()
    return DiscreteXDgp(
        xs=np.arange(s, dtype=float)[:, None],
        p=masses,
        pi1=rng.uniform(0.2, 0.8, size=s),
        e1=rng.uniform(0.2, 0.8, size=s),
        mu1=rng.uniform(-2, 2, size=s),
        mu0=rng.uniform(-2, 2, size=s),
        s2_1=rng.uniform(0.5, 2.0, size=s),
        s2_0=rng.uniform(0.5, 2.0, size=s),
        q=q,
    )


class TestReferenceValues:
    def test_closed_forms_exact(self, d1, d2):
        assert abs(true_ate(d1) - 0.5) <= 1e-12
        assert abs(bound_v_os(d1) - 8.25) <= 1e-12
        assert abs(bound_v_tilde_os(d1) - 8.0) <= 1e-12
        assert abs(bound_v_ipw(d1) - 10.0) <= 1e-12
        assert abs(bound_v_hahn(d1) - 4.25) <= 1e-12
        assert abs(bound_v_ts(d2, 0.5, 0.5) - 8.25) <= 1e-12
        assert abs(bound_v_tilde_ts(d2, 0.5) - 4.0) <= 1e-12

    def test_equal_arms_zero_ate(self, d1):
        from dataclasses import replace

        flat = replace(d1, mu1=d1.mu0)
        assert true_ate(flat) == 0.0

    def test_two_sample_ate_mixture(self, d2):
        for beta in (0.0, 0.3, 1.0):
            assert abs(true_ate(d2, beta) - 0.5) <= 1e-12


class TestBoundStructure:
    def test_degenerate_bound_zero(self):
        dgp = DiscreteXDgp(
            xs=np.array([[0.0], [1.0]]), p=[0.5, 0.5],
            pi1=[0.5, 0.5], e1=[0.5, 0.5],
            mu1=[1.0, 1.0], mu0=[0.0, 0.0],
            s2_1=[1e-12, 1e-12], s2_0=[1e-12, 1e-12],
        )
        assert bound_v_os(dgp) < 1e-10

    def test_doubling_sigma2_doubles_weighted_terms(self, d1):
        from dataclasses import replace

        doubled = replace(d1, s2_1=2 * d1.s2_1, s2_0=2 * d1.s2_0)
        het = bound_v_os(d1) - bound_v_tilde_os(d1)
        assert abs(bound_v_tilde_os(doubled) - 2 * bound_v_tilde_os(d1)) <= 1e-12
        assert abs((bound_v_os(doubled) - het) - 2 * bound_v_tilde_os(d1)) <= 1e-12

    def test_ipw_vs_os_inequality_random_specs(self):
        rng = np.random.default_rng(30)
        for _ in range(100):
            dgp = random_discrete_dgp(rng)
            assert bound_v_ipw(dgp) >= bound_v_os(dgp) - 1e-12

    def test_ipw_equality_when_mu_zero(self):
        rng = np.random.default_rng(31)
        from dataclasses import replace

        for _ in range(20):
            dgp = random_discrete_dgp(rng)
            flat = replace(dgp, mu1=np.zeros_like(dgp.mu1), mu0=np.zeros_like(dgp.mu0))
            assert abs(bound_v_ipw(flat) - bound_v_os(flat)) <= 1e-12

    def test_tilde_decomposition_identity(self):
        rng = np.random.default_rng(32)
        for _ in range(50):
            dgp = random_discrete_dgp(rng)
            x, w = dgp.nodes_p()
            tau0 = true_ate(dgp)
            het = float(np.sum(w * (dgp.mu(1, x) - dgp.mu(0, x) - tau0) ** 2))
            assert abs(bound_v_os(dgp) - bound_v_tilde_os(dgp) - het) <= 1e-12

    def test_hahn_equals_os_when_fully_observed(self):
        rng = np.random.default_rng(33)
        from dataclasses import replace

        for _ in range(20):
            dgp = random_discrete_dgp(rng)
            full = replace(dgp, pi1=np.full_like(dgp.pi1, 1.0 - 1e-12))
            assert abs(bound_v_hahn(full) - bound_v_os(full)) <= 1e-6

    def test_ts_decomposition(self):
        rng = np.random.default_rng(34)
        for _ in range(30):
            dgp = random_discrete_dgp(rng, two_sample=True)
            beta, alpha = rng.uniform(0.05, 0.95, size=2)
            tau0 = true_ate(dgp, beta)
            xp, wp = dgp.nodes_p()
            xq, wq = dgp.nodes_q()
            het_p = float(np.sum(wp * (dgp.mu(1, xp) - dgp.mu(0, xp) - tau0) ** 2))
            het_q = float(np.sum(wq * (dgp.mu(1, xq) - dgp.mu(0, xq) - tau0) ** 2))
            expect = (bound_v_tilde_ts(dgp, beta) / alpha
                      + beta**2 / alpha * het_p
                      + (1 - beta) ** 2 / (1 - alpha) * het_q)
            assert abs(bound_v_ts(dgp, beta, alpha) - expect) <= 1e-12

    def test_bad_alpha(self, d2):
        with pytest.raises(BadAlpha):
            bound_v_ts(d2, 0.5, 1.5)

    def test_common_support_validation(self):
        with pytest.raises(DomainViolation):
            DiscreteXDgp(
                xs=np.array([[0.0]]), p=[1.0], pi1=[0.5], e1=[0.0],
                mu1=[0.0], mu0=[0.0], s2_1=[1.0], s2_0=[1.0],
            )


class TestBetaStar:
    def test_equal_laws_returns_alpha(self, d2):
        for alpha in np.arange(0.1, 0.95, 0.1):
            bs = beta_star(d2, float(alpha), grid_step=0.01)
            assert abs(bs - alpha) <= 0.011

    def test_grid_tie_toward_smaller(self):
        # constant treatment effect: heterogeneity terms vanish; with
        # p = q the first term is beta-free, so 0 wins the tie-break
        dgp = DiscreteXDgp(
            xs=np.array([[0.0], [1.0]]), p=[0.5, 0.5],
            pi1=[0.5, 0.5], e1=[0.5, 0.5],
            mu1=[1.0, 1.0], mu0=[0.0, 0.0],
            s2_1=[1.0, 1.0], s2_0=[1.0, 1.0],
            q=[0.5, 0.5],
        )
        assert beta_star(dgp, 0.5, 0.01) == 0.0


class TestBruteForce:
    def test_lsif_reference(self, d1):
        a1, a0 = brute_force_riesz(d1, LSIF)
        assert np.allclose(a1, 4.0, atol=1e-12)
        assert np.allclose(a0, -4.0, atol=1e-12)

    def test_ukl_reference(self, d1):
        a1, a0 = brute_force_riesz(d1, UKL)
        assert np.allclose(a1, 4.0, atol=0.011)
        assert np.allclose(a0, -4.0, atol=0.011)

    def test_grid_excludes_minimum(self, d1):
        with pytest.raises(GridExcludesMinimum):
            brute_force_riesz(d1, LSIF, grid_lo=0.0, grid_hi=2.0)


class TestGaussianFamily:
    def make(self):
        return GaussianLinearDgp(
            p_mean=[0.0], p_var=[1.0],
            mu1_coef=[1.0, 0.8], mu0_coef=[0.2, 0.3],
            s2_1=1.5, s2_0=0.7,
            e_coef=[0.0, 0.0], pi_coef=[0.0, 0.0],
            q_mean=[0.5], q_var=[1.5],
        )

    def test_quadrature_matches_closed_form(self):
        dgp = self.make()
        # constant g = 0.25; heterogeneity variance (0.8 - 0.3)^2
        expect = 1.5 / 0.25 + 0.7 / 0.25 + 0.5**2
        assert abs(bound_v_os(dgp) - expect) <= 1e-10
        assert abs(true_ate(dgp) - 0.8) <= 1e-10

    def test_ts_decomposition_holds(self):
        dgp = self.make()
        alpha, beta = 0.4, 0.3
        tau0 = true_ate(dgp, beta)
        xp, wp = dgp.nodes_p()
        xq, wq = dgp.nodes_q()
        het_p = float(np.sum(wp * (dgp.mu(1, xp) - dgp.mu(0, xp) - tau0) ** 2))
        het_q = float(np.sum(wq * (dgp.mu(1, xq) - dgp.mu(0, xq) - tau0) ** 2))
        expect = (bound_v_tilde_ts(dgp, beta) / alpha
                  + beta**2 / alpha * het_p
                  + (1 - beta) ** 2 / (1 - alpha) * het_q)
        assert abs(bound_v_ts(dgp, beta, alpha) - expect) <= 1e-10

    def test_round_trip(self):
        dgp = self.make()
        back = dgp_from_dict(dgp_to_dict(dgp))
        assert abs(bound_v_os(back) - bound_v_os(dgp)) <= 1e-15

    def test_discrete_round_trip(self, d1):
        back = dgp_from_dict(dgp_to_dict(d1))
        assert abs(bound_v_os(back) - 8.25) <= 1e-12


class TestMonteCarloAgreement:
    def test_score_second_moment_matches_bound(self, d1):
        data = sample_one(d1, 10**6, 40)
        alpha1 = 1.0 / d1.g(1, data.x)
        alpha0 = -1.0 / d1.g(0, data.x)
        s = score_os_vec(data.o, data.d, data.y,
                         d1.mu(1, data.x), d1.mu(0, data.x), alpha1, alpha0)
        second = float(np.mean((s - 0.5) ** 2))
        assert abs(second - 8.25) / 8.25 <= 0.01
