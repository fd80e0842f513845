import numpy as np
import pytest

from ssate import (
    BasisSpec,
    GModel,
    LabeledRow,
    OneSampleDataset,
    OneSampleRow,
    ci,
    estimate_os_eff,
    estimate_os_ipw,
    estimate_os_ra,
    estimate_ts_eff,
    sample_one,
    sample_two,
    score_os,
    score_ts_labeled,
    score_ts_x,
)
from ssate.errors import BadLevel
from ssate.estimators import NuisanceConfig
from ssate.nuisance import OutcomeModel

from conftest import random_one_sample, random_two_sample


def const_model(x, m1, m0, clip_c=1e6):
    basis = BasisSpec().fit(x)
    return OutcomeModel(basis=basis,
                        coef={1: np.array([m1, 0.0]), 0: np.array([m0, 0.0])},
                        ridge_lambda=0.0, clip_c=clip_c)


def const_gmodel(x, g1, g0):
    # intercept-only multinomial weights reproducing exact class probabilities
    basis = BasisSpec().fit(x)
    rest = 1.0 - g1 - g0
    w = np.array([[np.log(g1 / rest), 0.0], [np.log(g0 / rest), 0.0], [0.0, 0.0]])
    return GModel(basis=basis, weights=w, clip_eps=1e-6)


class TestCi:
    def test_standard_normal_quantile(self):
        lo, hi = ci(0.0, 1.0, 0.95)
        assert abs(hi - 1.959964) <= 1e-5
        assert abs(lo + 1.959964) <= 1e-5

    def test_degenerate(self):
        assert ci(1.3, 0.0, 0.9) == (1.3, 1.3)

    def test_bad_level(self):
        with pytest.raises(BadLevel):
            ci(0.0, 1.0, 1.5)


class TestScoreOs:
    def test_treated_row(self):
        x = np.zeros((1, 1))
        row = OneSampleRow((0.0,), 1, 1, 3.0)
        val = score_os(row, const_model(x, 1.0, 0.0), const_gmodel(x, 0.5, 0.25))
        assert abs(val - 5.0) <= 1e-9

    def test_unlabeled_row(self):
        x = np.zeros((1, 1))
        row = OneSampleRow((0.0,), 0, None, None)
        val = score_os(row, const_model(x, 1.0, 0.0), const_gmodel(x, 0.5, 0.25))
        assert abs(val - 1.0) <= 1e-12

    def test_control_row(self):
        x = np.zeros((1, 1))
        row = OneSampleRow((0.0,), 1, 0, 2.0)
        val = score_os(row, const_model(x, 1.0, 0.0), const_gmodel(x, 0.5, 0.25))
        assert abs(val - (-7.0)) <= 1e-9


class TestIpw:
    def test_single_row(self):
        data = OneSampleDataset.from_arrays(np.zeros((1, 1)), [1], [1], [2.0])
        rep = estimate_os_ipw(data, lambda d, x: np.full(len(x), 0.5))
        assert rep.tau_hat == 4.0

    def test_zero_outcomes(self, d1):
        data = sample_one(d1, 200, 50)
        zeroed = OneSampleDataset.from_arrays(data.x, data.o, data.d, np.zeros(data.n))
        rep = estimate_os_ipw(zeroed, lambda d, x: np.full(len(x), 0.25))
        assert rep.tau_hat == 0.0


class TestRa:
    def test_equal_arms(self, d1):
        data = sample_one(d1, 100, 51)
        rep = estimate_os_ra(data, lambda d, x: np.ones(len(x)))
        assert rep.tau_hat == 0.0

    def test_arithmetic_mean(self):
        x = np.array([[0.0], [1.0], [1.0], [0.0]])
        data = OneSampleDataset.from_arrays(x, [1, 1, 1, 1], [1, 1, 0, 0], [0.0] * 4)
        rep = estimate_os_ra(data, lambda d, xx: (xx[:, 0] if d == 1 else np.zeros(len(xx))))
        assert rep.tau_hat == 0.5


class TestOsEff:
    def test_zero_mu_equals_ipw(self):
        rng = np.random.default_rng(52)
        g_fn = lambda d, x: np.full(len(np.atleast_2d(x)), 0.3 if d == 1 else 0.2)
        for _ in range(20):
            data = random_one_sample(rng)
            eff = estimate_os_eff(
                data, n_folds=2, seed=1,
                mu_override=lambda d, x: np.zeros(len(np.atleast_2d(x))),
                g_override=g_fn,
            )
            ipw = estimate_os_ipw(data, g_fn)
            assert eff.tau_hat == ipw.tau_hat

    def test_fully_labeled_reduces_to_aipw(self, d1):
        data = sample_one(d1, 500, 53)
        full = OneSampleDataset.from_arrays(
            data.x, np.ones(data.n, dtype=np.int8),
            np.where(data.o == 1, data.d, 1), np.where(data.o == 1, data.y, 1.0),
        )
        g_fn = lambda d, x: np.full(len(np.atleast_2d(x)), 0.5)
        mu_fn = lambda d, x: (np.atleast_2d(x)[:, 0] if d == 1 else np.zeros(len(np.atleast_2d(x))))
        rep = estimate_os_eff(full, n_folds=2, seed=2,
                              mu_override=mu_fn, g_override=g_fn)
        res = np.where(full.d == 1, full.y - full.x[:, 0], full.y)
        sign = np.where(full.d == 1, 1.0, -1.0)
        aipw = np.mean(sign * res / 0.5 + full.x[:, 0])
        assert abs(rep.tau_hat - aipw) <= 1e-12

    def test_close_to_truth_across_seeds(self, d1):
        hits = 0
        for seed in range(30):
            data = sample_one(d1, 2000, 1000 + seed)
            rep = estimate_os_eff(data, n_folds=2, seed=seed)
            if abs(rep.tau_hat - 0.5) <= 4 * rep.se:
                hits += 1
        assert hits >= 27

    def test_translation_equivariance_saturated(self, d1):
        data = sample_one(d1, 1500, 54)
        cfg = NuisanceConfig(ridge_lambda=0.0)
        base = estimate_os_eff(data, n_folds=2, seed=3, config=cfg)
        c = 2.5
        shifted = OneSampleDataset.from_arrays(
            data.x, data.o, data.d,
            np.where((data.o == 1) & (data.d == 1), data.y + c, data.y),
        )
        shift = estimate_os_eff(shifted, n_folds=2, seed=3, config=cfg)
        assert abs(shift.tau_hat - base.tau_hat - c) <= 1e-9

    def test_riesz_modes_agree(self, d1_sample_4k):
        reps = {
            mode: estimate_os_eff(d1_sample_4k, n_folds=2, seed=4,
                                  config=NuisanceConfig(riesz_mode=mode))
            for mode in ("mle-g", "ls-riesz", "kl-riesz")
        }
        taus = [r.tau_hat for r in reps.values()]
        assert max(taus) - min(taus) <= 0.02


class TestScoreTs:
    def test_hand_value(self):
        x = np.zeros((1, 1))
        row = LabeledRow((0.0,), 1, 3.0)
        v = lambda d, xx: np.full(len(np.atleast_2d(xx)), 0.5)
        val = score_ts_labeled(row, const_model(x, 1.0, 0.0), v)
        assert abs(val - 4.0) <= 1e-12

    def test_zero_residual(self):
        x = np.zeros((1, 1))
        row = LabeledRow((0.0,), 0, 1.0)
        v = lambda d, xx: np.full(len(np.atleast_2d(xx)), 0.123)
        val = score_ts_labeled(row, const_model(x, 5.0, 1.0), v)
        assert val == 0.0

    def test_contrast(self):
        mu = lambda d, x: (np.atleast_2d(x)[:, 0] if d == 1 else np.zeros(len(np.atleast_2d(x))))
        assert score_ts_x(np.array([[1.0]]), mu)[0] == 1.0
        assert score_ts_x(np.array([[0.0]]), mu)[0] == 0.0


class TestTsEff:
    def test_beta_one_ignores_unlabeled_values(self, d2):
        ts = sample_two(d2, 300, 200, 60)
        from ssate import TwoSampleDataset

        other = TwoSampleDataset.from_arrays(ts.x, ts.d, ts.y, ts.z + 1.0)
        a = estimate_ts_eff(ts, beta_star=1.0, n_folds=2, seed=5)
        b = estimate_ts_eff(other, beta_star=1.0, n_folds=2, seed=5)
        assert a.tau_hat == b.tau_hat

    def test_collinear_in_beta_for_frozen_nuisances(self):
        rng = np.random.default_rng(61)
        mu_fn = lambda d, x: (0.5 * np.atleast_2d(x)[:, 0] if d == 1 else np.zeros(len(np.atleast_2d(x))))
        e_fn = lambda d, x: np.full(len(np.atleast_2d(x)), 0.5)
        r_fn = lambda x: np.full(len(np.atleast_2d(x)), 1.4)
        for _ in range(20):
            ts = random_two_sample(rng)
            taus = [
                estimate_ts_eff(ts, beta_star=b, n_folds=2, seed=6,
                                mu_override=mu_fn, e_override=e_fn,
                                r_override=r_fn).tau_hat
                for b in (0.0, 0.5, 1.0)
            ]
            assert abs(taus[1] - 0.5 * (taus[0] + taus[2])) <= 1e-12

    def test_close_to_truth_across_seeds(self, d2):
        hits = 0
        for seed in range(30):
            ts = sample_two(d2, 1000, 1000, 2000 + seed)
            rep = estimate_ts_eff(ts, beta_star=0.5, n_folds=2, seed=seed)
            if abs(rep.tau_hat - 0.5) <= 4 * rep.se:
                hits += 1
        assert hits >= 27
