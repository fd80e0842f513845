"""Orthogonal scores, cross-fitted ATE estimators, and baselines."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.stats import norm

from .datamodel import (
    FoldPlan,
    OneSampleDataset,
    OneSampleRow,
    TwoSampleDataset,
    make_fold_plan,
)
from .errors import BadLevel, FoldTooSmall
from .nuisance import (
    BasisSpec,
    GModel,
    OutcomeModel,
    RieszModel,
    assemble_v_beta,
    fit_density_ratio,
    fit_e_model,
    fit_gmodel_mle,
    fit_outcome_both,
    fit_riesz,
    generator,
)
from .optimize import OptimizerConfig

RIESZ_MODES = ("mle-g", "ls-riesz", "kl-riesz")


@dataclass(frozen=True)
class NuisanceConfig:
    """Shared nuisance-fitting options for the cross-fitted estimators."""

    degree: int = 1
    intercept: bool = True
    standardize: bool = False
    ridge_lambda: float = 1e-6
    clip_eps: float = 0.01
    clip_c: Optional[float] = None
    r_clip: Tuple[float, float] = (0.01, 100.0)
    riesz_mode: str = "mle-g"
    optimizer: OptimizerConfig = OptimizerConfig()

    def __post_init__(self):
        if self.riesz_mode not in RIESZ_MODES:
            raise ValueError(f"riesz_mode must be one of {RIESZ_MODES}")

    @property
    def basis(self) -> BasisSpec:
        return BasisSpec(degree=self.degree, intercept=self.intercept,
                         standardize=self.standardize)


@dataclass
class EstimateReport:
    tau_hat: float
    se: float
    ci: Tuple[float, float]
    level: float
    method: str
    sizes: dict
    folds: int
    seed: Optional[int] = None
    diagnostics: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "tau_hat": self.tau_hat,
            "se": self.se,
            "ci": list(self.ci),
            "level": self.level,
            "method": self.method,
            "sizes": self.sizes,
            "folds": self.folds,
            "seed": self.seed,
            "diagnostics": self.diagnostics,
        }


def ci(tau_hat: float, se: float, level: float) -> Tuple[float, float]:
    """Normal-approximation interval tau_hat +/- z * se."""
    if not 0.0 < level < 1.0:
        raise BadLevel(f"confidence level must lie in (0, 1), got {level}")
    if se < 0.0:
        raise ValueError("se must be nonnegative")
    z = float(norm.ppf(0.5 * (1.0 + level)))
    return (tau_hat - z * se, tau_hat + z * se)


# ---------------------------------------------------------------------------
# One-sample scores
# ---------------------------------------------------------------------------

def score_os(row: OneSampleRow, mu: OutcomeModel, g: GModel) -> float:
    """Efficient one-sample score for a single row."""
    x = np.atleast_2d(np.asarray(row.x, dtype=float))
    m1 = float(mu.predict(1, x)[0])
    m0 = float(mu.predict(0, x)[0])
    val = m1 - m0
    if row.o == 1:
        if row.d == 1:
            val += (row.y - m1) / float(g.g(1, x)[0])
        else:
            val -= (row.y - m0) / float(g.g(0, x)[0])
    return val


def score_os_vec(
    o: np.ndarray,
    d: np.ndarray,
    y: np.ndarray,
    mu1x: np.ndarray,
    mu0x: np.ndarray,
    alpha1: np.ndarray,
    alpha0: np.ndarray,
) -> np.ndarray:
    """Vectorized score; alpha1 ~ 1/g(1|x) and alpha0 ~ -1/g(0|x) (signed)."""
    res = np.where(d == 1, y - mu1x, y - mu0x)
    a = np.where(d == 1, alpha1, alpha0)
    return np.where(o == 1, a * res, 0.0) + mu1x - mu0x


def _mean_se(values: np.ndarray) -> Tuple[float, float]:
    n = len(values)
    tau = float(np.mean(values))
    se = float(np.sqrt(np.sum((values - tau) ** 2))) / n
    return tau, se


def _fold_iter(n: int, n_folds: int, seed: int):
    """(fold_mask, complement_mask) pairs; n_folds=1 means no splitting."""
    if n_folds == 1:
        full = np.ones(n, dtype=bool)
        yield full, full
        return
    plan = make_fold_plan(n, n_folds, seed)
    for b, mask in plan.masks():
        yield mask, ~mask


def _subset_one(data: OneSampleDataset, mask: np.ndarray) -> OneSampleDataset:
    return OneSampleDataset.from_arrays(
        data.x[mask], data.o[mask], data.d[mask], data.y[mask]
    )


def estimate_os_eff(
    data: OneSampleDataset,
    n_folds: int = 2,
    seed: int = 0,
    config: NuisanceConfig = NuisanceConfig(),
    level: float = 0.95,
    mu_override: Optional[Callable[[int, np.ndarray], np.ndarray]] = None,
    g_override: Optional[Callable[[int, np.ndarray], np.ndarray]] = None,
) -> EstimateReport:
    """Cross-fitted efficient one-sample estimator.

    ``riesz_mode`` selects where the inverse weights come from: the
    plug-in 1/g of a multinomial MLE fit, or a directly estimated
    representer (least-squares or KL generator). Overrides replace the
    corresponding fitted nuisance with a fixed function of (d, x).
    """
    if not 0.0 < level < 1.0:
        raise BadLevel(f"confidence level must lie in (0, 1), got {level}")
    scores = np.empty(data.n)
    diagnostics = []
    for fold_mask, comp_mask in _fold_iter(data.n, n_folds, seed):
        comp = _subset_one(data, comp_mask)
        diag = {"n_train": comp.n}
        if mu_override is None:
            xl, dl, yl = comp.labeled_arrays()
            if not (np.any(dl == 1) and np.any(dl == 0)):
                raise FoldTooSmall("a fold complement lacks labeled rows in some arm")
            mu = fit_outcome_both(
                xl, dl, yl,
                basis=config.basis,
                ridge_lambda=config.ridge_lambda,
                clip_c=config.clip_c,
            )
            mu_fn = mu.predict
        else:
            mu_fn = mu_override

        xf = data.x[fold_mask]
        if g_override is not None:
            alpha1 = 1.0 / g_override(1, xf)
            alpha0 = -1.0 / g_override(0, xf)
        elif config.riesz_mode == "mle-g":
            g = fit_gmodel_mle(comp, basis=config.basis,
                               clip_eps=config.clip_eps, opt=config.optimizer)
            diag["g_converged"] = g.converged
            alpha1 = 1.0 / g.g(1, xf)
            alpha0 = -1.0 / g.g(0, xf)
        else:
            gen = generator("LSIF" if config.riesz_mode == "ls-riesz" else "UKL")
            riesz = fit_riesz(comp, gen=gen, basis=config.basis, opt=config.optimizer)
            diag["riesz_converged"] = riesz.converged
            alpha1 = riesz.a1(xf)
            alpha0 = riesz.a0(xf)

        scores[fold_mask] = score_os_vec(
            data.o[fold_mask], data.d[fold_mask], data.y[fold_mask],
            mu_fn(1, xf), mu_fn(0, xf), alpha1, alpha0,
        )
        diagnostics.append(diag)
    tau, se = _mean_se(scores)
    return EstimateReport(
        tau_hat=tau, se=se, ci=ci(tau, se, level), level=level,
        method="OS-eff", sizes={"n": data.n, "n_labeled": data.n_labeled},
        folds=n_folds, seed=seed, diagnostics=diagnostics,
    )


def _weights_from(g, d: int, x: np.ndarray) -> np.ndarray:
    """Signed inverse weight for arm d from a GModel, RieszModel or callable."""
    if isinstance(g, GModel):
        val = 1.0 / g.g(d, x)
        return val if d == 1 else -val
    if isinstance(g, RieszModel):
        return g.a1(x) if d == 1 else g.a0(x)
    val = 1.0 / g(d, x)
    return val if d == 1 else -val


def estimate_os_ipw(
    data: OneSampleDataset,
    g,
    level: float = 0.95,
) -> EstimateReport:
    """Inverse-probability-weighting baseline with a supplied weight model."""
    if not 0.0 < level < 1.0:
        raise BadLevel(f"confidence level must lie in (0, 1), got {level}")
    a = np.where(data.d == 1, _weights_from(g, 1, data.x), _weights_from(g, 0, data.x))
    terms = np.where(data.o == 1, a * data.y, 0.0)
    tau, se = _mean_se(terms)
    return EstimateReport(
        tau_hat=tau, se=se, ci=ci(tau, se, level), level=level,
        method="OS-IPW", sizes={"n": data.n, "n_labeled": data.n_labeled},
        folds=1,
    )


def estimate_os_ra(
    data: OneSampleDataset,
    mu,
    level: float = 0.95,
) -> EstimateReport:
    """Regression-adjustment baseline: mean outcome-model contrast over all
    rows, labeled and unlabeled alike. The SE is the naive sample variance
    of the contrast and ignores outcome-model estimation error."""
    if not 0.0 < level < 1.0:
        raise BadLevel(f"confidence level must lie in (0, 1), got {level}")
    mu_fn = mu.predict if isinstance(mu, OutcomeModel) else mu
    contrast = mu_fn(1, data.x) - mu_fn(0, data.x)
    tau, se = _mean_se(contrast)
    return EstimateReport(
        tau_hat=tau, se=se, ci=ci(tau, se, level), level=level,
        method="OS-RA", sizes={"n": data.n, "n_labeled": data.n_labeled},
        folds=1,
    )


# ---------------------------------------------------------------------------
# Two-sample scores and estimator
# ---------------------------------------------------------------------------

def score_ts_labeled(row, mu, v) -> float:
    """Weighted-residual score for a labeled two-sample row."""
    x = np.atleast_2d(np.asarray(row.x, dtype=float))
    mu_fn = mu.predict if isinstance(mu, OutcomeModel) else mu
    if row.d == 1:
        return float((row.y - mu_fn(1, x)[0]) / v(1, x)[0])
    return float(-(row.y - mu_fn(0, x)[0]) / v(0, x)[0])


def score_ts_x(x: np.ndarray, mu) -> np.ndarray:
    """Outcome-model contrast mu(1, x) - mu(0, x)."""
    mu_fn = mu.predict if isinstance(mu, OutcomeModel) else mu
    return mu_fn(1, x) - mu_fn(0, x)


def _child_seeds(seed: int, n: int) -> list:
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(n)]


def estimate_ts_eff(
    data: TwoSampleDataset,
    beta_star: float,
    n_folds: int = 2,
    seed: int = 0,
    config: NuisanceConfig = NuisanceConfig(),
    level: float = 0.95,
    mu_override: Optional[Callable[[int, np.ndarray], np.ndarray]] = None,
    e_override: Optional[Callable[[int, np.ndarray], np.ndarray]] = None,
    r_override: Optional[Callable[[np.ndarray], np.ndarray]] = None,
) -> EstimateReport:
    """Cross-fitted efficient two-sample estimator at a supplied beta_star.

    Fold plans are drawn independently for the labeled and unlabeled
    samples, preserving their independence. For frozen nuisances
    (all overrides supplied) the point estimate is affine in beta_star.
    """
    if not 0.0 < level < 1.0:
        raise BadLevel(f"confidence level must lie in (0, 1), got {level}")
    if not 0.0 <= beta_star <= 1.0:
        raise ValueError("beta_star must lie in [0, 1]")
    m, l = data.m, data.l
    seed_m, seed_l = _child_seeds(seed, 2)
    s_xdy = np.empty(m)
    s_x_lab = np.empty(m)
    s_x_unl = np.empty(l)
    diagnostics = []
    folds_lab = list(_fold_iter(m, n_folds, seed_m))
    folds_unl = list(_fold_iter(l, n_folds, seed_l))
    for (fm, cm), (fu, cu) in zip(folds_lab, folds_unl):
        diag = {"m_train": int(cm.sum()), "l_train": int(cu.sum())}
        xc, dc, yc = data.x[cm], data.d[cm], data.y[cm]
        if mu_override is None:
            if not (np.any(dc == 1) and np.any(dc == 0)):
                raise FoldTooSmall("a fold complement lacks labeled rows in some arm")
            mu = fit_outcome_both(
                xc, dc, yc, basis=config.basis,
                ridge_lambda=config.ridge_lambda, clip_c=config.clip_c,
            )
            mu_fn = mu.predict
        else:
            mu_fn = mu_override
        if e_override is None:
            em = fit_e_model(xc, dc, basis=config.basis,
                             clip_eps=config.clip_eps, opt=config.optimizer)
            diag["e_converged"] = em.converged
            e_fn = em.e
        else:
            e_fn = e_override
        if r_override is None:
            rm = fit_density_ratio(xc, data.z[cu], basis=config.basis,
                                   clip=config.r_clip, opt=config.optimizer)
            diag["r_converged"] = rm.converged
            r_fn = rm.ratio
        else:
            r_fn = r_override
        v = assemble_v_beta(e_fn, r_fn, beta_star)

        xf, df, yf = data.x[fm], data.d[fm], data.y[fm]
        res = np.where(df == 1, yf - mu_fn(1, xf), yf - mu_fn(0, xf))
        w = np.where(df == 1, 1.0 / v(1, xf), -1.0 / v(0, xf))
        s_xdy[fm] = w * res
        s_x_lab[fm] = score_ts_x(xf, mu_fn)
        s_x_unl[fu] = score_ts_x(data.z[fu], mu_fn)
        diagnostics.append(diag)

    n_total = m + l
    tau = float(
        np.mean(s_xdy) + beta_star * np.mean(s_x_lab)
        + (1.0 - beta_star) * np.mean(s_x_unl)
    )
    lab_combined = s_xdy + beta_star * s_x_lab
    v_hat = (n_total / m) * float(np.var(lab_combined)) \
        + (n_total / l) * (1.0 - beta_star) ** 2 * float(np.var(s_x_unl))
    se = float(np.sqrt(v_hat / n_total))
    return EstimateReport(
        tau_hat=tau, se=se, ci=ci(tau, se, level), level=level,
        method="TS-eff", sizes={"m": m, "l": l},
        folds=n_folds, seed=seed, diagnostics=diagnostics,
    )
