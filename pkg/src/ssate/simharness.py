"""Sampling from synthetic DGPs and replicated Monte Carlo studies."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .datamodel import OneSampleDataset, TwoSampleDataset
from .errors import ReportIncomplete, SsateError
from .estimators import (
    NuisanceConfig,
    estimate_os_eff,
    estimate_os_ipw,
    estimate_os_ra,
    estimate_ts_eff,
)
from .nuisance import fit_gmodel_mle, fit_outcome_both
from . import oracle


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

def sample_one(dgp, n: int, seed: int) -> OneSampleDataset:
    """n i.i.d. one-sample rows: X ~ p0, O ~ pi0(.|X), D ~ e0(.|X) when
    observed, Y ~ Normal(mu0(D, X), sigma0^2(D, X))."""
    rng = np.random.default_rng(seed)
    x = dgp.sample_x(rng, n, "p")
    o = (rng.random(n) < dgp.pi(x)).astype(np.int8)
    d = (rng.random(n) < dgp.e(1, x)).astype(np.int8)
    mu = np.where(d == 1, dgp.mu(1, x), dgp.mu(0, x))
    sd = np.sqrt(np.where(d == 1, dgp.sigma2(1, x), dgp.sigma2(0, x)))
    y = mu + sd * rng.standard_normal(n)
    d = np.where(o == 1, d, 0).astype(np.int8)
    y = np.where(o == 1, y, 0.0)
    return OneSampleDataset.from_arrays(x, o, d, y)


def sample_two(dgp, m: int, l: int, seed: int) -> TwoSampleDataset:
    """Independent labeled (X, D, Y) ~ p0 and unlabeled Z ~ q0 draws."""
    rng = np.random.default_rng(seed)
    x = dgp.sample_x(rng, m, "p")
    d = (rng.random(m) < dgp.e(1, x)).astype(np.int8)
    mu = np.where(d == 1, dgp.mu(1, x), dgp.mu(0, x))
    sd = np.sqrt(np.where(d == 1, dgp.sigma2(1, x), dgp.sigma2(0, x)))
    y = mu + sd * rng.standard_normal(m)
    z = dgp.sample_x(rng, l, "q")
    return TwoSampleDataset.from_arrays(x, d, y, z)


# ---------------------------------------------------------------------------
# Configuration and hooks
# ---------------------------------------------------------------------------

MISSPEC_KINDS = (
    "zero-mu", "constant-g", "constant-e",
    "true-mu", "true-g", "true-e", "true-r", "true-nuisance",
)


@dataclass(frozen=True)
class Misspec:
    """Post-fit nuisance replacement used by the Monte Carlo studies.

    Forced functions substitute for the corresponding fitted nuisance,
    leaving the data untouched, so the double-robustness disjunction can
    be probed one nuisance at a time.
    """

    kind: str
    c: float = 0.5

    def __post_init__(self):
        if self.kind not in MISSPEC_KINDS:
            raise ValueError(f"unknown misspecification kind {self.kind!r}")


def _hook_overrides(hook: Optional[Misspec], dgp) -> dict:
    if hook is None:
        return {}
    out = {}
    kinds = (hook.kind,)
    if hook.kind == "true-nuisance":
        kinds = ("true-mu", "true-g", "true-e", "true-r")
    for kind in kinds:
        if kind == "zero-mu":
            out["mu_override"] = lambda d, x: np.zeros(len(np.atleast_2d(x)))
        elif kind == "constant-g":
            out["g_override"] = lambda d, x, c=hook.c: np.full(len(np.atleast_2d(x)), c)
        elif kind == "constant-e":
            out["e_override"] = lambda d, x, c=hook.c: np.full(len(np.atleast_2d(x)), c)
        elif kind == "true-mu":
            out["mu_override"] = dgp.mu
        elif kind == "true-g":
            if getattr(dgp, "pi1", None) is not None or getattr(dgp, "pi_coef", None) is not None:
                out["g_override"] = dgp.g
        elif kind == "true-e":
            out["e_override"] = dgp.e
        elif kind == "true-r":
            if getattr(dgp, "q", None) is not None or getattr(dgp, "q_mean", None) is not None:
                out["r_override"] = lambda x: dgp.p_pdf(x) / dgp.q_pdf(x)
    return out


@dataclass(frozen=True)
class McConfig:
    dgp: object
    scenario: str  # "one-sample" | "two-sample"
    estimator: str = "os-eff"  # os-eff | os-ipw | os-ra | ts-eff
    n: Optional[int] = None
    m: Optional[int] = None
    l: Optional[int] = None
    reps: int = 100
    n_folds: int = 2
    beta_star: Optional[float] = None
    nuisance: NuisanceConfig = NuisanceConfig()
    hook: Optional[Misspec] = None
    seed: int = 0
    level: float = 0.95

    def __post_init__(self):
        if self.scenario not in ("one-sample", "two-sample"):
            raise ValueError("scenario must be one-sample or two-sample")
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        if self.scenario == "one-sample" and (self.n is None or self.n < 1):
            raise ValueError("one-sample studies need n >= 1")
        if self.scenario == "two-sample":
            if self.m is None or self.l is None or self.m < 1 or self.l < 1:
                raise ValueError("two-sample studies need m, l >= 1")
            if self.beta_star is None:
                raise ValueError("two-sample studies need beta_star")


@dataclass
class McReport:
    scenario: str
    estimator: str
    sizes: dict
    reps_completed: int
    mean_tau_hat: float
    tau0: float
    mc_bias: float
    mc_se_of_bias: float
    scaled_variance: float
    bound_value: Optional[float]
    coverage: float
    mean_se: float
    level: float
    seed: int
    failures: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "estimator": self.estimator,
            "sizes": self.sizes,
            "reps_completed": self.reps_completed,
            "mean_tau_hat": self.mean_tau_hat,
            "tau0": self.tau0,
            "mc_bias": self.mc_bias,
            "mc_se_of_bias": self.mc_se_of_bias,
            "scaled_variance": self.scaled_variance,
            "bound_value": self.bound_value,
            "coverage": self.coverage,
            "mean_se": self.mean_se,
            "level": self.level,
            "seed": self.seed,
            "failures": self.failures,
        }


# ---------------------------------------------------------------------------
# Replication driver
# ---------------------------------------------------------------------------

def _one_rep(config: McConfig, r: int):
    seed = config.seed + r
    overrides = _hook_overrides(config.hook, config.dgp)
    if config.scenario == "one-sample":
        data = sample_one(config.dgp, config.n, seed)
        if config.estimator == "os-eff":
            os_overrides = {k: v for k, v in overrides.items()
                            if k in ("mu_override", "g_override")}
            return estimate_os_eff(
                data, n_folds=config.n_folds, seed=seed,
                config=config.nuisance, level=config.level, **os_overrides,
            )
        if config.estimator == "os-ipw":
            g = overrides.get("g_override")
            if g is None:
                g = fit_gmodel_mle(data, basis=config.nuisance.basis,
                                   clip_eps=config.nuisance.clip_eps,
                                   opt=config.nuisance.optimizer)
            return estimate_os_ipw(data, g, level=config.level)
        if config.estimator == "os-ra":
            mu = overrides.get("mu_override")
            if mu is None:
                xl, dl, yl = data.labeled_arrays()
                mu = fit_outcome_both(
                    xl, dl, yl, basis=config.nuisance.basis,
                    ridge_lambda=config.nuisance.ridge_lambda,
                    clip_c=config.nuisance.clip_c,
                )
            return estimate_os_ra(data, mu, level=config.level)
        raise ValueError(f"estimator {config.estimator!r} not valid for one-sample")
    # two-sample
    data = sample_two(config.dgp, config.m, config.l, seed)
    if config.estimator != "ts-eff":
        raise ValueError(f"estimator {config.estimator!r} not valid for two-sample")
    ts_overrides = {k: v for k, v in overrides.items()
                    if k in ("mu_override", "e_override", "r_override")}
    return estimate_ts_eff(
        data, beta_star=config.beta_star, n_folds=config.n_folds, seed=seed,
        config=config.nuisance, level=config.level, **ts_overrides,
    )


def _rep_record(config: McConfig, r: int):
    try:
        rep = _one_rep(config, r)
        return (r, rep.tau_hat, rep.se, rep.ci[0], rep.ci[1], None)
    except SsateError as exc:
        return (r, None, None, None, None, f"{exc.code}: {exc}")


def _bound_for(config: McConfig) -> Optional[float]:
    dgp = config.dgp
    if config.scenario == "one-sample":
        if config.estimator == "os-eff":
            return oracle.bound_v_os(dgp)
        if config.estimator == "os-ipw":
            return oracle.bound_v_ipw(dgp)
        return None
    alpha = config.m / (config.m + config.l)
    return oracle.bound_v_ts(dgp, config.beta_star, alpha)


def resolve_threads(threads: Optional[int] = None) -> int:
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get("SSATE_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def run_mc(config: McConfig, threads: Optional[int] = None) -> McReport:
    """Replicated study: sample, estimate, aggregate against the oracle bound.

    Per-rep failures are recorded, not fatal; the run aborts with a partial
    report attached only when more than 5% of replications fail.
    Aggregation folds over the rep index, so the report is identical for
    any thread count.
    """
    n_threads = resolve_threads(threads)
    reps = range(1, config.reps + 1)
    if n_threads > 1:
        with ProcessPoolExecutor(max_workers=n_threads) as pool:
            records = list(pool.map(_rep_record, [config] * config.reps, reps))
    else:
        records = [_rep_record(config, r) for r in reps]
    records.sort(key=lambda rec: rec[0])

    tau0 = oracle.true_ate(config.dgp, config.beta_star if config.beta_star is not None else 1.0)
    taus, ses, covers, failures = [], [], [], []
    for r, tau, se, lo, hi, err in records:
        if err is not None:
            failures.append({"rep": r, "error": err})
        else:
            taus.append(tau)
            ses.append(se)
            covers.append(1.0 if lo <= tau0 <= hi else 0.0)
    if config.scenario == "one-sample":
        sizes = {"n": config.n}
        scale = config.n
    else:
        sizes = {"m": config.m, "l": config.l}
        scale = config.m + config.l

    taus_a = np.asarray(taus)
    report = McReport(
        scenario=config.scenario,
        estimator=config.estimator,
        sizes=sizes,
        reps_completed=len(taus),
        mean_tau_hat=float(np.mean(taus_a)) if len(taus) else float("nan"),
        tau0=tau0,
        mc_bias=float(np.mean(taus_a) - tau0) if len(taus) else float("nan"),
        mc_se_of_bias=float(np.std(taus_a) / np.sqrt(len(taus))) if len(taus) else float("nan"),
        scaled_variance=float(scale * np.var(taus_a)) if len(taus) else float("nan"),
        bound_value=_bound_for(config),
        coverage=float(np.mean(covers)) if covers else float("nan"),
        mean_se=float(np.mean(ses)) if ses else float("nan"),
        level=config.level,
        seed=config.seed,
        failures=failures,
    )
    if len(failures) > 0.05 * config.reps:
        raise ReportIncomplete(
            f"{len(failures)} of {config.reps} replications failed",
            partial_report=report,
        )
    return report


def _shrink_pi(dgp, factor: float):
    """Scale the observation probability of a discrete DGP by a factor."""
    if dgp.family != "DiscreteX":
        raise ValueError("pi-shrinking emulation implemented for discrete DGPs only")
    if dgp.pi1 is None:
        raise ValueError("one-sample study needs an observation probability")
    return replace(dgp, pi1=dgp.pi1 * factor)


def run_infinite_unlabeled_study(
    dgp,
    n_labeled: int,
    ratio: int = 100,
    reps: int = 200,
    seed: int = 0,
    scenario: str = "one-sample",
    beta_star: Optional[float] = None,
    nuisance: NuisanceConfig = NuisanceConfig(),
    n_folds: int = 2,
    level: float = 0.95,
    threads: Optional[int] = None,
) -> McReport:
    """Emulate the unlabeled-data-rich limit and compare to the reduced bound.

    Two-sample: l = ratio * m; variance normalized by m against the
    labeled-sample limit bound. One-sample: the observation probability is
    shrunk at fixed expected labeled count, and the variance is normalized
    by n times the shrink factor, whose limit matches the reduced bound of
    the unshrunk DGP.
    """
    if ratio < 10:
        raise ValueError("ratio must be >= 10 for the limit emulation")
    if scenario == "two-sample":
        if beta_star is None:
            raise ValueError("two-sample study needs beta_star")
        m = n_labeled
        config = McConfig(
            dgp=dgp, scenario="two-sample", estimator="ts-eff",
            m=m, l=ratio * m, reps=reps, n_folds=n_folds,
            beta_star=beta_star, nuisance=nuisance, seed=seed, level=level,
        )
        report = run_mc(config, threads=threads)
        n_total = m + ratio * m
        report.scaled_variance = report.scaled_variance * m / n_total
        report.bound_value = oracle.bound_v_tilde_ts(dgp, beta_star)
        return report

    # one-sample: shrink pi0 with n * E[pi_shrunk] held at n_labeled
    xp, wp = dgp.nodes_p()
    e_pi = float(np.sum(wp * dgp.pi(xp)))
    n = int(round((1 + ratio) * n_labeled))
    shrink = n_labeled / (n * e_pi)
    shrunk = _shrink_pi(dgp, shrink)
    min_g = min(float(np.min(shrunk.g(1, xp))), float(np.min(shrunk.g(0, xp))))
    # keep the clamp well below the true joint probabilities of the
    # shrunk DGP, otherwise clipping would bias the inverse weights
    clip_eps = min(nuisance.clip_eps, 0.1 * min_g)
    nuisance_adj = replace(nuisance, clip_eps=clip_eps)
    config = McConfig(
        dgp=shrunk, scenario="one-sample", estimator="os-eff",
        n=n, reps=reps, n_folds=n_folds,
        nuisance=nuisance_adj, seed=seed, level=level,
    )
    report = run_mc(config, threads=threads)
    # n * shrink = n_labeled / E_p[pi0]; its limit value normalizes the
    # variance against the fixed-labeled-count bound of the base DGP
    report.scaled_variance = report.scaled_variance * shrink
    report.bound_value = oracle.bound_v_tilde_os(dgp)
    return report
