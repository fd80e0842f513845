"""Nuisance-function estimation.

Covers ridge outcome regressions, the multinomial observation/treatment
model, binary propensity scores, classifier-based density-ratio
estimation, Riesz-representer estimation via Bregman-divergence
minimization (least-squares and KL variants), the TMLE fluctuation step
and the iterative debiasing loop that alternates weighted representer
fits with fluctuations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Tuple

import numpy as np

from .datamodel import OneSampleDataset
from .errors import (
    ClassAbsent,
    DomainViolation,
    InsufficientArmData,
    SingularSystem,
    ZeroDenominator,
)
from .optimize import OptimizerConfig, minimize_gd, minimize_newton

DEFAULT_CLIP_EPS = 0.01
DEFAULT_R_CLIP = (0.01, 100.0)


# ---------------------------------------------------------------------------
# Feature maps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BasisSpec:
    """Polynomial-in-each-coordinate feature map configuration."""

    degree: int = 1
    intercept: bool = True
    standardize: bool = False

    def __post_init__(self):
        if self.degree < 1:
            raise ValueError("degree must be >= 1")

    def fit(self, x: np.ndarray) -> "FittedBasis":
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if self.standardize:
            mean = x.mean(axis=0)
            scale = x.std(axis=0)
            scale = np.where(scale > 0, scale, 1.0)
        else:
            mean = np.zeros(x.shape[1])
            scale = np.ones(x.shape[1])
        return FittedBasis(spec=self, mean=mean, scale=scale, k=x.shape[1])


@dataclass(frozen=True)
class FittedBasis:
    """BasisSpec with standardization statistics frozen at fit time."""

    spec: BasisSpec
    mean: np.ndarray
    scale: np.ndarray
    k: int

    @property
    def dim(self) -> int:
        return int(self.spec.intercept) + self.k * self.spec.degree

    def transform(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        xs = (x - self.mean) / self.scale
        cols = []
        if self.spec.intercept:
            cols.append(np.ones(x.shape[0]))
        for t in range(1, self.spec.degree + 1):
            cols.append(xs**t if t > 1 else xs)
        if self.spec.intercept:
            return np.column_stack([cols[0]] + [c for c in cols[1:]])
        return np.column_stack(cols)


# ---------------------------------------------------------------------------
# Outcome regression
# ---------------------------------------------------------------------------

@dataclass
class OutcomeModel:
    """Per-arm ridge regression with bounded predictions.

    ``fluctuations`` holds (riesz_model, epsilon) pairs appended by the
    TMLE step; fluctuation terms are added after clipping so the score
    identity from the fluctuation remains exact.
    """

    basis: FittedBasis
    coef: dict
    ridge_lambda: float
    clip_c: float
    fluctuations: tuple = ()

    def base_predict(self, arm: int, x: np.ndarray) -> np.ndarray:
        if self.coef.get(arm) is None:
            raise InsufficientArmData(f"no fitted coefficients for arm {arm}")
        phi = self.basis.transform(x)
        return np.clip(phi @ self.coef[arm], -self.clip_c, self.clip_c)

    def predict(self, arm: int, x: np.ndarray) -> np.ndarray:
        val = self.base_predict(arm, x)
        for riesz, eps in self.fluctuations:
            val = val + eps * (riesz.a1(x) if arm == 1 else riesz.a0(x))
        return val

    def predict_rows(self, d: np.ndarray, x: np.ndarray) -> np.ndarray:
        """Arm-matched prediction, row by row."""
        return np.where(np.asarray(d) == 1, self.predict(1, x), self.predict(0, x))


def _ridge_solve(phi: np.ndarray, y: np.ndarray, lam: float) -> np.ndarray:
    p = phi.shape[1]
    if lam > 0:
        return np.linalg.solve(phi.T @ phi + lam * np.eye(p), phi.T @ y)
    coef, _, rank, _ = np.linalg.lstsq(phi, y, rcond=None)
    if rank < p:
        raise SingularSystem("design matrix is rank deficient; use ridge_lambda > 0")
    return coef


def default_clip_c(y: np.ndarray) -> float:
    return 100.0 * float(np.max(np.abs(y))) if len(y) else 1.0


def fit_outcome(
    x: np.ndarray,
    d: np.ndarray,
    y: np.ndarray,
    arm: int,
    basis: BasisSpec = BasisSpec(),
    ridge_lambda: float = 1e-6,
    clip_c: Optional[float] = None,
) -> OutcomeModel:
    """Closed-form ridge fit of E[Y | X, arm] on the rows with d == arm."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    d = np.asarray(d)
    y = np.asarray(y, dtype=float)
    fb = basis.fit(x)
    mask = d == arm
    if int(mask.sum()) < fb.dim:
        raise InsufficientArmData(
            f"arm {arm} has {int(mask.sum())} rows, need at least {fb.dim}"
        )
    coef = _ridge_solve(fb.transform(x[mask]), y[mask], ridge_lambda)
    cc = default_clip_c(y) if clip_c is None else float(clip_c)
    return OutcomeModel(basis=fb, coef={arm: coef, 1 - arm: None}, ridge_lambda=ridge_lambda, clip_c=cc)


def fit_outcome_both(
    x: np.ndarray,
    d: np.ndarray,
    y: np.ndarray,
    basis: BasisSpec = BasisSpec(),
    ridge_lambda: float = 1e-6,
    clip_c: Optional[float] = None,
) -> OutcomeModel:
    """Fit both arms with a shared feature map."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    d = np.asarray(d)
    y = np.asarray(y, dtype=float)
    fb = basis.fit(x)
    coef = {}
    for arm in (1, 0):
        mask = d == arm
        if int(mask.sum()) < fb.dim:
            raise InsufficientArmData(
                f"arm {arm} has {int(mask.sum())} rows, need at least {fb.dim}"
            )
        coef[arm] = _ridge_solve(fb.transform(x[mask]), y[mask], ridge_lambda)
    cc = default_clip_c(y) if clip_c is None else float(clip_c)
    return OutcomeModel(basis=fb, coef=coef, ridge_lambda=ridge_lambda, clip_c=cc)


# ---------------------------------------------------------------------------
# Observation/treatment probability models
# ---------------------------------------------------------------------------

def _softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


@dataclass
class GModel:
    """Multinomial model of the 3 outcomes (o=1,d=1), (o=1,d=0), (o=0)."""

    basis: FittedBasis
    weights: np.ndarray  # (3, p); last row pinned at zero
    clip_eps: float
    converged: bool = True

    def class_probs(self, x: np.ndarray) -> np.ndarray:
        phi = self.basis.transform(x)
        return _softmax(phi @ self.weights.T)

    def g(self, d: int, x: np.ndarray) -> np.ndarray:
        raw = self.class_probs(x)[:, 0 if d == 1 else 1]
        return np.clip(raw, self.clip_eps, 1.0 - self.clip_eps)

    def pi1(self, x: np.ndarray) -> np.ndarray:
        raw = 1.0 - self.class_probs(x)[:, 2]
        return np.clip(raw, self.clip_eps, 1.0 - self.clip_eps)


def fit_gmodel_mle(
    data: OneSampleDataset,
    basis: BasisSpec = BasisSpec(),
    clip_eps: float = DEFAULT_CLIP_EPS,
    opt: OptimizerConfig = OptimizerConfig(),
) -> GModel:
    """Full-batch multinomial maximum likelihood for the joint class label."""
    labels = np.where(data.o == 0, 2, np.where(data.d == 1, 0, 1))
    counts = np.bincount(labels, minlength=3)
    if np.any(counts == 0):
        missing = [("(o=1,d=1)", "(o=1,d=0)", "(o=0)")[c] for c in range(3) if counts[c] == 0]
        raise ClassAbsent(f"class(es) {', '.join(missing)} absent from the sample")
    fb = basis.fit(data.x)
    phi = fb.transform(data.x)
    n, p = phi.shape
    onehot = np.zeros((n, 3))
    onehot[np.arange(n), labels] = 1.0

    def nll_grad_hess(w_free: np.ndarray):
        w = np.vstack([w_free.reshape(2, p), np.zeros(p)])
        logits = phi @ w.T
        probs = _softmax(logits)
        ll = np.sum(np.log(probs[np.arange(n), labels]))
        resid = probs[:, :2] - onehot[:, :2]  # (n, 2)
        grad = (resid.T @ phi).ravel() / n
        # block Hessian of the multinomial NLL for the two free classes
        hess = np.empty((2 * p, 2 * p))
        for a in range(2):
            for b in range(2):
                wgt = probs[:, a] * ((a == b) - probs[:, b])
                hess[a * p:(a + 1) * p, b * p:(b + 1) * p] = (phi * wgt[:, None]).T @ phi / n
        return -ll / n, grad, hess

    res = minimize_newton(nll_grad_hess, np.zeros(2 * p), opt)
    weights = np.vstack([res.x.reshape(2, p), np.zeros(p)])
    model = GModel(basis=fb, weights=weights, clip_eps=clip_eps, converged=res.converged)
    return model


@dataclass
class EModel:
    """Binary logistic propensity model for P(D = 1 | X)."""

    basis: FittedBasis
    weights: np.ndarray
    clip_eps: float
    converged: bool = True

    def e(self, d: int, x: np.ndarray) -> np.ndarray:
        phi = self.basis.transform(x)
        p1 = 1.0 / (1.0 + np.exp(-(phi @ self.weights)))
        p1 = np.clip(p1, self.clip_eps, 1.0 - self.clip_eps)
        return p1 if d == 1 else 1.0 - p1


def _fit_logistic(
    phi: np.ndarray, target: np.ndarray, opt: OptimizerConfig
) -> Tuple[np.ndarray, bool]:
    n, p = phi.shape

    def nll_grad_hess(w: np.ndarray):
        eta = phi @ w
        # log(1 + exp(eta)) computed stably
        ll = np.sum(target * eta - np.logaddexp(0.0, eta))
        prob = 1.0 / (1.0 + np.exp(-eta))
        grad = phi.T @ (prob - target) / n
        wgt = prob * (1.0 - prob)
        hess = (phi * wgt[:, None]).T @ phi / n
        return -ll / n, grad, hess

    res = minimize_newton(nll_grad_hess, np.zeros(p), opt)
    return res.x, res.converged


def fit_e_model(
    x: np.ndarray,
    d: np.ndarray,
    basis: BasisSpec = BasisSpec(),
    clip_eps: float = DEFAULT_CLIP_EPS,
    opt: OptimizerConfig = OptimizerConfig(),
) -> EModel:
    x = np.atleast_2d(np.asarray(x, dtype=float))
    d = np.asarray(d)
    if not (np.any(d == 1) and np.any(d == 0)):
        raise ClassAbsent("both treatment arms must be present")
    fb = basis.fit(x)
    weights, converged = _fit_logistic(fb.transform(x), (d == 1).astype(float), opt)
    return EModel(basis=fb, weights=weights, clip_eps=clip_eps, converged=converged)


@dataclass
class DensityRatioModel:
    """Classifier-based estimate of p(x)/q(x) with prior correction l/m."""

    basis: FittedBasis
    weights: np.ndarray
    prior_correction: float  # l / m
    clip: Tuple[float, float]
    converged: bool = True

    def ratio(self, x: np.ndarray) -> np.ndarray:
        phi = self.basis.transform(x)
        odds = np.exp(phi @ self.weights)  # P(labeled|x) / P(unlabeled|x)
        return np.clip(odds * self.prior_correction, self.clip[0], self.clip[1])


def fit_density_ratio(
    labeled_x: np.ndarray,
    unlabeled_z: np.ndarray,
    basis: BasisSpec = BasisSpec(),
    clip: Tuple[float, float] = DEFAULT_R_CLIP,
    opt: OptimizerConfig = OptimizerConfig(),
) -> DensityRatioModel:
    labeled_x = np.atleast_2d(np.asarray(labeled_x, dtype=float))
    unlabeled_z = np.atleast_2d(np.asarray(unlabeled_z, dtype=float))
    pooled = np.vstack([labeled_x, unlabeled_z])
    source = np.concatenate([np.ones(len(labeled_x)), np.zeros(len(unlabeled_z))])
    fb = basis.fit(pooled)
    weights, converged = _fit_logistic(fb.transform(pooled), source, opt)
    return DensityRatioModel(
        basis=fb,
        weights=weights,
        prior_correction=len(unlabeled_z) / len(labeled_x),
        clip=clip,
        converged=converged,
    )


# ---------------------------------------------------------------------------
# Riesz representer estimation
# ---------------------------------------------------------------------------

def _f_lsif(a):
    return (np.asarray(a, dtype=float) - 1.0) ** 2


def _df_lsif(a):
    return 2.0 * (np.asarray(a, dtype=float) - 1.0)


def _f_ukl(a):
    a = np.abs(np.asarray(a, dtype=float))
    return (a - 1.0) * np.log(a - 1.0) + a


def _df_ukl(a):
    a = np.asarray(a, dtype=float)
    return np.sign(a) * (np.log(np.abs(a) - 1.0) + 2.0)


@dataclass(frozen=True)
class BregmanGenerator:
    """Convex generator of the divergence used for representer fitting."""

    tag: str  # "LSIF" or "UKL"
    f: Callable[[np.ndarray], np.ndarray]
    df: Callable[[np.ndarray], np.ndarray]


LSIF = BregmanGenerator("LSIF", _f_lsif, _df_lsif)
UKL = BregmanGenerator("UKL", _f_ukl, _df_ukl)

_GENERATORS = {"LSIF": LSIF, "UKL": UKL}


def generator(tag: str) -> BregmanGenerator:
    try:
        return _GENERATORS[tag.upper()]
    except KeyError:
        raise ValueError(f"unknown generator {tag!r}; expected LSIF or UKL") from None


@dataclass
class RieszModel:
    """Fitted representer; zero on unlabeled rows, arm-specific otherwise.

    LSIF uses linear per-arm functions; UKL uses a link that keeps
    a1 > 1 and a0 < -1 everywhere.
    """

    generator: BregmanGenerator
    basis: FittedBasis
    theta1: np.ndarray
    theta0: np.ndarray
    loss: float = math.nan
    converged: bool = True

    def a1(self, x: np.ndarray) -> np.ndarray:
        u = self.basis.transform(x) @ self.theta1
        return u if self.generator.tag == "LSIF" else 1.0 + np.exp(u)

    def a0(self, x: np.ndarray) -> np.ndarray:
        u = self.basis.transform(x) @ self.theta0
        return u if self.generator.tag == "LSIF" else -1.0 - np.exp(u)

    def alpha(self, o: np.ndarray, d: np.ndarray, x: np.ndarray) -> np.ndarray:
        o = np.asarray(o)
        d = np.asarray(d)
        out = np.where(d == 1, self.a1(x), self.a0(x))
        return np.where(o == 1, out, 0.0)


def _riesz_weights(
    data: OneSampleDataset, residuals: Optional[np.ndarray]
) -> Tuple[np.ndarray, np.ndarray]:
    """Per-row weights for the labeled term and the representer-moment term.

    Labeled rows are weighted by their squared residual in both terms;
    unlabeled rows (which carry no residual) receive the mean labeled
    squared residual in the moment term, so unit residuals reproduce the
    unweighted objective and a common positive rescaling leaves the
    minimizer unchanged.
    """
    n = data.n
    if residuals is None:
        return np.ones(n), np.ones(n)
    residuals = np.asarray(residuals, dtype=float)
    lab = data.labeled_mask
    if len(residuals) != int(lab.sum()):
        raise ValueError("residuals must be supplied for all labeled rows")
    w_lab = np.zeros(n)
    w_lab[lab] = residuals**2
    w_mom = np.full(n, float(np.mean(residuals**2)))
    w_mom[lab] = residuals**2
    return w_lab, w_mom


def _riesz_objective_factory(
    data: OneSampleDataset,
    gen: BregmanGenerator,
    fb: FittedBasis,
    residuals: Optional[np.ndarray] = None,
):
    """Build theta -> (loss, grad) for the empirical divergence objective.

    The loss is the expanded per-generator form (see ``riesz_loss``);
    additive constants relative to the generic f-based form do not
    affect the gradient.
    """
    phi = fb.transform(data.x)
    n, p = phi.shape
    m1 = (data.o == 1) & (data.d == 1)
    m0 = (data.o == 1) & (data.d == 0)
    w_lab, w_mom = _riesz_weights(data, residuals)
    phi_m1 = phi[m1] * w_lab[m1, None]
    phi_m0 = phi[m0] * w_lab[m0, None]
    mom = (w_mom[:, None] * phi).sum(axis=0)

    if gen.tag == "LSIF":

        def fun_grad(theta: np.ndarray):
            t1, t0 = theta[:p], theta[p:]
            u1 = phi[m1] @ t1
            u0 = phi[m0] @ t0
            a1_all = phi @ t1
            a0_all = phi @ t0
            loss = (
                np.sum(w_lab[m1] * u1**2)
                + np.sum(w_lab[m0] * u0**2)
                - 2.0 * np.sum(w_mom * (a1_all - a0_all))
            ) / n
            g1 = (2.0 * (phi_m1.T @ u1) - 2.0 * mom) / n
            g0 = (2.0 * (phi_m0.T @ u0) + 2.0 * mom) / n
            return loss, np.concatenate([g1, g0])

    elif gen.tag == "UKL":

        def fun_grad(theta: np.ndarray):
            t1, t0 = theta[:p], theta[p:]
            u1 = phi[m1] @ t1
            u0 = phi[m0] @ t0
            v1_all = phi @ t1
            v0_all = phi @ t0
            loss = (
                np.sum(w_lab[m1] * (u1 + 1.0 + np.exp(u1)))
                + np.sum(w_lab[m0] * (u0 + 1.0 + np.exp(u0)))
                - np.sum(w_mom * (v1_all + v0_all))
            ) / n
            g1 = (phi_m1.T @ (1.0 + np.exp(u1)) - mom) / n
            g0 = (phi_m0.T @ (1.0 + np.exp(u0)) - mom) / n
            return loss, np.concatenate([g1, g0])

    else:  # pragma: no cover
        raise ValueError(f"unknown generator {gen.tag!r}")

    return fun_grad, p


def riesz_loss(
    model: RieszModel,
    data: OneSampleDataset,
    residuals: Optional[np.ndarray] = None,
) -> float:
    """Empirical divergence objective at the model's parameters.

    LSIF: mean of -2(a1 - a0) over all rows plus the labeled mean of
    alpha^2. UKL: labeled mean of log(|alpha| - 1) + |alpha| minus the
    all-row mean of log(a1 - 1) + log(-a0 - 1). The representer-moment
    term is averaged over all rows, labeled and unlabeled alike.
    """
    if model.generator.tag == "UKL":
        a1 = model.a1(data.x)
        a0 = model.a0(data.x)
        if np.any(a1 <= 1.0) or np.any(a0 >= -1.0):
            raise DomainViolation("UKL representer must satisfy a1 > 1 and a0 < -1")
    fun_grad, p = _riesz_objective_factory(data, model.generator, model.basis, residuals)
    loss, _ = fun_grad(np.concatenate([model.theta1, model.theta0]))
    return float(loss)


def riesz_loss_grad(
    model: RieszModel,
    data: OneSampleDataset,
    residuals: Optional[np.ndarray] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """Analytic gradient of ``riesz_loss`` in (theta1, theta0)."""
    fun_grad, p = _riesz_objective_factory(data, model.generator, model.basis, residuals)
    _, grad = fun_grad(np.concatenate([model.theta1, model.theta0]))
    return grad[:p], grad[p:]


def fit_riesz(
    data: OneSampleDataset,
    gen: BregmanGenerator = LSIF,
    basis: BasisSpec = BasisSpec(),
    opt: OptimizerConfig = OptimizerConfig(),
) -> RieszModel:
    """Minimize the empirical divergence by gradient descent with backtracking."""
    if data.n_labeled < 1:
        raise InsufficientArmData("representer fitting needs at least one labeled row")
    fb = basis.fit(data.x)
    fun_grad, p = _riesz_objective_factory(data, gen, fb)
    res = minimize_gd(fun_grad, np.zeros(2 * p), opt)
    return RieszModel(
        generator=gen,
        basis=fb,
        theta1=res.x[:p],
        theta0=res.x[p:],
        loss=res.loss,
        converged=res.converged,
    )


def fit_weighted_riesz(
    data: OneSampleDataset,
    residuals: np.ndarray,
    gen: BregmanGenerator = LSIF,
    basis: BasisSpec = BasisSpec(),
    opt: OptimizerConfig = OptimizerConfig(),
) -> RieszModel:
    """Residual-weighted representer fit; residuals follow labeled row order."""
    if data.n_labeled < 1:
        raise InsufficientArmData("representer fitting needs at least one labeled row")
    fb = basis.fit(data.x)
    fun_grad, p = _riesz_objective_factory(data, gen, fb, residuals)
    res = minimize_gd(fun_grad, np.zeros(2 * p), opt)
    return RieszModel(
        generator=gen,
        basis=fb,
        theta1=res.x[:p],
        theta0=res.x[p:],
        loss=res.loss,
        converged=res.converged,
    )


# ---------------------------------------------------------------------------
# TMLE fluctuation and the iterative debiasing loop
# ---------------------------------------------------------------------------

def tmle_fluctuate(
    mu_model: OutcomeModel,
    alpha_model: RieszModel,
    x: np.ndarray,
    d: np.ndarray,
    y: np.ndarray,
) -> OutcomeModel:
    """One-dimensional update of mu along alpha zeroing the score residual.

    Returns a model whose arm-matched residuals are exactly orthogonal to
    alpha on the supplied labeled rows.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    d = np.asarray(d)
    y = np.asarray(y, dtype=float)
    av = np.where(d == 1, alpha_model.a1(x), alpha_model.a0(x))
    denom = float(np.sum(av**2))
    if denom == 0.0:
        raise ZeroDenominator("representer vanishes on every labeled row")
    res = y - mu_model.predict_rows(d, x)
    eps = float(np.sum(av * res)) / denom
    return replace(mu_model, fluctuations=mu_model.fluctuations + ((alpha_model, eps),))


def ddml_iterate(
    data: OneSampleDataset,
    n_steps: int,
    gen: BregmanGenerator = LSIF,
    basis: BasisSpec = BasisSpec(),
    opt: OptimizerConfig = OptimizerConfig(),
    ridge_lambda: float = 1e-6,
    clip_c: Optional[float] = None,
) -> Tuple[OutcomeModel, RieszModel, list]:
    """Alternate weighted representer fits with TMLE fluctuations.

    Returns the final outcome and representer models plus the per-step
    magnitude of the empirical score residual |sum alpha * (y - mu)| / n.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    xl, dl, yl = data.labeled_arrays()
    mu = fit_outcome_both(xl, dl, yl, basis=basis, ridge_lambda=ridge_lambda, clip_c=clip_c)
    alpha = None
    trace = []
    for _ in range(n_steps):
        res = yl - mu.predict_rows(dl, xl)
        alpha = fit_weighted_riesz(data, res, gen=gen, basis=basis, opt=opt)
        mu = tmle_fluctuate(mu, alpha, xl, dl, yl)
        av = np.where(dl == 1, alpha.a1(xl), alpha.a0(xl))
        score = float(np.sum(av * (yl - mu.predict_rows(dl, xl)))) / data.n
        trace.append(abs(score))
    return mu, alpha, trace


# ---------------------------------------------------------------------------
# Two-sample weighting denominator
# ---------------------------------------------------------------------------

@dataclass
class VBeta:
    """Evaluable v(d, x) = e(d|x) / (beta + (1 - beta) / r(x))."""

    e_fn: Callable[[int, np.ndarray], np.ndarray]
    r_fn: Callable[[np.ndarray], np.ndarray]
    beta: float

    def __call__(self, d: int, x: np.ndarray) -> np.ndarray:
        return self.e_fn(d, x) / (self.beta + (1.0 - self.beta) / self.r_fn(x))


def assemble_v_beta(e_model, r_model, beta: float) -> VBeta:
    """Compose propensity and density-ratio models into v_beta.

    Accepts fitted models or plain callables (e(d, x) and r(x)).
    """
    if not 0.0 <= beta <= 1.0:
        raise ValueError("beta must lie in [0, 1]")
    e_fn = e_model.e if isinstance(e_model, EModel) else e_model
    r_fn = r_model.ratio if isinstance(r_model, DensityRatioModel) else r_model
    return VBeta(e_fn=e_fn, r_fn=r_fn, beta=float(beta))
