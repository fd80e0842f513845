"""Population-level oracles for fully specified synthetic DGPs.

Every efficiency bound is evaluated exactly: by finite sums for
discrete-covariate DGPs and by tensor-product Gauss-Hermite quadrature
(64 nodes per dimension) for Gaussian-covariate DGPs, so oracle values
carry no Monte Carlo noise.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from .errors import BadAlpha, DomainViolation, GridExcludesMinimum
from .nuisance import BregmanGenerator

_GH_NODES = 64


def _check_prob(name: str, p: np.ndarray):
    if np.any(p <= 0.0) or np.any(p >= 1.0):
        raise DomainViolation(
            f"{name} must lie strictly inside (0, 1) on the support "
            "(common-support assumption)"
        )


# ---------------------------------------------------------------------------
# DGP families
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DiscreteXDgp:
    """Finite-support covariate DGP with tabulated nuisances.

    ``q`` is the unlabeled covariate law of the two-sample scenario;
    ``pi1`` is the observation probability of the one-sample scenario.
    Either may be None when the corresponding scenario is not used.
    """

    xs: np.ndarray        # (S, k) support points
    p: np.ndarray         # (S,) masses of p0
    e1: np.ndarray        # (S,) P(D=1 | X)
    mu1: np.ndarray       # (S,)
    mu0: np.ndarray       # (S,)
    s2_1: np.ndarray      # (S,)
    s2_0: np.ndarray      # (S,)
    pi1: Optional[np.ndarray] = None   # (S,) P(O=1 | X)
    q: Optional[np.ndarray] = None     # (S,) masses of q0

    family = "DiscreteX"

    def __post_init__(self):
        xs = np.atleast_2d(np.asarray(self.xs, dtype=float))
        object.__setattr__(self, "xs", xs)
        for name in ("p", "e1", "mu1", "mu0", "s2_1", "s2_0", "pi1", "q"):
            v = getattr(self, name)
            if v is not None:
                object.__setattr__(self, name, np.asarray(v, dtype=float))
        if abs(float(np.sum(self.p)) - 1.0) > 1e-9:
            raise DomainViolation("p masses must sum to 1")
        if self.q is not None and abs(float(np.sum(self.q)) - 1.0) > 1e-9:
            raise DomainViolation("q masses must sum to 1")
        if np.any(self.p <= 0.0):
            raise DomainViolation("p masses must be positive")
        _check_prob("e0(1|x)", self.e1)
        if self.pi1 is not None:
            _check_prob("pi0(1|x)", self.pi1)
        if np.any(self.s2_1 <= 0.0) or np.any(self.s2_0 <= 0.0):
            raise DomainViolation("conditional variances must be positive")

    @property
    def k(self) -> int:
        return self.xs.shape[1]

    def _lookup(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        out = np.full(len(x), -1, dtype=int)
        for s in range(self.xs.shape[0]):
            out[np.all(x == self.xs[s], axis=1)] = s
        if np.any(out < 0):
            bad = x[out < 0][0]
            raise DomainViolation(f"covariate {bad} is not a support point of the DGP")
        return out

    def nodes_p(self) -> Tuple[np.ndarray, np.ndarray]:
        return self.xs, self.p

    def nodes_q(self) -> Tuple[np.ndarray, np.ndarray]:
        if self.q is None:
            raise DomainViolation("DGP has no unlabeled covariate law q0")
        return self.xs, self.q

    def p_pdf(self, x: np.ndarray) -> np.ndarray:
        return self.p[self._lookup(x)]

    def q_pdf(self, x: np.ndarray) -> np.ndarray:
        if self.q is None:
            raise DomainViolation("DGP has no unlabeled covariate law q0")
        return self.q[self._lookup(x)]

    def mu(self, d: int, x: np.ndarray) -> np.ndarray:
        return (self.mu1 if d == 1 else self.mu0)[self._lookup(x)]

    def sigma2(self, d: int, x: np.ndarray) -> np.ndarray:
        return (self.s2_1 if d == 1 else self.s2_0)[self._lookup(x)]

    def e(self, d: int, x: np.ndarray) -> np.ndarray:
        e1 = self.e1[self._lookup(x)]
        return e1 if d == 1 else 1.0 - e1

    def pi(self, x: np.ndarray) -> np.ndarray:
        if self.pi1 is None:
            raise DomainViolation("DGP has no observation probability pi0")
        return self.pi1[self._lookup(x)]

    def g(self, d: int, x: np.ndarray) -> np.ndarray:
        return self.pi(x) * self.e(d, x)

    def sample_x(self, rng: np.random.Generator, n: int, law: str = "p") -> np.ndarray:
        masses = self.p if law == "p" else self.q
        if masses is None:
            raise DomainViolation("DGP has no unlabeled covariate law q0")
        return self.xs[rng.choice(len(masses), size=n, p=masses)]


@dataclass(frozen=True)
class GaussianLinearDgp:
    """Gaussian covariates (diagonal covariance), linear outcome means,
    constant conditional variances, logistic observation/treatment models.
    Coefficient vectors are intercept-first of length k + 1.
    """

    p_mean: np.ndarray
    p_var: np.ndarray
    mu1_coef: np.ndarray
    mu0_coef: np.ndarray
    s2_1: float
    s2_0: float
    e_coef: np.ndarray
    pi_coef: Optional[np.ndarray] = None
    q_mean: Optional[np.ndarray] = None
    q_var: Optional[np.ndarray] = None

    family = "GaussianLinear"

    def __post_init__(self):
        for name in ("p_mean", "p_var", "mu1_coef", "mu0_coef", "e_coef",
                     "pi_coef", "q_mean", "q_var"):
            v = getattr(self, name)
            if v is not None:
                object.__setattr__(self, name, np.asarray(v, dtype=float))
        if self.k > 3:
            raise DomainViolation("quadrature supports covariate dimension <= 3")
        if np.any(self.p_var <= 0.0):
            raise DomainViolation("covariate variances must be positive")
        if (self.q_mean is None) != (self.q_var is None):
            raise DomainViolation("q_mean and q_var must be given together")
        if self.q_var is not None and np.any(self.q_var <= 0.0):
            raise DomainViolation("covariate variances must be positive")
        if self.s2_1 <= 0.0 or self.s2_0 <= 0.0:
            raise DomainViolation("conditional variances must be positive")

    @property
    def k(self) -> int:
        return len(self.p_mean)

    def _aug(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return np.column_stack([np.ones(len(x)), x])

    def _nodes(self, mean: np.ndarray, var: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        t, w = np.polynomial.hermite.hermgauss(_GH_NODES)
        grids, wgts = [], []
        for j in range(self.k):
            grids.append(mean[j] + np.sqrt(2.0 * var[j]) * t)
            wgts.append(w / np.sqrt(np.pi))
        mesh = np.meshgrid(*grids, indexing="ij")
        pts = np.column_stack([m.ravel() for m in mesh])
        wmesh = np.meshgrid(*wgts, indexing="ij")
        weights = np.ones(pts.shape[0])
        for wm in wmesh:
            weights = weights * wm.ravel()
        return pts, weights

    def nodes_p(self) -> Tuple[np.ndarray, np.ndarray]:
        return self._nodes(self.p_mean, self.p_var)

    def nodes_q(self) -> Tuple[np.ndarray, np.ndarray]:
        if self.q_mean is None:
            raise DomainViolation("DGP has no unlabeled covariate law q0")
        return self._nodes(self.q_mean, self.q_var)

    def _normal_pdf(self, x, mean, var):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        z = (x - mean) ** 2 / var
        return np.exp(-0.5 * z.sum(axis=1)) / np.sqrt(np.prod(2.0 * np.pi * var))

    def p_pdf(self, x: np.ndarray) -> np.ndarray:
        return self._normal_pdf(x, self.p_mean, self.p_var)

    def q_pdf(self, x: np.ndarray) -> np.ndarray:
        if self.q_mean is None:
            raise DomainViolation("DGP has no unlabeled covariate law q0")
        return self._normal_pdf(x, self.q_mean, self.q_var)

    def mu(self, d: int, x: np.ndarray) -> np.ndarray:
        return self._aug(x) @ (self.mu1_coef if d == 1 else self.mu0_coef)

    def sigma2(self, d: int, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return np.full(len(x), self.s2_1 if d == 1 else self.s2_0)

    def e(self, d: int, x: np.ndarray) -> np.ndarray:
        e1 = 1.0 / (1.0 + np.exp(-(self._aug(x) @ self.e_coef)))
        return e1 if d == 1 else 1.0 - e1

    def pi(self, x: np.ndarray) -> np.ndarray:
        if self.pi_coef is None:
            raise DomainViolation("DGP has no observation probability pi0")
        return 1.0 / (1.0 + np.exp(-(self._aug(x) @ self.pi_coef)))

    def g(self, d: int, x: np.ndarray) -> np.ndarray:
        return self.pi(x) * self.e(d, x)

    def sample_x(self, rng: np.random.Generator, n: int, law: str = "p") -> np.ndarray:
        if law == "p":
            mean, var = self.p_mean, self.p_var
        else:
            if self.q_mean is None:
                raise DomainViolation("DGP has no unlabeled covariate law q0")
            mean, var = self.q_mean, self.q_var
        return mean + rng.standard_normal((n, self.k)) * np.sqrt(var)


def dgp_d1() -> DiscreteXDgp:
    """Binary equiprobable covariate; pi0 = e0 = 1/2 so g0 = 1/4;
    mu0(1, x) = x, mu0(0, x) = 0; unit conditional variances."""
    return DiscreteXDgp(
        xs=np.array([[0.0], [1.0]]),
        p=np.array([0.5, 0.5]),
        pi1=np.array([0.5, 0.5]),
        e1=np.array([0.5, 0.5]),
        mu1=np.array([0.0, 1.0]),
        mu0=np.array([0.0, 0.0]),
        s2_1=np.array([1.0, 1.0]),
        s2_0=np.array([1.0, 1.0]),
        q=np.array([0.5, 0.5]),
    )


def dgp_d2() -> DiscreteXDgp:
    """Two-sample counterpart of dgp_d1: q0 = p0, e0 = 1/2."""
    return dgp_d1()


# ---------------------------------------------------------------------------
# Bounds
# ---------------------------------------------------------------------------

@dataclass
class BoundReport:
    tau0: float
    v_os: Optional[float] = None
    v_tilde_os: Optional[float] = None
    v_ipw: Optional[float] = None
    v_hahn: Optional[float] = None
    v_ts: Optional[Dict[float, float]] = None
    v_tilde_ts: Optional[float] = None
    beta_star: Optional[float] = None


def true_ate(dgp, beta: float = 1.0) -> float:
    """ATE under the evaluation density beta * p0 + (1 - beta) * q0."""
    xp, wp = dgp.nodes_p()
    tau_p = float(np.sum(wp * (dgp.mu(1, xp) - dgp.mu(0, xp))))
    if beta == 1.0:
        return tau_p
    xq, wq = dgp.nodes_q()
    tau_q = float(np.sum(wq * (dgp.mu(1, xq) - dgp.mu(0, xq))))
    return beta * tau_p + (1.0 - beta) * tau_q


def _het_term(dgp, nodes, tau0: float) -> float:
    x, w = nodes
    tau_x = dgp.mu(1, x) - dgp.mu(0, x)
    return float(np.sum(w * (tau_x - tau0) ** 2))


def bound_v_os(dgp) -> float:
    x, w = dgp.nodes_p()
    tau0 = true_ate(dgp)
    core = dgp.sigma2(1, x) / dgp.g(1, x) + dgp.sigma2(0, x) / dgp.g(0, x)
    return float(np.sum(w * core)) + _het_term(dgp, (x, w), tau0)


def bound_v_tilde_os(dgp) -> float:
    x, w = dgp.nodes_p()
    core = dgp.sigma2(1, x) / dgp.g(1, x) + dgp.sigma2(0, x) / dgp.g(0, x)
    return float(np.sum(w * core))


def bound_v_ipw(dgp) -> float:
    x, w = dgp.nodes_p()
    ey2_1 = dgp.sigma2(1, x) + dgp.mu(1, x) ** 2
    ey2_0 = dgp.sigma2(0, x) + dgp.mu(0, x) ** 2
    return float(np.sum(w * (ey2_1 / dgp.g(1, x) + ey2_0 / dgp.g(0, x))))


def bound_v_hahn(dgp) -> float:
    """Fully labeled efficiency bound: pi0 treated as identically 1."""
    x, w = dgp.nodes_p()
    tau0 = true_ate(dgp)
    core = dgp.sigma2(1, x) / dgp.e(1, x) + dgp.sigma2(0, x) / dgp.e(0, x)
    return float(np.sum(w * core)) + _het_term(dgp, (x, w), tau0)


def bound_v_tilde_ts(dgp, beta: float) -> float:
    xp, wp = dgp.nodes_p()
    kappa = beta * dgp.p_pdf(xp) + (1.0 - beta) * dgp.q_pdf(xp)
    core = dgp.sigma2(1, xp) / dgp.e(1, xp) + dgp.sigma2(0, xp) / dgp.e(0, xp)
    return float(np.sum(wp * core * (kappa / dgp.p_pdf(xp)) ** 2))


def bound_v_ts(dgp, beta: float, alpha: float) -> float:
    if not 0.0 < alpha < 1.0:
        raise BadAlpha("labeled fraction alpha must lie in (0, 1)")
    tau0 = true_ate(dgp, beta)
    first = bound_v_tilde_ts(dgp, beta) / alpha
    het_p = _het_term(dgp, dgp.nodes_p(), tau0)
    het_q = _het_term(dgp, dgp.nodes_q(), tau0)
    return first + (beta**2 / alpha) * het_p + ((1.0 - beta) ** 2 / (1.0 - alpha)) * het_q


def beta_star(dgp, alpha: float, grid_step: float = 0.01) -> float:
    """Grid argmin of the two-sample bound over beta; ties go to smaller beta."""
    if grid_step <= 0.0:
        raise ValueError("grid_step must be positive")
    n_steps = int(round(1.0 / grid_step))
    grid = np.linspace(0.0, 1.0, n_steps + 1)
    values = np.array([bound_v_ts(dgp, float(b), alpha) for b in grid])
    return float(grid[int(np.argmin(values))])


def oracle_bounds(dgp, alpha: Optional[float] = None, grid_step: float = 0.01) -> BoundReport:
    """All bounds the DGP supports, in one report."""
    report = BoundReport(tau0=true_ate(dgp))
    one_sample = getattr(dgp, "pi1", None) is not None or getattr(dgp, "pi_coef", None) is not None
    two_sample = getattr(dgp, "q", None) is not None or getattr(dgp, "q_mean", None) is not None
    if one_sample:
        report.v_os = bound_v_os(dgp)
        report.v_tilde_os = bound_v_tilde_os(dgp)
        report.v_ipw = bound_v_ipw(dgp)
    report.v_hahn = bound_v_hahn(dgp)
    if two_sample and alpha is not None:
        bs = beta_star(dgp, alpha, grid_step)
        report.beta_star = bs
        report.v_ts = {b: bound_v_ts(dgp, b, alpha) for b in (0.0, 0.5, bs, 1.0)}
        report.v_tilde_ts = bound_v_tilde_ts(dgp, bs)
    return report


# ---------------------------------------------------------------------------
# Brute-force representer oracle
# ---------------------------------------------------------------------------

def brute_force_riesz(
    dgp: DiscreteXDgp,
    gen: BregmanGenerator,
    grid_lo: float = -8.0,
    grid_hi: float = 8.0,
    grid_step: float = 0.01,
) -> Tuple[np.ndarray, np.ndarray]:
    """Exhaustive per-cell minimization of the population divergence objective.

    The objective separates across support cells and across arms, so each
    cell's (a1, a0) is an independent one-dimensional grid argmin of the
    exact population expectation. Returns arrays (a1_star, a0_star) over
    the support order of the DGP.
    """
    if dgp.family != "DiscreteX":
        raise DomainViolation("brute-force oracle requires a discrete-covariate DGP")
    n_steps = int(round((grid_hi - grid_lo) / grid_step))
    grid = np.linspace(grid_lo, grid_hi, n_steps + 1)
    x = dgp.xs
    g1 = dgp.g(1, x)
    g0 = dgp.g(0, x)
    s = len(g1)
    a1_star = np.empty(s)
    a0_star = np.empty(s)
    for c in range(s):
        if gen.tag == "LSIF":
            obj1 = g1[c] * grid**2 - 2.0 * grid
            obj0 = g0[c] * grid**2 + 2.0 * grid
        elif gen.tag == "UKL":
            obj1 = np.where(grid > 1.0,
                            g1[c] * (np.log(np.maximum(grid - 1.0, 1e-300)) + grid)
                            - np.log(np.maximum(grid - 1.0, 1e-300)),
                            np.inf)
            obj0 = np.where(grid < -1.0,
                            g0[c] * (np.log(np.maximum(-grid - 1.0, 1e-300)) - grid)
                            - np.log(np.maximum(-grid - 1.0, 1e-300)),
                            np.inf)
        else:
            raise ValueError(f"unknown generator {gen.tag!r}")
        for obj, out in ((obj1, a1_star), (obj0, a0_star)):
            finite = np.isfinite(obj)
            idx = int(np.argmin(np.where(finite, obj, np.inf)))
            fin_idx = np.nonzero(finite)[0]
            if idx == fin_idx[0] or idx == fin_idx[-1]:
                raise GridExcludesMinimum(
                    f"grid argmin {grid[idx]:g} lies on the grid boundary; widen the grid"
                )
            out[c] = grid[idx]
    return a1_star, a0_star


# ---------------------------------------------------------------------------
# Serialization (CLI spec files)
# ---------------------------------------------------------------------------

def dgp_to_dict(dgp) -> dict:
    if dgp.family == "DiscreteX":
        out = {
            "family": "DiscreteX",
            "xs": dgp.xs.tolist(),
            "p": dgp.p.tolist(),
            "e1": dgp.e1.tolist(),
            "mu1": dgp.mu1.tolist(),
            "mu0": dgp.mu0.tolist(),
            "s2_1": dgp.s2_1.tolist(),
            "s2_0": dgp.s2_0.tolist(),
        }
        if dgp.pi1 is not None:
            out["pi1"] = dgp.pi1.tolist()
        if dgp.q is not None:
            out["q"] = dgp.q.tolist()
        return out
    out = {
        "family": "GaussianLinear",
        "p_mean": dgp.p_mean.tolist(),
        "p_var": dgp.p_var.tolist(),
        "mu1_coef": dgp.mu1_coef.tolist(),
        "mu0_coef": dgp.mu0_coef.tolist(),
        "s2_1": dgp.s2_1,
        "s2_0": dgp.s2_0,
        "e_coef": dgp.e_coef.tolist(),
    }
    if dgp.pi_coef is not None:
        out["pi_coef"] = dgp.pi_coef.tolist()
    if dgp.q_mean is not None:
        out["q_mean"] = dgp.q_mean.tolist()
        out["q_var"] = dgp.q_var.tolist()
    return out


def dgp_from_dict(spec: dict):
    family = spec.get("family")
    fields = {k: v for k, v in spec.items() if k != "family"}
    if family == "DiscreteX":
        return DiscreteXDgp(**fields)
    if family == "GaussianLinear":
        return GaussianLinearDgp(**fields)
    raise DomainViolation(f"unknown DGP family {family!r}")
