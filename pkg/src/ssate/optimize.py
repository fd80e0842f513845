"""Deterministic full-batch optimizers used by the nuisance fits."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np


@dataclass(frozen=True)
class OptimizerConfig:
    max_iter: int = 5000
    tol: float = 1e-8  # stopping rule on the gradient norm


@dataclass(frozen=True)
class OptResult:
    x: np.ndarray
    loss: float
    grad_norm: float
    converged: bool
    n_iter: int


def minimize_gd(
    fun_grad: Callable[[np.ndarray], Tuple[float, np.ndarray]],
    x0: np.ndarray,
    config: OptimizerConfig = OptimizerConfig(),
) -> OptResult:
    """Gradient descent with Armijo backtracking (halving) line search.

    The step size is warm-started from the previous iteration (doubled) so
    well-conditioned problems take near-constant steps.
    """
    x = np.asarray(x0, dtype=float).copy()
    loss, grad = fun_grad(x)
    step = 1.0
    for it in range(config.max_iter):
        gnorm = float(np.linalg.norm(grad))
        if gnorm <= config.tol:
            return OptResult(x, loss, gnorm, True, it)
        step = min(step * 2.0, 1e8)
        g2 = gnorm * gnorm
        while True:
            x_new = x - step * grad
            loss_new, grad_new = fun_grad(x_new)
            if np.isfinite(loss_new) and loss_new <= loss - 1e-4 * step * g2:
                break
            step *= 0.5
            if step < 1e-20:
                # no descent possible at machine precision; accept the
                # iterate as converged if the gradient is small relative
                # to the attainable precision of the loss
                gnorm = float(np.linalg.norm(grad))
                ok = bool(gnorm <= max(config.tol, 1e-6 * (1.0 + abs(loss))))
                return OptResult(x, loss, gnorm, ok, it)
        x, loss, grad = x_new, loss_new, grad_new
    gnorm = float(np.linalg.norm(grad))
    ok = bool(gnorm <= max(config.tol, 1e-6 * (1.0 + abs(loss))))
    return OptResult(x, loss, gnorm, ok, config.max_iter)


def minimize_newton(
    fun_grad_hess: Callable[[np.ndarray], Tuple[float, np.ndarray, np.ndarray]],
    x0: np.ndarray,
    config: OptimizerConfig = OptimizerConfig(),
) -> OptResult:
    """Damped Newton with Armijo backtracking.

    Used for the convex maximum-likelihood fits (logistic / multinomial),
    where the exact Hessian is cheap and the problem may be badly
    conditioned for plain gradient descent. Falls back to the gradient
    direction when the Hessian solve fails.
    """
    x = np.asarray(x0, dtype=float).copy()
    loss, grad, hess = fun_grad_hess(x)
    for it in range(config.max_iter):
        gnorm = float(np.linalg.norm(grad))
        if gnorm <= config.tol:
            return OptResult(x, loss, gnorm, True, it)
        try:
            # small ridge keeps the direction well-defined near flat regions
            direction = np.linalg.solve(
                hess + 1e-12 * np.eye(len(x)), grad
            )
        except np.linalg.LinAlgError:
            direction = grad
        slope = float(grad @ direction)
        if slope <= 0:
            direction = grad
            slope = gnorm * gnorm
        step = 1.0
        while True:
            x_new = x - step * direction
            out = fun_grad_hess(x_new)
            if np.isfinite(out[0]) and out[0] <= loss - 1e-4 * step * slope:
                break
            step *= 0.5
            if step < 1e-20:
                return OptResult(x, loss, gnorm, bool(gnorm <= config.tol), it)
        x, (loss, grad, hess) = x_new, out
    gnorm = float(np.linalg.norm(grad))
    return OptResult(x, loss, gnorm, bool(gnorm <= config.tol), config.max_iter)
