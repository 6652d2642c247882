"""Parametric incidence model and soft-label likelihood maximization.

The incidence model gives the probability of being susceptible as a function
of covariates; the logistic link is the one that ships.  Fitting maximizes a
binary log-likelihood in which the 0/1 response is replaced by an estimated
susceptibility probability (one minus the presmoothed cure probability), by
Newton-Raphson with step halving.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import expit

from .errors import SingularHessianError

__all__ = [
    "IncidenceFit",
    "IncidenceModel",
    "LOGISTIC",
    "fit_incidence",
    "logistic_phi",
    "soft_label_hessian",
    "soft_label_loglik",
    "soft_label_score",
]


def logistic_phi(gamma: np.ndarray, x: np.ndarray):
    """Susceptibility probability 1 / (1 + exp(-gamma'x)), overflow safe.

    ``x`` may be a single covariate row or an (n, p) matrix.
    """
    eta = np.asarray(x, dtype=float) @ np.asarray(gamma, dtype=float)
    out = expit(eta)
    return out if np.ndim(out) else float(out)


def _log_phi_pair(eta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # log(phi) and log(1 - phi) without ever forming phi; exact for |eta| large.
    return -np.logaddexp(0.0, -eta), -np.logaddexp(0.0, eta)


def soft_label_loglik(gamma: np.ndarray, pihat: np.ndarray, x: np.ndarray) -> float:
    """Sum over subjects of (1-pihat) log(phi) + pihat log(1-phi).

    Terms with a zero coefficient contribute zero even when the paired log
    is -inf in the limit; both logs stay finite for finite linear predictors,
    so no masking is needed.
    """
    eta = np.asarray(x, dtype=float) @ np.asarray(gamma, dtype=float)
    log_phi, log_1m = _log_phi_pair(eta)
    pihat = np.asarray(pihat, dtype=float)
    return float(np.sum((1.0 - pihat) * log_phi + pihat * log_1m))


def soft_label_score(gamma: np.ndarray, pihat: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Gradient in gamma: sum of (label - phi) times the covariate row."""
    x = np.asarray(x, dtype=float)
    resid = (1.0 - np.asarray(pihat, dtype=float)) - expit(x @ np.asarray(gamma, dtype=float))
    return x.T @ resid


def soft_label_hessian(gamma: np.ndarray, pihat: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Hessian in gamma: minus the phi(1-phi)-weighted Gram matrix of x."""
    x = np.asarray(x, dtype=float)
    phi = expit(x @ np.asarray(gamma, dtype=float))
    return -(x * (phi * (1.0 - phi))[:, None]).T @ x


@dataclass(frozen=True)
class IncidenceModel:
    """Value/gradient/curvature bundle so other links can be slotted in."""

    loglik: Callable[[np.ndarray, np.ndarray, np.ndarray], float]
    score: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]
    hessian: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]


LOGISTIC = IncidenceModel(soft_label_loglik, soft_label_score, soft_label_hessian)

# A fit is reported as not converged when the likelihood maximum sits at
# infinity (quasi-separated boundary labels) even though the score has
# vanished numerically.  Two symptoms are checked: fitted |linear predictor|
# beyond double-precision saturation, and observed information that has
# collapsed to numerical zero along some direction relative to the sample
# size (a flat likelihood at the returned point).
LINPRED_SATURATION = 30.0
INFORMATION_FLOOR = 1e-8


@dataclass(frozen=True)
class IncidenceFit:
    gamma: np.ndarray
    loglik: float
    gradient_norm: float
    iterations: int
    converged: bool


def fit_incidence(
    pihat: np.ndarray,
    x: np.ndarray,
    init: np.ndarray | None = None,
    tol: float = 1e-8,
    max_iter: int = 100,
    model: IncidenceModel = LOGISTIC,
) -> IncidenceFit:
    """Maximize the soft-label log-likelihood by damped Newton-Raphson.

    Convergence means the max-norm of the score dropped below ``tol`` at a
    genuine interior maximum: fits whose linear predictor saturated at
    double precision, or whose observed information collapsed to numerical
    zero along some direction, carry a maximum at infinity and report
    ``converged=False`` even with a vanished score.  Hitting ``max_iter``,
    a singular Newton system, or a step that cannot be made ascending all
    return ``converged=False`` with the current state attached; nothing is
    raised for those, so callers such as the EM baseline can keep going
    with the partial update.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    pihat = np.asarray(pihat, dtype=float)
    n, p = x.shape
    if pihat.shape != (n,):
        raise ValueError("pihat must have one entry per row of x")
    if np.any(pihat < 0.0) or np.any(pihat > 1.0):
        raise ValueError("pihat entries must lie in [0, 1]")
    if p >= n:
        raise SingularHessianError(f"need more subjects than parameters (n={n}, p={p})")
    if np.linalg.matrix_rank(x) < p:
        raise SingularHessianError("incidence design matrix is rank deficient")

    gamma = np.zeros(p) if init is None else np.array(init, dtype=float)
    ll = model.loglik(gamma, pihat, x)
    iterations = 0
    for iterations in range(1, max_iter + 1):
        score = model.score(gamma, pihat, x)
        score_norm = np.max(np.abs(score))
        if score_norm < tol:
            iterations -= 1
            break
        hess = model.hessian(gamma, pihat, x)
        try:
            newton = np.linalg.solve(-hess, score)
        except np.linalg.LinAlgError:
            return IncidenceFit(gamma, ll, float(score_norm), iterations, False)
        step = newton
        new_ll = model.loglik(gamma + step, pihat, x)
        if new_ll < ll:
            # Near the optimum the objective comparison is noise-limited
            # while the score stays precise, so prefer the full Newton step
            # whenever it shrinks the score; halve only when far away.
            small = np.max(np.abs(newton)) < 1e-4 * (1.0 + np.max(np.abs(gamma)))
            if small and np.max(np.abs(model.score(gamma + newton, pihat, x))) < score_norm:
                pass
            else:
                halvings = 0
                while new_ll < ll and halvings < 50:
                    step = 0.5 * step
                    new_ll = model.loglik(gamma + step, pihat, x)
                    halvings += 1
                if new_ll < ll:
                    return IncidenceFit(gamma, ll, float(score_norm), iterations, False)
        gamma = gamma + step
        ll = new_ll

    score = model.score(gamma, pihat, x)
    grad_norm = float(np.max(np.abs(score)))
    saturated = float(np.max(np.abs(x @ gamma))) > LINPRED_SATURATION
    flat = float(np.min(np.linalg.eigvalsh(-model.hessian(gamma, pihat, x)))) < INFORMATION_FLOOR * n
    converged = grad_norm < tol and not saturated and not flat
    return IncidenceFit(gamma, ll, grad_norm, iterations, converged)
