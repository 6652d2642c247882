"""Naive bootstrap standard errors, Wald tests and out-of-sample prediction.

Standard errors come from refitting the chosen estimator on whole-row
resamples drawn with replacement.  Each replicate derives its index stream
from (seed, replicate) through a counter-based generator, so runs are
reproducible and independent of execution order.  Refits that fail to
converge (or error out on a degenerate resample) are dropped and counted,
never imputed.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .data import Subject, SurvivalDataset
from .errors import CureModelError, InferenceError
from .mle_baseline import CureModelFit
from .pipeline import fit_cure_model

__all__ = [
    "BootstrapResult",
    "bootstrap_se",
    "prediction_error",
    "predicted_weight",
    "resample_indices",
    "wald_test",
]


@dataclass(frozen=True)
class BootstrapResult:
    """Resampled coefficient matrix with derived standard errors and p-values.

    ``estimates`` has one row per successful refit and one column per
    parameter (incidence coefficients first, then latency).  ``pvalues``
    are two-sided Wald p-values of the full-data point estimates against
    the bootstrap standard errors.
    """

    estimates: np.ndarray
    point: np.ndarray
    se: np.ndarray
    pvalues: np.ndarray
    B: int
    seed: int
    failures: int
    param_names: tuple[str, ...]


def wald_test(estimate: float, se: float) -> float:
    """Two-sided normal p-value 2(1 - Phi(|estimate/se|))."""
    if not se > 0.0:
        raise InferenceError(f"standard error must be positive, got {se}")
    return float(math.erfc(abs(estimate / se) / math.sqrt(2.0)))


def resample_indices(seed: int, replicate: int, n: int) -> np.ndarray:
    """Replayable with-replacement row indices for one bootstrap replicate."""
    seq = np.random.SeedSequence(seed, spawn_key=(replicate,))
    rng = np.random.Generator(np.random.Philox(seq))
    return rng.integers(0, n, size=n)


def param_names(ds: SurvivalDataset) -> tuple[str, ...]:
    gamma = ("gamma_intercept",) + tuple(f"gamma_{c}" for c in ds.meta.names)
    beta = tuple(f"beta_{c}" if c else f"beta_{j}" for j, c in enumerate(
        ds.z_names if ds.z_names else ("",) * ds.q
    ))
    return gamma + beta


def _bootstrap_replicate(args):
    """One resample refit: the coefficient row, or None on failure."""
    ds, method, fit_options, seed, r = args
    idx = resample_indices(seed, r, ds.n)
    try:
        fit = fit_cure_model(ds.take(idx), method, **fit_options)
    except CureModelError:
        return None
    if not fit.converged:
        return None
    return np.concatenate([fit.gamma, fit.beta])


def bootstrap_se(
    ds: SurvivalDataset,
    method: str = "presmooth",
    B: int = 500,
    seed: int = 0,
    n_jobs: int = 1,
    **fit_options,
) -> BootstrapResult:
    """Bootstrap spread of the fitted coefficients over B whole-row resamples.

    The per-parameter standard error is the sample standard deviation
    (denominator B_eff - 1) over the refits that converged.  Replicates draw
    independent index streams from (seed, replicate), so results are
    identical for any worker count.
    """
    if B < 2:
        raise InferenceError(f"need at least 2 bootstrap replicates, got B={B}")
    full = fit_cure_model(ds, method, **fit_options)
    point = np.concatenate([full.gamma, full.beta])

    tasks = [(ds, method, fit_options, seed, r) for r in range(B)]
    if n_jobs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(_bootstrap_replicate, tasks, chunksize=4))
    else:
        results = [_bootstrap_replicate(t) for t in tasks]
    rows = [row for row in results if row is not None]
    failures = sum(row is None for row in results)
    if not rows:
        raise InferenceError(f"all {B} bootstrap refits failed")

    estimates = np.vstack(rows)
    se = estimates.std(axis=0, ddof=1) if estimates.shape[0] > 1 else np.zeros(point.size)
    pvalues = np.array(
        [
            wald_test(e, s) if s > 0.0 else (1.0 if e == 0.0 else 0.0)
            for e, s in zip(point, se)
        ]
    )
    return BootstrapResult(
        estimates=estimates,
        point=point,
        se=se,
        pvalues=pvalues,
        B=B,
        seed=seed,
        failures=failures,
        param_names=param_names(ds),
    )


def _expected_weights(fit: CureModelFit, y, delta, x, z) -> np.ndarray:
    """Expected susceptibility of test subjects under a fitted model."""
    phi = expit(np.atleast_2d(x) @ fit.gamma)
    s_u = np.exp(-fit.Lambda(y) * np.exp(np.atleast_2d(z) @ fit.beta))
    s_u = np.where(np.asarray(y) > fit.Lambda.times[-1], 0.0, s_u)
    num = phi * s_u
    den = 1.0 - phi + num
    with np.errstate(invalid="ignore"):
        g = np.where(den > 0.0, num / np.where(den > 0.0, den, 1.0), 0.0)
    return np.where(np.asarray(delta) == 1, 1.0, g)


def predicted_weight(fit: CureModelFit, subject: Subject) -> float:
    """Expected susceptibility of one test subject; zero-tail applies beyond
    the training data's last event time."""
    return float(
        _expected_weights(
            fit, np.array([subject.y]), np.array([subject.delta]), subject.x[None, :], subject.z[None, :]
        )[0]
    )


def prediction_error(fit: CureModelFit, test: SurvivalDataset, swap_pairing: bool = False) -> float:
    """Cross-entropy-style prediction error of the incidence on a test set.

    As displayed in the source convention, the expected susceptibility
    weight W multiplies log(1 - phi) and its complement multiplies
    log(phi); ``swap_pairing=True`` flips the two logs for callers who read
    the roles of the cure probability and phi the other way around.  Terms
    with a zero coefficient contribute zero; a phi of exactly 0 or 1 paired
    with a nonzero coefficient yields +inf.
    """
    w = _expected_weights(fit, test.y, test.delta, test.x, test.z)
    phi = expit(test.x @ fit.gamma)
    first, second = (phi, 1.0 - phi) if swap_pairing else (1.0 - phi, phi)
    total = 0.0
    for wj, a, b in zip(w, first, second):
        for coef, prob in ((wj, a), (1.0 - wj, b)):
            if coef == 0.0:
                continue
            if prob <= 0.0:
                return float("inf")
            total -= coef * math.log(prob)
    return total
