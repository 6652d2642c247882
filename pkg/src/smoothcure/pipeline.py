"""End-to-end fitters shared by the CLI, bootstrap and simulation harness."""

from __future__ import annotations

import numpy as np

from .data import SurvivalDataset, destandardize_gamma, standardize_continuous
from .errors import ConfigurationError
from .incidence import fit_incidence
from .kernels import DEFAULT_CAP, Bandwidth, cv_bandwidth
from .latency_cox import fit_latency
from .mle_baseline import CureModelFit, fit_mle_em, observed_loglik
from .presmoother import presmooth_all

__all__ = ["fit_cure_model", "fit_presmoothing", "fit_mle_em"]


def fit_presmoothing(
    ds: SurvivalDataset,
    bandwidth: Bandwidth | None = None,
    grid: np.ndarray | None = None,
    bandwidth_cap: float = DEFAULT_CAP,
    incidence_tol: float = 1e-8,
    incidence_max_iter: int = 100,
    latency_tol: float = 1e-7,
    latency_max_iter: int = 500,
    seed: int = 0,
) -> CureModelFit:
    """Two-step fit: presmoothed incidence first, latency second.

    Continuous incidence covariates are standardized, the bandwidth is
    cross-validated (unless supplied), cure probabilities are presmoothed at
    every sample point and the incidence coefficients maximize the
    soft-label likelihood.  The latency is then fitted with those
    coefficients held fixed.  Reported incidence coefficients are mapped
    back to the original covariate scale.
    """
    if ds.meta.n_continuous > 0:
        ds_std, meta = standardize_continuous(ds)
        if bandwidth is None:
            bandwidth = cv_bandwidth(ds_std, grid=grid, seed=seed, cap=bandwidth_cap)
    else:
        ds_std, meta = ds, ds.meta
        if bandwidth is None:
            bandwidth = Bandwidth(np.empty(0))
    pihat = presmooth_all(ds_std, bandwidth)
    inc = fit_incidence(pihat, ds_std.x, tol=incidence_tol, max_iter=incidence_max_iter)
    lat = fit_latency(ds_std, inc.gamma, tol=latency_tol, max_iter=latency_max_iter)
    gamma = destandardize_gamma(inc.gamma, meta)
    return CureModelFit(
        gamma=gamma,
        beta=lat.beta,
        Lambda=lat.Lambda,
        loglik=observed_loglik(ds, gamma, lat.beta, lat.Lambda),
        iterations=lat.iterations,
        converged=inc.converged and lat.converged,
        method="presmoothing",
        incidence=inc,
        latency=lat,
        bandwidth=bandwidth.h,
        pihat=pihat,
    )


def fit_cure_model(ds: SurvivalDataset, method: str, **options) -> CureModelFit:
    """Dispatch on method name: ``presmooth`` or ``mle``."""
    if method in ("presmooth", "presmoothing"):
        return fit_presmoothing(ds, **options)
    if method == "mle":
        allowed = {"tol", "max_iter"}
        bad = set(options) - allowed
        if bad:
            raise ConfigurationError(f"options not understood by the mle fitter: {sorted(bad)}")
        return fit_mle_em(ds, **options)
    raise ConfigurationError(f"unknown method {method!r}; expected 'presmooth' or 'mle'")
