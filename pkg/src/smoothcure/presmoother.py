"""Nonparametric cure-probability estimation by kernel-weighted products.

For a covariate point x, the susceptible/cured split is estimated from the
kernel-weighted conditional subdistributions of the follow-up time: the
product over observed event times of one minus the local hazard increment.
With uniform weights this collapses to the Kaplan-Meier survival estimate
evaluated at the largest event time.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import SurvivalDataset
from .errors import EmptyNeighborhoodError
from .kernels import Bandwidth, kernel_weight_matrix

__all__ = [
    "ConditionalSubdist",
    "CureProbEstimate",
    "conditional_subdist",
    "estimate_cure_prob",
    "presmooth_all",
]


@dataclass(frozen=True)
class ConditionalSubdist:
    """Kernel-weighted event mass and at-risk mass at each distinct event time."""

    event_times: np.ndarray
    h1_mass: np.ndarray
    at_risk: np.ndarray


@dataclass(frozen=True)
class CureProbEstimate:
    value: float
    x: np.ndarray
    bandwidth: Bandwidth


def _event_tables(y: np.ndarray, delta: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Indicator tables over the distinct uncensored times.

    Returns (event_times, event_mask, risk_mask) where event_mask[j, k] flags
    subject j having an event exactly at time k and risk_mask[j, k] flags
    Y_j >= t_k.
    """
    times = np.unique(y[delta == 1])
    event_mask = ((y[:, None] == times[None, :]) & (delta[:, None] == 1)).astype(float)
    risk_mask = (y[:, None] >= times[None, :]).astype(float)
    return times, event_mask, risk_mask


def _survival_products(h1: np.ndarray, at_risk: np.ndarray) -> np.ndarray:
    """Row-wise product of (1 - h1/at_risk), skipping zero-mass times.

    Factors are clamped into [0, 1] before multiplying: kernel-weight
    cancellation can leave tiny negative masses.
    """
    with np.errstate(invalid="ignore", divide="ignore"):
        factors = np.where(at_risk > 0.0, 1.0 - h1 / np.where(at_risk > 0.0, at_risk, 1.0), 1.0)
    np.clip(factors, 0.0, 1.0, out=factors)
    return np.clip(np.prod(factors, axis=-1), 0.0, 1.0)


def conditional_subdist(ds: SurvivalDataset, x: np.ndarray, b: Bandwidth) -> ConditionalSubdist:
    """Normalized kernel-weighted subdistribution of (Y, delta) at point x."""
    w = kernel_weight_matrix(np.asarray(x, dtype=float)[None, :], ds.x, b, ds.meta)[0]
    total = w.sum()
    if not total > 0.0:
        raise EmptyNeighborhoodError("all kernel weights vanish at the requested point")
    w = w / total
    times, event_mask, risk_mask = _event_tables(ds.y, ds.delta)
    return ConditionalSubdist(times, w @ event_mask, w @ risk_mask)


def estimate_cure_prob(ds: SurvivalDataset, x: np.ndarray, b: Bandwidth) -> CureProbEstimate:
    """Cure probability at x: product over event times of local survival factors."""
    sub = conditional_subdist(ds, x, b)
    value = float(_survival_products(sub.h1_mass, sub.at_risk))
    return CureProbEstimate(value, np.asarray(x, dtype=float), b)


def presmooth_all(ds: SurvivalDataset, b: Bandwidth) -> np.ndarray:
    """Cure-probability estimates at every sample point, as a length-n vector.

    Evaluation at a sample point always has positive kernel mass (the point
    weights itself), so no neighborhood can be empty here.
    """
    w = kernel_weight_matrix(ds.x, ds.x, b, ds.meta)
    total = w.sum(axis=1)
    if np.any(total <= 0.0):
        raise EmptyNeighborhoodError("zero kernel mass at a sample point")
    w = w / total[:, None]
    times, event_mask, risk_mask = _event_tables(ds.y, ds.delta)
    return _survival_products(w @ event_mask, w @ risk_mask)
