"""Proportional-hazards latency fitting with the incidence held fixed.

Given fitted incidence coefficients, the susceptible-subject survival model
is estimated by alternating two steps until the parameters settle:

a) recompute each censored subject's expected susceptibility weight from the
   current baseline hazard and regression coefficients;
b) maximize the weight-adjusted partial likelihood for the coefficients and
   refresh the baseline cumulative hazard with the matching Breslow-type
   update.

Events always carry weight one.  The zero-tail convention forces the
susceptible survival to zero beyond the largest event time, so censored
subjects in the plateau get weight zero and drop out of every risk-set sum.
Ties are handled through risk-set sums evaluated at each event's own time
(Breslow convention), and the iteration starts from the fit that ignores the
cured fraction altogether.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .data import SurvivalDataset
from .errors import NumericalError, SingularHessianError

__all__ = [
    "LatencyFit",
    "PartialLikelihoodFit",
    "StepFunction",
    "breslow_update",
    "compute_weights",
    "fit_latency",
    "g_function",
    "profile_residual",
    "weighted_partial_fit",
]


@dataclass(frozen=True)
class StepFunction:
    """Right-continuous piecewise-constant function.

    ``values[k]`` is the value on [times[k], times[k+1]); before the first
    time the function equals ``initial``.  Cumulative hazards use
    ``initial=0`` with nondecreasing values; survival curves use
    ``initial=1`` with nonincreasing values in [0, 1].  Monotonicity in one
    of the two directions (including the initial value) is enforced.
    """

    times: np.ndarray
    values: np.ndarray
    initial: float = 0.0

    def __post_init__(self) -> None:
        times = np.atleast_1d(np.asarray(self.times, dtype=float))
        values = np.atleast_1d(np.asarray(self.values, dtype=float))
        if times.shape != values.shape or times.ndim != 1:
            raise ValueError("times and values must be one-dimensional and equally long")
        if not (np.all(np.isfinite(times)) and np.all(np.isfinite(values))):
            raise ValueError("step function times and values must be finite")
        if times.size > 1 and not np.all(np.diff(times) > 0.0):
            raise ValueError("step function times must be strictly increasing")
        steps = np.diff(values, prepend=self.initial)
        if not (np.all(steps >= 0.0) or np.all(steps <= 0.0)):
            raise ValueError("step function values must be monotone from the initial value")
        times.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    def __call__(self, t):
        idx = np.searchsorted(self.times, np.asarray(t, dtype=float), side="right")
        padded = np.concatenate(([self.initial], self.values))
        out = padded[idx]
        return out if out.ndim else float(out)

    @property
    def jumps(self) -> np.ndarray:
        return np.diff(self.values, prepend=self.initial)

    def jump_at(self, t: float) -> float:
        """Jump size at exactly t (0.0 when t is not a jump time)."""
        k = np.searchsorted(self.times, t)
        if k < self.times.size and self.times[k] == t:
            return float(self.jumps[k])
        return 0.0


@dataclass(frozen=True)
class PartialLikelihoodFit:
    beta: np.ndarray
    converged: bool
    iterations: int
    score_norm: float


@dataclass(frozen=True)
class LatencyFit:
    beta: np.ndarray
    Lambda: StepFunction
    weights: np.ndarray
    iterations: int
    converged: bool
    last_event_time: float


def g_function(
    t: float,
    Lambda: StepFunction,
    beta: np.ndarray,
    gamma: np.ndarray,
    x: np.ndarray,
    z: np.ndarray,
) -> float:
    """Expected susceptibility of a subject censored at t.

    phi * S_u / (1 - phi + phi * S_u) with S_u = exp(-Lambda(t) e^{beta'z});
    beyond the last jump time of Lambda the susceptible survival is zero and
    the value is 0.
    """
    phi = expit(float(np.dot(gamma, x)))
    if t > Lambda.times[-1]:
        return 0.0
    s_u = np.exp(-Lambda(t) * np.exp(float(np.dot(beta, z))))
    num = phi * s_u
    den = 1.0 - phi + num
    return float(num / den) if den > 0.0 else 0.0


def compute_weights(
    ds: SurvivalDataset, gamma: np.ndarray, beta: np.ndarray, Lambda: StepFunction
) -> np.ndarray:
    """Expected susceptibility per subject: 1 for events, g for censored."""
    phi = expit(ds.x @ np.asarray(gamma, dtype=float))
    risk = np.exp(ds.z @ np.asarray(beta, dtype=float))
    s_u = np.exp(-Lambda(ds.y) * risk)
    s_u = np.where(ds.y > Lambda.times[-1], 0.0, s_u)
    num = phi * s_u
    den = 1.0 - phi + num
    with np.errstate(invalid="ignore"):
        g = np.where(den > 0.0, num / np.where(den > 0.0, den, 1.0), 0.0)
    return np.where(ds.delta == 1, 1.0, g)


def _riskset_sums(y: np.ndarray, values: np.ndarray) -> np.ndarray:
    """For each subject i, the sum of ``values`` over {j : Y_j >= Y_i}.

    ``values`` may be (n,) or (n, d); summation runs in a fixed descending
    time order so results do not depend on input permutation beyond ties,
    which are aggregated exactly.
    """
    order = np.argsort(y, kind="stable")
    y_sorted = y[order]
    v_sorted = values[order]
    tail = np.cumsum(v_sorted[::-1], axis=0)[::-1]
    first = np.searchsorted(y_sorted, y_sorted, side="left")
    out = np.empty_like(values, dtype=float)
    out[order] = tail[first]
    return out


def weighted_partial_fit(
    ds: SurvivalDataset,
    weights: np.ndarray,
    init: np.ndarray | None = None,
    tol: float = 1e-9,
    max_iter: int = 60,
) -> PartialLikelihoodFit:
    """Newton maximization of the weight-adjusted log partial likelihood.

    Each event contributes beta'Z_i minus the log of the weighted risk-set
    sum at its own time.  Risk-set exponentials are shifted by the largest
    linear predictor for overflow safety; the shift cancels in the score.
    """
    weights = np.asarray(weights, dtype=float)
    events = ds.delta == 1
    if not np.any(events):
        raise NumericalError("partial likelihood needs at least one event")
    z = ds.z
    q = ds.q
    if np.linalg.matrix_rank(z - z.mean(axis=0)) < q:
        raise SingularHessianError("latency covariates have singular variance")

    def decompose(beta):
        eta = z @ beta
        shift = float(np.max(eta))
        r = weights * np.exp(eta - shift)
        s0 = _riskset_sums(ds.y, r)
        bad = events & (s0 <= 0.0)
        if np.any(bad):
            i = int(np.flatnonzero(bad)[0])
            raise NumericalError(f"risk set at event index {i} (time {ds.y[i]}) has zero mass")
        ll = float(np.sum(eta[events] - np.log(s0[events]) - shift))
        return eta, shift, r, s0, ll

    def score_at(beta):
        r = weights * np.exp(z @ beta - np.max(z @ beta))
        s0 = _riskset_sums(ds.y, r)
        s1 = _riskset_sums(ds.y, r[:, None] * z)
        return np.sum(z[events] - s1[events] / s0[events, None], axis=0)

    beta = np.zeros(q) if init is None else np.array(init, dtype=float)
    zz = (z[:, :, None] * z[:, None, :]).reshape(ds.n, q * q)
    _, _, r, s0, ll = decompose(beta)
    iterations = 0
    converged = False
    score = np.empty(q)
    for iterations in range(1, max_iter + 1):
        s1 = _riskset_sums(ds.y, r[:, None] * z)
        zbar = s1[events] / s0[events, None]
        score = np.sum(z[events] - zbar, axis=0)
        score_norm = np.max(np.abs(score))
        if score_norm < tol:
            iterations -= 1
            converged = True
            break
        s2 = _riskset_sums(ds.y, r[:, None] * zz).reshape(ds.n, q, q)
        info = np.sum(
            s2[events] / s0[events, None, None] - zbar[:, :, None] * zbar[:, None, :], axis=0
        )
        try:
            newton = np.linalg.solve(info, score)
        except np.linalg.LinAlgError:
            return PartialLikelihoodFit(beta, False, iterations, float(score_norm))
        step = newton
        new = decompose(beta + step)
        if new[4] < ll:
            # Near the optimum the objective comparison is noise-limited
            # while the score stays precise, so prefer the full Newton step
            # whenever it shrinks the score; halve only when far away.
            small = np.max(np.abs(newton)) < 1e-4 * (1.0 + np.max(np.abs(beta)))
            if not (small and np.max(np.abs(score_at(beta + newton))) < score_norm):
                halvings = 0
                while new[4] < ll and halvings < 50:
                    step = 0.5 * step
                    new = decompose(beta + step)
                    halvings += 1
                if new[4] < ll:
                    return PartialLikelihoodFit(beta, False, iterations, float(score_norm))
        beta = beta + step
        _, _, r, s0, ll = new
    else:
        s1 = _riskset_sums(ds.y, r[:, None] * z)
        score = np.sum(z[events] - s1[events] / s0[events, None], axis=0)
        converged = bool(np.max(np.abs(score)) < tol)
    return PartialLikelihoodFit(beta, converged, iterations, float(np.max(np.abs(score))))


def breslow_update(ds: SurvivalDataset, weights: np.ndarray, beta: np.ndarray) -> StepFunction:
    """Baseline cumulative hazard with one jump per distinct event time.

    The jump at t is the number of events at t divided by the weighted
    risk-set sum of e^{beta'z} over {j : Y_j >= t}.
    """
    weights = np.asarray(weights, dtype=float)
    r = weights * np.exp(ds.z @ np.asarray(beta, dtype=float))
    event_y = ds.y[ds.delta == 1]
    times, counts = np.unique(event_y, return_counts=True)
    order = np.argsort(ds.y, kind="stable")
    tail = np.concatenate((np.cumsum(r[order][::-1])[::-1], [0.0]))
    denom = tail[np.searchsorted(ds.y[order], times, side="left")]
    if np.any(denom <= 0.0):
        t_bad = times[np.flatnonzero(denom <= 0.0)[0]]
        raise NumericalError(f"zero weighted risk-set mass at event time {t_bad}")
    return StepFunction(times, np.cumsum(counts / denom))


def fit_latency(
    ds: SurvivalDataset,
    gamma_hat: np.ndarray,
    tol: float = 1e-7,
    max_iter: int = 500,
) -> LatencyFit:
    """Alternate weight and (beta, Lambda) updates from the no-cure start.

    The incidence coefficients stay fixed throughout.  Convergence is
    declared when both the coefficient max-norm change and the largest
    cumulative-hazard change across jump times drop below ``tol``.  The
    returned weights are recomputed at the final parameters, so the returned
    triple is self-consistent for :func:`profile_residual`.
    """
    gamma_hat = np.asarray(gamma_hat, dtype=float)
    ones = np.ones(ds.n)
    beta = weighted_partial_fit(ds, ones).beta
    Lambda = breslow_update(ds, ones, beta)
    last_event = float(Lambda.times[-1])

    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        w = compute_weights(ds, gamma_hat, beta, Lambda)
        pf = weighted_partial_fit(ds, w, init=beta)
        new_Lambda = breslow_update(ds, w, pf.beta)
        change = max(
            float(np.max(np.abs(pf.beta - beta))),
            float(np.max(np.abs(new_Lambda.values - Lambda.values))),
        )
        beta = pf.beta
        Lambda = new_Lambda
        if change < tol:
            converged = pf.converged
            break
    w = compute_weights(ds, gamma_hat, beta, Lambda)
    return LatencyFit(beta, Lambda, w, iterations, converged, last_event)


def profile_residual(
    ds: SurvivalDataset, gamma: np.ndarray, beta: np.ndarray, Lambda: StepFunction
) -> float:
    """Largest gap between Lambda's jumps and the jumps it induces.

    Plugs the expected susceptibility weights computed from (gamma, beta,
    Lambda) back into the Breslow-type update; at an exact profile fixed
    point the induced jumps reproduce Lambda's own.
    """
    w = compute_weights(ds, gamma, beta, Lambda)
    implied = breslow_update(ds, w, beta)
    if implied.times.shape != Lambda.times.shape or not np.all(implied.times == Lambda.times):
        raise NumericalError("step function is not supported on the event times")
    return float(np.max(np.abs(Lambda.jumps - implied.jumps)))
