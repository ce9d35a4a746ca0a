"""Individual-level recalibration on cohorts of predicted risks."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logit

from . import kernels
from .core import DomainError, check_odds_ratio, check_probability, odds


class DegenerateOutcomeError(ValueError):
    """Outcomes are all 0 or all 1, so the intercept MLE diverges."""


class ConvergenceError(RuntimeError):
    """An iterative solver stopped before meeting its tolerance."""

    def __init__(self, message, last=None):
        super().__init__(message)
        self.last = last


def as_risks(risks):
    """Validate predicted risks and return them as a contiguous float64 array."""
    arr = np.ascontiguousarray(risks, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise DomainError("risks must be a non-empty one-dimensional sequence")
    bad = ~((arr > 0.0) & (arr < 1.0))
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise DomainError(f"risk at index {i} is {arr[i]!r}; risks must lie strictly between 0 and 1")
    return arr


def as_outcomes(outcomes, n):
    arr = np.ascontiguousarray(outcomes, dtype=np.float64)
    if arr.shape != (n,):
        raise DomainError(f"expected {n} outcomes, got shape {arr.shape}")
    if not np.all((arr == 0.0) | (arr == 1.0)):
        raise DomainError("outcomes must be 0 or 1")
    return arr


@dataclass(frozen=True)
class MomentSummary:
    mean: float
    variance: float
    n: int


def moments(risks, sample=False):
    """Mean and variance of predicted risks.

    The variance divides by ``n`` unless ``sample`` is true, in which case it
    divides by ``n - 1`` (undefined for a single risk).
    """
    arr = as_risks(risks)
    n = arr.size
    mean = math.fsum(arr) / n
    ss = math.fsum((arr - mean) ** 2)
    if sample:
        if n < 2:
            raise DomainError("sample variance needs at least two risks")
        var = ss / (n - 1)
    else:
        var = ss / n
    return MomentSummary(mean=mean, variance=var, n=n)


def apply_update(risks, x):
    """Apply an odds-ratio to every risk; order and length are preserved."""
    arr = as_risks(risks)
    x = check_odds_ratio(x, "x")
    if x == 1.0:
        return arr.copy()
    return arr * x / (1.0 - arr + arr * x)


def _mean_updated(z, log_x):
    return kernels.mean_expit(z, log_x)


def _log_bisect(g, target, lo=-1.0, hi=1.0, xtol=1e-12, maxiter=2000):
    """Solve increasing ``g(t) = target`` for ``t = log x`` with ``x`` to ``xtol``."""
    while g(lo) > target:
        lo *= 2.0
        if lo < -700.0:
            raise ConvergenceError("could not bracket the odds-ratio from below", math.exp(lo))
    while g(hi) < target:
        hi *= 2.0
        if hi > 700.0:
            raise ConvergenceError("could not bracket the odds-ratio from above", math.exp(hi))
    for _ in range(maxiter):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi) or math.exp(hi) - math.exp(lo) <= xtol:
            break
        gm = g(mid)
        if gm == target:
            return math.exp(mid)
        if gm < target:
            lo = mid
        else:
            hi = mid
    return math.exp(0.5 * (lo + hi))


def population_or(risks, p1):
    """Odds-ratio that moves the mean of the updated risks exactly to ``p1``.

    Solves ``mean_i f(pi_i, x) = p1`` by bisection on ``log x``; the mean is
    strictly increasing in ``x`` so the root is unique.
    """
    arr = as_risks(risks)
    p1 = check_probability(p1, "p1")
    z = logit(arr)
    if math.fsum(arr) / arr.size == p1:
        return 1.0
    return _log_bisect(lambda t: _mean_updated(z, t), p1)


def _final_step(z, y, a, score, info):
    # one more Newton step after the stopping rule: quadratic convergence takes
    # the intercept from ~tol / info to rounding level at the cost of one pass
    a_new = a + score / info
    if abs(kernels.offset_score(z, y, a_new)[0]) <= abs(score):
        return a_new
    return a


def conditional_or_exact(risks, outcomes, tol=1e-10, maxiter=100):
    """Intercept of an offset logistic model, returned on the odds-ratio scale.

    Fits ``logit P(y=1) = a + logit(pi)`` by damped Newton iteration on the
    score ``sum(y_i - expit(a + logit(pi_i)))`` and returns ``exp(a)``.
    Converged when ``|score| < tol * n``, followed by one final Newton step.

    Raises:
        DegenerateOutcomeError: outcomes are constant.
        ConvergenceError: ``maxiter`` reached; ``.last`` holds the last
            odds-ratio iterate.
    """
    arr = as_risks(risks)
    y = as_outcomes(outcomes, arr.size)
    n = arr.size
    ybar = math.fsum(y) / n
    if ybar in (0.0, 1.0):
        raise DegenerateOutcomeError("outcomes are all 0 or all 1; the intercept estimate diverges")
    z = logit(arr)
    # start from the marginal log odds-ratio
    a = math.log(odds(ybar)) - math.log(odds(math.fsum(arr) / n))
    score, info = kernels.offset_score(z, y, a)
    for _ in range(maxiter):
        if abs(score) < tol * n:
            return math.exp(_final_step(z, y, a, score, info))
        step = score / info
        for _ in range(60):
            a_new = a + step
            new_score, new_info = kernels.offset_score(z, y, a_new)
            if abs(new_score) < abs(score):
                break
            step *= 0.5
        else:
            raise ConvergenceError("Newton step could not reduce the score", math.exp(a))
        a, score, info = a_new, new_score, new_info
    if abs(score) < tol * n:
        return math.exp(_final_step(z, y, a, score, info))
    raise ConvergenceError(
        f"no convergence after {maxiter} iterations (score {score!r})", math.exp(a)
    )


def updated_mean(risks, x):
    """Mean of the risks after applying odds-ratio ``x``."""
    arr = as_risks(risks)
    x = check_odds_ratio(x, "x")
    return _mean_updated(logit(arr), math.log(x))


__all__ = [
    "ConvergenceError",
    "DegenerateOutcomeError",
    "MomentSummary",
    "apply_update",
    "conditional_or_exact",
    "moments",
    "population_or",
    "updated_mean",
]
