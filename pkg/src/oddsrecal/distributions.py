"""Beta-distributed predicted risks: fitting, sampling, expectations, AUC.

Expectations over a beta(alpha, beta) population are computed in log-odds
space. With ``z = logit(pi)`` the beta density becomes

    g(z) = exp(alpha * z - (alpha + beta) * log1p(exp(z))) / B(alpha, beta)

which is smooth and log-concave for every ``alpha, beta > 0``, so the endpoint
singularities of the beta density on (0, 1) disappear. The integral is
evaluated by composite Gauss-Legendre quadrature on panels that are fine near
the mode, near ``z = 0`` and near the centre of the integrand's logistic
factor, and grow geometrically into the exponential tails. The truncation
point on each side bounds the neglected mass by ``1e-18``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import betainc, betaln, expit

from . import kernels
from .cohort import _log_bisect, as_outcomes, as_risks
from .core import DomainError, check_odds_ratio, check_probability

PANEL_ORDER = 20
_LOG_TAIL = math.log(1e-18)
_DOUBLINGS = 0.5 * 2.0 ** np.arange(48)


@dataclass(frozen=True)
class BetaParams:
    alpha: float
    beta: float

    def __post_init__(self):
        for name in ("alpha", "beta"):
            value = getattr(self, name)
            if not (value > 0.0 and math.isfinite(value)):
                raise DomainError(f"{name} must be positive and finite, got {value!r}")

    @property
    def mean(self):
        return self.alpha / (self.alpha + self.beta)

    @property
    def variance(self):
        s = self.alpha + self.beta
        return self.alpha * self.beta / (s * s * (s + 1.0))


def beta_from_moments(mean, variance):
    """Method-of-moments beta parameters for a given mean and variance.

    >>> beta_from_moments(0.5, 1 / 12)
    BetaParams(alpha=1.0, beta=1.0)
    """
    mean = check_probability(mean, "mean")
    variance = float(variance)
    if not variance > 0.0:
        raise DomainError(f"variance must be positive, got {variance!r}")
    if variance >= mean * (1.0 - mean):
        raise DomainError(
            f"variance {variance!r} must be below mean*(1-mean) = {mean * (1.0 - mean)!r}"
        )
    c = mean * (1.0 - mean) / variance - 1.0
    return BetaParams(mean * c, (1.0 - mean) * c)


def seed_sequence(seed, *key):
    """Independent child stream for ``key`` under a root ``seed``.

    Streams are derived with ``numpy.random.SeedSequence(seed, spawn_key=key)``,
    so scenario ``(i, j)`` always receives the same stream regardless of the
    order in which scenarios are evaluated.
    """
    return np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key))


def sample_beta(params, n, seed):
    """Draw ``n`` predicted risks from ``beta(alpha, beta)``.

    ``seed`` is an integer or a :class:`numpy.random.SeedSequence`. Draws that
    round to exactly 0 or 1 in double precision (possible only for shape
    parameters far below 1) are moved to the nearest representable interior
    value.
    """
    if n < 1:
        raise DomainError(f"n must be at least 1, got {n!r}")
    rng = np.random.Generator(np.random.PCG64(seed))
    draws = rng.beta(params.alpha, params.beta, size=int(n))
    np.clip(draws, np.nextafter(0.0, 1.0), np.nextafter(1.0, 0.0), out=draws)
    return draws


@lru_cache(maxsize=None)
def _gauss_legendre(order):
    nodes, weights = np.polynomial.legendre.leggauss(order)
    return nodes, weights


def _breakpoints(alpha, beta, features):
    log_b = betaln(alpha, beta)
    z_lo = (_LOG_TAIL + math.log(alpha) + log_b) / alpha
    z_hi = -(_LOG_TAIL + math.log(beta) + log_b) / beta
    scale = min(1.0, math.sqrt((alpha + beta) / (alpha * beta)))
    steps = np.concatenate(([0.0], scale * _DOUBLINGS))
    pts = [np.array([z_lo, z_hi])]
    for f in features:
        pts.append(f + steps)
        pts.append(f - steps)
    pts = np.concatenate(pts)
    return np.unique(np.clip(pts, z_lo, z_hi))


def logit_rule(params, extra_features=()):
    """Quadrature nodes in log-odds space and density-weighted weights.

    ``sum(w * h(z))`` approximates ``E[h(logit(pi))]`` for ``pi`` drawn from
    ``params``. ``extra_features`` lists log-odds locations where ``h``
    changes quickly.
    """
    a, b = params.alpha, params.beta
    features = [math.log(a / b), 0.0, *extra_features]
    pts = _breakpoints(a, b, features)
    nodes, weights = _gauss_legendre(PANEL_ORDER)
    half = 0.5 * np.diff(pts)
    mid = 0.5 * (pts[1:] + pts[:-1])
    z = (mid[:, None] + half[:, None] * nodes).ravel()
    w = (half[:, None] * weights).ravel()
    log_density = a * z - (a + b) * np.logaddexp(0.0, z) - betaln(a, b)
    return np.ascontiguousarray(z), np.ascontiguousarray(w * np.exp(log_density))


def _expit_expectation(params, shift):
    a, b = params.alpha, params.beta
    breaks = _breakpoints(a, b, (math.log(a / b), 0.0, -shift))
    nodes, weights = _gauss_legendre(PANEL_ORDER)
    return kernels.beta_logit_expit(breaks, nodes, weights, a, b, float(betaln(a, b)), shift)


def expected_updated_mean(params, x):
    """``E f(pi, x)`` for ``pi ~ beta(alpha, beta)``, with no Taylor truncation."""
    x = check_odds_ratio(x, "x")
    return _expit_expectation(params, math.log(x))


def exact_or_beta(params, p1):
    """Odds-ratio that moves the mean of a beta population exactly to ``p1``."""
    p1 = check_probability(p1, "p1")
    if p1 == params.mean:
        return 1.0
    return _log_bisect(lambda t: _expit_expectation(params, t), p1)


def auc_empirical(risks, outcomes):
    """Mann-Whitney AUC of risks against binary outcomes, ties at half credit."""
    arr = as_risks(risks)
    y = as_outcomes(outcomes, arr.size)
    order = np.argsort(arr, kind="stable")
    u, n_pos, n_neg = kernels.mann_whitney_sorted(
        np.ascontiguousarray(arr[order]), np.ascontiguousarray(y[order].astype(np.uint8))
    )
    if n_pos == 0 or n_neg == 0:
        raise DomainError("AUC needs at least one positive and one negative outcome")
    return u / (n_pos * n_neg)


def auc_beta(params):
    """Population AUC of beta-distributed risks with Bernoulli(pi) outcomes.

    Risks of events follow beta(alpha + 1, beta) and risks of non-events
    beta(alpha, beta + 1); the AUC is ``P(event risk > non-event risk)``,
    integrated over the event distribution against the regularized
    incomplete beta CDF of the non-event distribution.
    """
    a, b = params.alpha, params.beta
    z, w = logit_rule(BetaParams(a + 1.0, b), (math.log(a / (b + 1.0)),))
    cdf = betainc(a, b + 1.0, expit(z))
    return kernels.weighted_sum(np.ascontiguousarray(cdf), w)
