"""Odds-ratio updating of predicted risks and recovery of the correcting odds-ratio.

The update applied to a predicted risk ``pi`` by an odds-ratio ``x`` is

    f(pi, x) = pi * x / (1 - pi + pi * x)

The marginal (simple) odds-ratio solves ``f(E[pi], x) = p1``. Because ``f``
is convex in ``pi`` for ``x < 1`` and concave for ``x > 1``, this always
under-corrects. The second-order expansion of ``E f(pi, x)`` around the mean
gives a cubic in ``x`` whose admissible root is the Taylor odds-ratio.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

VARIANCE_MESSAGE = "Variance cannot be larger than p0*(1-p0)."

_IMAG_TOL = 1e-9
_LEADING_TOL = 1e-14


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class NoAdmissibleRootError(ValueError):
    """No candidate odds-ratio survived root filtering."""

    def __init__(self, message, roots=()):
        super().__init__(message)
        self.roots = list(roots)


class MultipleRootsWarning(UserWarning):
    """More than one admissible root survived filtering."""


def check_probability(value, name="probability"):
    value = float(value)
    if not 0.0 < value < 1.0:
        raise DomainError(f"{name} must lie strictly between 0 and 1, got {value!r}")
    return value


def check_odds_ratio(value, name="odds-ratio"):
    value = float(value)
    if not (value > 0.0 and math.isfinite(value)):
        raise DomainError(f"{name} must be positive and finite, got {value!r}")
    return value


@dataclass(frozen=True)
class CalibrationTask:
    """Summary statistics that define a recalibration problem.

    Attributes:
        p0: Mean of the predicted risks.
        p1: Target mean risk.
        v: Variance of the predicted risks.
    """

    p0: float
    p1: float
    v: float = 0.0

    def __post_init__(self):
        check_probability(self.p0, "p0")
        check_probability(self.p1, "p1")
        if not (self.v >= 0.0 and math.isfinite(self.v)):
            raise DomainError(f"variance must be finite and non-negative, got {self.v!r}")
        if self.v > self.p0 * (1.0 - self.p0):
            raise DomainError(VARIANCE_MESSAGE)


@dataclass(frozen=True)
class CubicPoly:
    """Coefficients of ``A x^3 + B x^2 + C x + D``."""

    A: float
    B: float
    C: float
    D: float

    def __post_init__(self):
        if self.A == 0.0 and self.B == 0.0 and self.C == 0.0 and self.D == 0.0:
            raise DomainError("all cubic coefficients are zero")

    def __call__(self, x):
        return ((self.A * x + self.B) * x + self.C) * x + self.D

    def derivative(self, x):
        return (3.0 * self.A * x + 2.0 * self.B) * x + self.C

    @property
    def scale(self):
        return max(1.0, abs(self.A), abs(self.B), abs(self.C), abs(self.D))


def apply_or(pi, x):
    """Update a predicted risk by an odds-ratio.

    >>> round(apply_or(1 / 7, 2 / 3), 12)
    0.1
    """
    pi = check_probability(pi, "pi")
    x = check_odds_ratio(x, "x")
    return pi * x / (1.0 - pi + pi * x)


def odds(p):
    return p / (1.0 - p)


def marginal_or(p0, p1):
    """Odds of the target mean risk over odds of the current mean risk."""
    p0 = check_probability(p0, "p0")
    p1 = check_probability(p1, "p1")
    if p0 == p1:
        return 1.0
    return odds(p1) / odds(p0)


def taylor_lhs(task, x):
    """Second-order approximation of ``E f(pi, x)`` about ``pi = p0``."""
    x = check_odds_ratio(x, "x")
    p0, v = task.p0, task.v
    den = 1.0 - (1.0 - x) * p0
    if den <= 0.0:
        raise DomainError(f"1 - (1 - x) * p0 must be positive, got {den!r}")
    return x * p0 / den + (1.0 - x) * x * v / den**3


def cubic_coefficients(task):
    """Cubic in ``x`` whose roots solve ``taylor_lhs(task, x) = p1``."""
    p0, p1, v = task.p0, task.p1, task.v
    # factored forms of the expanded coefficients; no cancellation near p0 = 1
    q0, q1 = 1.0 - p0, 1.0 - p1
    return CubicPoly(
        A=p0**3 * q1,
        B=p0 * p0 * q0 * (2.0 - 3.0 * p1) - v,
        C=p0 * q0 * q0 * (1.0 - 3.0 * p1) + v,
        D=-p1 * q0**3,
    )


def _polish(poly, r):
    # two Newton steps; the closed form loses a few digits near repeated roots
    for _ in range(2):
        d = poly.derivative(r)
        if d == 0.0:
            break
        step = poly(r) / d
        if not math.isfinite(step):
            break
        r_new = r - step
        if abs(poly(r_new)) > abs(poly(r)):
            break
        r = r_new
    return r


def _collapse(roots, poly):
    out = []
    for r in sorted(roots):
        if out and abs(r - out[-1]) <= 1e-9 * max(1.0, abs(r)):
            # keep the representative with the smaller residual
            if abs(poly(r)) < abs(poly(out[-1])):
                out[-1] = r
            continue
        out.append(r)
    return out


def _quadratic_roots(a, b, c):
    if a == 0.0:
        return [] if b == 0.0 else [-c / b]
    re_part = -b / (2.0 * a)
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        im_part = math.sqrt(-disc) / (2.0 * abs(a))
        if im_part <= _IMAG_TOL * max(1.0, abs(re_part)):
            return [re_part]
        return []
    q = -0.5 * (b + math.copysign(math.sqrt(disc), b))
    if q == 0.0:
        return [re_part]
    return [q / a, c / q]


def solve_cubic_real(poly):
    """Real roots of a cubic by the closed-form (Cardano / trigonometric) method.

    Falls back to the quadratic formula when the leading coefficient is
    negligible. Complex-conjugate pairs whose imaginary part exceeds ``1e-9``
    (relative to the root magnitude) are excluded; repeated roots are
    reported once.

    Raises:
        DomainError: all coefficients are zero.
    """
    if not isinstance(poly, CubicPoly):
        poly = CubicPoly(*poly)
    A, B, C, D = poly.A, poly.B, poly.C, poly.D
    if abs(A) < _LEADING_TOL * max(abs(B), abs(C), abs(D)):
        if abs(B) < _LEADING_TOL * max(abs(C), abs(D)):
            roots = [] if C == 0.0 else [-D / C]
        else:
            roots = _quadratic_roots(B, C, D)
        return _collapse([_polish(poly, r) for r in roots], poly)

    b, c, d = B / A, C / A, D / A
    shift = -b / 3.0
    p = c - b * b / 3.0
    q = 2.0 * b**3 / 27.0 - b * c / 3.0 + d
    half_q = q / 2.0
    third_p = p / 3.0
    disc = half_q * half_q + third_p**3

    roots = []
    if disc < 0.0:
        # three distinct real roots
        m = 2.0 * math.sqrt(-third_p)
        arg = 3.0 * q / (p * m)
        theta = math.acos(max(-1.0, min(1.0, arg))) / 3.0
        for k in range(3):
            roots.append(m * math.cos(theta - 2.0 * math.pi * k / 3.0) + shift)
    else:
        sq = math.sqrt(disc)
        u = math.copysign(abs(-half_q + sq) ** (1.0 / 3.0), -half_q + sq)
        v = math.copysign(abs(-half_q - sq) ** (1.0 / 3.0), -half_q - sq)
        roots.append(u + v + shift)
        pair = complex(-(u + v) / 2.0 + shift, math.sqrt(3.0) / 2.0 * (u - v))
        if abs(pair.imag) <= _IMAG_TOL * max(1.0, abs(pair)):
            roots.append(pair.real)
    roots = [_polish(poly, r) for r in roots]
    return _collapse(roots, poly)


def select_root(roots, p0, p1):
    """Pick the admissible correcting odds-ratio from candidate roots.

    Roots that are non-positive or fall on the wrong side of 1 relative to
    the direction of the prevalence shift are dropped. If several survive,
    the one closest to the marginal odds-ratio on the log scale is returned
    and a :class:`MultipleRootsWarning` is issued.

    Raises:
        NoAdmissibleRootError: nothing survives filtering.
    """
    p0 = check_probability(p0, "p0")
    p1 = check_probability(p1, "p1")
    if p0 == p1:
        return 1.0
    direction = math.copysign(1.0, math.log(p1 / p0))
    survivors = [
        r for r in roots if r > 0.0 and math.log(r) != 0.0 and math.copysign(1.0, math.log(r)) == direction
    ]
    if not survivors:
        raise NoAdmissibleRootError(
            f"no admissible odds-ratio among roots {list(roots)!r} for p0={p0!r}, p1={p1!r}", roots
        )
    if len(survivors) == 1:
        return survivors[0]
    target = math.log(marginal_or(p0, p1))
    best = min(survivors, key=lambda r: abs(math.log(r) - target))
    warnings.warn(
        f"{len(survivors)} admissible roots {survivors!r}; chose {best!r} (closest to the marginal odds-ratio)",
        MultipleRootsWarning,
        stacklevel=2,
    )
    return best


def _as_task(task_or_p0, p1=None, v=None):
    if isinstance(task_or_p0, CalibrationTask):
        return task_or_p0
    return CalibrationTask(task_or_p0, p1, 0.0 if v is None else v)


def taylor_or(task, p1=None, v=None):
    """Correcting odds-ratio from the mean and variance of predicted risks.

    Accepts either a :class:`CalibrationTask` or ``(p0, p1, v)``.

    >>> round(taylor_or(0.577, 0.361, 0.025), 3)
    0.375
    """
    task = _as_task(task, p1, v)
    if task.p0 == task.p1:
        return 1.0
    if task.v == 0.0:
        return marginal_or(task.p0, task.p1)
    roots = solve_cubic_real(cubic_coefficients(task))
    return select_root(roots, task.p0, task.p1)


def _bisect(g, lo, hi, xtol, maxiter=400):
    glo = g(lo)
    for _ in range(maxiter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= xtol or mid in (lo, hi):
            break
        gm = g(mid)
        if gm == 0.0:
            return mid
        if (gm < 0.0) == (glo < 0.0):
            lo, glo = mid, gm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def taylor_or_numeric(task, p1=None, v=None, grid_size=4000):
    """Taylor odds-ratio by bracketing root search on the un-expanded equation.

    Scans ``taylor_lhs(task, x) - p1`` (evaluated in a cancellation-free
    arrangement) on a log-spaced grid between
    ``min(1, m) / 1000`` and ``max(1, m) * 1000`` (``m`` the marginal
    odds-ratio), keeping only the side of 1 implied by the shift, and refines
    every sign change by bisection to ``1e-12`` in ``x``. The same selection
    rule as :func:`select_root` resolves several brackets.

    Raises:
        NoAdmissibleRootError: no sign change in the bracket.
    """
    task = _as_task(task, p1, v)
    p0, p1 = task.p0, task.p1
    if p0 == p1:
        return 1.0
    m = marginal_or(p0, p1)
    if p1 < p0:
        lo, hi = min(1.0, m) / 1e3, 1.0
    else:
        lo, hi = 1.0, max(1.0, m) * 1e3
    grid = np.geomspace(lo, hi, grid_size)
    q0, q1, v = 1.0 - p0, 1.0 - p1, task.v

    # taylor_lhs - p1, written so the two leading terms cancel only at the scale of min(p1, 1 - p1)
    def g(x):
        den = q0 + x * p0
        tail = (1.0 - x) * x * v / den**3
        if p1 <= 0.5:
            return x * p0 / den - p1 + tail
        return q1 - q0 / den + tail

    values = g(grid)
    roots = list(grid[values == 0.0])
    neg = values < 0.0
    crossings = np.flatnonzero((neg[:-1] != neg[1:]) & (values[:-1] != 0.0) & (values[1:] != 0.0))
    for i in crossings:
        roots.append(_bisect(g, float(grid[i]), float(grid[i + 1]), 1e-12))
    # open at 1: x = 1 is the trivial root of p1 = p0 only
    roots = [float(r) for r in roots if r != 1.0]
    if not roots:
        raise NoAdmissibleRootError(
            f"no sign change of the Taylor equation in [{lo!r}, {hi!r}] for p0={p0!r}, p1={p1!r}"
        )
    return select_root(roots, p0, p1)
