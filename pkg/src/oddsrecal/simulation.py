"""Bias of the simple and Taylor odds-ratios against the exact one, over beta populations.

Each scenario fixes the current mean risk ``p0`` and a relative change
``delta`` in calibration-in-the-large (``p1 = p0 * (1 + delta)``) and sweeps
the variance of the predicted risks. Risks are modelled as beta-distributed
with parameters from the method of moments; the exact odds-ratio and the AUC
are population quantities computed by quadrature.
"""

from __future__ import annotations

import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .cohort import population_or
from .core import DomainError, NoAdmissibleRootError, marginal_or, taylor_or
from .distributions import (
    auc_beta,
    beta_from_moments,
    exact_or_beta,
    sample_beta,
    seed_sequence,
)

logger = logging.getLogger(__name__)

DEFAULT_P0 = (0.1, 0.25, 0.5)
DEFAULT_DELTAS = (-0.5, -0.25, -0.1, 0.1, 0.25, 0.5)
DEFAULT_GRID_SIZE = 20
GRID_LO = 0.001
GRID_HI = 0.95

CSV_COLUMNS = (
    "p0",
    "delta",
    "p1",
    "variance",
    "auc",
    "or_exact",
    "or_simple",
    "or_taylor",
    "relbias_simple",
    "relbias_taylor",
)
LOG_BIAS_COLUMNS = ("logbias_simple", "logbias_taylor")
MC_COLUMNS = ("or_exact_mc",)


class SimulationWarning(UserWarning):
    """A grid point was skipped or only partially evaluated."""


def variance_grid(p0, size=DEFAULT_GRID_SIZE, lo=GRID_LO, hi=GRID_HI):
    """Evenly spaced variances between ``lo`` and ``hi`` times ``p0 * (1 - p0)``."""
    vmax = p0 * (1.0 - p0)
    return [float(v) for v in np.linspace(lo * vmax, hi * vmax, size)]


@dataclass(frozen=True)
class ScenarioConfig:
    p0: float
    delta: float
    variance_grid: tuple
    mc_n: int = 0
    seed: int = 0
    panel: int = 0

    @property
    def p1(self):
        return self.p0 * (1.0 + self.delta)

    def __post_init__(self):
        if not 0.0 < self.p0 < 1.0:
            raise DomainError(f"p0 must lie strictly between 0 and 1, got {self.p0!r}")
        if not 0.0 < self.p1 < 1.0:
            raise DomainError(
                f"p1 = p0 * (1 + delta) = {self.p1!r} must lie strictly between 0 and 1"
            )
        object.__setattr__(self, "variance_grid", tuple(float(v) for v in self.variance_grid))


@dataclass(frozen=True)
class ScenarioRow:
    p0: float
    delta: float
    p1: float
    variance: float
    auc: float
    or_exact: float
    or_simple: float
    or_taylor: float
    relbias_simple: float
    relbias_taylor: float
    panel: int = field(default=0, compare=False)
    or_exact_mc: float = math.nan

    @property
    def logbias_simple(self):
        return math.log(self.or_simple) - math.log(self.or_exact)

    @property
    def logbias_taylor(self):
        if math.isnan(self.or_taylor):
            return math.nan
        return math.log(self.or_taylor) - math.log(self.or_exact)

    def as_dict(self):
        return asdict(self)


def relative_bias(or_method, or_exact):
    return or_method / or_exact - 1.0


def evaluate_point(p0, p1, variance, delta=None, mc_n=0, seed=None, panel=0):
    """Compute one :class:`ScenarioRow`.

    Raises :class:`~oddsrecal.core.DomainError` when the beta fit fails. A
    Taylor equation without an admissible root yields ``or_taylor = nan``
    with a :class:`SimulationWarning`.
    """
    params = beta_from_moments(p0, variance)
    or_exact = exact_or_beta(params, p1)
    or_simple = marginal_or(p0, p1)
    try:
        or_taylor = taylor_or(p0, p1, variance)
    except NoAdmissibleRootError as exc:
        warnings.warn(f"p0={p0}, p1={p1}, v={variance}: {exc}", SimulationWarning, stacklevel=2)
        or_taylor = math.nan
    or_exact_mc = math.nan
    if mc_n:
        risks = sample_beta(params, mc_n, seed)
        or_exact_mc = population_or(risks, p1)
    return ScenarioRow(
        p0=p0,
        delta=p1 / p0 - 1.0 if delta is None else delta,
        p1=p1,
        variance=variance,
        auc=auc_beta(params),
        or_exact=or_exact,
        or_simple=or_simple,
        or_taylor=or_taylor,
        relbias_simple=relative_bias(or_simple, or_exact),
        relbias_taylor=relative_bias(or_taylor, or_exact),
        panel=panel,
        or_exact_mc=or_exact_mc,
    )


def _evaluate(config, index, variance):
    seed = seed_sequence(config.seed, config.panel, index) if config.mc_n else None
    try:
        return evaluate_point(
            config.p0,
            config.p1,
            variance,
            delta=config.delta,
            mc_n=config.mc_n,
            seed=seed,
            panel=config.panel,
        )
    except DomainError as exc:
        warnings.warn(
            f"skipping p0={config.p0}, delta={config.delta}, v={variance}: {exc}",
            SimulationWarning,
            stacklevel=3,
        )
        return None


def run_scenario(config, workers=1):
    """Evaluate every variance of a scenario; rows come back ordered by variance."""
    order = sorted(range(len(config.variance_grid)), key=lambda i: config.variance_grid[i])
    tasks = [(config, i, config.variance_grid[i]) for i in order]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda t: _evaluate(*t), tasks))
    else:
        rows = [_evaluate(*t) for t in tasks]
    return [r for r in rows if r is not None]


def figure1_configs(
    p0_values=DEFAULT_P0, deltas=DEFAULT_DELTAS, grid_size=DEFAULT_GRID_SIZE, mc_n=0, seed=0
):
    """Scenario configurations for every valid ``(p0, delta)`` pair, in panel order."""
    configs = []
    for p0 in p0_values:
        for delta in deltas:
            p1 = p0 * (1.0 + delta)
            if not 0.0 < p1 < 1.0:
                logger.info("skipping p0=%s delta=%s: p1=%s outside (0, 1)", p0, delta, p1)
                continue
            configs.append(
                ScenarioConfig(
                    p0=p0,
                    delta=delta,
                    variance_grid=variance_grid(p0, grid_size),
                    mc_n=mc_n,
                    seed=seed,
                    panel=len(configs),
                )
            )
    return configs


def figure1_grid(
    p0_values=DEFAULT_P0,
    deltas=DEFAULT_DELTAS,
    grid_size=DEFAULT_GRID_SIZE,
    mc_n=0,
    seed=0,
    workers=1,
):
    """Rows for the full ``p0 x delta`` design, concatenated in panel order.

    The default design (``p0`` in {0.1, 0.25, 0.5}, ``delta`` in
    {+-10%, +-25%, +-50%}, 20 variances from 0.1% to 95% of ``p0 * (1 - p0)``)
    is an inferred layout and can be overridden.
    """
    configs = figure1_configs(p0_values, deltas, grid_size, mc_n, seed)
    tasks = [(c, i, v) for c in configs for i, v in enumerate(c.variance_grid)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            evaluated = list(pool.map(lambda t: _evaluate(*t), tasks))
    else:
        evaluated = [_evaluate(*t) for t in tasks]
    rows = [r for r in evaluated if r is not None]
    rows.sort(key=lambda r: (r.panel, r.variance))
    return rows


def row_values(row, log_bias=False, mc=False):
    values = [getattr(row, name) for name in CSV_COLUMNS]
    if log_bias:
        values += [row.logbias_simple, row.logbias_taylor]
    if mc:
        values.append(row.or_exact_mc)
    return values


def columns(log_bias=False, mc=False):
    cols = list(CSV_COLUMNS)
    if log_bias:
        cols += LOG_BIAS_COLUMNS
    if mc:
        cols += MC_COLUMNS
    return cols

