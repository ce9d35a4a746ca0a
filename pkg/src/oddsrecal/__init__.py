"""Recalibration of binary risk predictions by a fixed odds-ratio.

The simple (marginal) odds-ratio, the Taylor/cubic correction that accounts
for the spread of predicted risks, and the exact conditional odds-ratio from
individual-level data, plus a simulation harness comparing them over
beta-distributed risk populations.
"""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    CalibrationTask,
    CubicPoly,
    DomainError,
    MultipleRootsWarning,
    NoAdmissibleRootError,
    apply_or,
    cubic_coefficients,
    marginal_or,
    select_root,
    solve_cubic_real,
    taylor_lhs,
    taylor_or,
    taylor_or_numeric,
)
from .cohort import (  # noqa: E402
    ConvergenceError,
    DegenerateOutcomeError,
    MomentSummary,
    apply_update,
    conditional_or_exact,
    moments,
    population_or,
)
from .distributions import (  # noqa: E402
    BetaParams,
    auc_beta,
    auc_empirical,
    beta_from_moments,
    exact_or_beta,
    expected_updated_mean,
    sample_beta,
)
from .kernels import BACKEND  # noqa: E402
