"""Backend selection for the numerical inner loops.

The compiled extension ``oddsrecal._kernels`` is used when it has been
built; otherwise the numpy implementations in ``oddsrecal._fallback`` are
used. Setting ``ODDSRECAL_PURE_PYTHON=1`` forces the fallback.

Attributes
----------
BACKEND : str
    ``"compiled"`` or ``"python"``.
"""

import os

from . import _fallback

if os.environ.get("ODDSRECAL_PURE_PYTHON", "") not in ("", "0"):
    _impl = _fallback
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "compiled"
    except ImportError:
        _impl = _fallback
        BACKEND = "python"

mean_expit = _impl.mean_expit
weighted_sum = _impl.weighted_sum
beta_logit_expit = _impl.beta_logit_expit
offset_score = _impl.offset_score
mann_whitney_sorted = _impl.mann_whitney_sorted


def available_backends():
    """Return a mapping of backend name to kernel module for every importable backend."""
    backends = {"python": _fallback}
    try:
        from . import _kernels
    except ImportError:
        pass
    else:
        backends["compiled"] = _kernels
    return backends
