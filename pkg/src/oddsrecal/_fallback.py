"""Pure-Python (numpy) versions of the compiled kernels in ``_kernels.pyx``.

Signatures and semantics match the compiled module; only the summation
order differs (numpy pairwise vs. sequential compensated), so the two
backends agree to rounding but not necessarily bit for bit.
"""

import numpy as np
from scipy.special import expit


def mean_expit(z, shift):
    return float(np.mean(expit(z + shift)))


def weighted_sum(values, w):
    return float(np.sum(w * values))


def offset_score(z, y, a):
    p = expit(z + a)
    return float(np.sum(y - p)), float(np.sum(p * (1.0 - p)))


def beta_logit_expit(breaks, nodes, weights, alpha, beta, log_norm, shift):
    half = 0.5 * np.diff(breaks)
    mid = 0.5 * (breaks[1:] + breaks[:-1])
    z = (mid[:, None] + half[:, None] * nodes).ravel()
    w = (half[:, None] * weights).ravel()
    density = np.exp(alpha * z - (alpha + beta) * np.logaddexp(0.0, z) - log_norm)
    mass = w * density
    return float(np.sum(mass * expit(z + shift)) / np.sum(mass))


def mann_whitney_sorted(scores, labels):
    pos = labels.astype(bool)
    # group boundaries of equal scores
    starts = np.flatnonzero(np.r_[True, scores[1:] != scores[:-1]])
    grp_pos = np.add.reduceat(pos.astype(np.int64), starts)
    grp_size = np.diff(np.r_[starts, scores.shape[0]])
    grp_neg = grp_size - grp_pos
    neg_below = np.cumsum(grp_neg) - grp_neg
    u = float(np.sum(grp_pos * neg_below)) + 0.5 * float(np.sum(grp_pos * grp_neg))
    return u, int(grp_pos.sum()), int(grp_neg.sum())
