# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops.

Every reduction walks its input front to back with Neumaier-compensated
summation, so results are reproducible bit for bit for a given input order.
"""

from libc.math cimport exp, fabs, log1p


cdef inline double _expit(double t) nogil:
    cdef double e
    if t >= 0.0:
        e = exp(-t)
        return 1.0 / (1.0 + e)
    e = exp(t)
    return e / (1.0 + e)


def mean_expit(const double[::1] z, double shift):
    """Mean of expit(z_i + shift)."""
    cdef Py_ssize_t i, n = z.shape[0]
    cdef double s = 0.0, c = 0.0, v, t
    with nogil:
        for i in range(n):
            v = _expit(z[i] + shift)
            t = s + v
            if fabs(s) >= fabs(v):
                c += (s - t) + v
            else:
                c += (v - t) + s
            s = t
    return (s + c) / n


def weighted_sum(const double[::1] values, const double[::1] w):
    """Sum of w_i * values_i."""
    cdef Py_ssize_t i, n = values.shape[0]
    cdef double s = 0.0, c = 0.0, v, t
    with nogil:
        for i in range(n):
            v = w[i] * values[i]
            t = s + v
            if fabs(s) >= fabs(v):
                c += (s - t) + v
            else:
                c += (v - t) + s
            s = t
    return s + c


def offset_score(const double[::1] z, const double[::1] y, double a):
    """Score and information of the intercept in an offset logistic model.

    Returns ``(sum(y_i - p_i), sum(p_i * (1 - p_i)))`` with
    ``p_i = expit(z_i + a)``.
    """
    cdef Py_ssize_t i, n = z.shape[0]
    cdef double s = 0.0, sc = 0.0, f = 0.0, fc = 0.0, p, v, t
    with nogil:
        for i in range(n):
            p = _expit(z[i] + a)
            v = y[i] - p
            t = s + v
            if fabs(s) >= fabs(v):
                sc += (s - t) + v
            else:
                sc += (v - t) + s
            s = t
            # p * (1 - p) is non-negative, so the running total dominates
            v = p * (1.0 - p)
            t = f + v
            fc += (f - t) + v
            f = t
    return s + sc, f + fc


def beta_logit_expit(const double[::1] breaks, const double[::1] nodes,
                     const double[::1] weights, double alpha, double beta,
                     double log_norm, double shift):
    """Composite Gauss-Legendre estimate of E[expit(logit(pi) + shift)], pi ~ beta.

    ``breaks`` are panel edges in log-odds space, ``nodes``/``weights`` the
    Gauss-Legendre rule on [-1, 1] used on every panel and ``log_norm`` the
    log beta function of the shape parameters. The result is divided by the
    quadrature mass of the density, which cancels rounding in ``log_norm``
    for large shape parameters.
    """
    cdef Py_ssize_t i, k, n_pan = breaks.shape[0] - 1, order = nodes.shape[0]
    cdef double s = 0.0, c = 0.0, m = 0.0, mc = 0.0, v, d, t, half, mid, z, softplus
    with nogil:
        for i in range(n_pan):
            half = 0.5 * (breaks[i + 1] - breaks[i])
            mid = 0.5 * (breaks[i + 1] + breaks[i])
            for k in range(order):
                z = mid + half * nodes[k]
                if z > 0.0:
                    softplus = z + log1p(exp(-z))
                else:
                    softplus = log1p(exp(z))
                d = half * weights[k] * exp(alpha * z - (alpha + beta) * softplus - log_norm)
                v = d * _expit(z + shift)
                t = s + v
                if fabs(s) >= fabs(v):
                    c += (s - t) + v
                else:
                    c += (v - t) + s
                s = t
                # d is non-negative, so the running total dominates
                t = m + d
                mc += (m - t) + d
                m = t
    return (s + c) / (m + mc)


def mann_whitney_sorted(const double[::1] scores, const unsigned char[::1] labels):
    """Mann-Whitney U for positives over negatives.

    ``scores`` must be sorted ascending with ``labels`` permuted alongside.
    Ties earn half credit. Returns ``(u, n_pos, n_neg)``; ``u`` is exact for
    counts below 2**52.
    """
    cdef Py_ssize_t i = 0, j, n = scores.shape[0]
    cdef double u = 0.0
    cdef long long neg_below = 0, n_pos = 0, grp_pos, grp_neg
    with nogil:
        while i < n:
            j = i
            grp_pos = 0
            grp_neg = 0
            while j < n and scores[j] == scores[i]:
                if labels[j]:
                    grp_pos += 1
                else:
                    grp_neg += 1
                j += 1
            u += <double>grp_pos * neg_below + 0.5 * <double>(grp_pos * grp_neg)
            neg_below += grp_neg
            n_pos += grp_pos
            i = j
    return u, n_pos, neg_below
