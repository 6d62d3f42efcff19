"""Pure-numpy implementations of the numeric kernels.

Every function here has a twin in ``_numba`` with the same signature and
semantics. Iterative kernels freeze each element once it has converged so
that both backends follow the same per-element recurrence; elements that fail
to converge come back as NaN and the caller decides how to report that.
"""

import numpy as np
from scipy.signal import lfilter
from scipy.special import gammaln

EULER_GAMMA = 0.57721566490153286061
FPMIN = 1e-300


def _gamma_series(a, x, tol, max_iter):
    # P(a, x) for x < a + 1
    ap = a.copy()
    term = 1.0 / a
    total = term.copy()
    active = np.ones(a.shape, dtype=bool)
    for _ in range(max_iter):
        if not active.any():
            break
        ap = np.where(active, ap + 1.0, ap)
        term = np.where(active, term * x / ap, term)
        total = np.where(active, total + term, total)
        active &= np.abs(term) > np.abs(total) * tol
    out = total * np.exp(-x + a * np.log(x) - gammaln(a))
    out[active] = np.nan
    return out


def _gamma_cfrac(a, x, tol, max_iter):
    # Q(a, x) for x >= a + 1, modified Lentz
    b = x + 1.0 - a
    c = np.full(a.shape, 1.0 / FPMIN)
    d = 1.0 / b
    h = d.copy()
    active = np.ones(a.shape, dtype=bool)
    for i in range(1, max_iter + 1):
        if not active.any():
            break
        an = -i * (i - a)
        b_new = b + 2.0
        d_new = an * d + b_new
        d_new = np.where(np.abs(d_new) < FPMIN, FPMIN, d_new)
        c_new = b_new + an / c
        c_new = np.where(np.abs(c_new) < FPMIN, FPMIN, c_new)
        d_new = 1.0 / d_new
        delta = d_new * c_new
        b = np.where(active, b_new, b)
        c = np.where(active, c_new, c)
        d = np.where(active, d_new, d)
        h = np.where(active, h * delta, h)
        active &= np.abs(delta - 1.0) > tol
    out = np.exp(-x + a * np.log(x) - gammaln(a)) * h
    out[active] = np.nan
    return out


def gammainc_lower(a, x, tol, max_iter):
    """Regularized lower incomplete gamma P(a, x) over broadcast arrays."""
    a, x = np.broadcast_arrays(np.asarray(a, dtype=np.float64),
                               np.asarray(x, dtype=np.float64))
    a = a.ravel()
    x = x.ravel()
    out = np.zeros(a.shape)
    ser = (x > 0.0) & (x < a + 1.0)
    cf = (x > 0.0) & ~ser
    if ser.any():
        out[ser] = _gamma_series(a[ser], x[ser], tol, max_iter)
    if cf.any():
        out[cf] = 1.0 - _gamma_cfrac(a[cf], x[cf], tol, max_iter)
    return out


def e1_scaled(x, tol, max_iter):
    """exp(x) * E1(x) for x > 0."""
    x = np.asarray(x, dtype=np.float64).ravel()
    out = np.empty(x.shape)

    small = x <= 1.0
    if small.any():
        xs = x[small]
        total = -np.log(xs) - EULER_GAMMA
        fact = np.ones(xs.shape)
        active = np.ones(xs.shape, dtype=bool)
        for i in range(1, max_iter + 1):
            if not active.any():
                break
            fact = np.where(active, -fact * xs / i, fact)
            delta = -fact / i
            total = np.where(active, total + delta, total)
            active &= np.abs(delta) > np.abs(total) * tol
        res = np.exp(xs) * total
        res[active] = np.nan
        out[small] = res

    big = ~small
    if big.any():
        xb = x[big]
        b = xb + 1.0
        c = np.full(xb.shape, 1.0 / FPMIN)
        d = 1.0 / b
        h = d.copy()
        active = np.ones(xb.shape, dtype=bool)
        for i in range(1, max_iter + 1):
            if not active.any():
                break
            an = -float(i * i)
            b_new = b + 2.0
            d_new = 1.0 / (an * d + b_new)
            c_new = b_new + an / c
            delta = c_new * d_new
            b = np.where(active, b_new, b)
            c = np.where(active, c_new, c)
            d = np.where(active, d_new, d)
            h = np.where(active, h * delta, h)
            active &= np.abs(delta - 1.0) > tol
        h[active] = np.nan
        out[big] = h
    return out


def expected_log(gamma, guard, tol, max_iter):
    """E[ln(1 + gamma * X)] for X ~ Exp(1), elementwise."""
    g = np.asarray(gamma, dtype=np.float64).ravel()
    out = np.zeros(g.shape)
    tiny = (g > 0.0) & (g < guard)
    out[tiny] = g[tiny] - g[tiny] ** 2
    reg = g >= guard
    if reg.any():
        out[reg] = e1_scaled(1.0 / g[reg], tol, max_iter)
    return out


def energy_pair(n_re, n_im, s_re, s_im):
    """Row means of |n|^2 and |n + s|^2 for (trials, NB) component arrays."""
    y0 = np.mean(n_re * n_re + n_im * n_im, axis=1)
    y1_re = n_re + s_re
    y1_im = n_im + s_im
    y1 = np.mean(y1_re * y1_re + y1_im * y1_im, axis=1)
    return y0, y1


def ar1_recursion(z, alpha, h0):
    """h[0] = h0, h[k] = alpha * h[k-1] + z[k] for complex z."""
    z = np.asarray(z, dtype=np.complex128).copy()
    z[0] = h0
    return lfilter([1.0], [1.0, -alpha], z)
