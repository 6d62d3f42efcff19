"""Numba-compiled twins of the kernels in ``_numpy``.

Same recurrences, same stopping rules, same NaN-on-failure convention; only
the execution model differs (scalar loops instead of masked array sweeps).
"""

import math

import numpy as np
from numba import njit

EULER_GAMMA = 0.57721566490153286061
FPMIN = 1e-300


@njit(cache=True)
def _p_scalar(a, x, tol, max_iter):
    if x <= 0.0:
        return 0.0
    gln = math.lgamma(a)
    if x < a + 1.0:
        ap = a
        term = 1.0 / a
        total = term
        for _ in range(max_iter):
            ap += 1.0
            term *= x / ap
            total += term
            if abs(term) <= abs(total) * tol:
                return total * math.exp(-x + a * math.log(x) - gln)
        return np.nan
    b = x + 1.0 - a
    c = 1.0 / FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, max_iter + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < FPMIN:
            d = FPMIN
        c = b + an / c
        if abs(c) < FPMIN:
            c = FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) <= tol:
            return 1.0 - math.exp(-x + a * math.log(x) - gln) * h
    return np.nan


@njit(cache=True)
def _e1s_scalar(x, tol, max_iter):
    if x <= 1.0:
        total = -math.log(x) - EULER_GAMMA
        fact = 1.0
        for i in range(1, max_iter + 1):
            fact *= -x / i
            delta = -fact / i
            total += delta
            if abs(delta) <= abs(total) * tol:
                return math.exp(x) * total
        return np.nan
    b = x + 1.0
    c = 1.0 / FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, max_iter + 1):
        an = -float(i * i)
        b += 2.0
        d = 1.0 / (an * d + b)
        c = b + an / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) <= tol:
            return h
    return np.nan


@njit(cache=True)
def _gammainc_lower(a, x, tol, max_iter):
    out = np.empty(a.size)
    for i in range(a.size):
        out[i] = _p_scalar(a[i], x[i], tol, max_iter)
    return out


def gammainc_lower(a, x, tol, max_iter):
    """Regularized lower incomplete gamma P(a, x) over broadcast arrays."""
    a, x = np.broadcast_arrays(np.asarray(a, dtype=np.float64),
                               np.asarray(x, dtype=np.float64))
    return _gammainc_lower(np.ascontiguousarray(a.ravel()),
                           np.ascontiguousarray(x.ravel()), tol, max_iter)


@njit(cache=True)
def _e1_scaled(x, tol, max_iter):
    out = np.empty(x.size)
    for i in range(x.size):
        out[i] = _e1s_scalar(x[i], tol, max_iter)
    return out


def e1_scaled(x, tol, max_iter):
    """exp(x) * E1(x) for x > 0."""
    x = np.ascontiguousarray(np.asarray(x, dtype=np.float64).ravel())
    return _e1_scaled(x, tol, max_iter)


@njit(cache=True)
def _expected_log(g, guard, tol, max_iter):
    out = np.empty(g.size)
    for i in range(g.size):
        gi = g[i]
        if gi <= 0.0:
            out[i] = 0.0
        elif gi < guard:
            out[i] = gi - gi * gi
        else:
            out[i] = _e1s_scalar(1.0 / gi, tol, max_iter)
    return out


def expected_log(gamma, guard, tol, max_iter):
    """E[ln(1 + gamma * X)] for X ~ Exp(1), elementwise."""
    g = np.ascontiguousarray(np.asarray(gamma, dtype=np.float64).ravel())
    return _expected_log(g, guard, tol, max_iter)


@njit(cache=True)
def energy_pair(n_re, n_im, s_re, s_im):
    """Row means of |n|^2 and |n + s|^2 for (trials, NB) component arrays."""
    trials, nb = n_re.shape
    y0 = np.empty(trials)
    y1 = np.empty(trials)
    for t in range(trials):
        acc0 = 0.0
        acc1 = 0.0
        for k in range(nb):
            nr = n_re[t, k]
            ni = n_im[t, k]
            acc0 += nr * nr + ni * ni
            yr = nr + s_re[t, k]
            yi = ni + s_im[t, k]
            acc1 += yr * yr + yi * yi
        y0[t] = acc0 / nb
        y1[t] = acc1 / nb
    return y0, y1


@njit(cache=True)
def _ar1(z, alpha, h0):
    h = np.empty_like(z)
    h[0] = h0
    for k in range(1, z.size):
        h[k] = alpha * h[k - 1] + z[k]
    return h


def ar1_recursion(z, alpha, h0):
    """h[0] = h0, h[k] = alpha * h[k-1] + z[k] for complex z."""
    z = np.ascontiguousarray(np.asarray(z, dtype=np.complex128))
    return _ar1(z, float(alpha), complex(h0))
