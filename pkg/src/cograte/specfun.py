"""Special functions used by the detector and rate formulas.

Regularized lower incomplete gamma, the exponential integral E1 and the
Gaussian tail Q. Scalars in, scalars out; array inputs are evaluated
elementwise and come back as arrays of the same shape.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from . import kernels
from .errors import ConvergenceError, DomainError


@dataclass(frozen=True)
class Accuracy:
    """Accuracy contract for the iterative special functions.

    Series and continued fractions stop once the relative increment drops
    below ``max(abs_tol / 1000, 1e-15)``, which keeps the truncation error
    comfortably under ``abs_tol`` for results bounded by one.
    """

    abs_tol: float = 1e-12
    max_iter: int = 500

    def __post_init__(self):
        if not (self.abs_tol > 0 and math.isfinite(self.abs_tol)):
            raise DomainError(f"abs_tol must be positive, got {self.abs_tol}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise DomainError(f"max_iter must be an integer >= 1, got {self.max_iter}")

    @property
    def step_tol(self) -> float:
        return max(self.abs_tol * 1e-3, 1e-15)


DEFAULT_ACCURACY = Accuracy()


def _as_array(x, name):
    arr = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite")
    return arr


def _restore(out, shape):
    if shape == ():
        return float(out.reshape(()))
    return out.reshape(shape)


def reg_lower_gamma(a, x, accuracy: Accuracy = DEFAULT_ACCURACY):
    """Regularized lower incomplete gamma function P(a, x) = gamma(a, x) / Gamma(a).

    Uses the power series for ``x < a + 1`` and the Lentz continued fraction of
    the complement otherwise.

    Parameters
    ----------
    a : float or array_like
        Shape, strictly positive.
    x : float or array_like
        Argument, nonnegative. Broadcast against `a`.
    accuracy : Accuracy, optional

    Returns
    -------
    float or ndarray
        Values in [0, 1].

    Raises
    ------
    DomainError
        For ``a <= 0``, ``x < 0`` or non-finite input.
    ConvergenceError
        If the iteration budget is exhausted.
    """
    a_arr = _as_array(a, "a")
    x_arr = _as_array(x, "x")
    if np.any(a_arr <= 0):
        raise DomainError("shape a must be > 0")
    if np.any(x_arr < 0):
        raise DomainError("argument x must be >= 0")
    shape = np.broadcast_shapes(a_arr.shape, x_arr.shape)
    out = kernels.gammainc_lower(a_arr, x_arr, accuracy.step_tol, int(accuracy.max_iter))
    if np.any(np.isnan(out)):
        raise ConvergenceError(
            f"incomplete gamma did not converge in {accuracy.max_iter} iterations")
    np.clip(out, 0.0, 1.0, out=out)
    return _restore(out, shape)


def reg_upper_gamma(a, x, accuracy: Accuracy = DEFAULT_ACCURACY):
    """Complement Q(a, x) = 1 - P(a, x)."""
    p = reg_lower_gamma(a, x, accuracy)
    return 1.0 - p


def exp_integral_e1_scaled(x, accuracy: Accuracy = DEFAULT_ACCURACY):
    """``exp(x) * E1(x)``, finite for every positive x (no overflow for large x)."""
    x_arr = _as_array(x, "x")
    if np.any(x_arr <= 0):
        raise DomainError("E1 requires x > 0")
    out = kernels.e1_scaled(x_arr, accuracy.step_tol, int(accuracy.max_iter))
    if np.any(np.isnan(out)):
        raise ConvergenceError(f"E1 did not converge in {accuracy.max_iter} iterations")
    return _restore(out, x_arr.shape)


def exp_integral_e1(x, accuracy: Accuracy = DEFAULT_ACCURACY):
    """Exponential integral E1(x) = int_x^inf exp(-t) / t dt for x > 0.

    Underflows to 0 for large x (e.g. x = 700 gives about 1e-307).
    """
    x_arr = _as_array(x, "x")
    scaled = np.asarray(exp_integral_e1_scaled(x_arr, accuracy))
    with np.errstate(under="ignore"):
        out = scaled * np.exp(-x_arr)
    return _restore(out, x_arr.shape)


def gaussian_q(x):
    """Gaussian tail probability Q(x) = 1 - Phi(x), via erfc."""
    x_arr = _as_array(x, "x")
    out = 0.5 * erfc(x_arr / math.sqrt(2.0))
    return _restore(np.asarray(out), x_arr.shape)
