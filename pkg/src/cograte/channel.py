"""Gauss-Markov fading: spectrum, correlation, aliasing and sample paths."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from . import kernels
from .errors import DomainError

QUAD_ABS_TOL = 1e-10
_INT_TOL = 1e-9


def _integral_count(value, name):
    n = round(value)
    if n < 0 or abs(value - n) > _INT_TOL * max(1.0, abs(value)):
        raise DomainError(f"{name} = {value!r} must be a nonnegative integer")
    return int(n)


@dataclass(frozen=True)
class GaussMarkov:
    """First-order autoregressive fading h_k = alpha h_{k-1} + z_k.

    The innovations have variance (1 - alpha^2) * fading_var so that the
    process is stationary with variance ``fading_var``.
    """

    alpha: float
    fading_var: float = 1.0

    def __post_init__(self):
        if not (0.0 <= self.alpha < 1.0):
            raise DomainError(f"alpha must lie in [0, 1), got {self.alpha}")
        if not (self.fading_var > 0 and math.isfinite(self.fading_var)):
            raise DomainError(f"fading_var must be positive, got {self.fading_var}")

    @property
    def innovation_var(self) -> float:
        return (1.0 - self.alpha ** 2) * self.fading_var


@dataclass(frozen=True)
class FrameGeometry:
    """Block timing: bandwidth (Hz), block length T and sensing length N (s).

    ``tb`` and ``nb`` are the symbol counts T*B and N*B; both must be integers
    and the block must leave room for one pilot and at least one data symbol.
    """

    bandwidth: float
    block_len: float
    sensing_len: float
    tb: int = field(init=False, repr=False, compare=False)
    nb: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        for name in ("bandwidth", "block_len"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise DomainError(f"{name} must be positive, got {value}")
        if not (self.sensing_len >= 0 and math.isfinite(self.sensing_len)):
            raise DomainError(f"sensing_len must be >= 0, got {self.sensing_len}")
        tb = _integral_count(self.block_len * self.bandwidth, "T*B")
        nb = _integral_count(self.sensing_len * self.bandwidth, "N*B")
        if tb < 1:
            raise DomainError("T*B must be a positive integer")
        if tb - nb < 2:
            raise DomainError(
                f"(T-N)*B = {tb - nb} leaves no room for a pilot and a data symbol")
        object.__setattr__(self, "tb", tb)
        object.__setattr__(self, "nb", nb)

    @property
    def data_count(self) -> int:
        """Data symbols per block, (T - N) B - 1."""
        return self.tb - self.nb - 1


def _psd_raw(gm: GaussMarkov, w):
    a = gm.alpha
    return (1.0 - a * a) * gm.fading_var / (1.0 + a * a - 2.0 * a * np.cos(w))


def _check_band(w):
    w_arr = np.asarray(w, dtype=np.float64)
    if np.any(~np.isfinite(w_arr)) or np.any(np.abs(w_arr) > math.pi * (1 + 1e-12)):
        raise DomainError("frequency must lie in [-pi, pi]")
    return w_arr


def psd(gm: GaussMarkov, w):
    """Power spectral density (1-a^2) s^2 / (1 + a^2 - 2a cos w) on [-pi, pi]."""
    w_arr = _check_band(w)
    out = _psd_raw(gm, w_arr)
    return float(out) if out.ndim == 0 else out


def autocorrelation(gm: GaussMarkov, lag):
    """r_h[m] = fading_var * alpha^|m|."""
    lag_arr = np.abs(np.asarray(lag))
    out = gm.fading_var * np.power(gm.alpha, lag_arr, dtype=np.float64)
    return float(out) if np.ndim(out) == 0 else out


def undersampled_spectrum(gm: GaussMarkov, spacing: int, m: int, w):
    """Spectrum of the decimated cross-correlation r_h[k*spacing + m].

    Sums the ``spacing`` aliased copies::

        (1/TB) sum_i exp(j m (w - 2 pi i)/TB) S_h((w - 2 pi i)/TB)

    For ``m = 0`` the result is real and nonnegative; it is returned as a
    complex array in every case.
    """
    if int(spacing) != spacing or spacing < 1:
        raise DomainError(f"spacing must be a positive integer, got {spacing}")
    if int(m) != m or not (0 <= m < spacing):
        raise DomainError(f"offset m must satisfy 0 <= m < {spacing}, got {m}")
    w_arr = _check_band(w)
    scalar = w_arr.ndim == 0
    w_flat = np.atleast_1d(w_arr)
    theta = (w_flat[None, :] - 2.0 * math.pi * np.arange(spacing)[:, None]) / spacing
    out = (np.exp(1j * m * theta) * _psd_raw(gm, theta)).sum(axis=0) / spacing
    if m == 0:
        out = out.real + 0j
    return complex(out[0]) if scalar else out.reshape(w_arr.shape)


def band_power_fraction(gm: GaussMarkov, band_halfwidth: float) -> float:
    """Share of the fading power inside [-b, b], by adaptive quadrature."""
    b = float(band_halfwidth)
    if not (0.0 < b <= math.pi * (1 + 1e-12)):
        raise DomainError(f"band half-width must lie in (0, pi], got {b}")
    b = min(b, math.pi)
    val, _ = quad(lambda w: _psd_raw(gm, w), 0.0, b,
                  epsabs=QUAD_ABS_TOL, epsrel=1e-12, limit=200)
    return min(1.0, 2.0 * val / (2.0 * math.pi) / gm.fading_var)


def generate_path(gm: GaussMarkov, n: int, seed: int) -> np.ndarray:
    """Stationary complex Gauss-Markov sample path of length n.

    h_0 is drawn from CN(0, fading_var) and the innovations from
    CN(0, (1 - alpha^2) fading_var). Uses a Philox generator keyed by `seed`.
    """
    if int(n) != n or n < 1:
        raise DomainError(f"path length must be a positive integer, got {n}")
    rng = np.random.Generator(np.random.Philox(seed))
    z = rng.standard_normal((int(n), 2)) @ np.array([1.0, 1j])
    z *= math.sqrt(gm.innovation_var / 2.0)
    h0 = z[0] * math.sqrt(gm.fading_var / gm.innovation_var)
    return kernels.ar1_recursion(z, gm.alpha, h0)
