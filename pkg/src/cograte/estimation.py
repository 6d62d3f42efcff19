"""Pilot-based Wiener estimation of Gauss-Markov fading.

Pilots arrive once per block, every TB symbols, so the estimator sees the
fading process decimated by TB. The flat (offset-independent) error variances
below assume the decimated spectrum is alias-free, in which case

    noncausal: s_h^2 - (P_t / 2pi) int_{-pi/TB}^{pi/TB} S^2 / (P_t S + TB s) dw
    causal:    noncausal + (P_t / (2pi r_e TB^2)) int_{-pi}^{pi} |{S(e^{jw/TB}) / L*}_-|^2 dw

with s = sigma_n^2 + rho sigma_sp^2 and the Gauss-Markov factorization
constants (c, r_e, v). ``noncausal_mmse_per_m`` keeps every aliased copy and
is exact for the decimated process; ``fir_wiener_oracle`` solves the normal
equations in the time domain and serves as the independent check.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .channel import GaussMarkov, _psd_raw, autocorrelation, generate_path, undersampled_spectrum
from .errors import DomainError

QUAD_OPTS = dict(epsabs=1e-12, epsrel=1e-12, limit=400)


class EstimatorKind(enum.Enum):
    NONCAUSAL = "noncausal"
    CAUSAL = "causal"

    @classmethod
    def parse(cls, value) -> EstimatorKind:
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise DomainError(f"unknown estimator kind {value!r}") from None


@dataclass(frozen=True)
class EstimationContext:
    """Everything the MMSE formulas need: fading model, pilot spacing TB,
    pilot power and the training-phase noise."""

    gm: GaussMarkov
    spacing: int
    pilot_power: float
    noise_var: float = 1.0
    interference_var: float = 0.0
    activity_prob: float = 0.0

    def __post_init__(self):
        if int(self.spacing) != self.spacing or self.spacing < 1:
            raise DomainError(f"pilot spacing TB must be a positive integer, got {self.spacing}")
        if not (self.pilot_power >= 0 and math.isfinite(self.pilot_power)):
            raise DomainError(f"pilot power must be finite and >= 0, got {self.pilot_power}")
        if not (0.0 <= self.activity_prob <= 1.0):
            raise DomainError(f"activity_prob must lie in [0, 1], got {self.activity_prob}")
        if self.noise_var < 0 or self.interference_var < 0:
            raise DomainError("noise variances must be nonnegative")
        if not self.training_noise > 0:
            raise DomainError("training noise sigma_n^2 + rho sigma_sp^2 must be positive")

    @classmethod
    def from_params(cls, params, pilot_power: float) -> EstimationContext:
        return cls(params.gm, params.tb, float(pilot_power), params.noise_var,
                   params.interference_var, params.activity_prob)

    @property
    def training_noise(self) -> float:
        return self.noise_var + self.activity_prob * self.interference_var


@dataclass(frozen=True)
class FactorizationConstants:
    c: float
    r_e: float
    v: float


def factorization_constants(ctx: EstimationContext, check_points: int = 64) -> FactorizationConstants:
    """Canonical factorization constants of the alias-free pilot spectrum.

    Returns (c, r_e, v) such that, with theta = w / TB,

        P_t S_h(theta) / TB + s = r_e |1 - v e^{-j theta}|^2 / |1 - alpha e^{-j theta}|^2.

    The identity is verified on `check_points` frequencies before returning.
    """
    a = ctx.gm.alpha
    s = ctx.training_noise
    c = ctx.pilot_power / ctx.spacing * ctx.gm.innovation_var + (1.0 + a * a) * s
    disc = (c - 2.0 * a * s) * (c + 2.0 * a * s)
    if disc < 0:
        raise ArithmeticError(f"negative discriminant {disc} in spectral factorization")
    r_e = 0.5 * (c + math.sqrt(disc))
    v = a * s / r_e
    consts = FactorizationConstants(c, r_e, v)
    if check_points:
        w = np.linspace(-math.pi, math.pi, check_points)
        theta = w / ctx.spacing
        lhs = ctx.pilot_power * _psd_raw(ctx.gm, theta) / ctx.spacing + s
        zinv = np.exp(-1j * theta)
        rhs = r_e * np.abs(1.0 - v * zinv) ** 2 / np.abs(1.0 - a * zinv) ** 2
        err = np.max(np.abs(rhs - lhs) / np.abs(lhs))
        if err > 1e-8:
            raise ArithmeticError(f"spectral factorization check failed (relative error {err:.3g})")
    return consts


def _noncausal_gain(ctx: EstimationContext) -> float:
    p, tb = ctx.pilot_power, ctx.spacing
    ts = tb * ctx.training_noise

    def integrand(w):
        s_w = _psd_raw(ctx.gm, w)
        return s_w * s_w / (p * s_w + ts)

    # even integrand, peaked at w = 0
    half, _ = quad(integrand, 0.0, math.pi / tb, **QUAD_OPTS)
    return p / (2.0 * math.pi) * 2.0 * half


def noncausal_mmse(ctx: EstimationContext) -> float:
    """Alias-free noncausal Wiener error variance (independent of the data offset)."""
    sh2 = ctx.gm.fading_var
    if ctx.pilot_power == 0:
        return sh2
    return min(sh2, max(0.0, sh2 - _noncausal_gain(ctx)))


def anticausal_gain(ctx: EstimationContext) -> float:
    """Magnitude (1 - alpha^2) sigma_h^2 v / (1 - alpha v) of the anti-causal part."""
    v = factorization_constants(ctx).v
    a = ctx.gm.alpha
    return ctx.gm.innovation_var * v / (1.0 - a * v)


def causal_penalty(ctx: EstimationContext) -> float:
    """Extra error of the causal filter over the noncausal one.

    With K the anti-causal gain, the squared anti-causal part is
    K^2 / (1 + v^2 - 2 v cos(w/TB)); integrating it over w in [-pi, pi]
    gives (4 TB / (1 - v^2)) arctan((1+v)/(1-v) tan(pi / (2 TB))).
    """
    if ctx.pilot_power == 0:
        return 0.0
    consts = factorization_constants(ctx)
    v, tb = consts.v, ctx.spacing
    if v == 0:
        return 0.0
    k = anticausal_gain(ctx)
    arc = math.atan((1.0 + v) / (1.0 - v) * math.tan(math.pi / (2.0 * tb)))
    integral = 4.0 * tb / (1.0 - v * v) * arc
    return ctx.pilot_power * k * k * integral / (2.0 * math.pi * consts.r_e * tb * tb)


def causal_mmse(ctx: EstimationContext) -> float:
    """Alias-free causal Wiener error variance for Gauss-Markov fading."""
    sh2 = ctx.gm.fading_var
    if ctx.pilot_power == 0:
        return sh2
    return min(sh2, noncausal_mmse(ctx) + causal_penalty(ctx))


def mmse(ctx: EstimationContext, kind) -> float:
    kind = EstimatorKind.parse(kind)
    return noncausal_mmse(ctx) if kind is EstimatorKind.NONCAUSAL else causal_mmse(ctx)


def noncausal_mmse_per_m(ctx: EstimationContext, m: int) -> float:
    """Noncausal error variance at offset m from the pilot, aliasing included.

        s_h^2 - (P_t/2pi) int_{-pi}^{pi} |S_{h,m}|^2 / (P_t S_{h,0} + s) dw
    """
    tb = ctx.spacing
    if int(m) != m or not (0 <= m < tb):
        raise DomainError(f"offset m must satisfy 0 <= m < TB = {tb}, got {m}")
    sh2 = ctx.gm.fading_var
    if ctx.pilot_power == 0:
        return sh2
    p, s = ctx.pilot_power, ctx.training_noise

    def integrand(w):
        s_m = undersampled_spectrum(ctx.gm, tb, int(m), w)
        s_0 = undersampled_spectrum(ctx.gm, tb, 0, w).real if m else s_m.real
        return abs(s_m) ** 2 / (p * s_0 + s)

    # |S_{h,m}|^2 is even in w
    half, _ = quad(integrand, 0.0, math.pi, **QUAD_OPTS)
    return min(sh2, max(0.0, sh2 - p / math.pi * half))


def estimate_variance(fading_var: float, error_var: float) -> float:
    """Orthogonality: variance of the estimate = sigma_h^2 - error variance."""
    if not (0.0 <= error_var <= fading_var):
        raise DomainError(f"error variance {error_var} outside [0, {fading_var}]")
    return fading_var - error_var


# -- time-domain oracle -------------------------------------------------------

def bandlimited_autocorrelation(gm: GaussMarkov, spacing: int, lags) -> np.ndarray:
    """Autocorrelation of the fading component inside |w| <= pi / spacing.

    Uses the expansion S_h(w) = sigma_h^2 sum_k alpha^|k| e^{-jkw}, giving
    r[n] = sigma_h^2 sum_k alpha^|k| sin(pi (n-k)/TB) / (pi (n-k)).
    """
    lags = np.asarray(lags, dtype=np.float64)
    if gm.alpha > 0:
        k_max = min(int(math.ceil(math.log(1e-18) / math.log(gm.alpha))), 200_000)
    else:
        k_max = 0
    k = np.arange(-k_max, k_max + 1, dtype=np.float64)
    weights = np.power(gm.alpha, np.abs(k))
    flat = lags.ravel()
    out = np.empty(flat.size)
    step = max(1, 4_000_000 // k.size)
    for start in range(0, flat.size, step):
        d = flat[start:start + step, None] - k[None, :]
        out[start:start + step] = np.sinc(d / spacing) @ weights / spacing
    return gm.fading_var * out.reshape(lags.shape)


def _tap_offsets(kind: EstimatorKind, n_taps: int) -> np.ndarray:
    if kind is EstimatorKind.CAUSAL:
        return np.arange(-(n_taps - 1), 1)
    past = n_taps // 2
    return np.arange(-past, n_taps - past)


def _solve_normal_equations(cov, cross):
    try:
        factor = cho_factor(cov, lower=True, check_finite=False)
    except LinAlgError:
        warnings.warn("singular pilot covariance; applying 1e-12 diagonal loading",
                      RuntimeWarning, stacklevel=3)
        factor = cho_factor(cov + 1e-12 * np.eye(cov.shape[0]), lower=True)
    return cho_solve(factor, cross, check_finite=False)


def fir_wiener_weights(ctx: EstimationContext, kind, n_taps: int, offsets, process: str = "full"):
    """Finite Wiener filter from pilots spaced TB apart.

    Returns ``(taps, weights, error_var)`` where ``taps`` are the pilot block
    indices relative to the current block, ``weights`` has one column per
    offset and ``error_var`` holds the matching error variances.
    """
    kind = EstimatorKind.parse(kind)
    if int(n_taps) != n_taps or n_taps < 1:
        raise DomainError(f"n_taps must be a positive integer, got {n_taps}")
    offsets = np.atleast_1d(np.asarray(offsets, dtype=np.int64))
    tb = ctx.spacing
    if process == "full":
        corr = lambda lag: autocorrelation(ctx.gm, lag)  # noqa: E731
    elif process == "bandlimited":
        corr = lambda lag: bandlimited_autocorrelation(ctx.gm, tb, lag)  # noqa: E731
    else:
        raise DomainError(f"unknown process model {process!r}")
    taps = _tap_offsets(kind, int(n_taps))
    pos = taps * tb
    diffs = np.arange(-(n_taps - 1), n_taps) * tb
    table = np.asarray(corr(diffs), dtype=np.float64)
    idx = (taps[:, None] - taps[None, :]) + (n_taps - 1)
    p = ctx.pilot_power
    cov = p * table[idx] + ctx.training_noise * np.eye(taps.size)
    cross = math.sqrt(p) * np.asarray(corr(offsets[None, :] - pos[:, None]), dtype=np.float64)
    weights = _solve_normal_equations(cov, cross)
    error_var = ctx.gm.fading_var - np.einsum("ij,ij->j", cross, weights)
    return taps, weights, error_var


def fir_wiener_oracle(ctx: EstimationContext, kind, n_taps: int = 501, offset=1,
                      mode: str = "analytic", process: str = "full",
                      seed: int = 0, n_blocks: int = 20_000):
    """Error variance of the length-`n_taps` pilot Wiener filter at `offset`.

    Parameters
    ----------
    ctx : EstimationContext
    kind : EstimatorKind or str
        Two-sided pilots (noncausal) or current and past pilots only (causal).
    n_taps : int
    offset : int or array_like
        Data position(s) counted from the current pilot.
    mode : {"analytic", "empirical"}
        ``analytic`` returns sigma_h^2 - cross . weights. ``empirical``
        filters simulated pilot observations of a generated path and reports
        the sample mean squared error over `n_blocks` blocks.
    process : {"full", "bandlimited"}
        Correlation model: the exact Gauss-Markov autocorrelation, or that of
        its component inside |w| <= pi/TB (analytic mode only).
    """
    scalar = np.ndim(offset) == 0
    taps, weights, error_var = fir_wiener_weights(ctx, kind, n_taps, offset, process)
    if mode == "analytic":
        return float(error_var[0]) if scalar else error_var
    if mode != "empirical":
        raise DomainError(f"unknown oracle mode {mode!r}")
    if process != "full":
        raise DomainError("empirical mode simulates the full Gauss-Markov process only")
    tb = ctx.spacing
    offsets = np.atleast_1d(np.asarray(offset, dtype=np.int64))
    lead = -int(taps.min())
    tail = int(taps.max())
    n_pilots = n_blocks + lead + tail + 1
    h = generate_path(ctx.gm, n_pilots * tb, seed)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, 1])))
    noise = (rng.standard_normal((n_pilots, 2)) @ np.array([1.0, 1j])) \
        * math.sqrt(ctx.training_noise / 2.0)
    pilots = math.sqrt(ctx.pilot_power) * h[::tb][:n_pilots] + noise
    blocks = np.arange(lead, lead + n_blocks)
    windows = pilots[blocks[:, None] + taps[None, :]]
    est = windows @ weights
    truth = h[blocks[:, None] * tb + offsets[None, :]]
    mse = np.mean(np.abs(truth - est) ** 2, axis=0)
    return float(mse[0]) if scalar else mse
