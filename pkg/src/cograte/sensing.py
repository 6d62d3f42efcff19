"""Energy detection of primary-user activity.

The statistic Y = (1/NB) sum |y_k|^2 over NB complex samples is a scaled
Gamma(NB) variable under both hypotheses, with scale sigma^2 / NB where
sigma^2 is the noise variance (idle) or noise plus primary-signal variance
(busy).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConvergenceError, DomainError
from .specfun import gaussian_q, reg_upper_gamma

# Per-chunk element budget for the Monte Carlo draws (trials * NB).
_CHUNK_ELEMENTS = 1 << 19


@dataclass(frozen=True)
class SensingConfig:
    """Detector setup: NB complex samples, noise and primary-signal variances."""

    n_samples: int
    noise_var: float = 1.0
    interference_var: float = 1.0

    def __post_init__(self):
        if int(self.n_samples) != self.n_samples or self.n_samples < 1:
            raise DomainError(f"n_samples (NB) must be a positive integer, got {self.n_samples}")
        if not (self.noise_var > 0 and math.isfinite(self.noise_var)):
            raise DomainError(f"noise_var must be positive, got {self.noise_var}")
        if not (self.interference_var >= 0 and math.isfinite(self.interference_var)):
            raise DomainError(f"interference_var must be >= 0, got {self.interference_var}")

    @classmethod
    def from_params(cls, params) -> SensingConfig:
        return cls(params.nb, params.noise_var, params.interference_var)

    @property
    def busy_var(self) -> float:
        return self.noise_var + self.interference_var


@dataclass(frozen=True)
class OperatingPoint:
    """Detector operating point. ``threshold`` is None when the pair is given directly."""

    threshold: float | None
    p_f: float
    p_d: float

    def __post_init__(self):
        for name in ("p_f", "p_d"):
            p = getattr(self, name)
            if not (0.0 <= p <= 1.0):
                raise DomainError(f"{name} must lie in [0, 1], got {p}")
        if self.threshold is not None and not (self.threshold >= 0):
            raise DomainError(f"threshold must be >= 0, got {self.threshold}")

    @classmethod
    def fixed(cls, p_d: float, p_f: float) -> OperatingPoint:
        return cls(None, p_f, p_d)


def _thresholds(lam):
    arr = np.asarray(lam, dtype=np.float64)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0):
        raise DomainError("threshold must be finite and >= 0")
    return arr


def _exceed_prob(cfg: SensingConfig, lam, var):
    arr = _thresholds(lam)
    return reg_upper_gamma(cfg.n_samples, cfg.n_samples * arr / var)


def false_alarm_prob(cfg: SensingConfig, lam):
    """P_f = 1 - P(NB, NB lam / sigma_n^2)."""
    return _exceed_prob(cfg, lam, cfg.noise_var)


def detection_prob(cfg: SensingConfig, lam):
    """P_d = 1 - P(NB, NB lam / (sigma_n^2 + sigma_sp^2))."""
    return _exceed_prob(cfg, lam, cfg.busy_var)


def operating_point(cfg: SensingConfig, lam: float) -> OperatingPoint:
    return OperatingPoint(float(lam), false_alarm_prob(cfg, lam), detection_prob(cfg, lam))


def _invert_tail(cfg, target, var, tol, max_doublings):
    if not (0.0 < target < 1.0):
        raise DomainError(f"target probability must lie in (0, 1), got {target}")
    tail = lambda lam: _exceed_prob(cfg, lam, var)  # noqa: E731
    lo, hi = 0.0, var
    for _ in range(max_doublings):
        if tail(hi) < target:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise ConvergenceError("could not bracket the threshold")
    # tail is decreasing: tail(lo) >= target > tail(hi)
    for _ in range(300):
        mid = 0.5 * (lo + hi)
        p = tail(mid)
        if abs(p - target) <= tol or hi - lo <= 4 * np.finfo(float).eps * hi:
            return mid
        if p > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def threshold_for_false_alarm(cfg: SensingConfig, target_pf: float,
                              tol: float = 1e-10, max_doublings: int = 200) -> float:
    """Threshold lam with false_alarm_prob(cfg, lam) = target_pf, by bisection."""
    return _invert_tail(cfg, target_pf, cfg.noise_var, tol, max_doublings)


def threshold_for_detection(cfg: SensingConfig, target_pd: float,
                            tol: float = 1e-10, max_doublings: int = 200) -> float:
    """Threshold lam with detection_prob(cfg, lam) = target_pd."""
    if cfg.interference_var == 0:
        return threshold_for_false_alarm(cfg, target_pd, tol, max_doublings)
    return _invert_tail(cfg, target_pd, cfg.busy_var, tol, max_doublings)


def roc_curve(cfg: SensingConfig, lam_grid) -> list[OperatingPoint]:
    """One operating point per threshold of an ascending, nonnegative grid."""
    grid = _thresholds(lam_grid).ravel()
    if grid.size == 0:
        raise DomainError("threshold grid is empty")
    if np.any(np.diff(grid) < 0):
        raise DomainError("threshold grid must be sorted ascending")
    pf = np.atleast_1d(false_alarm_prob(cfg, grid))
    pd = np.atleast_1d(detection_prob(cfg, grid))
    return [OperatingPoint(float(l), float(f), float(d)) for l, f, d in zip(grid, pf, pd)]


def gaussian_approx_probs(cfg: SensingConfig, lam):
    """Large-NB approximation of (P_f, P_d).

    Treats Y as Gaussian with mean sigma^2 and variance sigma^4 / NB under
    each hypothesis, so P = Q((lam - sigma^2) sqrt(NB) / sigma^2).
    """
    arr = _thresholds(lam)
    root = math.sqrt(cfg.n_samples)
    p_f = gaussian_q((arr - cfg.noise_var) * root / cfg.noise_var)
    p_d = gaussian_q((arr - cfg.busy_var) * root / cfg.busy_var)
    return p_f, p_d


def _chunk_sizes(trials, nb):
    per_chunk = max(1, _CHUNK_ELEMENTS // nb)
    full, rest = divmod(trials, per_chunk)
    return [per_chunk] * full + ([rest] if rest else [])


def _chunk_stats(cfg: SensingConfig, n_trials, seed_seq):
    rng = np.random.Generator(np.random.Philox(seed_seq))
    shape = (n_trials, cfg.n_samples)
    n_scale = math.sqrt(cfg.noise_var / 2.0)
    s_scale = math.sqrt(cfg.interference_var / 2.0)
    n_re = rng.standard_normal(shape) * n_scale
    n_im = rng.standard_normal(shape) * n_scale
    s_re = rng.standard_normal(shape) * s_scale
    s_im = rng.standard_normal(shape) * s_scale
    return kernels.energy_pair(n_re, n_im, s_re, s_im)


def simulate_statistics(cfg: SensingConfig, trials: int, seed: int, workers: int = 1):
    """Draw the energy statistic under both hypotheses.

    Noise samples are CN(0, sigma_n^2) and primary samples CN(0, sigma_sp^2);
    the busy-channel observation is their sum. Trials are split into
    fixed-size chunks, each keyed by its own child of ``SeedSequence(seed)``,
    so the result does not depend on ``workers``.

    Returns
    -------
    (y_idle, y_busy) : tuple of ndarray, each of length `trials`
    """
    if int(trials) != trials or trials < 1:
        raise DomainError(f"trials must be a positive integer, got {trials}")
    sizes = _chunk_sizes(int(trials), cfg.n_samples)
    seeds = np.random.SeedSequence(seed).spawn(len(sizes))
    jobs = list(zip(sizes, seeds))
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda job: _chunk_stats(cfg, *job), jobs))
    else:
        parts = [_chunk_stats(cfg, *job) for job in jobs]
    y0 = np.concatenate([p[0] for p in parts])
    y1 = np.concatenate([p[1] for p in parts])
    return y0, y1


def simulate_detection(cfg: SensingConfig, lam, trials: int, seed: int, workers: int = 1):
    """Empirical (P_f, P_d) from Monte Carlo draws of the detector statistic.

    `lam` may be a scalar or an array of thresholds; all thresholds are
    scored against the same draws.
    """
    arr = _thresholds(lam)
    y0, y1 = simulate_statistics(cfg, trials, seed, workers)
    flat = np.atleast_1d(arr).ravel()
    # sorting once keeps the counting O((trials + k) log trials)
    y0s = np.sort(y0)
    y1s = np.sort(y1)
    n = y0.size
    pf = (n - np.searchsorted(y0s, flat, side="right")) / n
    pd = (n - np.searchsorted(y1s, flat, side="right")) / n
    if arr.ndim == 0:
        return float(pf[0]), float(pd[0])
    return pf.reshape(arr.shape), pd.reshape(arr.shape)
