"""Power allocation and detector-threshold optimization under the interference cap.

The average power radiated while the primary may be active is limited by

    P_t + ((T-N)B - 1) (P_d P_1 + (1 - P_d) P_2) <= T I_avg.

Because the rate bound increases in every power, the optimum saturates this
constraint. The search therefore runs over the constraint surface, using a
pilot share phi in (0, 1) of the block energy T I_avg and a busy share
psi in [0, 1] of what is left for data.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import DomainError
from .estimation import EstimationContext, EstimatorKind, mmse
from .frame import InterferenceBudget
from .rate import PowerAllocation, achievable_rate, bound_from_error_var, scenario_weights
from .sensing import OperatingPoint, SensingConfig, operating_point

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
REL_TOL = 1e-6
SWEEPS = 3
TIE_TOL = 1e-12
PHI_EDGE = 1e-9


class TraceEntry(NamedTuple):
    phi: float
    psi: float
    alloc: PowerAllocation
    rate: float


@dataclass
class OptimizationResult:
    best_alloc: PowerAllocation
    best_op: OperatingPoint
    best_rate: float
    constraint_slack: float
    trace: list = field(default_factory=list, repr=False)
    best_fractions: tuple[float, float] | None = None
    curve: list = field(default_factory=list, repr=False)


def feasible(alloc: PowerAllocation, geom, p_d: float, budget: InterferenceBudget):
    """Check the interference constraint; returns ``(ok, slack)`` with slack = RHS - LHS."""
    lhs = alloc.pilot + geom.data_count * (p_d * alloc.busy_data + (1.0 - p_d) * alloc.idle_data)
    slack = geom.block_len * budget.i_avg - lhs
    return slack >= 0.0, slack


def snr_from_budget(budget: InterferenceBudget, bandwidth: float, noise_var: float):
    """Average SNR = I_avg / (B sigma_n^2); returns ``(linear, dB)``."""
    if bandwidth <= 0 or noise_var <= 0:
        raise DomainError("bandwidth and noise variance must be positive")
    snr = budget.i_avg / (bandwidth * noise_var)
    return snr, 10.0 * math.log10(snr)


def budget_from_snr(snr_db: float, bandwidth: float, noise_var: float) -> InterferenceBudget:
    """Inverse of :func:`snr_from_budget`."""
    if bandwidth <= 0 or noise_var <= 0:
        raise DomainError("bandwidth and noise variance must be positive")
    return InterferenceBudget(10.0 ** (snr_db / 10.0) * bandwidth * noise_var)


class _Surface:
    """Rate on the saturated constraint surface, with per-pilot-power MMSE caching."""

    def __init__(self, params, op: OperatingPoint, budget: InterferenceBudget, kind):
        self.params = params
        self.op = op
        self.kind = EstimatorKind.parse(kind)
        self.energy = params.geom.block_len * budget.i_avg
        d = params.data_count
        self.coef_busy = d * op.p_d
        self.coef_idle = d * (1.0 - op.p_d)
        w = scenario_weights(params.activity_prob, op)
        self.busy_fixed = self._fallback(self.coef_busy, params.busy_cap, w[0] + w[2], "busy")
        self.idle_fixed = self._fallback(self.coef_idle, params.idle_cap, w[1] + w[3], "idle")
        self.psi_pinned = None
        if self.coef_busy == 0:
            self.psi_pinned = 0.0
        elif self.coef_idle == 0:
            self.psi_pinned = 1.0
        self._err_cache = {}

    @staticmethod
    def _fallback(coef, cap, weight, state):
        if coef > 0:
            return None
        if cap is not None:
            return float(cap)
        if weight == 0:
            return 0.0
        raise DomainError(
            f"{state}-state data power is not limited by the interference constraint "
            f"at this operating point; set {state}_cap")

    def powers(self, phi, psi):
        phi = np.asarray(phi, dtype=np.float64)
        psi = np.asarray(psi, dtype=np.float64)
        pilot = phi * self.energy
        rest = (1.0 - phi) * self.energy
        if self.busy_fixed is None:
            p1 = psi * rest / self.coef_busy
        else:
            p1 = np.full(np.broadcast(phi, psi).shape, self.busy_fixed)
        if self.idle_fixed is None:
            p2 = (1.0 - psi) * rest / self.coef_idle
        else:
            p2 = np.full(np.broadcast(phi, psi).shape, self.idle_fixed)
        caps = (self.params.busy_cap, self.params.idle_cap)
        if caps[0] is not None:
            p1 = np.minimum(p1, caps[0])
        if caps[1] is not None:
            p2 = np.minimum(p2, caps[1])
        return pilot, p1, p2

    def error_var(self, phi: float) -> float:
        key = float(phi)
        if key not in self._err_cache:
            ctx = EstimationContext.from_params(self.params, key * self.energy)
            self._err_cache[key] = mmse(ctx, self.kind)
        return self._err_cache[key]

    def rates(self, phi: float, psi) -> np.ndarray:
        """Rate bound at one pilot share for an array of busy shares."""
        _, p1, p2 = self.powers(phi, psi)
        return np.atleast_1d(bound_from_error_var(self.params, self.op, self.error_var(phi), p1, p2))

    def alloc(self, phi: float, psi: float) -> PowerAllocation:
        pilot, p1, p2 = self.powers(phi, psi)
        return PowerAllocation(float(pilot), float(p1), float(p2))


class _Best:
    def __init__(self):
        self.phi = self.psi = None
        self.rate = -math.inf

    def offer(self, phi, psi, rate):
        better = rate > self.rate + TIE_TOL
        tie = abs(rate - self.rate) <= TIE_TOL and self.phi is not None and phi < self.phi
        if better or tie:
            self.phi, self.psi, self.rate = float(phi), float(psi), float(rate)


def _golden_max(f, lo, hi, rel_tol=REL_TOL):
    """Maximize a unimodal f on [lo, hi]; returns the abscissae evaluated (f records them)."""
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > rel_tol * max(abs(a) + abs(b), 1e-6) * 0.5:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    f(0.5 * (a + b))


def grid_search(surface: _Surface, resolution: int, trace=None):
    """Exhaustive evaluation of a resolution x resolution (phi, psi) grid."""
    if resolution < 2:
        raise DomainError("grid resolution must be >= 2")
    phis = (np.arange(resolution) + 0.5) / resolution
    if surface.psi_pinned is None:
        psis = np.linspace(0.0, 1.0, resolution)
    else:
        psis = np.array([surface.psi_pinned])
    best = _Best()
    for phi in phis:
        r = surface.rates(phi, psis)
        for psi, rate in zip(psis, r):
            best.offer(phi, psi, rate)
            if trace is not None:
                trace.append(TraceEntry(float(phi), float(psi), surface.alloc(phi, psi), float(rate)))
    return best


def _check_budget(budget):
    if not isinstance(budget, InterferenceBudget):
        budget = InterferenceBudget(float(budget))
    return budget


def optimize_powers(params, op: OperatingPoint, budget: InterferenceBudget | None = None,
                    kind=EstimatorKind.NONCAUSAL, grid_resolution: int = 16) -> OptimizationResult:
    """Best (P_t, P_1, P_2) on the saturated interference constraint.

    A coarse (phi, psi) grid seeds three sweeps of coordinate-wise golden
    section search, each over one grid cell around the incumbent and to a
    relative tolerance of 1e-6. Equal rates (within 1e-12) prefer the smaller
    pilot power.
    """
    if grid_resolution < 8:
        raise DomainError(f"grid_resolution must be >= 8, got {grid_resolution}")
    budget = _check_budget(params.budget if budget is None else budget)
    surface = _Surface(params, op, budget, kind)
    trace: list[TraceEntry] = []
    best = grid_search(surface, grid_resolution, trace)

    def record(phi, psi):
        rate = float(surface.rates(phi, psi)[0])
        trace.append(TraceEntry(float(phi), float(psi), surface.alloc(phi, psi), rate))
        best.offer(phi, psi, rate)
        return rate

    h_phi = 1.0 / grid_resolution
    h_psi = 1.0 / (grid_resolution - 1)
    for _ in range(SWEEPS):
        psi0 = best.psi
        lo, hi = max(best.phi - h_phi, PHI_EDGE), min(best.phi + h_phi, 1.0 - PHI_EDGE)
        record(lo, psi0)
        record(hi, psi0)
        _golden_max(lambda x: record(x, psi0), lo, hi)
        if surface.psi_pinned is None:
            phi0 = best.phi
            lo, hi = max(best.psi - h_psi, 0.0), min(best.psi + h_psi, 1.0)
            record(phi0, lo)
            record(phi0, hi)
            _golden_max(lambda x: record(phi0, x), lo, hi)

    alloc = surface.alloc(best.phi, best.psi)
    rate = achievable_rate(params, alloc, op, surface.kind).total
    _, slack = feasible(alloc, params.geom, op.p_d, budget)
    return OptimizationResult(alloc, op, rate, slack, trace, (best.phi, best.psi))


def exhaustive_best(params, op: OperatingPoint, budget: InterferenceBudget | None = None,
                    kind=EstimatorKind.NONCAUSAL, resolution: int = 64):
    """Best rate over a plain resolution x resolution boundary grid (no refinement)."""
    budget = _check_budget(params.budget if budget is None else budget)
    surface = _Surface(params, op, budget, kind)
    best = grid_search(surface, resolution)
    return best.rate, surface.alloc(best.phi, best.psi)


def optimize_operating_point(params, budget: InterferenceBudget | None = None,
                             kind=EstimatorKind.NONCAUSAL, lam_grid=None,
                             grid_resolution: int = 16, workers: int = 1) -> OptimizationResult:
    """Sweep detector thresholds, optimizing the powers at each one.

    Returns the result for the best threshold; ``curve`` holds the per-threshold
    results in grid order and ``trace`` the matching (operating point, rate) pairs.
    """
    grid = np.atleast_1d(np.asarray(lam_grid, dtype=np.float64))
    if grid.size == 0 or np.any(grid < 0) or np.any(~np.isfinite(grid)):
        raise DomainError("threshold grid must be nonempty, finite and nonnegative")
    cfg = SensingConfig.from_params(params)
    budget = _check_budget(params.budget if budget is None else budget)

    def run(lam):
        return optimize_powers(params, operating_point(cfg, lam), budget, kind, grid_resolution)

    if workers > 1 and grid.size > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            curve = list(pool.map(run, grid))
    else:
        curve = [run(lam) for lam in grid]
    best = curve[0]
    for res in curve[1:]:
        if res.best_rate > best.best_rate + TIE_TOL:
            best = res
    return OptimizationResult(best.best_alloc, best.best_op, best.best_rate,
                              best.constraint_slack,
                              [(res.best_op, res.best_rate) for res in curve],
                              best.best_fractions, curve)
