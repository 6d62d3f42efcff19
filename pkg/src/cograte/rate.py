"""Four-scenario ergodic achievable-rate lower bound.

The sensing decision and the true channel state give four cases, each with
its own data power and noise level:

    1. busy, detected busy   weight rho P_d           power P_1, noise sigma_n^2 + sigma_sp^2
    2. busy, detected idle   weight rho (1 - P_d)     power P_2, noise sigma_n^2 + sigma_sp^2
    3. idle, detected busy   weight (1-rho) P_f       power P_1, noise sigma_n^2
    4. idle, detected idle   weight (1-rho)(1 - P_f)  power P_2, noise sigma_n^2

Each case contributes E[ln(1 + gamma |xi|^2)] with the channel-estimation
error folded into the noise. Rates are in nats per second.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DomainError
from .estimation import EstimationContext, EstimatorKind, mmse
from .sensing import OperatingPoint
from .specfun import DEFAULT_ACCURACY

SMALL_SINR = 1e-8
SCENARIOS = ("busy/detected-busy", "busy/detected-idle", "idle/detected-busy", "idle/detected-idle")


@dataclass(frozen=True)
class PowerAllocation:
    """Per-symbol powers: pilot P_t, data when sensed busy P_1, data when sensed idle P_2."""

    pilot: float
    busy_data: float
    idle_data: float

    def __post_init__(self):
        for name in ("pilot", "busy_data", "idle_data"):
            value = getattr(self, name)
            if not (value >= 0 and math.isfinite(value)):
                raise DomainError(f"{name} power must be finite and >= 0, got {value}")


@dataclass(frozen=True)
class RateBreakdown:
    scenario_terms: tuple[float, float, float, float]   # nats per symbol
    scenario_rates: tuple[float, float, float, float]   # nats per second
    weights: tuple[float, float, float, float]
    total: float
    error_var: float
    estimate_var: float


def expected_log_term(gamma):
    """E[ln(1 + gamma X)] for unit-mean exponential X.

    Closed form exp(1/gamma) E1(1/gamma); below 1e-8 the two-term expansion
    gamma - gamma^2 is used instead. Accepts scalars or arrays.
    """
    g = np.asarray(gamma, dtype=np.float64)
    if np.any(~np.isfinite(g)) or np.any(g < 0):
        raise DomainError("SINR must be finite and >= 0")
    acc = DEFAULT_ACCURACY
    out = kernels.expected_log(g, SMALL_SINR, acc.step_tol, acc.max_iter)
    if np.any(np.isnan(out)):
        raise ArithmeticError("exponential integral did not converge")
    return float(out[0]) if g.ndim == 0 else out.reshape(g.shape)


def scenario_weights(activity_prob: float, op: OperatingPoint) -> np.ndarray:
    rho = activity_prob
    return np.array([rho * op.p_d, rho * (1.0 - op.p_d),
                     (1.0 - rho) * op.p_f, (1.0 - rho) * (1.0 - op.p_f)])


def _sinr(power, est_var, err_var, noise):
    return power * est_var / (power * err_var + noise)


def scenario_sinr(alloc: PowerAllocation, estimate_var: float, error_var: float,
                  noise_var: float, interference_var: float, scenario: int) -> float:
    """Effective SINR of one of the four sensing scenarios (numbered 1..4)."""
    if min(estimate_var, error_var, interference_var) < 0 or noise_var <= 0:
        raise DomainError("variances must be nonnegative and noise_var positive")
    if scenario not in (1, 2, 3, 4):
        raise DomainError(f"scenario must be 1, 2, 3 or 4, got {scenario}")
    power = alloc.busy_data if scenario in (1, 3) else alloc.idle_data
    noise = noise_var + (interference_var if scenario in (1, 2) else 0.0)
    return _sinr(power, estimate_var, error_var, noise)


def _scenario_terms(p1, p2, est_var, err_var, noise_var, interference_var):
    busy_noise = noise_var + interference_var
    gammas = np.stack([
        _sinr(p1, est_var, err_var, busy_noise),
        _sinr(p2, est_var, err_var, busy_noise),
        _sinr(p1, est_var, err_var, noise_var),
        _sinr(p2, est_var, err_var, noise_var),
    ])
    return expected_log_term(gammas)


def bound_from_error_var(params, op: OperatingPoint, err_var: float, busy_data, idle_data):
    """Total rate for one error variance and arrays of data powers (vectorized)."""
    p1 = np.asarray(busy_data, dtype=np.float64)
    p2 = np.asarray(idle_data, dtype=np.float64)
    est_var = params.gm.fading_var - err_var
    terms = _scenario_terms(p1, p2, est_var, err_var, params.noise_var, params.interference_var)
    w = scenario_weights(params.activity_prob, op)
    return params.overhead * np.tensordot(w, terms, axes=1)


def achievable_rate(params, alloc: PowerAllocation, op: OperatingPoint, kind) -> RateBreakdown:
    """Rate bound with offset-independent estimation error (uniform data powers).

    total = ((T-N)B - 1)/T * sum_i weight_i * E[ln(1 + gamma_i |xi|^2)]
    """
    kind = EstimatorKind.parse(kind)
    ctx = EstimationContext.from_params(params, alloc.pilot)
    err = mmse(ctx, kind)
    est = params.gm.fading_var - err
    terms = np.atleast_1d(_scenario_terms(alloc.busy_data, alloc.idle_data, est, err,
                                          params.noise_var, params.interference_var))
    w = scenario_weights(params.activity_prob, op)
    rates = params.overhead * terms
    total = float(params.overhead * np.dot(w, terms))
    return RateBreakdown(tuple(map(float, terms)), tuple(map(float, rates)),
                         tuple(map(float, w)), total, float(err), float(est))


def achievable_rate_per_m(params, alloc: PowerAllocation, op: OperatingPoint,
                          error_vars) -> RateBreakdown:
    """Rate bound with one error variance per data position m = 1..(T-N)B-1.

    total = (1/T) sum_m sum_i weight_i * E[ln(1 + gamma_i(m) |xi|^2)].
    The reported ``error_var`` / ``estimate_var`` are averages over m.
    """
    errs = np.asarray(error_vars, dtype=np.float64).ravel()
    if errs.size != params.data_count:
        raise DomainError(
            f"need {params.data_count} per-position error variances, got {errs.size}")
    sh2 = params.gm.fading_var
    if np.any(errs < 0) or np.any(errs > sh2):
        raise DomainError("error variances must lie in [0, sigma_h^2]")
    ests = sh2 - errs
    terms = _scenario_terms(alloc.busy_data, alloc.idle_data, ests, errs,
                            params.noise_var, params.interference_var)
    per_scenario = terms.sum(axis=1) / params.geom.block_len
    w = scenario_weights(params.activity_prob, op)
    total = float(np.dot(w, per_scenario))
    return RateBreakdown(tuple(map(float, terms.mean(axis=1))), tuple(map(float, per_scenario)),
                         tuple(map(float, w)), total, float(errs.mean()), float(ests.mean()))


def nats_to_bits(value):
    return np.asarray(value) / math.log(2.0) if np.ndim(value) else value / math.log(2.0)
