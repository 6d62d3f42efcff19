"""Self-checks that compare the closed forms against independent routes."""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .estimation import (EstimationContext, EstimatorKind, causal_mmse, fir_wiener_oracle,
                         noncausal_mmse, noncausal_mmse_per_m)
from .optimizer import exhaustive_best, optimize_powers
from .rate import expected_log_term
from .sensing import (SensingConfig, false_alarm_prob, detection_prob, simulate_detection,
                      threshold_for_detection, threshold_for_false_alarm)

Z_LIMIT = 3.0
FIR_REL_TOL = 0.01
PER_M_REL_TOL = 1e-3
OPT_TOL = 1e-9
MC_GAMMAS = (0.1, 1.0, 10.0, 100.0)


class CheckResult(NamedTuple):
    check: str
    measured: float
    tolerance: float
    passed: bool


def _result(name, measured, tolerance):
    return CheckResult(name, float(measured), float(tolerance), bool(measured <= tolerance))


def _zscore(p_hat, p, n):
    se = math.sqrt(max(p * (1.0 - p), 1.0 / n) / n)
    return abs(p_hat - p) / se


def detector_check(params, trials, seed, scale, workers=1) -> CheckResult:
    """Largest z-score of simulated P_f and P_d, each at ten thresholds.

    The thresholds of each hypothesis sit where its probability runs from
    0.05 to 0.95, keeping the binomial standard error meaningful.
    """
    cfg = SensingConfig.from_params(params)
    targets = np.linspace(0.05, 0.95, 10)
    lam_f = np.array([threshold_for_false_alarm(cfg, t) for t in targets])
    lam_d = np.array([threshold_for_detection(cfg, t) for t in targets])
    pf_mc, _ = simulate_detection(cfg, lam_f, trials, seed, workers)
    _, pd_mc = simulate_detection(cfg, lam_d, trials, seed, workers)
    pf, pd = false_alarm_prob(cfg, lam_f), detection_prob(cfg, lam_d)
    z = max(max(_zscore(a, b, trials) for a, b in zip(pf_mc, pf)),
            max(_zscore(a, b, trials) for a, b in zip(pd_mc, pd)))
    return _result(f"detector_mc_nb{cfg.n_samples}", z, Z_LIMIT * scale)


def expected_log_check(trials, seed, scale) -> CheckResult:
    """Largest z-score of the sample mean of ln(1 + gamma X) over a few SINRs."""
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, 7])))
    x = rng.standard_exponential(trials)
    z = 0.0
    for g in MC_GAMMAS:
        sample = np.log1p(g * x)
        se = sample.std(ddof=1) / math.sqrt(trials)
        z = max(z, abs(sample.mean() - expected_log_term(g)) / se)
    return _result("expected_log_mc", z, Z_LIMIT * scale)


def _data_offsets(params):
    return np.arange(1, params.data_count + 1)


def fir_checks(params, pilot_powers, n_taps, scale) -> list[CheckResult]:
    """Closed-form MMSE against finite Wiener filters built from pilot correlations."""
    out = []
    offsets = _data_offsets(params)
    bl_dev = full_nc = full_c = per_m = 0.0
    for p in pilot_powers:
        ctx = EstimationContext.from_params(params, p)
        nc, c = noncausal_mmse(ctx), causal_mmse(ctx)
        bl = fir_wiener_oracle(ctx, "noncausal", n_taps, 0, process="bandlimited")
        bl_dev = max(bl_dev, abs(bl - nc) / nc)
        full = fir_wiener_oracle(ctx, "noncausal", n_taps, offsets)
        full_nc = max(full_nc, abs(full.mean() - nc) / nc)
        full_causal = fir_wiener_oracle(ctx, "causal", n_taps, offsets)
        full_c = max(full_c, abs(full_causal.mean() - c) / c)
        for m in (1, int(offsets.size // 2), int(offsets[-1])):
            pm = noncausal_mmse_per_m(ctx, m)
            per_m = max(per_m, abs(pm - full[m - 1]) / full[m - 1])
    out.append(_result("fir_bandlimited_noncausal", bl_dev, FIR_REL_TOL * scale))
    out.append(_result("fir_full_noncausal_mean", full_nc, FIR_REL_TOL * scale))
    out.append(_result("fir_full_causal_mean", full_c, FIR_REL_TOL * scale))
    out.append(_result("per_position_vs_fir", per_m, PER_M_REL_TOL * scale))
    return out


def optimizer_check(params, op, budgets, grid_resolution, scale) -> CheckResult:
    """Shortfall of the refined optimum below a plain 64 x 64 grid (<= 0 is fine)."""
    shortfall = 0.0
    for budget in budgets:
        for kind in EstimatorKind:
            refined = optimize_powers(params, op, budget, kind, grid_resolution).best_rate
            grid, _ = exhaustive_best(params, op, budget, kind, 64)
            shortfall = max(shortfall, grid - refined)
    return _result("optimizer_vs_grid64", shortfall, OPT_TOL * scale)


def run_checks(cfg, workers: int = 1) -> list[CheckResult]:
    params = cfg.params
    scale = cfg.validate.tolerance_scale
    budgets = [params.budget]
    if cfg.snr_sweep is not None or cfg.cap_sweep is not None:
        pairs = cfg.budgets()
        budgets = [pairs[0][1], pairs[-1][1]]
    checks = [
        detector_check(params, cfg.mc.trials, cfg.mc.seed, scale, workers),
        expected_log_check(cfg.mc.trials, cfg.mc.seed, scale),
    ]
    checks.extend(fir_checks(params, cfg.validate.pilot_powers, cfg.validate.fir_taps, scale))
    checks.append(optimizer_check(params, cfg.detector, budgets, cfg.grid_resolution, scale))
    return checks
