"""Pinned input/output examples for each module, with their oracles."""

import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.optimize import minimize_scalar

from cograte.channel import FrameGeometry, GaussMarkov, autocorrelation, generate_path, psd, undersampled_spectrum
from cograte.errors import DomainError
from cograte.estimation import (EstimationContext, causal_mmse, factorization_constants,
                                fir_wiener_oracle, noncausal_mmse, noncausal_mmse_per_m)
from cograte.frame import reference_params, validate
from cograte.optimizer import (budget_from_snr, optimize_operating_point, optimize_powers,
                               snr_from_budget)
from cograte.rate import (PowerAllocation, achievable_rate, achievable_rate_per_m,
                          expected_log_term, scenario_sinr)
from cograte.sensing import (OperatingPoint, SensingConfig, detection_prob, false_alarm_prob,
                             gaussian_approx_probs, roc_curve, simulate_detection,
                             threshold_for_false_alarm)
from cograte.specfun import exp_integral_e1, gaussian_q, reg_lower_gamma

import oracles


# -- special functions --------------------------------------------------------

def test_gamma_examples():
    assert reg_lower_gamma(1.0, 0.0) == 0.0
    assert reg_lower_gamma(1.0, 1.0) == pytest.approx(1 - math.exp(-1), abs=1e-15)
    assert abs(reg_lower_gamma(10.0, 15.0) - oracles.lower_gamma_series(10.0, 15.0)) < 1e-14


def test_e1_examples():
    assert 0.0 <= exp_integral_e1(700.0) < 1e-300
    for x in (0.5, 1.0):
        ref, _ = quad(lambda t: math.exp(-t) / t, x, np.inf, epsabs=1e-14, epsrel=1e-13)
        assert exp_integral_e1(x) == pytest.approx(ref, abs=1e-12)


def test_gaussian_q_examples():
    assert gaussian_q(0.0) == 0.5
    assert gaussian_q(1.7) + gaussian_q(-1.7) == pytest.approx(1.0, abs=1e-16)
    ref, _ = quad(lambda t: math.exp(-t * t / 2) / math.sqrt(2 * math.pi), 3.0, np.inf,
                  epsabs=1e-15)
    assert gaussian_q(3.0) == pytest.approx(ref, rel=1e-12)


# -- sensing ------------------------------------------------------------------

def test_detector_closed_examples():
    assert false_alarm_prob(SensingConfig(10), 0.0) == 1.0
    assert false_alarm_prob(SensingConfig(1), 1.0) == pytest.approx(math.exp(-1), abs=1e-15)
    assert detection_prob(SensingConfig(1, 1.0, 1.0), 2.0) == pytest.approx(math.exp(-1), abs=1e-15)
    assert detection_prob(SensingConfig(7), 0.0) == 1.0


def test_detector_against_ten_million_draws():
    cfg = SensingConfig(10, 1.0, 1.0)
    n = 10_000_000
    pf_mc, pd_mc = simulate_detection(cfg, 1.5, n, seed=2024)
    for est, exact in ((pf_mc, false_alarm_prob(cfg, 1.5)), (pd_mc, detection_prob(cfg, 1.5))):
        assert abs(est - exact) <= 3 * math.sqrt(exact * (1 - exact) / n)


def test_threshold_examples():
    assert threshold_for_false_alarm(SensingConfig(1), math.exp(-1)) == pytest.approx(1.0, abs=1e-9)
    assert threshold_for_false_alarm(SensingConfig(1), 0.999) < 2e-3
    # bisection against the extended-precision series oracle
    lo, hi = 0.0, 5.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if 1 - oracles.lower_gamma_series(10, 10 * mid) > 0.23:
            lo = mid
        else:
            hi = mid
    assert threshold_for_false_alarm(SensingConfig(10), 0.23) == pytest.approx(lo, abs=1e-9)


def test_roc_examples():
    (pt,) = roc_curve(SensingConfig(10), [0.0])
    assert (pt.p_f, pt.p_d) == (1.0, 1.0)
    cfg = SensingConfig(10, 1.0, 1.0)
    grid = np.linspace(0.3, 3.5, 100)
    pts = roc_curve(cfg, grid)
    n = 1_000_000
    pf_mc, pd_mc = simulate_detection(cfg, grid, n, seed=77)
    # 200 correlated comparisons: a Bonferroni-style bound of 4.5 standard errors
    for p, f, d in zip(pts, pf_mc, pd_mc):
        for est, exact in ((f, p.p_f), (d, p.p_d)):
            se = math.sqrt(max(exact * (1 - exact), 1 / n) / n)
            assert abs(est - exact) <= 4.5 * se


def test_gaussian_approximation_examples():
    cfg = SensingConfig(25, 1.0, 1.5)
    assert gaussian_approx_probs(cfg, 1.0)[0] == pytest.approx(0.5)
    assert gaussian_approx_probs(cfg, 2.5)[1] == pytest.approx(0.5)
    big = SensingConfig(1000)
    assert abs(gaussian_approx_probs(big, 1.05)[0] - false_alarm_prob(big, 1.05)) < 0.01


def test_simulation_extremes():
    cfg = SensingConfig(10)
    assert simulate_detection(cfg, 0.0, 1000, seed=1) == (1.0, 1.0)
    assert simulate_detection(cfg, 1e6, 1000, seed=1) == (0.0, 0.0)


# -- channel -------------------------------------------------------------------

def test_psd_and_correlation_examples():
    assert psd(GaussMarkov(0.0), 1.234) == 1.0
    assert psd(GaussMarkov(0.99), 0.0) == pytest.approx(199.0, rel=1e-12)
    assert autocorrelation(GaussMarkov(0.99), 0) == 1.0
    assert autocorrelation(GaussMarkov(0.99), 50) == pytest.approx(0.99 ** 50)
    assert autocorrelation(GaussMarkov(0.99), 50) == pytest.approx(0.6050, abs=1e-4)


def test_undersampled_examples():
    gm = GaussMarkov(0.99)
    w = np.linspace(-math.pi, math.pi, 9)
    np.testing.assert_allclose(undersampled_spectrum(gm, 1, 0, w).real, psd(gm, w), rtol=1e-14)
    k = np.arange(-2000, 2001)
    ref = np.sum(autocorrelation(gm, 50 * k))
    assert undersampled_spectrum(gm, 50, 0, 0.0).real == pytest.approx(ref, rel=1e-10)


def test_path_examples():
    gm = GaussMarkov(0.99)
    h = generate_path(gm, 1_000_000, seed=21)
    assert abs(np.mean(np.abs(h) ** 2) - 1.0) < 0.01 * 5  # AR(1) samples are highly correlated
    lag1 = np.mean(h[1:] * np.conj(h[:-1])).real / np.mean(np.abs(h) ** 2)
    assert abs(lag1 - 0.99) < 0.005
    w = generate_path(GaussMarkov(0.0), 1_000_000, seed=22)
    assert abs(np.mean(w[1:] * np.conj(w[:-1]))) < 0.005
    assert abs(np.mean(np.abs(w) ** 2) - 1.0) < 0.01


# -- estimation ----------------------------------------------------------------

def test_factorization_examples():
    s = 1.1
    consts = factorization_constants(EstimationContext(GaussMarkov(0.99), 50, 0.0, 1.0, 1.0, 0.1))
    assert consts.c == pytest.approx((1 + 0.99 ** 2) * s)
    assert consts.r_e == pytest.approx(s) and consts.v == pytest.approx(0.99)
    white = factorization_constants(EstimationContext(GaussMarkov(0.0), 50, 10.0, 1.0, 1.0, 0.1))
    assert white.v == 0.0 and white.r_e == pytest.approx(white.c)
    assert white.c == pytest.approx(10.0 / 50 + s)
    ctx = EstimationContext(GaussMarkov(0.99), 50, 10.0, 1.0)
    k = factorization_constants(ctx)
    theta = np.linspace(-math.pi, math.pi, 10_000) / 50
    lhs = 10.0 * psd(GaussMarkov(0.99), theta) / 50 + 1.0
    rhs = k.r_e * np.abs(1 - k.v * np.exp(-1j * theta)) ** 2 / np.abs(1 - 0.99 * np.exp(-1j * theta)) ** 2
    np.testing.assert_allclose(rhs, lhs, rtol=1e-10)


def test_noncausal_decreasing_without_primary():
    vals = [noncausal_mmse(EstimationContext(GaussMarkov(0.99), 50, p, 1.0))
            for p in (0.1, 1, 5, 20, 100, 1000)]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_pilot_power_twenty_reference():
    ctx = EstimationContext.from_params(reference_params(), 20.0)
    nc, c = noncausal_mmse(ctx), causal_mmse(ctx)
    # frozen from the extended-precision oracles in tests/oracles.py
    assert nc == pytest.approx(0.14780675603161378, abs=1e-10)
    assert c == pytest.approx(0.18180859667984728, abs=1e-10)
    # the band-limited FIR filter reproduces the alias-free noncausal value
    assert fir_wiener_oracle(ctx, "noncausal", 501, 0, process="bandlimited") == pytest.approx(nc, rel=1e-6)


def test_zero_pilot_examples():
    ctx = EstimationContext(GaussMarkov(0.9, 1.7), 10, 0.0, 1.0)
    assert noncausal_mmse(ctx) == 1.7 and causal_mmse(ctx) == 1.7
    assert all(noncausal_mmse_per_m(ctx, m) == 1.7 for m in (0, 3, 9))


@pytest.mark.parametrize("m", [1, 5, 20])
def test_single_tap_filter_limit(m):
    ctx = EstimationContext(GaussMarkov(0.99), 50, 1e9, 1.0)
    assert fir_wiener_oracle(ctx, "causal", 1, m) == pytest.approx(1 - 0.99 ** (2 * m), rel=1e-6)


# -- rate ----------------------------------------------------------------------

def test_expected_log_at_one_against_ten_million_draws():
    assert expected_log_term(0.0) == 0.0
    exact = math.e * exp_integral_e1(1.0)
    assert expected_log_term(1.0) == pytest.approx(exact, rel=1e-14)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(407)))
    x = rng.standard_exponential(10_000_000)
    sample = np.log1p(x)
    assert abs(sample.mean() - exact) <= 3 * sample.std() / math.sqrt(x.size)


def test_sinr_examples():
    assert scenario_sinr(PowerAllocation(1, 0.0, 0.0), 0.8, 0.2, 1.0, 1.0, 3) == 0.0
    alloc = PowerAllocation(1.0, 4.0, 6.0)
    assert scenario_sinr(alloc, 1.0, 0.0, 2.0, 0.0, 3) == pytest.approx(2.0)
    assert scenario_sinr(alloc, 1.0, 0.0, 2.0, 0.0, 4) == pytest.approx(3.0)


def test_rate_without_pilot_is_zero(reference_op):
    params = reference_params()
    assert achievable_rate(params, PowerAllocation(0.0, 5.0, 5.0), reference_op, "causal").total == 0.0


def test_single_data_symbol_frame(reference_op):
    params = validate(dict(bandwidth=10.0, block_len=0.5, sensing_len=0.3, alpha=0.9, i_avg=5.0))
    assert params.data_count == 1
    alloc = PowerAllocation(2.0, 1.0, 3.0)
    flat = achievable_rate(params, alloc, reference_op, "noncausal")
    per_m = achievable_rate_per_m(params, alloc, reference_op, [flat.error_var])
    assert per_m.total == pytest.approx(flat.total, rel=1e-12)


# -- optimizer -----------------------------------------------------------------

def test_single_state_matches_one_dimensional_search():
    params = reference_params(interference_var=0.0, activity_prob=1.0)
    op = OperatingPoint.fixed(1.0, 0.0)
    res = optimize_powers(params, op, kind="causal")
    energy = params.geom.block_len * params.budget.i_avg

    def neg_rate(phi):
        alloc = PowerAllocation(phi * energy, (1 - phi) * energy / params.data_count, 0.0)
        return -achievable_rate(params, alloc, op, "causal").total

    ref = minimize_scalar(neg_rate, bounds=(1e-9, 1 - 1e-9), method="bounded",
                          options={"xatol": 1e-10})
    assert res.best_rate == pytest.approx(-ref.fun, rel=1e-9)
    assert res.best_rate >= -ref.fun - 1e-9


def test_single_threshold_grid_reduces_to_power_search(params):
    one = optimize_operating_point(params, lam_grid=[1.2])
    direct = optimize_powers(params, one.best_op)
    assert one.best_rate == direct.best_rate


def test_indistinguishable_hypotheses():
    params = reference_params(interference_var=0.0)
    res = optimize_operating_point(params, lam_grid=np.linspace(0.8, 2.0, 5))
    assert all(r.best_op.p_d == r.best_op.p_f for r in res.curve)


def test_threshold_curve_single_peak(params):
    res = optimize_operating_point(params, lam_grid=np.linspace(0.8, 2.4, 50))
    rates = np.array([r.best_rate for r in res.curve])
    signs = np.sign(np.diff(rates))
    signs = signs[signs != 0]
    assert np.count_nonzero(np.diff(signs) != 0) <= 1
    assert res.best_op.threshold is not None and 0.8 <= res.best_op.threshold <= 2.4


def test_snr_examples():
    assert snr_from_budget(budget_from_snr(0.0, 100.0, 1.0), 100.0, 1.0)[1] == pytest.approx(0.0)
    assert budget_from_snr(10.0, 100.0, 1.0).i_avg == pytest.approx(1000.0, rel=1e-14)
    for db in (-7.3, 0.0, 13.1, 20.0):
        b = budget_from_snr(db, 100.0, 1.0)
        back = budget_from_snr(snr_from_budget(b, 100.0, 1.0)[1], 100.0, 1.0)
        assert abs(back.i_avg - b.i_avg) <= 1e-12 * b.i_avg


# -- frame ---------------------------------------------------------------------

def test_frame_examples():
    g = FrameGeometry(100.0, 0.5, 0.1)
    assert (g.tb, g.nb, g.data_count) == (50, 10, 39)
    with pytest.raises(DomainError):
        FrameGeometry(99.0, 0.5, 0.1)       # T B = 49.5
    with pytest.raises(DomainError):
        validate(dict(bandwidth=100.0, block_len=0.5, sensing_len=0.0, alpha=0.9, i_avg=1.0))
