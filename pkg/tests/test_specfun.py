import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import special

from cograte.errors import DomainError
from cograte.specfun import (exp_integral_e1, exp_integral_e1_scaled, gaussian_q,
                             reg_lower_gamma, reg_upper_gamma)

import oracles


@pytest.mark.parametrize("a,x", [(0.5, 0.1), (1.0, 1.0), (3.0, 2.5), (10.0, 8.0), (10.0, 12.0),
                                 (37.5, 40.0), (100.0, 90.0), (100.0, 120.0)])
def test_lower_gamma_against_series(a, x):
    assert abs(reg_lower_gamma(a, x) - oracles.lower_gamma_series(a, x)) <= 1e-12


def test_lower_gamma_edges():
    assert reg_lower_gamma(2.0, 0.0) == 0.0
    assert reg_upper_gamma(2.0, 0.0) == 1.0
    # a = 1 is the exponential law
    assert abs(reg_lower_gamma(1.0, 2.0) - (1 - math.exp(-2.0))) < 1e-15


def test_lower_gamma_domain():
    with pytest.raises(DomainError):
        reg_lower_gamma(0.0, 1.0)
    with pytest.raises(DomainError):
        reg_lower_gamma(1.0, -0.1)
    with pytest.raises(DomainError):
        reg_lower_gamma(float("nan"), 1.0)


def test_array_shape_preserved():
    x = np.linspace(0.0, 5.0, 12).reshape(3, 4)
    out = reg_lower_gamma(2.0, x)
    assert out.shape == (3, 4)
    assert isinstance(reg_lower_gamma(2.0, 1.0), float)


@given(st.floats(0.5, 100.0), st.floats(0.0, 300.0))
def test_lower_gamma_bounded_and_complementary(a, x):
    p = reg_lower_gamma(a, x)
    assert 0.0 <= p <= 1.0
    assert abs(p + reg_upper_gamma(a, x) - 1.0) < 1e-14


@given(st.floats(0.5, 50.0), st.floats(0.0, 100.0), st.floats(0.0, 20.0))
def test_lower_gamma_monotone_in_x(a, x, dx):
    assert reg_lower_gamma(a, x + dx) >= reg_lower_gamma(a, x) - 1e-15


@pytest.mark.parametrize("x", [0.01, 0.1, 0.5, 1.0, 2.0, 7.5, 30.0, 100.0])
def test_e1_against_quadrature(x):
    assert abs(exp_integral_e1(x) - oracles.e1_quad(x)) <= 1e-12 * max(1.0, oracles.e1_quad(x))


def test_e1_scaled_large_argument():
    # e^x E1(x) ~ 1/x - 1/x^2 + 2/x^3 for large x
    x = 1e6
    assert abs(exp_integral_e1_scaled(x) - (1 / x - 1 / x ** 2 + 2 / x ** 3)) < 1e-20


def test_e1_domain():
    with pytest.raises(DomainError):
        exp_integral_e1(0.0)
    with pytest.raises(DomainError):
        exp_integral_e1(-1.0)


@given(st.floats(1e-3, 500.0))
def test_e1_matches_scipy(x):
    assert math.isclose(exp_integral_e1(x), special.exp1(x), rel_tol=1e-12, abs_tol=1e-300)


@given(st.floats(-8.0, 8.0))
def test_gaussian_q_symmetry(z):
    assert abs(gaussian_q(z) + gaussian_q(-z) - 1.0) < 1e-15
