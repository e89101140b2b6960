import math

import numpy as np
import pytest
import scipy.special as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from cars_shaping.besselk import k0, k0_integral, k0e

# Abramowitz & Stegun, Table 9.8
TABLE = [(0.1, 2.4270690247), (1.0, 0.4210244382), (2.0, 0.1138938727),
         (5.0, 0.0036910983)]


@pytest.mark.parametrize("x,value", TABLE)
def test_tabulated_values(x, value):
    assert k0(x) == pytest.approx(value, abs=1e-10)


@pytest.mark.parametrize("x", [1e-6, 0.01, 0.5, 1.999, 2.0, 2.001, 3.7, 10.0, 60.0, 600.0])
def test_against_scipy(x):
    assert k0(x) == pytest.approx(sp.k0(x), rel=1e-13, abs=1e-300)
    assert k0e(x) == pytest.approx(sp.k0e(x), rel=1e-13)


@settings(max_examples=60, deadline=None)
@given(st.floats(1e-3, 50.0))
def test_against_integral_representation(x):
    assert k0(x) == pytest.approx(k0_integral(x), rel=1e-10)


@settings(max_examples=40, deadline=None)
@given(st.floats(1e-3, 700.0))
def test_scaled_form_consistent(x):
    assert k0e(x) == pytest.approx(math.exp(x) * k0(x), rel=1e-12)


def test_small_argument_logarithm():
    # K0(x) ~ -ln(x/2) - gamma_E
    x = 1e-8
    assert k0(x) == pytest.approx(-math.log(x / 2) - np.euler_gamma, rel=1e-12)


def test_large_argument_asymptote():
    x = 1e4
    assert k0e(x) == pytest.approx(math.sqrt(math.pi / (2 * x)) * (1 - 1 / (8 * x)), rel=1e-8)


@pytest.mark.parametrize("x", [0.0, -1.0])
def test_domain(x):
    with pytest.raises(ValueError):
        k0(x)
    with pytest.raises(ValueError):
        k0e(x)
