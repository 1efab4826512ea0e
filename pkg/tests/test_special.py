import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from fracblow.special import beta, gamma, green_radial_integral, incomplete_beta


@pytest.mark.parametrize("x", [0.1, 0.5, 1.0, 1.5, 2.5, 7.3, 20.0, -0.5, -1.7])
def test_gamma_matches_math(x):
    assert gamma(x) == pytest.approx(math.gamma(x), rel=1e-13)


@given(st.floats(0.05, 30.0))
def test_gamma_recurrence(x):
    assert gamma(x + 1.0) == pytest.approx(x * gamma(x), rel=1e-12)


@pytest.mark.parametrize("a,b", [(0.5, 0.5), (0.3, 2.0), (1.7, 0.2)])
def test_beta(a, b):
    assert beta(a, b) == pytest.approx(float(mpmath.beta(a, b)), rel=1e-13)


@pytest.mark.parametrize("x", [1e-6, 0.01, 0.3, 0.7, 0.99])
@pytest.mark.parametrize("a,b", [(0.5, 1.0), (0.25, 0.5), (0.8, 1.5)])
def test_incomplete_beta_vs_mpmath(x, a, b):
    ref = float(mpmath.betainc(a, b, 0, x))
    assert incomplete_beta(x, a, b) == pytest.approx(ref, rel=1e-12)


@pytest.mark.parametrize("r0", [1e-8, 0.01, 0.5, 1.0, 3.0, 1e4])
def test_green_radial_integral_alpha_half_closed_form(r0):
    # int_0^r0 s^(-1/2) / (s + 1) ds = 2 arctan(sqrt(r0)) in the disk
    assert green_radial_integral(r0, 0.5, 2) == pytest.approx(2 * math.atan(math.sqrt(r0)),
                                                              rel=1e-13)


@given(st.floats(1e-6, 1e6), st.floats(0.05, 0.95))
def test_green_radial_integral_vs_mpmath(r0, a):
    # int_0^r0 s^(a-1) / (1+s) ds = r0^a / a * 2F1(1, a; a+1; -r0)
    mpmath.mp.dps = 30
    ref = float(mpmath.mpf(r0) ** a / a * mpmath.hyp2f1(1, a, a + 1, -r0))
    assert green_radial_integral(r0, a, 2) == pytest.approx(ref, rel=1e-10)
