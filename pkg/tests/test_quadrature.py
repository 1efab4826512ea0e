import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fracblow.errors import DivergentIntegrand, InvalidSpec
from fracblow.quadrature import SingularitySpec, graded_rule, integrate, integrate_2d_polar


def test_inverse_sqrt():
    r = integrate(lambda t: t ** -0.5, 0.0, 1.0, SingularitySpec(left_exponent=-0.5), tol=1e-10)
    assert abs(r.value - 2.0) <= 1e-10


def test_rational_tail():
    r = integrate(lambda t: (1 + t) ** -2.0, 0.0, math.inf, SingularitySpec(tail_exponent=2.0),
                  tol=1e-10)
    assert abs(r.value - 1.0) <= 1e-10


def test_near_nonintegrable_endpoint():
    r = integrate(lambda t: t ** -0.99, 0.0, 1.0, SingularitySpec(left_exponent=-0.99), tol=1e-9)
    assert r.value == pytest.approx(100.0, rel=1e-9)


def test_slow_tail():
    r = integrate(lambda t: (1 + t) ** -1.05, 0.0, math.inf, SingularitySpec(tail_exponent=1.05),
                  tol=1e-9)
    assert r.value == pytest.approx(20.0, rel=1e-8)


def test_both_endpoints_with_distances():
    # Beta(0.1, 0.1) needs the exact distance to the right endpoint
    f = lambda t, dl, dr: dl ** -0.9 * dr ** -0.9
    r = integrate(f, 0.0, 1.0, SingularitySpec(-0.9, -0.9), tol=1e-10, with_distances=True)
    ref = math.gamma(0.1) ** 2 / math.gamma(0.2)
    assert r.value == pytest.approx(ref, rel=1e-9)


def test_graded_riemann_oracle():
    # t^(alpha-1) / (1+t)^(N/2) on [0, 1], alpha = 0.5, N = 2 against a 1e7-point graded sum
    f = lambda t: t ** -0.5 / (1.0 + t)
    r = integrate(f, 0.0, 1.0, SingularitySpec(left_exponent=-0.5), tol=1e-10).value
    n, total = 10 ** 7, 0.0
    for lo in range(0, n, 10 ** 6):
        s = (np.arange(lo, lo + 10 ** 6) + 0.5) / n
        t = s * s
        total += np.sum(f(t) * 2 * s) / n
    assert abs(r - total) <= 1e-6


def test_errors():
    with pytest.raises(InvalidSpec):
        SingularitySpec(left_exponent=-1.0)
    with pytest.raises(InvalidSpec):
        SingularitySpec(tail_exponent=1.0)
    with pytest.raises(InvalidSpec):
        integrate(lambda t: t, 1.0, 0.0)
    with pytest.raises((DivergentIntegrand, InvalidSpec)):
        integrate(lambda t: (1 + t) ** -1.0, 0.0, math.inf, SingularitySpec(tail_exponent=1.5))


def test_polar_area_and_singular():
    r = integrate_2d_polar(lambda r, th: np.ones_like(r), SingularitySpec(), tol=1e-10)
    assert abs(r.value - math.pi) <= 1e-9
    # the ray integrand r . r^(-1/2) = r^(1/2) is regular at the centre
    r = integrate_2d_polar(lambda r, th: r ** -0.5, SingularitySpec(), tol=1e-10)
    assert abs(r.value - 2 * math.pi * 2 / 3) <= 1e-8


def test_polar_off_centre_area():
    r = integrate_2d_polar(lambda r, th: np.ones_like(r), SingularitySpec(), tol=1e-10,
                           center=(0.4, -0.3))
    assert r.value == pytest.approx(math.pi, abs=1e-8)


def test_polar_green_row_vs_midpoint():
    from fracblow.green import green_geom, kappa
    from fracblow.special import green_radial_integral
    a = 0.5
    x = np.array([0.5, 0.0])

    def row(r, th):
        # kernel written with |x - y| = r so the centre of the ray stays exact
        y2 = (x[0] + r * np.cos(th)) ** 2 + (x[1] + r * np.sin(th)) ** 2
        r0 = (1 - x @ x) * np.maximum(1 - y2, 0.0) / (r * r)
        return kappa(a, 2) * r ** (2 * a - 2) * green_radial_integral(r0, a, 2)

    val = integrate_2d_polar(row, SingularitySpec(left_exponent=2 * a - 1), tol=1e-9,
                             center=tuple(x)).value
    def midpoint(n):
        # x = (0.5, 0) is a cell corner for every even n, so the singular cells repeat
        h = 2.0 / n
        c = -1 + h * (np.arange(n) + 0.5)
        total = 0.0
        for i in range(0, n, 200):
            X, Y = np.meshgrid(c[i:i + 200], c, indexing="ij")
            R = np.hypot(X, Y)
            m = R < 1
            total += green_geom(0.5, 1 - R[m], np.arctan2(Y[m], X[m]), a, 2).sum() * h * h
        return total

    # the r^(2 alpha - 2) singularity leaves an O(h) midpoint error; one Richardson step removes it
    total = 2 * midpoint(2000) - midpoint(1000)
    assert abs(val - total) <= 1e-4


@given(st.floats(-0.95, 3.0))
def test_power_integrals(e):
    r = integrate(lambda t: t ** e, 0.0, 1.0, SingularitySpec(left_exponent=min(e, 0.0)), tol=1e-10)
    assert r.value == pytest.approx(1.0 / (e + 1.0), rel=1e-9)


@given(st.floats(-50, 50).filter(lambda c: abs(c) > 1e-3))
def test_linearity(c):
    f = lambda t: np.exp(-t) * t ** -0.3
    spec = SingularitySpec(left_exponent=-0.3)
    tol = 1e-10
    a = integrate(f, 0.0, 2.0, spec, tol=tol).value
    b = integrate(lambda t: c * f(t), 0.0, 2.0, spec, tol=tol * abs(c)).value
    assert abs(b - c * a) <= 2 * tol * abs(c)


@given(st.floats(0.05, 0.95))
def test_splitting(c):
    f = lambda t: np.cos(3 * t) * t ** -0.5
    spec = SingularitySpec(left_exponent=-0.5)
    whole = integrate(f, 0.0, 1.0, spec, tol=1e-10).value
    left = integrate(f, 0.0, c, spec, tol=1e-10).value
    right = integrate(f, c, 1.0, SingularitySpec(), tol=1e-10).value
    assert abs(whole - left - right) <= 3e-10


def test_monotone_refinement():
    f = lambda t: np.sin(20 * t) * t ** -0.7
    spec = SingularitySpec(left_exponent=-0.7)
    errs = [integrate(f, 0.0, 1.0, spec, tol=10.0 ** -j).error_estimate for j in range(3, 12)]
    assert all(b <= a for a, b in zip(errs, errs[1:]))


def test_graded_rule_exact_for_power():
    x, w = graded_rule(0.0, 2.0, -0.5)
    assert np.sum(w * x ** -0.5) == pytest.approx(2 * math.sqrt(2.0), rel=1e-8)
    assert w.sum() == pytest.approx(2.0, rel=1e-14)
