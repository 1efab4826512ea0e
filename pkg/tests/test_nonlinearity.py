import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from fracblow import Custom, Power, Zero, from_power, truncate
from fracblow.errors import DomainError, InvalidLevel


def test_truncated_examples():
    g = truncate(Power(2.0), 4.0)
    assert float(g(np.array([1.0]))[0]) == pytest.approx(1.0, abs=1e-12)
    assert float(g(np.array([3.0]))[0]) == pytest.approx(4.0, abs=1e-12)
    assert float(g(np.array([0.0]))[0]) == 0.0
    assert float(np.max(g(np.logspace(-3, 3, 1000)))) == pytest.approx(4.0, abs=1e-12)


@given(st.floats(1.5, 50), st.floats(0.3, 3.0))
def test_truncation_ordering(n, p):
    s = np.linspace(0, 10 * n ** (1 / p), 1000)
    base = Power(p)
    g_n, g_m = truncate(base, n)(s), truncate(base, n + 1)(s)
    assert np.all(g_n <= g_m + 1e-12)
    assert np.all(g_m <= base(s) + 1e-12)


def test_truncation_converges_locally():
    g = Power(2.5)
    s = np.linspace(0, 3.0, 500)
    errs = [np.max(np.abs(truncate(g, n)(s) - g(s))) for n in (2, 8, 32)]
    assert errs[0] > errs[1] > errs[2] == 0.0


def test_truncated_is_c1():
    g = truncate(Power(2.0), 4.0)
    s = np.linspace(1.95, 2.05, 2001)
    d = g.derivative(s)
    h = 1e-7
    fd = (g(s + h) - g(s - h)) / (2 * h)
    assert np.max(np.abs(d - fd)) <= 1e-3
    # one-sided derivatives agree at both ends of the transition band
    for y in (4.0 * (1 - 1e-3), 4.0 * (1 + 1e-3)):
        e = math.sqrt(y) * np.array([1 - 1e-10, 1 + 1e-10])
        dl, dr = g.derivative(e)
        assert abs(dl - dr) <= 1e-6


def test_power_tail_closed_form():
    for p, k, s0 in ((1.5, 3.0, 2.0), (2.5, 3.0, 1.0), (0.5, 1.5, 0.1)):
        ref = quad(lambda s: s ** p * s ** (-1 - k), s0, np.inf, epsabs=0, epsrel=1e-12)[0]
        assert Power(p).tail_integral(s0, k) == pytest.approx(ref, rel=1e-9)
    assert Power(3.0).tail_integral(1.0, 3.0) == math.inf


def test_truncated_tail_numeric():
    g = truncate(Power(2.0), 4.0)
    f = lambda s: float(g(np.array([s]))[0]) * s ** (-4.0)
    ref = sum(quad(f, a, b, epsabs=0, epsrel=1e-12, limit=200)[0]
              for a, b in ((1.0, 1.99), (1.99, 2.01), (2.01, 1e3)))
    ref += 4.0 * 1e3 ** -3 / 3
    assert g.tail_integral(1.0, 3.0) == pytest.approx(ref, rel=1e-7)


def test_custom_tail_numeric():
    g = Custom(lambda s: s ** 2 / np.log(np.e + s), "s2log", growth=2.0)
    ref = quad(lambda s: s ** 2 / math.log(math.e + s) * s ** -4.0, 1.0, np.inf, epsrel=1e-12)[0]
    assert g.tail_integral(1.0, 3.0) == pytest.approx(ref, rel=1e-8)


def test_subcriticality_flags():
    a = 0.5
    assert Power(2.9).satisfies_g1(a) and not Power(3.0).satisfies_g1(a)
    assert Power(1.6).satisfies_g2(a, 2) and not Power(5 / 3).satisfies_g2(a, 2)
    assert Power(3.0).lambda_subadditive == 4.0
    assert Power(0.5).lambda_subadditive == 1.0


def test_errors():
    with pytest.raises(DomainError):
        Power(0.0)
    with pytest.raises(DomainError):
        Custom(lambda s: -1.0 - s)
    with pytest.raises(DomainError):
        Custom(lambda s: np.sin(s))
    with pytest.raises(InvalidLevel):
        truncate(Custom(lambda s: 1.0 + s), 0.5)


def test_zero_and_from_power():
    assert isinstance(from_power(0), Zero)
    assert from_power(2.0) == Power(2.0)
    assert np.all(Zero()(np.arange(5.0)) == 0)
    assert truncate(truncate(Power(2), 3), 5).base == Power(2)
