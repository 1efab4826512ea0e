import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fracblow import BallDomain, FracOrder, GradedGrid, green_apply, green_kernel, martin_kernel
from fracblow.errors import DomainError
from fracblow.fraclap import ExplicitField
from fracblow.green import (GreenOperator, green_geom, kappa, martin_closed_form, martin_geom,
                            green_operator)
from fracblow.measures import potential
from fracblow.measures import hausdorff
from fracblow.nonlinearity import Power

DISK = BallDomain(2)


def random_points(rng, n, rmax=0.999):
    r = rmax * np.sqrt(rng.uniform(0, 1, n))
    th = rng.uniform(0, 2 * np.pi, n)
    return np.stack([r * np.cos(th), r * np.sin(th)], axis=-1)


def test_symmetry_random_pairs():
    rng = np.random.default_rng(1)
    o = FracOrder(0.4)
    X, Y = random_points(rng, 20), random_points(rng, 20)
    for x, y in zip(X, Y):
        a, b = green_kernel(DISK, o, x, y).value, green_kernel(DISK, o, y, x).value
        assert abs(a - b) <= 1e-12 * abs(a)


def test_boundary_decay_limit():
    o = FracOrder(0.5)
    x = np.array([0.5, 0.0])
    ratios = [green_kernel(DISK, o, x, np.array([1 - r, 0.0])).value / r ** 0.5
              for r in (1e-3, 1e-5, 1e-7)]
    assert all(q > 0 for q in ratios)
    assert abs(ratios[-1] - ratios[-2]) <= 1e-3 * ratios[-1]


def test_centre_value_vs_riemann():
    # N=2, alpha=1/2: G = kappa |x-y|^(-1) int_0^r0 s^(-1/2)/(1+s) ds with r0 = 3
    o = FracOrder(0.5)
    n = 10 ** 6
    u = (np.arange(n) + 0.5) / n * math.sqrt(3.0)
    inner = np.sum(2.0 / (1 + u * u)) * math.sqrt(3.0) / n
    ref = kappa(0.5, 2) / 0.5 * inner
    assert green_kernel(DISK, o, np.zeros(2), np.array([0.5, 0.0])).value == pytest.approx(ref,
                                                                                         rel=1e-6)


def test_equal_points_rejected():
    with pytest.raises(DomainError):
        green_kernel(DISK, FracOrder(0.5), np.zeros(2), np.zeros(2))


@given(st.floats(0.05, 0.95), st.integers(0, 10 ** 6))
def test_positive_and_two_sided(a, seed):
    rng = np.random.default_rng(seed)
    x, y = random_points(rng, 2)
    g = green_kernel(DISK, FracOrder(a), x, y).value
    assert g > 0
    d = np.linalg.norm(x - y)
    r0 = (1 - x @ x) * (1 - y @ y) / d ** 2
    q = g * d ** (2 - 2 * a) / kappa(a, 2) / min(1.0, r0) ** a
    assert 1 / 20 <= q <= 20


def test_martin_band():
    rng = np.random.default_rng(2)
    o = FracOrder(0.5)
    X = random_points(rng, 100)
    th = rng.uniform(0, 2 * np.pi, 100)
    Z = np.stack([np.cos(th), np.sin(th)], axis=-1)
    q = np.array([martin_kernel(DISK, o, x, z).value * np.linalg.norm(x - z) ** 2
                  / (1 - np.linalg.norm(x)) ** 0.5 for x, z in zip(X, Z)])
    assert q.max() / q.min() <= 5.0


def test_martin_rotation_and_centre():
    o = FracOrder(0.3)
    x, z = np.array([0.3, 0.4]), np.array([0.6, 0.8])
    m = martin_kernel(DISK, o, x, z).value
    for ang in (0.4, 2.0, -1.3):
        R = np.array([[math.cos(ang), -math.sin(ang)], [math.sin(ang), math.cos(ang)]])
        assert martin_kernel(DISK, o, R @ x, R @ z).value == pytest.approx(m, rel=1e-10)
    vals = [martin_kernel(DISK, o, np.zeros(2), np.array([math.cos(t), math.sin(t)])).value
            for t in np.linspace(0, 6, 7)]
    assert np.ptp(vals) <= 1e-12 * vals[0]
    # small-t oracle straight from the Green kernel
    t = 1e-6
    oracle = green_kernel(DISK, o, np.zeros(2), np.array([1 - t, 0.0])).value / t ** 0.3
    assert vals[0] == pytest.approx(oracle, rel=1e-5)


def test_martin_vs_closed_form():
    rho = np.array([1e-4, 0.01, 0.3, 0.9])
    gam = np.array([0.0, 0.5, 2.0, 3.1])
    for a in (0.2, 0.5, 0.8):
        vals, _ = martin_geom(rho, gam, a, 2, rtol=1e-12)
        assert np.allclose(vals, martin_closed_form(a, 2, rho, gam), rtol=1e-9)


def test_martin_consistency_with_green_limit():
    # int over the circle of M(x, z) equals lim t^-alpha int G(x, (1-t) z) d omega(z)
    from fracblow.quadrature import SingularitySpec, integrate
    a = 0.5
    o = FracOrder(a)
    x = np.array([0.8, 0.0])
    t = 1e-7

    def ring(th):
        z = np.stack([(1 - t) * np.cos(th), (1 - t) * np.sin(th)], axis=-1)
        return green_geom(0.2, t, th, a, 2) / t ** a

    spec = SingularitySpec()
    via_green = 2 * (integrate(ring, 0.0, 0.8, spec, tol=1e-12).value
                     + integrate(ring, 0.8, math.pi, spec, tol=1e-12).value)
    assert potential(DISK, o, hausdorff(), x) == pytest.approx(via_green, rel=1e-5)


def test_apply_zero_and_one():
    o = FracOrder(0.5)
    assert green_apply(DISK, o, lambda p: np.zeros(p.shape[:-1]), np.zeros(2)) == 0.0
    val = green_apply(DISK, o, lambda p: np.ones(p.shape[:-1]), np.zeros(2), tol=1e-9)
    # brute-force midpoint sum, Richardson-corrected for the r^(-1) singularity at the centre
    def midpoint(n):
        h = 2.0 / n
        c = -1 + h * (np.arange(n) + 0.5)
        X, Y = np.meshgrid(c, c, indexing="ij")
        R = np.hypot(X, Y)
        m = R < 1
        return green_geom(1.0, 1 - R[m], np.arctan2(Y[m], X[m]), 0.5, 2).sum() * h * h
    ref = 2 * midpoint(2000) - midpoint(1000)
    assert abs(val - ref) <= 1e-4


def test_apply_closed_form_one():
    # G[1] = Gamma(N/2) / (4^a Gamma(1+a) Gamma(N/2+a)) (1 - |x|^2)^a
    for a in (0.3, 0.7):
        o = FracOrder(a)
        x = np.array([0.2, -0.5])
        ref = 1.0 / (4 ** a * math.gamma(1 + a) * math.gamma(1 + a)) * (1 - x @ x) ** a
        val = green_apply(DISK, o, lambda p: np.ones(p.shape[:-1]), x, tol=1e-10)
        assert val == pytest.approx(ref, rel=1e-7)


def test_singular_source_bounded_rate():
    a, p = 0.5, 2.5
    o = FracOrder(a)
    class Source:
        boundary_exponent = (a - 1) * p

        def at_points(self, pts, rho):
            return rho ** self.boundary_exponent

    f = Source()
    q = [green_apply(DISK, o, f, np.array([1 - r, 0.0]), tol=1e-6,
                     boundary_exponent=(a - 1) * p) * r ** ((1 - a) * p - 2 * a)
         for r in (1e-2, 1e-3, 1e-4)]
    assert max(q) / min(q) < 1.5


def test_operator_matches_closed_form_one():
    for a in (0.3, 0.5, 0.7):
        o = FracOrder(a)
        grid = GradedGrid()
        op = green_operator(o, grid)
        one = lambda s: np.ones_like(np.asarray(s, dtype=float))
        from fracblow.nonlinearity import Custom
        g = Custom(one, "one")
        v = op.apply(g, np.ones(grid.size))
        rho = grid.rho
        ref = (1.0 / (4 ** a * math.gamma(1 + a) ** 2) * (rho * (2 - rho)) ** a) * rho ** (1 - a)
        assert np.max(np.abs(v - ref) / np.max(ref)) <= 1e-6


def test_operator_vs_pointwise_apply():
    a = 0.5
    o = FracOrder(a)
    grid = GradedGrid()
    op = green_operator(o, grid)
    v = 0.6 + 0.1 * np.log(grid.rho)
    v = np.maximum(v, 0.05)
    g = Power(1.7)
    W = op.apply(g, v)
    from fracblow.grid import FieldOnGrid
    src = FieldOnGrid(grid, a, v)
    for i in (5, 20, grid.size - 1):
        r = grid.rho[i]
        x = np.array([1 - r, 0.0])
        f = ExplicitField(radial=lambda rho: g(src(rho)))
        ref = green_apply(DISK, o, f, x, tol=1e-9,
                          boundary_exponent=1.7 * (a - 1)) * r ** (1 - a)
        assert W[i] == pytest.approx(ref, rel=2e-3)


def test_jacobian_vs_finite_differences():
    o = FracOrder(0.5)
    grid = GradedGrid(1e-3, 1.5)
    op = GreenOperator(o, grid)
    g = Power(2.5)
    v = 0.64 + 0.05 * grid.rho
    J = op.jacobian(g, v)
    base = op.apply(g, v)
    for j in (0, 4, grid.size - 2):
        h = 1e-6
        vp = v.copy()
        vp[j] += h
        col = (op.apply(g, vp) - base) / h
        assert np.allclose(J[:, j], col, rtol=1e-4, atol=1e-7 * np.max(np.abs(base)))
