import math

import numpy as np
import pytest

from fracblow import (BallDomain, ExplicitField, FracOrder, GradedGrid, dirac, fit_boundary_rate,
                      frac_lap_eval, hausdorff, measure_sum, potential, potential_field)
from fracblow.errors import DomainError
from fracblow.green import kappa, martin_closed_form

DISK = BallDomain(2)


def hausdorff_closed(a, N, rho):
    # int_S M(x, z) dz = kappa 2^a |S| / a (1 - |x|^2)^(a - 1) by the Poisson identity
    area = 2 * math.pi ** (N / 2) / math.gamma(N / 2)
    return kappa(a, N) * 2 ** a * area / a * (rho * (2 - rho)) ** (a - 1)


@pytest.mark.parametrize("N", [2, 3])
@pytest.mark.parametrize("a", [0.3, 0.5, 0.8])
def test_hausdorff_closed_form(N, a):
    dom = BallDomain(N)
    for r in (1e-4, 0.01, 0.3, 0.9):
        x = np.zeros(N)
        x[0] = 1 - r
        assert potential(dom, FracOrder(a), hausdorff(), x) == pytest.approx(
            hausdorff_closed(a, N, r), rel=1e-8)


def test_hausdorff_band():
    o = FracOrder(0.5)
    rho = np.logspace(-4, math.log10(0.5), 30)
    q = [potential(DISK, o, hausdorff(), np.array([1 - r, 0.0])) * r ** 0.5 for r in rho]
    assert max(q) / min(q) <= 3.0


def test_dirac_band_and_rotation():
    rng = np.random.default_rng(3)
    o = FracOrder(0.5)
    z0 = np.array([1.0, 0.0])
    r = np.sqrt(rng.uniform(0, 1, 100))
    th = rng.uniform(0, 2 * np.pi, 100)
    X = np.stack([r * np.cos(th), r * np.sin(th)], axis=-1)
    q = np.array([potential(DISK, o, dirac(z0), x) * np.sum((x - z0) ** 2) / (1 - np.linalg.norm(x)) ** 0.5
                  for x in X])
    assert q.max() / q.min() <= 5.0
    ang = 1.1
    R = np.array([[math.cos(ang), -math.sin(ang)], [math.sin(ang), math.cos(ang)]])
    for x in X[:5]:
        assert potential(DISK, o, dirac(R @ z0), R @ x) == pytest.approx(
            potential(DISK, o, dirac(z0), x), rel=1e-9)


def test_dirac_closed_form():
    o = FracOrder(0.4)
    x = np.array([0.3, -0.6])
    gam = math.atan2(-0.6, 0.3)
    ref = martin_closed_form(0.4, 2, 1 - np.linalg.norm(x), gam)
    assert potential(DISK, o, dirac((1.0, 0.0)), x) == pytest.approx(float(ref), rel=1e-8)


def test_sum_comparable():
    o = FracOrder(0.5)
    nu = measure_sum([(1.0, hausdorff()), (1.0, dirac())])
    rng = np.random.default_rng(4)
    r = np.sqrt(rng.uniform(0, 1, 50))
    th = rng.uniform(0, 2 * np.pi, 50)
    X = np.stack([r * np.cos(th), r * np.sin(th)], axis=-1)
    q = []
    for x in X:
        rho = 1 - np.linalg.norm(x)
        q.append(potential(DISK, o, nu, x)
                 / (rho ** -0.5 + rho ** 0.5 / np.sum((x - np.array([1.0, 0.0])) ** 2)))
    assert max(q) / min(q) <= 10.0


def test_additivity_and_zero_weight():
    o = FracOrder(0.6)
    x = np.array([0.2, 0.7])
    h = potential(DISK, o, hausdorff(), x)
    d = potential(DISK, o, dirac((0.0, 1.0)), x)
    s = potential(DISK, o, measure_sum([(2.0, hausdorff()), (0.5, dirac((0.0, 1.0)))]), x)
    assert abs(s - (2 * h + 0.5 * d)) <= 1e-12 * s
    z = potential(DISK, o, measure_sum([(1.0, hausdorff()), (0.0, dirac())]), x)
    assert z == h


def test_invalid_measures():
    with pytest.raises(DomainError):
        dirac((0.5, 0.0))
    with pytest.raises(DomainError):
        measure_sum([(-1.0, hausdorff())])


def test_field_matches_pointwise():
    o = FracOrder(0.5)
    grid = GradedGrid(1e-3, 2.0, n_theta=8)
    P = potential_field(DISK, o, measure_sum([(1.0, hausdorff()), (1.0, dirac())]), grid).samples
    u = P.physical()
    for j in (0, 5, grid.size - 2):
        for i in (0, 3):
            r, t = grid.rho[j], grid.theta[i]
            x = (1 - r) * np.array([math.cos(t), math.sin(t)])
            ref = potential(DISK, o, measure_sum([(1.0, hausdorff()), (1.0, dirac())]), x)
            assert abs(u[j, i] - ref) <= 1e-12 * abs(ref) * 10


def test_hausdorff_field_radial():
    grid = GradedGrid(1e-4, 1.35, n_theta=32)
    P = potential_field(DISK, FracOrder(0.5), hausdorff(), grid).samples
    assert P.radial
    assert np.all(P.values > 0) and np.all(np.isfinite(P.values))
    vals = [P.at_point((1 - 0.01) * np.array([math.cos(t), math.sin(t)])) for t in grid.theta]
    assert np.ptp(vals) <= 1e-8 * vals[0]


@pytest.mark.parametrize("a", [0.3, 0.5, 0.7])
def test_boundary_rate(a):
    P = potential_field(DISK, FracOrder(a), hausdorff(), GradedGrid()).samples
    assert abs(fit_boundary_rate(P, (1e-4, 1e-1)).exponent - (a - 1)) <= 0.02


def test_alpha_harmonic():
    a = 0.5
    o = FracOrder(a)
    u = ExplicitField(radial=lambda r: hausdorff_closed(a, 2, r), boundary_exponent=a - 1)
    rng = np.random.default_rng(5)
    for r, t in zip(10 ** rng.uniform(-3, math.log10(0.9), 20), rng.uniform(0, 2 * np.pi, 20)):
        x = (1 - r) * np.array([math.cos(t), math.sin(t)])
        assert abs(frac_lap_eval(DISK, o, u, x, normalized=True)) <= 1e-2 * r ** (-1 - a)
