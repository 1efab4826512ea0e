import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fracblow import FieldOnGrid, GradedGrid, radial_field
from fracblow.errors import DomainError
from fracblow.grid import MAX_RHO_STEP


@given(st.floats(1e-5, 0.05), st.floats(1.05, 3.0))
def test_levels_cover(rho_min, q):
    r = GradedGrid(rho_min, q).rho
    assert r[0] == rho_min and r[-1] == pytest.approx(1.0)
    assert np.all(np.diff(r) > 0)
    assert np.all(np.diff(r) <= max(MAX_RHO_STEP, (q - 1) * rho_min) * (1 + 1e-9))


def test_geometric_part():
    r = GradedGrid(1e-4, 1.35).rho
    ratios = r[1:10] / r[:9]
    assert np.allclose(ratios, 1.35)


def test_bad_grids():
    for args in ((0.0, 1.3), (0.2, 1.3), (1e-4, 1.0)):
        with pytest.raises(DomainError):
            GradedGrid(*args)


def test_interpolation_exact_for_log_linear():
    g = GradedGrid(1e-3, 1.5)
    f = FieldOnGrid(g, 0.5, 2.0 + 0.1 * np.log(g.rho))
    r = np.array([2e-3, 0.013, 0.4])
    assert np.allclose(f.normalized_at(r), 2.0 + 0.1 * np.log(r), atol=1e-13)
    # held constant below rho_min
    assert f.normalized_at(np.array([1e-6]))[0] == pytest.approx(f.values[0])


def test_radial_field_roundtrip():
    g = GradedGrid(1e-3, 1.5)
    f = radial_field(g, 0.3, lambda r: r ** -0.7)
    assert np.allclose(f.physical(), g.rho ** -0.7)
    assert np.allclose(f.values, 1.0)
    assert f.at_point(np.array([0.0, 0.9])) == pytest.approx(0.1 ** -0.7, rel=1e-12)


def test_angular_interpolation_periodic():
    g = GradedGrid(1e-2, 2.0, n_theta=8)
    vals = np.tile(np.cos(g.theta), (g.size, 1))
    f = FieldOnGrid(g, 0.5, vals)
    r = np.array([0.04])
    assert f.normalized_at(r, np.array([2 * math.pi]))[0] == pytest.approx(1.0)
    mid = f.normalized_at(r, np.array([-math.pi / 8]))[0]
    assert mid == pytest.approx(0.5 * (1 + math.cos(math.pi / 4)))
    with pytest.raises(DomainError):
        f.normalized_at(r)


def test_shape_checked():
    with pytest.raises(DomainError):
        FieldOnGrid(GradedGrid(), 0.5, np.ones(3))
