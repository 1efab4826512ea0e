"""Boundary measures and the potentials they generate through the boundary kernel."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .domain import BallDomain, FracOrder
from .errors import DomainError
from .green import martin_geom
from .grid import FieldOnGrid, GradedGrid
from .quadrature import SingularitySpec, integrate


@dataclass(frozen=True)
class BoundaryMeasure:
    """Hausdorff measure, a Dirac mass on the sphere, or a positive combination.

    Build instances with :func:`hausdorff`, :func:`dirac` and :func:`measure_sum`.
    """

    kind: str
    anchor: Optional[Tuple[float, ...]] = None
    parts: Tuple[Tuple[float, "BoundaryMeasure"], ...] = ()

    def __post_init__(self):
        if self.kind not in ("hausdorff", "dirac", "sum"):
            raise DomainError(f"unknown measure kind {self.kind!r}")
        if self.kind == "dirac":
            z = np.asarray(self.anchor, dtype=float)
            if abs(np.linalg.norm(z) - 1.0) > 1e-12:
                raise DomainError("a Dirac anchor must lie on the unit sphere")
        if self.kind == "sum":
            for w, _ in self.parts:
                if not w >= 0:
                    raise DomainError("weights must be nonnegative")

    @property
    def is_radial(self) -> bool:
        if self.kind == "hausdorff":
            return True
        if self.kind == "dirac":
            return False
        return all(m.is_radial or w == 0 for w, m in self.parts)

    def flatten(self):
        """List of (weight, elementary measure) pairs."""
        if self.kind != "sum":
            return [(1.0, self)]
        out = []
        for w, m in self.parts:
            out.extend((w * w2, m2) for w2, m2 in m.flatten())
        return out

    def describe(self) -> str:
        if self.kind == "hausdorff":
            return "hausdorff"
        if self.kind == "dirac":
            return "dirac(" + ",".join(f"{c:g}" for c in self.anchor) + ")"
        return " + ".join(f"{w:g}*{m.describe()}" for w, m in self.parts)


def hausdorff() -> BoundaryMeasure:
    return BoundaryMeasure("hausdorff")


def dirac(z0=(1.0, 0.0)) -> BoundaryMeasure:
    return BoundaryMeasure("dirac", tuple(float(c) for c in z0))


def measure_sum(parts) -> BoundaryMeasure:
    return BoundaryMeasure("sum", parts=tuple((float(w), m) for w, m in parts))


def _hausdorff_radial(rho_x: float, alpha: float, N: int, tol: float) -> float:
    """int over the sphere of M(x, z) d omega(z) for |x| = 1 - rho_x.

    The angle from the radial projection of x is split at 4 rho_x; the outer
    part is integrated in log(angle), where the |angle|^(-N) decay is smooth.
    """
    if N == 2:
        def jac(g):
            return 2.0 * np.ones_like(g)
    elif N == 3:
        def jac(g):
            return 2.0 * math.pi * np.sin(g)
    else:
        area = 2.0 * math.pi ** ((N - 1) / 2.0) / math.gamma((N - 1) / 2.0)

        def jac(g):
            return area * np.sin(g) ** (N - 2)

    def m(g):
        vals, _ = martin_geom(np.full(g.shape, rho_x), g, alpha, N, rtol=1e-12)
        return vals * jac(g)

    split = min(4.0 * rho_x, math.pi)
    scale = abs(m(np.array([0.5 * split]))[0]) * split + 1e-300
    inner = integrate(m, 0.0, split, SingularitySpec(), tol=tol * scale)
    total = inner.value
    if split < math.pi:
        L = math.log(math.pi / split)

        def outer(s):
            g = split * np.exp(s)
            return m(g) * g

        total += integrate(outer, 0.0, L, SingularitySpec(), tol=tol * scale).value
    return total


def potential(dom: BallDomain, order: FracOrder, mu: BoundaryMeasure, x,
              tol: float = 1e-10) -> float:
    """Potential of the boundary measure ``mu`` at the interior point ``x``."""
    x = dom.check_interior(np.asarray(x, dtype=float), "x")
    total = 0.0
    for w, m in mu.flatten():
        if w == 0.0:
            continue
        if m.kind == "hausdorff":
            total += w * _hausdorff_radial(1.0 - float(np.linalg.norm(x)), order.alpha,
                                           dom.dim, tol)
        else:
            z = np.asarray(m.anchor, dtype=float)
            total += w * _dirac_value(x, z, order.alpha, dom.dim, tol)
    return total


def _dirac_value(x, z, alpha, N, tol=1e-10):
    rx = 1.0 - np.linalg.norm(x, axis=-1)
    nx = np.linalg.norm(x, axis=-1)
    cosg = np.where(nx > 0, (x @ z) / np.where(nx > 0, nx, 1.0), 1.0)
    sing = np.sqrt(np.maximum(0.0, 1.0 - cosg ** 2))
    gam = np.arctan2(sing, cosg)
    vals, _ = martin_geom(np.atleast_1d(rx), np.atleast_1d(gam), alpha, N, rtol=tol)
    return vals if np.ndim(rx) else float(vals[0])


@dataclass
class PotentialField:
    measure: BoundaryMeasure
    samples: FieldOnGrid


_HAUSDORFF_CACHE = {}


def hausdorff_profile(order: FracOrder, rho, N: int = 2, tol: float = 1e-10) -> np.ndarray:
    """Hausdorff potential at an array of boundary distances (cached per level)."""
    out = np.empty(len(rho))
    for i, r in enumerate(rho):
        key = (order.alpha, N, float(r), tol)
        if key not in _HAUSDORFF_CACHE:
            _HAUSDORFF_CACHE[key] = _hausdorff_radial(float(r), order.alpha, N, tol)
        out[i] = _HAUSDORFF_CACHE[key]
    return out


def potential_field(dom: BallDomain, order: FracOrder, mu: BoundaryMeasure,
                    grid: GradedGrid, tol: float = 1e-10) -> PotentialField:
    """Potential of ``mu`` sampled on the grid, stored as P rho^(1-alpha).

    Radial measures give a 1D field; anything with a Dirac part is sampled on
    the (rho, theta) tensor grid.
    """
    if dom.dim != 2:
        raise DomainError("grid fields are implemented on the disk")
    a = order.alpha
    rho = grid.rho
    norm = rho ** (1.0 - a)
    if mu.is_radial:
        vals = np.zeros(rho.size)
        for w, m in mu.flatten():
            if w != 0.0:
                vals += w * hausdorff_profile(order, rho, 2, tol)
        return PotentialField(mu, FieldOnGrid(grid, a, vals * norm, {"measure": mu.describe()}))
    th = grid.theta
    vals = np.zeros((rho.size, th.size))
    R, T = np.meshgrid(rho, th, indexing="ij")
    pts = np.stack([(1.0 - R) * np.cos(T), (1.0 - R) * np.sin(T)], axis=-1)
    for w, m in mu.flatten():
        if w == 0.0:
            continue
        if m.kind == "hausdorff":
            vals += w * hausdorff_profile(order, rho, 2, tol)[:, None]
        else:
            z = np.asarray(m.anchor, dtype=float)
            vals += w * _dirac_value(pts.reshape(-1, 2), z, a, 2, tol).reshape(R.shape)
    return PotentialField(mu, FieldOnGrid(grid, a, vals * norm[:, None],
                                          {"measure": mu.describe()}))
