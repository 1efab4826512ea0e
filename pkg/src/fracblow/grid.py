"""Boundary-graded sample grids and fields stored in normalised form."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DomainError

# Steps in rho are never allowed to exceed this, so the region near the
# centre is not left with a single coarse cell.
MAX_RHO_STEP = 0.05


@dataclass(frozen=True)
class GradedGrid:
    """Radial levels rho_j geometric from ``rho_min`` with ratio about ``q``, up to the centre.

    Levels grow geometrically until the step would exceed ``MAX_RHO_STEP``
    and are uniform from there to rho = 1 (the centre).  ``n_theta`` angular
    nodes are used on every level for non-radial fields.
    """

    rho_min: float = 1e-4
    q: float = 1.35
    n_theta: int = 64

    def __post_init__(self):
        if not (0.0 < self.rho_min < 0.1):
            raise DomainError("rho_min must lie in (0, 0.1)")
        if not self.q > 1.0:
            raise DomainError("q must exceed 1")
        if self.n_theta < 1:
            raise DomainError("n_theta must be positive")

    @property
    def rho(self) -> np.ndarray:
        return _levels(self.rho_min, self.q)

    @property
    def theta(self) -> np.ndarray:
        return 2.0 * math.pi * np.arange(self.n_theta) / self.n_theta

    @property
    def size(self) -> int:
        return self.rho.size


_LEVEL_CACHE = {}


def _levels(rho_min, q):
    key = (rho_min, q)
    if key not in _LEVEL_CACHE:
        out = [rho_min]
        r = rho_min
        while r * q - r <= MAX_RHO_STEP and r * q < 1.0:
            r *= q
            out.append(r)
        n_uniform = max(1, math.ceil((1.0 - r) / MAX_RHO_STEP))
        out.extend(np.linspace(r, 1.0, n_uniform + 1)[1:])
        arr = np.array(out)
        arr.setflags(write=False)
        _LEVEL_CACHE[key] = arr
    return _LEVEL_CACHE[key]


@dataclass
class FieldOnGrid:
    """Field u on a graded grid, stored as v = u * rho^(1 - alpha).

    ``values`` has shape (n_rho,) for radial fields or (n_rho, n_theta).
    Interpolation is linear in log(rho) and in theta (periodic); below
    ``rho_min`` the normalised value is held constant.
    """

    grid: GradedGrid
    alpha: float
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        n = self.grid.size
        if self.values.shape not in ((n,), (n, self.grid.n_theta)):
            raise DomainError(f"values shape {self.values.shape} does not match the grid")

    @property
    def radial(self) -> bool:
        return self.values.ndim == 1

    @property
    def rho(self) -> np.ndarray:
        return self.grid.rho

    def physical(self) -> np.ndarray:
        """u on the grid nodes."""
        w = self.rho ** (self.alpha - 1.0)
        return self.values * (w if self.radial else w[:, None])

    def angular_mean(self) -> np.ndarray:
        """Angular mean of the normalised values per level."""
        return self.values if self.radial else self.values.mean(axis=1)

    def _radial_weights(self, rho):
        lr = np.log(self.rho)
        x = np.log(np.clip(rho, self.rho[0], 1.0))
        j = np.clip(np.searchsorted(lr, x, side="right") - 1, 0, lr.size - 2)
        t = (x - lr[j]) / (lr[j + 1] - lr[j])
        return j, np.clip(t, 0.0, 1.0)

    def normalized_at(self, rho, theta=None) -> np.ndarray:
        rho = np.asarray(rho, dtype=float)
        j, t = self._radial_weights(rho)
        if self.radial:
            return (1.0 - t) * self.values[j] + t * self.values[j + 1]
        if theta is None:
            raise DomainError("theta is required for a non-radial field")
        theta = np.broadcast_to(np.asarray(theta, dtype=float), rho.shape)
        nt = self.grid.n_theta
        pos = np.mod(theta, 2.0 * math.pi) / (2.0 * math.pi) * nt
        i0 = np.floor(pos).astype(int) % nt
        i1 = (i0 + 1) % nt
        fr = pos - np.floor(pos)
        v = self.values
        c0 = (1.0 - t) * v[j, i0] + t * v[j + 1, i0]
        c1 = (1.0 - t) * v[j, i1] + t * v[j + 1, i1]
        return (1.0 - fr) * c0 + fr * c1

    def __call__(self, rho, theta=None) -> np.ndarray:
        """Physical value u at (rho, theta)."""
        rho = np.asarray(rho, dtype=float)
        return self.normalized_at(rho, theta) * rho ** (self.alpha - 1.0)

    def at_point(self, x) -> float:
        x = np.asarray(x, dtype=float)
        r = float(np.linalg.norm(x))
        th = math.atan2(x[1], x[0]) if x.size > 1 else 0.0
        return float(self(np.array([1.0 - r]), np.array([th]))[0])


def radial_field(grid: GradedGrid, alpha: float, func, meta: Optional[dict] = None) -> FieldOnGrid:
    """Sample a radial function u(rho) on the grid."""
    rho = grid.rho
    return FieldOnGrid(grid, alpha, func(rho) * rho ** (1.0 - alpha), meta or {})
