"""Fractional order and the unit-ball domain."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .special import gamma


@dataclass(frozen=True)
class FracOrder:
    """Order alpha of the fractional Laplacian together with its critical exponents."""

    alpha: float

    def __post_init__(self):
        if not (0.0 < float(self.alpha) < 1.0):
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha}")

    @property
    def p_star(self) -> float:
        a = self.alpha
        return (1.0 + a) / (1.0 - a)

    def p_star_N(self, N: int) -> float:
        a = self.alpha
        return (N + a) / (N - a)

    def normalizing_constant(self, N: int) -> float:
        """C_{N,alpha} linking the singular integral to the Fourier symbol |xi|^(2 alpha)."""
        a = self.alpha
        return a * 4.0 ** a * gamma(0.5 * N + a) / (math.pi ** (0.5 * N) * gamma(1.0 - a))


@dataclass(frozen=True)
class BallDomain:
    """Unit ball in R^N."""

    dim: int = 2

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 2:
            raise DomainError(f"dimension must be an integer >= 2, got {self.dim}")

    def rho(self, x) -> np.ndarray:
        """Distance to the boundary, 1 - |x|, for points stacked along the last axis."""
        x = np.asarray(x, dtype=float)
        return 1.0 - np.linalg.norm(x, axis=-1)

    def check_interior(self, x, name="x"):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise DomainError(f"{name} must have {self.dim} coordinates")
        if np.any(np.linalg.norm(x, axis=-1) >= 1.0):
            raise DomainError(f"{name} must lie strictly inside the unit ball")
        return x

    def check_boundary(self, z, name="z", tol=1e-12):
        z = np.asarray(z, dtype=float)
        if z.shape[-1] != self.dim:
            raise DomainError(f"{name} must have {self.dim} coordinates")
        if np.any(np.abs(np.linalg.norm(z, axis=-1) - 1.0) > tol):
            raise DomainError(f"{name} must lie on the unit sphere")
        return z

    @property
    def sphere_area(self) -> float:
        """Hausdorff measure of the unit sphere S^(N-1)."""
        N = self.dim
        return 2.0 * math.pi ** (0.5 * N) / gamma(0.5 * N)

    @property
    def volume(self) -> float:
        return self.sphere_area / self.dim
