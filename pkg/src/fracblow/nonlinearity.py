"""Nondecreasing absorption terms g and their C^1 truncations."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, InvalidLevel
from .quadrature import SingularitySpec, integrate

# relative half-width of the blending band around the truncation level
TRUNCATION_BAND = 1e-3


class Nonlinearity:
    """Base interface: vectorised ``__call__``, ``derivative`` and ``tail_integral``."""

    name = "g"

    def __call__(self, s):
        raise NotImplementedError

    def derivative(self, s):
        s = np.asarray(s, dtype=float)
        h = 1e-7 * np.maximum(1.0, np.abs(s))
        return (self(s + h) - self(np.maximum(s - h, 0.0))) / (s + h - np.maximum(s - h, 0.0))

    @property
    def g0(self) -> float:
        return float(self(np.array([0.0]))[0])

    def tail_integral(self, sigma: float, kappa: float) -> float:
        """int_sigma^inf g(s) s^(-1-kappa) ds (may be inf)."""
        return _numeric_tail(self, sigma, kappa)

    @property
    def lambda_subadditive(self) -> Optional[float]:
        return None

    def is_monotone(self, samples=None) -> bool:
        s = np.sort(np.asarray(samples if samples is not None else np.logspace(-6, 6, 400)))
        v = self(s)
        return bool(np.all(np.diff(v) >= -1e-12 * np.maximum(1.0, np.abs(v[1:]))))


@dataclass(frozen=True)
class Power(Nonlinearity):
    """g(s) = s^p on s >= 0."""

    p: float

    def __post_init__(self):
        if not self.p > 0:
            raise DomainError("the power must be positive")

    @property
    def name(self):
        return f"power({self.p:g})"

    def __call__(self, s):
        s = np.maximum(np.asarray(s, dtype=float), 0.0)
        return s ** self.p

    def derivative(self, s):
        s = np.maximum(np.asarray(s, dtype=float), 0.0)
        with np.errstate(divide="ignore"):
            return self.p * s ** (self.p - 1.0)

    def tail_integral(self, sigma, kappa):
        if self.p >= kappa:
            return math.inf
        return sigma ** (self.p - kappa) / (kappa - self.p)

    @property
    def lambda_subadditive(self):
        # (s+t)^p <= 2^(p-1)(s^p+t^p) for p >= 1; subadditive for p < 1
        return max(1.0, 2.0 ** (self.p - 1.0))

    def satisfies_g1(self, alpha: float) -> bool:
        return self.p < (1.0 + alpha) / (1.0 - alpha)

    def satisfies_g2(self, alpha: float, N: int) -> bool:
        return self.p < (N + alpha) / (N - alpha)


@dataclass(frozen=True)
class Zero(Nonlinearity):
    name = "zero"

    def __call__(self, s):
        return np.zeros_like(np.asarray(s, dtype=float))

    def derivative(self, s):
        return np.zeros_like(np.asarray(s, dtype=float))

    def tail_integral(self, sigma, kappa):
        return 0.0

    @property
    def lambda_subadditive(self):
        return 1.0


@dataclass(frozen=True)
class Custom(Nonlinearity):
    """User-supplied nondecreasing g with g(0) >= 0.

    ``growth`` is an upper bound for the algebraic growth exponent of g,
    used only to declare the tail behaviour to the quadrature engine.
    """

    func: Callable
    label: str = "custom"
    lam: Optional[float] = None
    growth: float = 1.0

    def __post_init__(self):
        if self.g0 < 0:
            raise DomainError("g(0) must be nonnegative")
        if not self.is_monotone():
            raise DomainError("g must be nondecreasing")

    @property
    def name(self):
        return self.label

    def __call__(self, s):
        s = np.maximum(np.asarray(s, dtype=float), 0.0)
        return np.asarray(self.func(s), dtype=float) * np.ones_like(s)

    @property
    def lambda_subadditive(self):
        return self.lam


def _numeric_tail(g, sigma, kappa, upper=math.inf):
    """int_sigma^upper g(s) s^(-1-kappa) ds in the variable y = log(s)."""
    if upper <= sigma:
        return 0.0
    ls = math.log(sigma)

    def f(y):
        s = np.exp(ls + y)
        return g(s) * s ** (-kappa)

    if math.isinf(upper):
        # decay in y is exponential; integrate out to where s^(growth - kappa) is negligible
        growth = getattr(g, "growth", None) or 1.0
        rate = max(kappa - growth, 1e-3)
        # stop before g(s) or s^kappa overflows
        y_hi = min(745.0 / rate, 700.0 / max(growth, kappa, 1.0) - ls)
    else:
        y_hi = math.log(upper) - ls
    res = integrate(f, 0.0, y_hi, SingularitySpec(), tol=1e-12 * max(1.0, abs(f(np.array([0.0]))[0])),
                    max_intervals=20000)
    return res.value


@dataclass(frozen=True)
class Truncated(Nonlinearity):
    """C^1 truncation g_n = phi_n(g) with sup g_n = n.

    phi_n(y) = y below a = n(1-w), n above b = n(1+w), and the quadratic
    y - (y-a)^2 / (2(b-a)) in between, which joins both pieces with matching
    slope.  phi_n(y) increases in y and in n, and phi_n(y) <= y.
    """

    base: Nonlinearity
    level: float
    width: float = TRUNCATION_BAND

    def __post_init__(self):
        if not self.level > self.base.g0 / (1.0 - self.width):
            raise InvalidLevel(f"level {self.level} must exceed g(0) = {self.base.g0}")

    @property
    def name(self):
        return f"{self.base.name}|n={self.level:g}"

    @property
    def _band(self):
        return self.level * (1.0 - self.width), self.level * (1.0 + self.width)

    def _phi(self, y):
        a, b = self._band
        y = np.asarray(y, dtype=float)
        mid = y - (y - a) ** 2 / (2.0 * (b - a))
        return np.where(y <= a, y, np.where(y >= b, self.level, mid))

    def _dphi(self, y):
        a, b = self._band
        y = np.asarray(y, dtype=float)
        return np.where(y <= a, 1.0, np.where(y >= b, 0.0, 1.0 - (y - a) / (b - a)))

    def __call__(self, s):
        return self._phi(self.base(s))

    def derivative(self, s):
        return self._dphi(self.base(s)) * self.base.derivative(s)

    def _inverse_base(self, y):
        # smallest s with base(s) >= y, by bisection on a log scale
        if isinstance(self.base, Power):
            return y ** (1.0 / self.base.p)
        lo, hi = 0.0, 1.0
        while float(self.base(np.array([hi]))[0]) < y:
            hi *= 2.0
            if hi > 1e300:
                return math.inf
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if float(self.base(np.array([mid]))[0]) < y:
                lo = mid
            else:
                hi = mid
        return hi

    def tail_integral(self, sigma, kappa):
        a, b = self._band
        sa = self._inverse_base(a)
        sb = self._inverse_base(b)
        total = 0.0
        if sigma < sa:
            total += self.base.tail_integral(sigma, kappa) - self.base.tail_integral(sa, kappa) \
                if isinstance(self.base, Power) else _numeric_tail(self.base, sigma, kappa, sa)
        lo = max(sigma, sa)
        if lo < sb:
            total += _numeric_tail(self, lo, kappa, sb)
        top = max(sigma, sb)
        total += self.level * top ** (-kappa) / kappa
        return total

    @property
    def lambda_subadditive(self):
        return self.base.lambda_subadditive


def truncate(g: Nonlinearity, n: float) -> Truncated:
    """C^1 truncation of ``g`` at level ``n`` (sup g_n = n)."""
    if isinstance(g, Truncated):
        g = g.base
    return Truncated(g, float(n))


def from_power(p: float) -> Nonlinearity:
    """Power(p), with p = 0 meaning the zero nonlinearity."""
    return Zero() if p == 0 else Power(p)
