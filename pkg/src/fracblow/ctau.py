"""The one-dimensional constant C(tau) and its zero.

C(tau) = int_0^inf [chi_(0,1)(t) |1-t|^tau + (1+t)^tau - 2] t^(-1-2 alpha) dt

is minus the (unnormalised) one-dimensional fractional Laplacian of x_+^tau
evaluated at x = 1.  Its zero in (-1, 0) is alpha - 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .domain import FracOrder
from .errors import BracketError, DomainError
from .quadrature import SingularitySpec, integrate

# below this t the bracket is summed as an even power series to avoid cancellation
_SERIES_CUT = 0.1
_SERIES_TERMS = 10


@dataclass(frozen=True)
class CTauValue:
    tau: float
    value: float
    error_estimate: float


def _even_binomial_coeffs(tau, nterms):
    # binom(tau, 2k) for k = 1..nterms
    out = []
    c = 1.0
    for j in range(1, 2 * nterms + 1):
        c *= (tau - j + 1) / j
        if j % 2 == 0:
            out.append(c)
    return np.array(out)


def _integrand_inner(t, dr, tau, alpha, coeffs):
    """[(1-t)^tau + (1+t)^tau - 2] t^(-1-2 alpha) on (0, 1), with dr = 1 - t exact."""
    out = np.empty_like(t)
    small = t < _SERIES_CUT
    ts = t[small]
    if ts.size:
        t2 = ts * ts
        acc = np.zeros_like(ts)
        pw = np.ones_like(ts)
        for c in coeffs:
            acc += c * pw
            pw = pw * t2
        # bracket / t^2 is summed directly, then multiplied by t^(1-2 alpha)
        out[small] = 2.0 * acc * ts ** (1.0 - 2.0 * alpha)
    tl = t[~small]
    out[~small] = (dr[~small] ** tau + (1.0 + tl) ** tau - 2.0) * tl ** (-1.0 - 2.0 * alpha)
    return out


def c_tau(order: FracOrder, tau: float, tol: float = 1e-10) -> CTauValue:
    """Evaluate C(tau) for tau in (-1, 0)."""
    if not (-1.0 < tau < 0.0):
        raise DomainError(f"tau must lie in (-1, 0), got {tau}")
    a = order.alpha
    coeffs = _even_binomial_coeffs(tau, _SERIES_TERMS)

    def f_inner(t, dl, dr):
        return _integrand_inner(t, dr, tau, a, coeffs)

    r1 = integrate(f_inner, 0.0, 1.0, SingularitySpec(1.0 - 2.0 * a, tau),
                   tol=0.5 * tol, with_distances=True)

    def f_outer(t):
        return (1.0 + t) ** tau * t ** (-1.0 - 2.0 * a)

    # the constant part -2 t^(-1-2a) integrates in closed form on (1, inf)
    r2 = integrate(lambda s: f_outer(1.0 + s), 0.0, np.inf,
                   SingularitySpec(0.0, tail_exponent=1.0 + 2.0 * a - tau), tol=0.5 * tol)
    value = r1.value + r2.value - 1.0 / a
    return CTauValue(tau, value, r1.error_estimate + r2.error_estimate)


def sign_scan(order: FracOrder, n: int = 50, lo: float = -0.99, hi: float = -0.01,
              tol: float = 1e-10):
    """Values of C on an n-point uniform scan of [lo, hi]."""
    taus = np.linspace(lo, hi, n)
    vals = np.array([c_tau(order, float(t), tol).value for t in taus])
    return taus, vals


def tau0(order: FracOrder, tol: float = 1e-8, quad_tol: float = 1e-10) -> float:
    """Zero of C on (-1, 0) by scan-and-bisect."""
    eps = 0.01
    taus, vals = sign_scan(order, 50, -1.0 + eps, -eps, quad_tol)
    sign = np.sign(vals)
    changes = np.nonzero(sign[:-1] * sign[1:] <= 0)[0]
    if changes.size == 0:
        raise BracketError(f"C(tau) keeps one sign on [{-1 + eps}, {-eps}]")
    i = int(changes[0])
    lo, hi = float(taus[i]), float(taus[i + 1])
    flo = vals[i]
    if flo == 0.0:
        return lo
    if vals[i + 1] == 0.0:
        return hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = c_tau(order, mid, quad_tol).value
        if fm == 0.0:
            return mid
        if math.copysign(1.0, fm) == math.copysign(1.0, flo):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)
