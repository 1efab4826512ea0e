"""Boundary-rate fits, weak-norm decay, subcriticality verdicts and regime classification."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .domain import FracOrder
from .errors import (DegenerateField, DivergentIntegrand, DomainError, Inconclusive,
                     InsufficientWindow, NonConvergence)
from .grid import FieldOnGrid
from .nonlinearity import Custom, Nonlinearity, Power, Truncated, Zero
from .quadrature import SingularitySpec, integrate

DEFAULT_WINDOW = (1e-4, 1e-2)
MIN_LEVELS = 8
CAUCHY_THRESHOLD = 0.05
BLOWUP_FACTOR = 2.0


@dataclass
class RateFit:
    exponent: float
    intercept: float
    r_squared: float
    rho_window: Tuple[float, float]
    n_levels: int = 0

    def __post_init__(self):
        lo, hi = self.rho_window
        if not (0.0 < lo < hi <= 0.5):
            raise DomainError("the rate window must lie inside (0, 0.5]")


def fit_boundary_rate(fld: FieldOnGrid, window: Tuple[float, float] = DEFAULT_WINDOW) -> RateFit:
    """Least-squares slope of log(angular mean of u) against log(rho) on the grid levels in ``window``."""
    lo, hi = float(window[0]), float(window[1])
    if not (0.0 < lo < hi <= 0.5):
        raise DomainError("the rate window must lie inside (0, 0.5]")
    rho = fld.rho
    sel = (rho >= lo * (1 - 1e-12)) & (rho <= hi * (1 + 1e-12))
    n = int(sel.sum())
    if n < MIN_LEVELS:
        raise InsufficientWindow(f"window {window} holds {n} grid levels, need {MIN_LEVELS}")
    u = fld.angular_mean()[sel] * rho[sel] ** (fld.alpha - 1.0)
    if np.any(u <= 0):
        raise DegenerateField("the field must be positive in the fit window")
    x, y = np.log(rho[sel]), np.log(u)
    A = np.stack([x, np.ones_like(x)], axis=1)
    (slope, icpt), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (slope * x + icpt)
    ss = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss if ss > 0 else 1.0
    return RateFit(float(slope), float(icpt), min(1.0, max(0.0, r2)), (lo, hi), n)


@dataclass
class WeakNormEstimate:
    kappa: float
    fitted_decay: float
    band_constant: float
    lambdas: np.ndarray = field(repr=False, default=None)
    m_values: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        if not self.kappa > 1.0:
            raise DomainError("kappa must exceed 1")


def _shell(a, r0, r1):
    """int_r0^r1 rho^a (1 - rho) d rho."""
    F = lambda r: r ** (1.0 + a) / (1.0 + a) - r ** (2.0 + a) / (2.0 + a)
    return F(r1) - F(r0)


def _level_set_measure(rho, u, a, lam):
    """int over {u > lam} of rho^a (1 - rho) d rho along one ray of nodes.

    Between nodes u is interpolated linearly in (log rho, log u), which is
    exact for pure powers; below the first node u follows c rho^(a-1)
    (constant normalised value), as in the grid interpolation.
    """
    lr, lu = np.log(rho), np.log(u)
    total = 0.0
    # below the first node
    if u[0] > lam:
        r_cross = rho[0] * (lam / u[0]) ** (1.0 / (a - 1.0))
        total += _shell(a, 0.0, min(r_cross, rho[0]))
    ll = math.log(lam)
    for j in range(rho.size - 1):
        a0, a1 = lu[j] > ll, lu[j + 1] > ll
        if a0 and a1:
            total += _shell(a, rho[j], rho[j + 1])
        elif a0 != a1:
            t = (ll - lu[j]) / (lu[j + 1] - lu[j])
            rc = math.exp(lr[j] + t * (lr[j + 1] - lr[j]))
            total += _shell(a, rho[j], rc) if a0 else _shell(a, rc, rho[j + 1])
    return total


def level_set_measure(fld: FieldOnGrid, lam: float) -> float:
    """m(lambda) = int_{u > lambda} rho^alpha dx over the disk."""
    a = fld.alpha
    rho = fld.rho
    u = fld.physical()
    if fld.radial:
        return 2.0 * math.pi * _level_set_measure(rho, u, a, lam)
    nt = u.shape[1]
    return sum(_level_set_measure(rho, u[:, i], a, lam) for i in range(nt)) * 2.0 * math.pi / nt


def weak_norm_decay(fld: FieldOnGrid, order: FracOrder, kappa: float,
                    lambdas: Optional[Sequence[float]] = None, n_lambda: int = 24) -> WeakNormEstimate:
    """Decay of the weighted distribution function m(lambda) of a positive field.

    By default lambda runs log-uniformly from the mean of u on the level
    nearest rho = 0.1 to its mean on the level nearest 10 rho_min, so the
    probed range scales with the field.  ``fitted_decay`` is the log-log
    slope of m against lambda, ``band_constant`` is sup lambda^kappa m(lambda).
    """
    if not kappa > 1.0:
        raise DomainError("kappa must exceed 1")
    u = fld.physical()
    if np.any(u <= 0):
        raise DegenerateField("the field must be positive")
    if np.ptp(u) <= 1e-12 * np.max(np.abs(u)):
        raise DegenerateField("the field is constant")
    if lambdas is None:
        rho = fld.rho
        um = fld.angular_mean() * rho ** (fld.alpha - 1.0)
        lo = um[np.argmin(np.abs(np.log(rho / 0.1)))]
        hi = um[np.argmin(np.abs(np.log(rho / (10.0 * rho[0]))))]
        if not hi > lo * 1.5:
            raise DegenerateField("the field does not grow towards the boundary")
        lambdas = np.logspace(math.log10(lo), math.log10(hi), n_lambda)
    lambdas = np.asarray(lambdas, dtype=float)
    m = np.array([level_set_measure(fld, lam) for lam in lambdas])
    if np.any(m <= 0):
        raise DegenerateField("a probed super-level set is empty")
    slope = float(np.polyfit(np.log(lambdas), np.log(m), 1)[0])
    band = float(np.max(lambdas ** kappa * m))
    return WeakNormEstimate(float(kappa), slope, band, lambdas, m)


@dataclass
class SubcriticalReport:
    g: str
    g1: str
    g2: str
    p_star: float
    p_star_N: float
    tails: dict = field(default_factory=dict)


def _tail_verdict(g: Nonlinearity, kappa: float):
    """Verdict on int_1^inf g(s) s^(-1-kappa) ds from increments over doubling windows in log s."""
    growth = max(kappa, float(getattr(g, "growth", 1.0) or 1.0), 1.0)
    y_max = 690.0 / (growth + 1.0)
    edges = [0.0, 2.0]
    while edges[-1] * 2.0 <= y_max:
        edges.append(edges[-1] * 2.0)

    def f(y):
        s = np.exp(y)
        return g(s) * s ** (-kappa)

    inc = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        with np.errstate(over="ignore", invalid="ignore"):
            scale = max(1e-300, float(np.max(np.abs(f(np.linspace(lo, hi, 9))))) * (hi - lo))
            try:
                val = integrate(f, lo, hi, SingularitySpec(), tol=1e-10 * scale,
                                max_intervals=20000).value
            except (DivergentIntegrand, NonConvergence):
                val = math.inf
        inc.append(val)
    inc = np.array(inc)
    total = float(inc.sum())
    if not np.all(np.isfinite(inc)):
        # an overflowing window means the integrand itself grows without bound
        return ("divergent" if np.isinf(inc[-1]) and inc[-1] > 0 else "inconclusive"), total, inc
    last, prev = inc[-1], inc[-2]
    if abs(total) == 0.0 or last <= 1e-6 * abs(total):
        return "convergent", total, inc
    if last >= prev > 0:
        return "divergent", total, inc
    return "inconclusive", total, inc


def subcritical_check(g: Nonlinearity, order: FracOrder, N: int = 2) -> SubcriticalReport:
    """Verdicts for the tail conditions (g1) with p* and (g2) with p*_N."""
    ps, pn = order.p_star, order.p_star_N(N)
    if isinstance(g, Power):
        v1 = "convergent" if g.p < ps else "divergent"
        v2 = "convergent" if g.p < pn else "divergent"
        return SubcriticalReport(g.name, v1, v2, ps, pn)
    if isinstance(g, (Zero, Truncated)):
        # bounded g: both tails converge
        return SubcriticalReport(g.name, "convergent", "convergent", ps, pn)
    v1, t1, _ = _tail_verdict(g, ps)
    v2, t2, _ = _tail_verdict(g, pn)
    return SubcriticalReport(g.name, v1, v2, ps, pn, {"g1": t1, "g2": t2})


@dataclass
class RegimeVerdict:
    kind: str
    rate: Optional[RateFit]
    ks: List[float]
    probe_values: List[float]
    last_decade_increment: float
    last_decade_factor: float


def classify_regime(family, order: FracOrder, p: float, probe=(0.0, 0.0),
                    window: Tuple[float, float] = DEFAULT_WINDOW) -> RegimeVerdict:
    """StrongLimit or FamilyBlowUp from the values u_k(x*) of a k-family.

    Over the last decade of k (from the first member with k >= k_max/10),
    a relative increment below 5% gives StrongLimit (with the boundary rate
    of the last member attached) and growth by 2x or more gives
    FamilyBlowUp; anything in between raises Inconclusive.
    """
    ks = [float(r.k) for r in family]
    if len(ks) < 2 or ks[-1] / ks[0] < 10 ** 3 * (1 - 1e-9):
        raise DomainError("the family must span at least three decades of k")
    vals = [r.solution.at_point(probe) for r in family]
    j0 = next(i for i, k in enumerate(ks) if k >= ks[-1] / 10.0 * (1 - 1e-12))
    u0, u1 = vals[j0], vals[-1]
    inc = (u1 - u0) / abs(u1)
    fac = u1 / u0
    if inc < CAUCHY_THRESHOLD:
        return RegimeVerdict("StrongLimit", fit_boundary_rate(family[-1].solution, window),
                             ks, vals, inc, fac)
    if fac >= BLOWUP_FACTOR:
        return RegimeVerdict("FamilyBlowUp", None, ks, vals, inc, fac)
    raise Inconclusive(f"last-decade increment {inc:.3g} and factor {fac:.3g} trigger neither regime",
                       {"ks": ks, "values": vals, "p": p, "alpha": order.alpha})
