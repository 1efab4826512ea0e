"""Pointwise principal-value evaluation of the fractional Laplacian on the disk.

For u supported in the closed unit disk,

    (-Delta)^alpha u(x) = - PV int (u(z) - u(x)) |z - x|^(-2 - 2 alpha) dz

is written over half-directions phi in [0, pi): rays x + r e and x - r e are
paired on 0 < r < rho(x)/2, where the symmetric second difference
u(x+re) + u(x-re) - 2u(x) = O(r^2) removes the first-order term.  Beyond
rho(x)/2 each ray is integrated separately up to its exit distance R, and the
exterior (u = 0) contributes -u(x) R^(-2 alpha) / (2 alpha) in closed form.

The inner radius of the principal value follows the schedule
eps_j = rho 2^-j, j = 3..12.  The piece |z - x| < eps_j is added back from
the Taylor model a(phi) r^2 of the second difference, and the schedule is
accepted when three successive corrected values agree.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .domain import BallDomain, FracOrder
from .errors import DomainError, NonConvergence, SupersolutionViolated
from .grid import FieldOnGrid
from .quadrature import gauss_legendre

log = logging.getLogger(__name__)

EPS_LEVELS = tuple(range(3, 13))


@dataclass
class ExplicitField:
    """Closed-form field on the disk, zero outside.

    Either ``radial`` (a function of the boundary distance rho, used for
    full precision next to the sphere) or ``func`` (a function of points of
    shape (..., 2)) must be given.  ``boundary_exponent`` beta declares
    u ~ c rho^beta at the sphere.
    """

    radial: Optional[Callable] = None
    func: Optional[Callable] = None
    boundary_exponent: float = 0.0
    label: str = "u"

    def __post_init__(self):
        if self.radial is None and self.func is None:
            raise DomainError("an explicit field needs a radial profile or a point evaluator")
        if not self.boundary_exponent > -1.0:
            raise DomainError("the boundary exponent must exceed -1")

    def at_points(self, pts, rho=None):
        """u at points inside the disk; ``rho`` may supply precise boundary distances."""
        pts = np.asarray(pts, dtype=float)
        if self.radial is not None:
            if rho is None:
                rho = 1.0 - np.linalg.norm(pts, axis=-1)
            return self.radial(rho)
        return self.func(pts)

    def scaled(self, c: float) -> "ExplicitField":
        r, f = self.radial, self.func
        return ExplicitField(None if r is None else (lambda s: c * r(s)),
                             None if f is None else (lambda p: c * f(p)),
                             self.boundary_exponent, f"{c:g}*{self.label}")

    @classmethod
    def from_grid(cls, fld: FieldOnGrid, label: str = "grid field") -> "ExplicitField":
        """C^2 adapter for a radial grid field: cubic spline of v in log(rho).

        The normalised value is held constant below the first level, so the
        boundary exponent is alpha - 1.
        """
        from scipy.interpolate import CubicSpline

        if not fld.radial:
            raise DomainError("only radial grid fields can be adapted")
        lr = np.log(fld.rho)
        spl = CubicSpline(lr, fld.values, bc_type=((1, 0.0), "not-a-knot"))
        a = fld.alpha
        lo = lr[0]

        def radial(rho):
            rho = np.asarray(rho, dtype=float)
            x = np.log(np.clip(rho, 1e-300, 1.0))
            return spl(np.maximum(x, lo)) * rho ** (a - 1.0)

        return cls(radial=radial, boundary_exponent=a - 1.0, label=label)


def power_profile(beta: float) -> ExplicitField:
    """rho(x)^beta on the disk."""
    return ExplicitField(radial=lambda r: np.asarray(r, dtype=float) ** beta,
                         boundary_exponent=beta, label=f"rho^{beta:g}")


def _phi_rule(rho, order):
    """Quadrature on psi in [0, pi) graded at scale sqrt(rho) around the tangent psi = pi/2."""
    xg, wg = gauss_legendre(order)
    h = 0.125 * math.sqrt(rho)
    edges = [0.0, h]
    while edges[-1] * 2.0 < 0.5 * math.pi:
        edges.append(edges[-1] * 2.0)
    edges[-1] = 0.5 * math.pi
    d = np.array(edges)
    # distances from the tangent direction, mirrored on both sides
    lo, hi = d[:-1], d[1:]
    off = (lo[:, None] + (hi - lo)[:, None] * xg[None, :]).ravel()
    w = ((hi - lo)[:, None] * wg[None, :]).ravel()
    psi = np.concatenate([0.5 * math.pi - off, 0.5 * math.pi + off])
    return psi, np.concatenate([w, w])


def _graded_to_end(L, beta, n_panels, order, ratio=0.25):
    """Distances d in (0, L] from an endpoint with weights, graded towards d = 0."""
    xg, wg = gauss_legendre(order)
    m = max(1, min(40, math.ceil(2.0 / (beta + 1.0))))
    edges = np.concatenate([[0.0], ratio ** np.arange(n_panels - 1, -1, -1.0)])
    d, w = [], []
    for i in range(n_panels):
        lo, hi = edges[i], edges[i + 1]
        if i == 0:
            d.append(hi * xg ** m)
            w.append(hi * m * xg ** (m - 1) * wg)
        else:
            d.append(lo + (hi - lo) * xg)
            w.append((hi - lo) * wg)
    d = np.concatenate(d)
    w = np.concatenate(w)
    return np.outer(L, d), np.outer(L, w)


def _lap_once(u: ExplicitField, x, alpha, order, n_log=12, n_grade=12):
    """Corrected PV values for every eps level with Gauss order ``order``."""
    xn = float(np.linalg.norm(x))
    rho = 1.0 - xn
    th = math.atan2(x[1], x[0]) if xn > 0 else 0.0
    c = rho * (2.0 - rho)
    s2a = 2.0 * alpha
    ux = float(u.at_points(x[None, :], np.array([rho]))[0])
    psi, wpsi = _phi_rule(rho, order)
    phi = psi + th
    e = np.stack([np.cos(phi), np.sin(phi)], axis=-1)
    b = xn * np.cos(psi)
    sq = np.sqrt(b * b + c)
    R_plus = c / (b + sq)
    R_minus = c / (-b + sq)
    xg, wg = gauss_legendre(order)

    # near field: dyadic panels [rho/2^(j+1), rho/2^j], j = 1..12
    near_panels = []
    for j in range(1, max(EPS_LEVELS) + 1):
        lo, hi = rho * 2.0 ** (-j - 1), rho * 2.0 ** (-j)
        r = lo + (hi - lo) * xg
        pp = x[None, None, :] + r[None, :, None] * e[:, None, :]
        pm = x[None, None, :] - r[None, :, None] * e[:, None, :]
        up = _eval_on_ray(u, pp, r[None, :], R_plus[:, None], R_minus[:, None])
        um = _eval_on_ray(u, pm, r[None, :], R_minus[:, None], R_plus[:, None])
        delta = up + um - 2.0 * ux
        near_panels.append((delta * r ** (-1.0 - s2a)) @ ((hi - lo) * wg))

    # second-difference curvature at each eps level, for the Taylor remainder
    def curvature(eps):
        r = np.array([eps])
        pp = x[None, None, :] + r[None, :, None] * e[:, None, :]
        pm = x[None, None, :] - r[None, :, None] * e[:, None, :]
        up = _eval_on_ray(u, pp, r[None, :], R_plus[:, None], R_minus[:, None])
        um = _eval_on_ray(u, pm, r[None, :], R_minus[:, None], R_plus[:, None])
        return ((up + um - 2.0 * ux) / eps ** 2)[:, 0]

    # far field on each ray
    rn = 0.5 * rho
    far = np.zeros_like(psi)
    for R, R_other, sgn in ((R_plus, R_minus, 1.0), (R_minus, R_plus, -1.0)):
        # log-uniform panels on [rn, R/2]
        top = np.maximum(0.5 * R, rn)
        la, lb = math.log(rn), np.log(top)
        edges = la + (lb - la)[:, None] * (np.arange(n_log + 1) / n_log)[None, :]
        lo, wid = edges[:, :-1], np.diff(edges, axis=1)
        t = (lo[:, :, None] + wid[:, :, None] * xg[None, None, :]).reshape(psi.size, -1)
        wt = (wid[:, :, None] * wg[None, None, :]).reshape(psi.size, -1)
        r = np.exp(t)
        pts = x[None, None, :] + sgn * r[:, :, None] * e[:, None, :]
        ur = _eval_on_ray(u, pts, r, R[:, None], R_other[:, None])
        far += ((ur - ux) * r ** (-s2a) * wt).sum(axis=1)
        # graded panels on [R/2, R] towards the exit point
        L = R - top
        d, wd = _graded_to_end(L, u.boundary_exponent, n_grade, order)
        r = R[:, None] - d
        pts = x[None, None, :] + sgn * r[:, :, None] * e[:, None, :]
        ur = _eval_on_ray(u, pts, r, R[:, None], R_other[:, None], dist_to_exit=d)
        far += ((ur - ux) * r ** (-1.0 - s2a) * wd).sum(axis=1)
        far += -ux * R ** (-s2a) / s2a

    far_int = float(far @ wpsi)
    cum = 0.0
    values = []
    for j in range(1, max(EPS_LEVELS) + 1):
        cum += float(near_panels[j - 1] @ wpsi)
        if j + 1 in EPS_LEVELS:
            eps = rho * 2.0 ** (-(j + 1))
            taylor = float(curvature(eps) @ wpsi) * eps ** (2.0 - s2a) / (2.0 - s2a)
            values.append(-(far_int + cum + taylor))
    # level j = 3 corresponds to eps = rho/8, i.e. panels j = 1, 2 summed
    return np.array(values)


def _eval_on_ray(u: ExplicitField, pts, r, R, R_other, dist_to_exit=None):
    """u at x + r e with the boundary distance formed from the ray geometry."""
    if dist_to_exit is None:
        dist_to_exit = R - r
    inside = dist_to_exit > 0
    one_minus_sq = np.where(inside, dist_to_exit * (r + R_other), 0.0)
    norm = np.sqrt(np.maximum(1.0 - one_minus_sq, 0.0))
    rho_z = one_minus_sq / (1.0 + norm)
    out = np.zeros(np.broadcast(pts[..., 0], rho_z).shape)
    if np.any(inside):
        p = np.broadcast_to(pts, out.shape + (2,))
        out[inside] = u.at_points(p[inside], rho_z[inside])
    return out


@dataclass
class FracLapValue:
    value: float
    error_estimate: float
    schedule: np.ndarray


def frac_lap_eval(dom: BallDomain, order: FracOrder, u: ExplicitField, x,
                  tol: float = 1e-5, normalized: bool = False, detail: bool = False):
    """(-Delta)^alpha u(x) by the principal-value definition.

    ``normalized=True`` multiplies by C_{N,alpha}, giving the operator whose
    Green kernel is :func:`fracblow.green.green_kernel`.  ``tol`` is relative
    to the size of the far-field contribution.
    """
    if dom.dim != 2:
        raise DomainError("the fractional Laplacian is implemented on the disk")
    x = np.asarray(x, dtype=float)
    rho = 1.0 - float(np.linalg.norm(x))
    if rho < 1e-6:
        raise DomainError("x must stay at least 1e-6 away from the boundary")
    a = order.alpha
    v8 = _lap_once(u, x, a, 8)
    v12 = _lap_once(u, x, a, 12)
    scale = max(abs(v12[-1]), abs(float(u.at_points(x[None, :])[0])) * rho ** (-2.0 * a), 1e-300)
    # three successive eps levels must agree, and the two rules must agree
    spread = np.max(np.abs(np.diff(v12[-3:])))
    rule = abs(v12[-1] - v8[-1])
    err = max(spread, rule)
    if err > tol * scale:
        raise NonConvergence(
            f"fractional Laplacian did not stabilise (spread {spread:.3e}, rule difference "
            f"{rule:.3e}, scale {scale:.3e})")
    factor = order.normalizing_constant(2) if normalized else 1.0
    out = FracLapValue(factor * float(v12[-1]), factor * err, factor * v12)
    return out if detail else out.value


@dataclass
class SupersolutionReport:
    p: float
    c_p: float
    lambda0: float
    points: np.ndarray
    ratios: np.ndarray
    residuals: np.ndarray
    scales: np.ndarray
    ok: bool

    @property
    def c_negative(self) -> bool:
        return self.c_p < 0


def w_p(alpha: float, p: float) -> ExplicitField:
    """rho^(-2 alpha / (p - 1))."""
    beta = -2.0 * alpha / (p - 1.0)
    return power_profile(beta)


def default_radial_points(n: int = 15, rho_lo: float = 1e-3, rho_hi: float = 0.5):
    rho = np.logspace(math.log10(rho_lo), math.log10(rho_hi), n)
    return np.stack([1.0 - rho, np.zeros_like(rho)], axis=-1)


def check_supersolution(dom: BallDomain, order: FracOrder, p: float,
                        points: Optional[Sequence] = None, tol: float = 1e-3,
                        lam_factor: float = 1.0, normalized: bool = False,
                        raise_on_fail: bool = True) -> SupersolutionReport:
    """Check that lambda_0 w_p is a super-solution of (-Delta)^alpha u + u^p = 0.

    c(p) is the most negative value of (-Delta)^alpha w_p rho^(2 alpha/(p-1) + 2 alpha)
    over ``points``, and lambda_0 = |c(p)|^(1/(p-1)) is the smallest multiple
    that makes every residual nonnegative.  For p >= p* the ratio is positive
    near the sphere (C(tau) < 0 for tau > alpha - 1), so c(p) may come out
    nonnegative; then every multiple of w_p is a super-solution and the
    residuals are still reported.  Residuals are relative to the local scale
    lambda^p rho^(-2 alpha p/(p-1)).
    """
    a = order.alpha
    if not p > 1.0 + 2.0 * a:
        raise DomainError(f"p must exceed 1 + 2 alpha = {1 + 2 * a:g}")
    if p >= order.p_star:
        log.warning("p = %g is not below p* = %g; c(p) is expected to be positive", p,
                    order.p_star)
    pts = default_radial_points() if points is None else np.asarray(points, dtype=float)
    w = w_p(a, p)
    beta = 2.0 * a / (p - 1.0)
    rho = 1.0 - np.linalg.norm(pts, axis=-1)
    lap = np.array([frac_lap_eval(dom, order, w, x, normalized=normalized) for x in pts])
    ratios = lap * rho ** (beta + 2.0 * a)
    c_p = float(ratios.min())
    lam0 = abs(c_p) ** (1.0 / (p - 1.0))
    lam = lam_factor * lam0
    scales = lam ** p * rho ** (-beta * p)
    residuals = (lam * lap + (lam * rho ** (-beta)) ** p) / scales
    ok = bool(np.all(residuals >= -tol))
    rep = SupersolutionReport(p, c_p, lam0, pts, ratios, residuals, scales, ok)
    if not ok and raise_on_fail:
        bad = [tuple(pts[i]) for i in np.nonzero(residuals < -tol)[0]]
        raise SupersolutionViolated(f"negative residual at {len(bad)} points", bad)
    return rep
