"""Adaptive quadrature for integrands with algebraic endpoint behaviour.

Known endpoint exponents are flattened by a power substitution before an
adaptive Gauss-Kronrod (7/15) refinement is run.  Unbounded intervals are
mapped onto [0, 1) with t = a + L s / (1 - s), which turns a t^(-b) tail into
an integrable (1 - s)^(b - 2) endpoint that is treated the same way.

The fixed Gauss-Legendre helpers at the bottom are used by the vectorised
kernel code, where thousands of small integrals with identical structure are
evaluated at once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .errors import DivergentIntegrand, InvalidSpec, NonConvergence

DEFAULT_TOL_1D = 1e-10
DEFAULT_TOL_2D = 1e-7

# Kronrod 15 / Gauss 7 nodes and weights on [-1, 1].
_XK = np.array([
    -0.991455371120812639206854697526329, -0.949107912342758524526189684047851,
    -0.864864423359769072789712788640926, -0.741531185599394439863864773280788,
    -0.586087235467691130294144845693013, -0.405845151377397166906606412076961,
    -0.207784955007898467600689403773245, 0.0,
    0.207784955007898467600689403773245, 0.405845151377397166906606412076961,
    0.586087235467691130294144845693013, 0.741531185599394439863864773280788,
    0.864864423359769072789712788640926, 0.949107912342758524526189684047851,
    0.991455371120812639206854697526329,
])
_WK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
    0.204432940075298892414161999234649, 0.190350578064785409913256402421014,
    0.169004726639267902826583426598550, 0.140653259715525918745189590510238,
    0.104790010322250183839876322541518, 0.063092092629978553290700663189204,
    0.022935322010529224963732008058970,
])
_WG = np.zeros(15)
_WG[1::2] = [
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
    0.381830050505118944950369775488975, 0.279705391489276667901467771423780,
    0.129484966168869693270611432679082,
]

_MAX_SUBST_POWER = 40


@dataclass(frozen=True)
class SingularitySpec:
    """Declared algebraic behaviour of an integrand.

    left_exponent : f ~ (t - a)^left_exponent as t -> a+.
    right_exponent : f ~ (b - t)^right_exponent as t -> b- (finite b).
    tail_exponent : f ~ t^(-tail_exponent) as t -> infinity (infinite b).
    """

    left_exponent: float = 0.0
    right_exponent: float = 0.0
    tail_exponent: Optional[float] = None

    def __post_init__(self):
        if not self.left_exponent > -1.0:
            raise InvalidSpec(f"left exponent {self.left_exponent} must exceed -1")
        if not self.right_exponent > -1.0:
            raise InvalidSpec(f"right exponent {self.right_exponent} must exceed -1")
        if self.tail_exponent is not None and not self.tail_exponent > 1.0:
            raise InvalidSpec(f"tail exponent {self.tail_exponent} must exceed 1")


@dataclass(frozen=True)
class QuadResult:
    value: float
    error_estimate: float
    evaluations: int


def _subst_power(e: float) -> int:
    """Power m for t = s^m so that s^(m(e+1)-1) is at least linear."""
    if e >= 1.0 and float(e).is_integer():
        return 1
    return int(min(_MAX_SUBST_POWER, max(1, math.ceil(2.0 / (e + 1.0)))))


def _as_vector_fn(f, with_distances=False):
    """Wrap f as g(t, dl, dr) returning an array shaped like t."""
    def call(*args):
        return f(*args) if with_distances else f(args[0])

    def g(t, dl, dr):
        y = np.asarray(call(t, dl, dr), dtype=float)
        if y.shape != t.shape:
            y = np.array([float(call(float(ti), float(li), float(ri)))
                          for ti, li, ri in zip(t, dl, dr)])
        return y
    return g


def _gk_batch(h, lo, hi):
    """Apply GK15 to many intervals of the s-variable at once."""
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    s = mid[:, None] + half[:, None] * _XK[None, :]
    y = h(s.ravel()).reshape(s.shape)
    if not np.all(np.isfinite(y)):
        raise DivergentIntegrand("integrand returned a non-finite value at a quadrature node")
    k = half * (y @ _WK)
    g = half * (y @ _WG)
    return k, np.abs(k - g), s.size


def _adaptive(h, a, b, tol, max_intervals):
    """Adaptive GK15 of h over [a, b].

    The refinement path does not depend on ``tol`` (every interval whose error
    is within a factor 10 of the worst one is bisected), and the level with the
    smallest error estimate seen so far is returned, so a smaller tolerance can
    only lower the reported error.
    """
    m0 = 0.5 * (a + b)
    lo = np.array([a, m0])
    hi = np.array([m0, b])
    vals, errs, nev = _gk_batch(h, lo, hi)
    prev_total = None
    best = None
    while True:
        total = float(vals.sum())
        err = float(errs.sum())
        if prev_total is not None:
            err = max(err, abs(total - prev_total))
        if best is None or err <= best[1]:
            best = (total, err)
        if best[1] <= tol:
            return QuadResult(best[0], best[1], nev)
        if lo.size >= max_intervals:
            raise NonConvergence(
                f"quadrature budget of {max_intervals} intervals exhausted "
                f"(error estimate {best[1]:.3e} > tol {tol:.3e})"
            )
        split = errs >= 0.1 * errs.max()
        # intervals already at the double precision floor are left alone
        split &= (hi - lo) > 1e-14 * np.abs(lo)
        if not np.any(split):
            raise NonConvergence(
                f"quadrature cannot refine further (error estimate {best[1]:.3e})")
        m = 0.5 * (lo[split] + hi[split])
        nlo = np.concatenate([lo[split], m])
        nhi = np.concatenate([m, hi[split]])
        nv, ne, k = _gk_batch(h, nlo, nhi)
        nev += k
        keep = ~split
        lo = np.concatenate([lo[keep], nlo])
        hi = np.concatenate([hi[keep], nhi])
        vals = np.concatenate([vals[keep], nv])
        errs = np.concatenate([errs[keep], ne])
        prev_total = total


# Innermost stretch next to a singular endpoint, relative to the half length,
# that is integrated analytically from the declared power law.
_END_CUT = 1e-200


def _half(f, a, length, e, side, tol, max_intervals):
    """Integrate f over the half of [a, a + length] adjacent to one endpoint.

    With t = end +/- h u^m the endpoint is at u = 0, where floating point
    resolution is finest; the stretch u < u0 is replaced by the power-law
    estimate f(end +/- d0) d0 / (e + 1).
    """
    m = _subst_power(e)
    h = 0.5 * length
    u0 = _END_CUT ** (1.0 / m)
    d0 = h * _END_CUT

    def call(d):
        if side == "left":
            return f(a + d, d, length - d)
        return f(a + length - d, length - d, d)

    def g(u):
        d = h * u ** m
        return call(d) * (h * m * u ** (m - 1))

    res = _adaptive(g, u0, 1.0, tol, max_intervals)
    corr = float(call(np.array([d0]))[0]) * d0 / (e + 1.0)
    return QuadResult(res.value + corr, res.error_estimate, res.evaluations + 1)


def _finite(f, a, b, e_left, e_right, tol, max_intervals):
    """Integrate over [a, b] as two halves, each refined from its own endpoint.

    ``f`` is called as f(t, dl, dr) with the distances dl = t - a and
    dr = b - t formed from the substitution itself, so integrands with an
    endpoint singularity keep full relative precision next to the endpoint.
    """
    length = b - a
    left = _half(f, a, length, e_left, "left", 0.5 * tol, max_intervals)
    right = _half(f, a, length, e_right, "right", 0.5 * tol, max_intervals)
    return QuadResult(left.value + right.value,
                      left.error_estimate + right.error_estimate,
                      left.evaluations + right.evaluations)


def integrate(
    f: Callable,
    a: float,
    b: float,
    spec: Optional[SingularitySpec] = None,
    tol: float = DEFAULT_TOL_1D,
    max_intervals: int = 4000,
    scale: float = 1.0,
    with_distances: bool = False,
) -> QuadResult:
    """Integrate ``f`` over [a, b] (``b`` may be ``np.inf``).

    Parameters
    ----------
    f : callable
        Vectorised integrand; scalar-only callables are also accepted.
    a, b : float
        Interval.  ``b = np.inf`` requires ``spec.tail_exponent``.
    spec : SingularitySpec
        Declared endpoint behaviour.  Defaults to a regular integrand.
    tol : float
        Absolute tolerance on the returned value.
    scale : float
        Length scale L of the map used for unbounded intervals.
    with_distances : bool
        Call ``f(t, t - a, b - t)`` with the endpoint distances computed
        without cancellation (``b - t`` is ``inf`` on unbounded intervals).

    Raises
    ------
    NonConvergence
        If the refinement budget runs out.
    InvalidSpec
        If ``tol`` is not positive or the singularity spec is inconsistent with the interval.
    """
    if spec is None:
        spec = SingularitySpec()
    if not tol > 0:
        raise InvalidSpec("tol must be positive")
    fv = _as_vector_fn(f, with_distances)
    if math.isinf(b):
        if spec.tail_exponent is None:
            raise InvalidSpec("an unbounded interval needs a tail exponent")
        bt = spec.tail_exponent
        _check_tail(fv, a, scale, bt)
        L = scale

        def g(s, ds, dr):
            # ds = s keeps t - a accurate near the left end
            t_minus_a = L * ds / dr
            return fv(a + t_minus_a, t_minus_a, np.full_like(ds, np.inf)) * (L / dr) / dr

        return _finite(g, 0.0, 1.0, spec.left_exponent, bt - 2.0, tol, max_intervals)
    if not b > a:
        if b == a:
            return QuadResult(0.0, 0.0, 1)
        raise InvalidSpec("interval must satisfy a < b")
    return _finite(fv, float(a), float(b), spec.left_exponent, spec.right_exponent,
                   tol, max_intervals)


def _check_tail(fv, a, scale, b_declared):
    """Compare f at two far truncation radii against the declared decay."""
    R = np.array([1e4 * scale, 2e4 * scale])
    y = fv(a + R, R, np.full(2, np.inf))
    if y[0] == 0.0 or y[1] == 0.0 or not np.all(np.isfinite(y)):
        return
    if np.sign(y[0]) != np.sign(y[1]):
        return
    observed = -math.log2(abs(y[1] / y[0]))
    if observed <= 1.0 - 0.05:
        raise DivergentIntegrand(
            f"integrand decays like t^-{observed:.3f}, not integrable at infinity"
        )
    if observed < b_declared - 0.25:
        raise InvalidSpec(
            f"declared tail exponent {b_declared} but observed decay {observed:.3f}"
        )


def integrate_2d_polar(
    f: Callable,
    radial_spec: Optional[SingularitySpec] = None,
    tol: float = DEFAULT_TOL_2D,
    center=(0.0, 0.0),
    dim: int = 2,
    with_distances: bool = False,
) -> QuadResult:
    """Integrate f(r, theta) over the unit disk in polar coordinates about ``center``.

    ``r`` is the distance from ``center`` and ``theta`` the direction.  The
    radial Jacobian r is supplied here; ``radial_spec`` describes the ray
    integrand r f(r, theta), i.e. its exponent at the centre and at the
    boundary of the disk.  With ``with_distances`` the call is
    ``f(r, theta, R - r, R_back)`` where R - r is the distance to the exit
    point (free of cancellation) and R_back the length of the opposite ray.
    """
    if dim != 2:
        raise InvalidSpec("polar quadrature is implemented for the disk only")
    if radial_spec is None:
        radial_spec = SingularitySpec()
    cx, cy = float(center[0]), float(center[1])
    c2 = cx * cx + cy * cy
    if c2 >= 1.0:
        raise InvalidSpec("centre must lie inside the unit disk")
    inner_spec = radial_spec
    inner_tol = tol / (4.0 * math.pi)
    count = [0]

    def ray_length(th):
        cd = cx * math.cos(th) + cy * math.sin(th)
        return (1.0 - c2) / (cd + math.sqrt(cd * cd + 1.0 - c2))

    def outer(theta):
        out = np.empty_like(theta)
        for i, th in enumerate(theta):
            R = ray_length(float(th))
            if with_distances:
                Rb = ray_length(float(th) + math.pi)
                ray = lambda rr, d0, d1: f(rr, th, d1, Rb) * rr
            else:
                ray = lambda rr: f(rr, th) * rr
            r = integrate(ray, 0.0, R, inner_spec, tol=inner_tol,
                          with_distances=with_distances)
            count[0] += r.evaluations
            out[i] = r.value
        return out

    res = integrate(outer, 0.0, 2.0 * math.pi, SingularitySpec(), tol=tol)
    return QuadResult(res.value, res.error_estimate, max(1, count[0]))


@lru_cache(maxsize=64)
def gauss_legendre(n: int):
    """Gauss-Legendre nodes and weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def graded_rule(a, b, exponent, n_panels=12, order=8, ratio=0.25, towards="left"):
    """Composite Gauss rule on [a, b] with panels shrinking geometrically towards one end.

    The smallest panel has width (b - a) * ratio**(n_panels - 1); the innermost
    panel is additionally mapped by a power substitution matched to ``exponent``
    so the endpoint singularity is integrated to full order.
    """
    x, w = gauss_legendre(order)
    L = b - a
    edges = np.concatenate([[0.0], ratio ** np.arange(n_panels - 1, -1, -1.0)])
    nodes = []
    weights = []
    m = _subst_power(exponent)
    for i in range(n_panels):
        lo, hi = edges[i], edges[i + 1]
        if i == 0:
            u = hi * x ** m
            wu = hi * m * x ** (m - 1) * w
        else:
            u = lo + (hi - lo) * x
            wu = (hi - lo) * w
        nodes.append(u)
        weights.append(wu)
    u = np.concatenate(nodes)
    wu = np.concatenate(weights) * L
    if towards == "left":
        return a + L * u, wu
    return b - L * u, wu
