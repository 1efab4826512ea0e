"""Green kernel of the fractional Laplacian on the unit ball and related operators.

The kernel is normalised for the operator with Fourier symbol |xi|^(2 alpha)
(the singular integral scaled by ``FracOrder.normalizing_constant``):

    G(x, y) = kappa |x - y|^(2 alpha - N) int_0^r0 s^(alpha-1) (1+s)^(-N/2) ds,
    r0 = (1 - |x|^2)(1 - |y|^2) / |x - y|^2,
    kappa = Gamma(N/2) / (2^(2 alpha) pi^(N/2) Gamma(alpha)^2).

All internal evaluations use the boundary distances rho_x, rho_y and the
angle gamma between x and y, which keeps full relative precision for points
very close to the sphere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .domain import BallDomain, FracOrder
from .errors import DivergentIntegrand, DomainError, NonConvergence
from .grid import FieldOnGrid, GradedGrid
from .quadrature import (SingularitySpec, gauss_legendre, graded_rule,
                         integrate_2d_polar)
from .special import gamma as gamma_fn
from .special import green_radial_integral


@dataclass(frozen=True)
class KernelValue:
    value: float
    error_estimate: float


def kappa(alpha: float, N: int) -> float:
    return gamma_fn(0.5 * N) / (4.0 ** alpha * math.pi ** (0.5 * N) * gamma_fn(alpha) ** 2)


def _dist2(rho_x, rho_y, gam):
    # |x - y|^2 for |x| = 1 - rho_x, |y| = 1 - rho_y at angle gam
    s = np.sin(0.5 * gam)
    return (rho_y - rho_x) ** 2 + 4.0 * (1.0 - rho_x) * (1.0 - rho_y) * s * s


def green_geom(rho_x, rho_y, gam, alpha, N=2, d2=None):
    """Vectorised kernel G in boundary-distance / angle coordinates.

    ``d2`` may supply |x - y|^2 directly when the caller knows it exactly
    (polar quadrature around x), avoiding cancellation for close points.
    """
    rho_x = np.asarray(rho_x, dtype=float)
    rho_y = np.asarray(rho_y, dtype=float)
    if d2 is None:
        d2 = _dist2(rho_x, rho_y, np.asarray(gam, dtype=float))
    r0 = rho_x * (2.0 - rho_x) * rho_y * (2.0 - rho_y) / d2
    return kappa(alpha, N) * d2 ** (alpha - 0.5 * N) * green_radial_integral(r0, alpha, N)


def _angle(x, y):
    nx = np.linalg.norm(x)
    ny = np.linalg.norm(y)
    if nx == 0.0 or ny == 0.0:
        return 0.0
    c = np.dot(x, y)
    s = np.linalg.norm(np.outer(x, y) - np.outer(y, x)) / math.sqrt(2.0)
    return math.atan2(s, c)


def green_kernel(dom: BallDomain, order: FracOrder, x, y) -> KernelValue:
    """Closed-form kernel G(x, y) for x != y inside the ball."""
    x = dom.check_interior(x, "x")
    y = dom.check_interior(y, "y")
    if np.array_equal(x, y):
        raise DomainError("x and y must differ")
    val = float(green_geom(1.0 - np.linalg.norm(x), 1.0 - np.linalg.norm(y),
                           _angle(x, y), order.alpha, dom.dim))
    return KernelValue(val, 1e-14 * abs(val))


def martin_closed_form(alpha: float, N: int, rho_x, gam):
    """Limit of t^(-alpha) G(x, (1-t) z) as t -> 0 written out explicitly.

    Equals kappa 2^alpha / alpha (1 - |x|^2)^alpha / |x - z|^N.  Used as an
    independent check on the extrapolated values.
    """
    rho_x = np.asarray(rho_x, dtype=float)
    d2 = _dist2(rho_x, 0.0, gam)
    return (kappa(alpha, N) * 2.0 ** alpha / alpha
            * (rho_x * (2.0 - rho_x)) ** alpha * d2 ** (-0.5 * N))


def martin_geom(rho_x, gam, alpha, N=2, rtol=1e-10, max_levels=24, t0_factor=1e-2):
    """Richardson-extrapolated t^(-alpha) G(x, z + t n_z), t -> 0, vectorised.

    t^(-alpha) G is analytic in t, so the table eliminates t, t^2, ... in turn.
    Returns (values, error_estimates).
    """
    rho_x = np.atleast_1d(np.asarray(rho_x, dtype=float))
    gam = np.broadcast_to(np.asarray(gam, dtype=float), rho_x.shape)
    t = t0_factor * rho_x
    prev_row = None
    prev_best = None
    for j in range(max_levels):
        f = green_geom(rho_x, t, gam, alpha, N) * t ** (-alpha)
        row = [f]
        if prev_row is not None:
            for k in range(1, j + 1):
                fac = 2.0 ** k
                row.append((fac * row[k - 1] - prev_row[k - 1]) / (fac - 1.0))
        best = row[-1]
        if prev_best is not None:
            err = np.abs(best - prev_best)
            if np.all(err <= rtol * np.abs(best)):
                return best, err
        prev_row, prev_best = row, best
        t = 0.5 * t
    raise NonConvergence("Richardson extrapolation of the boundary kernel did not settle")


def martin_kernel(dom: BallDomain, order: FracOrder, x, z, tol: float = 1e-10) -> KernelValue:
    """Boundary kernel M(x, z) = lim_{t->0+} t^(-alpha) G(x, z + t n_z), n_z = -z."""
    x = dom.check_interior(x, "x")
    z = dom.check_boundary(z, "z")
    val, err = martin_geom(1.0 - np.linalg.norm(x), _angle(x, z), order.alpha, dom.dim, rtol=tol)
    return KernelValue(float(val[0]), float(err[0]))


# ---------------------------------------------------------------------------
# Volume potential on graded grids


def angular_weights(rho_x, rho_y, alpha, n_modes=1, gl_order=8, chunk=4000):
    """A_n(rho_x, rho_y) = (1 - rho_y) * 2 int_0^pi G cos(n gamma) d gamma (disk).

    Panels on [0, pi] grow geometrically from the angular width of the
    near-diagonal peak, so the integral is resolved whatever rho_x - rho_y is.
    Returns an array of shape (len(rho_x), n_modes).
    """
    rho_x = np.asarray(rho_x, dtype=float)
    rho_y = np.asarray(rho_y, dtype=float)
    npair = rho_x.size
    out = np.zeros((npair, n_modes))
    w_max = math.pi if n_modes == 1 else min(math.pi, 2.0 * math.pi / n_modes)
    denom = np.sqrt(np.maximum((1.0 - rho_x) * (1.0 - rho_y), 1e-300))
    delta = np.abs(rho_x - rho_y) / denom
    cap = min(math.pi, 2.0 * w_max)
    kg = np.where(delta <= cap,
                  np.floor(np.log2(cap / np.maximum(delta, 1e-300))) + 1, 0).astype(int)
    edge_geo = np.where(kg > 0, delta * 2.0 ** (kg - 1.0), 0.0)
    edge_geo = np.minimum(edge_geo, math.pi)
    ku = np.ceil((math.pi - edge_geo) / w_max - 1e-12).astype(int)
    ku = np.maximum(ku, np.where(edge_geo < math.pi, 1, 0))
    xg, wg = gauss_legendre(gl_order)
    keys = kg * 10000 + ku
    for key in np.unique(keys):
        idx = np.nonzero(keys == key)[0]
        g_k, u_k = divmod(int(key), 10000)
        for start in range(0, idx.size, chunk):
            sel = idx[start:start + chunk]
            d = delta[sel][:, None]
            edges = []
            if g_k > 0:
                edges.append(np.zeros_like(d))
                edges.append(d * 2.0 ** np.arange(g_k)[None, :])
            e_geo = np.concatenate(edges, axis=1) if edges else np.zeros((sel.size, 1))
            last = e_geo[:, -1:]
            if u_k > 0:
                steps = np.arange(1, u_k + 1)[None, :] / u_k
                e_uni = last + (math.pi - last) * steps
                e_all = np.concatenate([e_geo, e_uni], axis=1)
            else:
                e_all = e_geo
            lo = e_all[:, :-1]
            wid = e_all[:, 1:] - lo
            gam = (lo[:, :, None] + wid[:, :, None] * xg[None, None, :]).reshape(sel.size, -1)
            wts = (wid[:, :, None] * wg[None, None, :]).reshape(sel.size, -1)
            gv = green_geom(rho_x[sel][:, None], rho_y[sel][:, None], gam, alpha, 2) * wts
            fac = 2.0 * (1.0 - rho_y[sel])
            out[sel, 0] = fac * gv.sum(axis=1)
            if n_modes > 1:
                c1 = np.cos(gam)
                cm, cn = np.ones_like(gam), c1
                for n in range(1, n_modes):
                    out[sel, n] = fac * (gv * cn).sum(axis=1)
                    cm, cn = cn, 2.0 * c1 * cn - cm
    return out


@dataclass
class _Segment:
    lo: float
    hi: float
    strip: bool


class GreenOperator:
    """Discrete volume potential on a graded disk grid.

    For every grid level rho_i the integral over the source distance rho_y is
    split into grid cells (Gauss-Legendre in log rho), cells touching rho_i
    (graded towards the diagonal singularity), a strip below rho_min made of
    ratio-2 panels down to rho_min 2^-40 in which the normalised field is
    frozen at its rho_min value, and an analytic remainder.  Angular
    dependence is carried by Fourier modes 0..n_modes-1.
    """

    STRIP_PANELS = 40
    CELL_ORDER = 6
    STRIP_ORDER = 4

    def __init__(self, order: FracOrder, grid: GradedGrid, n_modes: int = 1):
        self.order = order
        self.alpha = order.alpha
        self.grid = grid
        self.n_modes = n_modes
        self.rho = grid.rho.copy()
        self._build()

    def _segments(self):
        segs = []
        r0 = self.rho[0]
        for k in range(self.STRIP_PANELS - 1, -1, -1):
            segs.append(_Segment(r0 * 2.0 ** (-k - 1), r0 * 2.0 ** (-k), True))
        for j in range(self.rho.size - 1):
            segs.append(_Segment(self.rho[j], self.rho[j + 1], False))
        return segs

    def _build(self):
        a = self.alpha
        segs = self._segments()
        self.eps = segs[0].lo
        xg, wg = gauss_legendre(self.CELL_ORDER)
        xs, ws = gauss_legendre(self.STRIP_ORDER)
        nodes, weights, seg_id = [], [], []
        for si, sg in enumerate(segs):
            x, w = (xs, ws) if sg.strip else (xg, wg)
            la, lb = math.log(sg.lo), math.log(sg.hi)
            r = np.exp(la + (lb - la) * x)
            nodes.append(r)
            weights.append((lb - la) * w * r)
            seg_id.append(np.full(r.size, si))
        self.g_nodes = np.concatenate(nodes)
        g_w = np.concatenate(weights)
        g_seg = np.concatenate(seg_id)
        self.g_strip = np.array([segs[s].strip for s in g_seg])
        nr = self.rho.size
        ng = self.g_nodes.size
        # segments touching each target get graded local rules instead
        touch = []
        for i, r in enumerate(self.rho):
            touch.append([si for si, sg in enumerate(segs) if sg.lo == r or sg.hi == r])
        e_diag = 2.0 * a - 1.0 if abs(2.0 * a - 1.0) > 1e-12 else 0.0
        l_nodes, l_w, l_tgt = [], [], []
        for i, r in enumerate(self.rho):
            for si in touch[i]:
                sg = segs[si]
                towards = "left" if sg.lo == r else "right"
                if sg.hi == 1.0 and r == 1.0:
                    e = 2.0 * a - 1.0
                else:
                    e = e_diag
                xn, wn = graded_rule(sg.lo, sg.hi, e, n_panels=14, order=8, ratio=0.25,
                                     towards=towards)
                l_nodes.append(xn)
                l_w.append(wn)
                l_tgt.append(np.full(xn.size, i))
        self.l_nodes = np.concatenate(l_nodes)
        l_w = np.concatenate(l_w)
        self.l_tgt = np.concatenate(l_tgt)
        self.l_strip = self.l_nodes < self.rho[0]

        # global kernel matrix
        ti, sj = np.meshgrid(np.arange(nr), np.arange(ng), indexing="ij")
        A = angular_weights(self.rho[ti.ravel()], self.g_nodes[sj.ravel()], a, self.n_modes)
        self.K = (A.reshape(nr, ng, self.n_modes) * g_w[None, :, None])
        for i in range(nr):
            mask = np.isin(g_seg, touch[i])
            self.K[i, mask, :] = 0.0
        Al = angular_weights(self.rho[self.l_tgt], self.l_nodes, a, self.n_modes)
        self.KL = Al * l_w[:, None]
        # A(rho_i, s) ~ A(rho_i, eps) (s / eps)^alpha below eps
        At = angular_weights(self.rho, np.full(nr, self.eps), a, self.n_modes)
        self.tail_coef = At * self.eps ** (-a)

    # interpolation of normalised values: power law between positive values,
    # linear otherwise
    def _stencil(self, r):
        lr = np.log(self.rho)
        x = np.log(np.clip(r, self.rho[0], 1.0))
        j = np.clip(np.searchsorted(lr, x, side="right") - 1, 0, lr.size - 2)
        t = np.clip((x - lr[j]) / (lr[j + 1] - lr[j]), 0.0, 1.0)
        return j, t[:, None]

    @staticmethod
    def _interp(v, stencil):
        """Normalised values at source nodes; v has shape (n_rho, m)."""
        j, t = stencil
        v0, v1 = v[j], v[j + 1]
        pos = (v0 > 0) & (v1 > 0)
        if np.all(pos):
            return v0 * np.exp(t * np.log(v1 / v0))
        lin = (1.0 - t) * v0 + t * v1
        with np.errstate(divide="ignore", invalid="ignore"):
            geo = np.where(pos, np.where(pos, v0, 1.0)
                           * np.exp(t * np.log(np.where(pos, v1 / np.where(pos, v0, 1.0), 1.0))), 0.0)
        return np.where(pos, geo, lin)

    def source_values(self, v):
        """Normalised field at global and local source nodes."""
        if not hasattr(self, "_gst"):
            self._gst = self._stencil(self.g_nodes)
            self._lst = self._stencil(self.l_nodes)
            self._gpow = (self.g_nodes ** (self.alpha - 1.0))[:, None]
            self._lpow = (self.l_nodes ** (self.alpha - 1.0))[:, None]
            self._norm = (self.rho ** (1.0 - self.alpha))[:, None]
        v2 = v[:, None] if v.ndim == 1 else v
        return self._interp(v2, self._gst), self._interp(v2, self._lst)

    def apply(self, g, v):
        """G[g(u)] at the grid levels for u stored as normalised ``v``.

        ``g`` must expose ``__call__`` and ``tail_integral(sigma, kappa)``.
        Returns normalised values (times rho^(1-alpha)), same shape as v.
        """
        radial = v.ndim == 1
        vg, vl = self.source_values(v)
        fg = g(np.maximum(vg * self._gpow, 0.0))
        fl = g(np.maximum(vl * self._lpow, 0.0))
        v0 = np.atleast_1d(v[0])
        tail = _strip_tail(g, np.maximum(v0, 0.0), self.eps, self.alpha)
        res = self._contract(fg, fl, tail) * self._norm
        return res[:, 0] if radial else res

    def jacobian(self, g, v):
        """Derivative of ``apply(g, .)`` at a radial ``v`` as a dense matrix."""
        if v.ndim != 1:
            raise DomainError("the dense Jacobian is available for radial fields only")
        a = self.alpha
        nr = self.rho.size
        vg, vl = self.source_values(v)
        J = np.zeros((nr, nr))

        def stencil_derivs(vs, st):
            j, t = st
            t = t[:, 0]
            v0, v1 = v[j], v[j + 1]
            pos = (v0 > 0) & (v1 > 0)
            with np.errstate(divide="ignore", invalid="ignore"):
                d0 = np.where(pos, (1.0 - t) * vs / np.where(pos, v0, 1.0), 1.0 - t)
                d1 = np.where(pos, t * vs / np.where(pos, v1, 1.0), t)
            return j, d0, d1

        # global nodes
        ug = vg[:, 0] * self._gpow[:, 0]
        dfg = np.where(ug > 0, g.derivative(np.maximum(ug, 1e-300)), 0.0) * self._gpow[:, 0]
        j, d0, d1 = stencil_derivs(vg[:, 0], self._gst)
        M = self.K[:, :, 0] * dfg[None, :]
        D = np.zeros((dfg.size, nr))
        rows = np.arange(dfg.size)
        D[rows, j] += d0
        D[rows, j + 1] += d1
        J += M @ D
        # local nodes
        ul = vl[:, 0] * self._lpow[:, 0]
        dfl = np.where(ul > 0, g.derivative(np.maximum(ul, 1e-300)), 0.0) * self._lpow[:, 0]
        j, d0, d1 = stencil_derivs(vl[:, 0], self._lst)
        w = self.KL[:, 0] * dfl
        np.add.at(J, (self.l_tgt, j), w * d0)
        np.add.at(J, (self.l_tgt, j + 1), w * d1)
        # analytic remainder below the strip
        v0 = float(v[0])
        if v0 > 0:
            ps = (1.0 + a) / (1.0 - a)
            sig = v0 * self.eps ** (a - 1.0)
            dtail = (ps * v0 ** (ps - 1.0) * g.tail_integral(sig, ps)
                     - v0 ** ps * float(g(np.array([sig]))[0]) * sig ** (-1.0 - ps)
                     * self.eps ** (a - 1.0)) / (1.0 - a)
            J[:, 0] += self.tail_coef[:, 0] * dtail
        return J * self._norm

    def _to_modes(self, f):
        m = f.shape[1]
        if m == 1:
            return f[:, :1].astype(complex)
        fh = np.fft.rfft(f, axis=1) / m
        nm = self.n_modes
        if fh.shape[1] < nm:
            fh = np.concatenate([fh, np.zeros((fh.shape[0], nm - fh.shape[1]))], axis=1)
        return fh[:, :nm]

    def _contract(self, fg, fl, tail):
        m = fg.shape[1]
        nr = self.rho.size
        if m == 1:
            res = self.K[:, :, 0] @ fg[:, 0]
            res += np.bincount(self.l_tgt, weights=self.KL[:, 0] * fl[:, 0], minlength=nr)
            res += self.tail_coef[:, 0] * tail[0]
            return res[:, None]
        if self.n_modes < 2:
            raise DomainError("operator was built for radial fields only")
        fgh = self._to_modes(fg)
        flh = self._to_modes(fl)
        th = self._to_modes(tail[None, :])[0]
        nm = self.n_modes
        res_h = np.zeros((nr, nm), dtype=complex)
        for n in range(nm):
            r = self.K[:, :, n] @ fgh[:, n]
            r = r + np.bincount(self.l_tgt, weights=(self.KL[:, n] * flh[:, n]).real, minlength=nr) \
                + 1j * np.bincount(self.l_tgt, weights=(self.KL[:, n] * flh[:, n]).imag, minlength=nr)
            res_h[:, n] = r + self.tail_coef[:, n] * th[n]
        # back to the angular grid; modes n and -n share the real kernel
        full = np.zeros((nr, m // 2 + 1), dtype=complex)
        k = min(nm, m // 2 + 1)
        full[:, :k] = res_h[:, :k]
        return np.fft.irfft(full * m, n=m, axis=1)


def _strip_tail(g, v0, eps, alpha):
    """int_0^eps s^alpha g(v0 s^(alpha-1)) ds for each normalised value v0."""
    ps = (1.0 + alpha) / (1.0 - alpha)
    out = np.zeros_like(v0, dtype=float)
    for i, v in enumerate(v0):
        if v > 0.0:
            sig = v * eps ** (alpha - 1.0)
            out[i] = v ** ps / (1.0 - alpha) * g.tail_integral(sig, ps)
        else:
            # u = 0 in the strip
            out[i] = float(g(np.array([0.0]))[0]) * eps ** (1.0 + alpha) / (1.0 + alpha)
    return out


_OPERATOR_CACHE = {}


def green_operator(order: FracOrder, grid: GradedGrid, n_modes: int = 1) -> GreenOperator:
    """Cached GreenOperator for (alpha, grid, n_modes)."""
    key = (order.alpha, grid.rho_min, grid.q, n_modes)
    if key not in _OPERATOR_CACHE:
        _OPERATOR_CACHE[key] = GreenOperator(order, grid, n_modes)
    return _OPERATOR_CACHE[key]


def green_apply(dom: BallDomain, order: FracOrder, f, x, tol: float = 1e-7,
                boundary_exponent=None) -> float:
    """Volume potential int_B G(x, y) f(y) dy at a single point by polar quadrature.

    ``f`` is a FieldOnGrid (interpreted as the physical field), an object with
    ``at_points(points, rho)`` such as ExplicitField (given exact boundary
    distances, which matters for singular sources) or a callable f(points)
    on arrays of shape (..., 2).  ``boundary_exponent`` is the
    power beta with f ~ rho^beta at the sphere; for grid fields it is read off
    the outermost levels when not given.
    """
    if dom.dim != 2:
        raise DomainError("the volume potential is implemented on the disk")
    x = dom.check_interior(np.asarray(x, dtype=float), "x")
    a = order.alpha
    if isinstance(f, FieldOnGrid):
        field = f

        def fv(pts, rho):
            th = np.arctan2(pts[..., 1], pts[..., 0])
            return field(rho, th if not field.radial else None)

        if boundary_exponent is None:
            boundary_exponent = _boundary_exponent(field)
        if np.all(field.values == 0.0):
            return 0.0
    elif hasattr(f, "at_points"):
        fv = f.at_points
        if boundary_exponent is None:
            boundary_exponent = float(getattr(f, "boundary_exponent", 0.0))
    else:
        fv = lambda pts, rho: f(pts)
        if boundary_exponent is None:
            boundary_exponent = 0.0
    if boundary_exponent + a <= -1.0:
        raise DivergentIntegrand(
            f"field grows like rho^{boundary_exponent:.3f}, not integrable against rho^alpha")
    rx = 1.0 - float(np.linalg.norm(x))
    ang_x = math.atan2(x[1], x[0])

    def integrand(r, th, to_exit, back):
        pts = x[None, :] + np.outer(r, [math.cos(th), math.sin(th)])
        # 1 - |y|^2 = (R - r)(r + R_back) exactly along the ray
        ry = to_exit * (r + back) / (1.0 + np.linalg.norm(pts, axis=-1))
        ry = np.maximum(ry, 1e-300)
        gam = np.arctan2(pts[:, 1], pts[:, 0]) - ang_x
        # nodes that underflow to r = 0 carry no weight; keep the kernel finite there
        rr = np.maximum(r, 1e-100)
        return green_geom(rx, ry, gam, a, 2, d2=rr * rr) * fv(pts, ry)

    spec = SingularitySpec(left_exponent=2.0 * a - 1.0,
                           right_exponent=max(-0.999, min(a + boundary_exponent, 4.0)))
    res = integrate_2d_polar(integrand, spec, tol=tol, center=x, with_distances=True)
    return res.value


def _boundary_exponent(field: FieldOnGrid) -> float:
    u = np.abs(field.physical())
    if not field.radial:
        u = u.max(axis=1)
    r = field.rho[:4]
    if np.any(u[:4] <= 0):
        return 0.0
    return float(np.polyfit(np.log(r), np.log(u[:4]), 1)[0])
