"""Monotone fixed-point construction of solutions to u = k P - G[g(u)].

Unknowns are stored in normalised form v = u rho^(1-alpha).  The plain
iteration v <- k P - G[g(v)] starts from k P; the map is order reversing, so
even iterates decrease, odd iterates increase, and all stay in [k P - G[g(kP)], k P].
When the gap between consecutive iterates stops shrinking (large k, where the
linearised map has norm well above one) the solve continues with a damped
Newton iteration on the same discrete equation.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .domain import BallDomain, FracOrder
from .errors import DomainError, NonConvergence, SubcriticalityViolated
from .green import green_operator
from .grid import FieldOnGrid, GradedGrid
from .measures import BoundaryMeasure, potential_field
from .nonlinearity import Custom, Nonlinearity, Power, Truncated, Zero, truncate

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-6
DEFAULT_MAX_ITER = 200

__all__ = ["SolveResult", "solve", "solve_family", "truncate", "family_depth",
           "nonlinear_correction"]


@dataclass
class SolveResult:
    solution: FieldOnGrid
    iterations: int
    residual: float
    sandwich_ok: bool
    k: float = 1.0
    method: str = "picard"
    history: List[float] = field(default_factory=list)
    iterates: List[np.ndarray] = field(default_factory=list)
    potential: Optional[FieldOnGrid] = None
    lower: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)


def _base_power(g):
    b = g.base if isinstance(g, Truncated) else g
    return b.p if isinstance(b, Power) else None


def _check_subcritical(g, order: FracOrder):
    p = _base_power(g)
    if p is not None and p >= order.p_star:
        raise SubcriticalityViolated(
            f"power {p} is not below the critical exponent {order.p_star:.6g}")


class _Problem:
    """Discrete equation F(v) = v - k P + W(v) on one grid."""

    def __init__(self, order, grid, g, mu, k):
        self.order = order
        self.grid = grid
        self.g = g
        self.k = k
        self.radial = mu.is_radial
        dom = BallDomain(2)
        self.P = potential_field(dom, order, mu, grid).samples
        n_modes = 1 if self.radial else grid.n_theta // 2 + 1
        self.op = green_operator(order, grid, n_modes)
        self.b = k * self.P.values

    def W(self, v):
        return self.op.apply(self.g, v)

    def T(self, v):
        return self.b - self.W(v)

    def F(self, v):
        return v - self.b + self.W(v)


def _jacobian_fd(prob, v, Wv):
    n = v.size
    J = np.eye(n)
    for j in range(n):
        h = 1e-7 * max(abs(v[j]), 1e-3 * np.max(np.abs(v)), 1e-12)
        vp = v.copy()
        vp[j] += h
        J[:, j] += (prob.W(vp) - Wv) / h
    return J


def _newton(prob, v, tol, max_iter, history):
    """Damped Newton on F(v) = 0 with backtracking on the sup norm."""
    scale = np.max(np.abs(prob.b))
    Wv = prob.W(v)
    Fv = v - prob.b + Wv
    it = 0
    for it in range(1, max_iter + 1):
        fn = np.max(np.abs(Fv))
        history.append(fn / scale)
        if prob.radial:
            J = np.eye(v.size) + prob.op.jacobian(prob.g, v)
            step = np.linalg.solve(J, -Fv)
        else:
            from scipy.sparse.linalg import LinearOperator, gmres

            shape = v.shape
            n = v.size

            def mv(d):
                h = 1e-7 * scale / max(np.max(np.abs(d)), 1e-300)
                return d + ((prob.W(v + h * d.reshape(shape)) - Wv) / h).ravel()

            A = LinearOperator((n, n), matvec=mv)
            sol, _ = gmres(A, -Fv.ravel(), rtol=1e-10, maxiter=200)
            step = sol.reshape(shape)
        lam = 1.0
        while True:
            vn = v + lam * step
            Wn = prob.W(vn)
            Fn = vn - prob.b + Wn
            if np.max(np.abs(Fn)) < (1.0 - 1e-4 * lam) * fn or lam < 1e-6:
                break
            lam *= 0.5
        dv = np.max(np.abs(vn - v)) / scale
        v, Wv, Fv = vn, Wn, Fn
        if dv < tol and np.max(np.abs(Fv)) / scale < tol:
            history.append(np.max(np.abs(Fv)) / scale)
            return v, it
    raise NonConvergence(f"Newton iteration did not converge in {max_iter} steps")


def solve(dom: BallDomain, order: FracOrder, g: Nonlinearity, mu: BoundaryMeasure, k: float,
          grid: Optional[GradedGrid] = None, tol: float = DEFAULT_TOL,
          max_iter: int = DEFAULT_MAX_ITER, initial: Optional[np.ndarray] = None,
          keep_iterates: bool = False, allow_newton: bool = True) -> SolveResult:
    """Solve u = k P_mu - G[g(u^+)] on ``grid``.

    The iteration starts from k P (or from ``initial``, normalised values) and
    stops when the normalised sup difference of successive iterates, relative
    to max k P, drops below ``tol``.
    """
    if dom.dim != 2:
        raise DomainError("the solver is implemented on the disk")
    if not k > 0:
        raise DomainError("k must be positive")
    _check_subcritical(g, order)
    if isinstance(g, Custom) and g.lambda_subadditive is None and not mu.is_radial:
        log.warning("custom nonlinearity used with a Dirac measure without a declared lambda")
    grid = grid or GradedGrid()
    prob = _Problem(order, grid, g, mu, k)
    scale = float(np.max(np.abs(prob.b)))
    history: List[float] = []
    iterates: List[np.ndarray] = []
    lower = prob.T(prob.b)
    v = prob.b.copy() if initial is None else np.asarray(initial, dtype=float).copy()
    if keep_iterates:
        iterates.append(v.copy())
    method = "picard"
    it = 0
    converged = False
    if isinstance(g, Zero):
        v = prob.b.copy()
        it = 1
        history.append(0.0)
        converged = True
    else:
        prev_gap = math.inf
        stall = 0
        for it in range(1, max_iter + 1):
            vn = prob.T(v)
            gap = float(np.max(np.abs(vn - v))) / scale
            history.append(gap)
            v = vn
            if keep_iterates:
                iterates.append(v.copy())
            if gap < tol:
                converged = True
                break
            # the alternating gap contracts slowly or not at all for large k
            stall = stall + 1 if gap > 0.7 * prev_gap else 0
            prev_gap = gap
            if allow_newton and stall >= 3:
                break
        if not converged:
            if not allow_newton:
                raise NonConvergence(f"fixed-point iteration did not converge in {max_iter} steps")
            method = "newton"
            # start from the midpoint of the last two iterates, which brackets the fixed point
            start = 0.5 * (v + prob.T(v))
            v, nit = _newton(prob, start, tol, max_iter, history)
            it += nit
    Wv = prob.W(v)
    res_vec = np.abs(v + Wv - prob.b)
    residual = float(np.max(res_vec) / scale)
    slack = 10.0 * tol * scale
    sandwich_ok = bool(np.all(v <= prob.b + slack) and np.all(v >= lower - slack))
    sol = FieldOnGrid(grid, order.alpha, v, {"k": k, "g": g.name, "measure": mu.describe()})
    return SolveResult(sol, it, residual, sandwich_ok, k, method, history, iterates,
                       prob.P, lower, {"grid_rho_min": grid.rho_min, "q": grid.q})


def family_depth(order: FracOrder, g: Nonlinearity, k_max: float, rho_min: float) -> float:
    """Grid depth that keeps the boundary crossover of u_k inside the grid.

    For g = s^p with 1 < p < p*, u_k follows the k-independent profile down
    to rho_k ~ k^(-(p-1)/(1+alpha-(1-alpha)p)) and k P below it; the strip
    below rho_min assumes the second regime, so rho_min is pushed three
    decades under rho_k.
    """
    p = _base_power(g)
    a = order.alpha
    if p is None or p <= 1.0 or p >= order.p_star:
        return rho_min
    expo = (p - 1.0) / (1.0 + a - (1.0 - a) * p)
    return min(rho_min, 1e-3 * k_max ** (-expo))


def solve_family(dom: BallDomain, order: FracOrder, g: Nonlinearity, mu: BoundaryMeasure,
                 ks: Sequence[float], grid: Optional[GradedGrid] = None,
                 tol: float = DEFAULT_TOL, auto_depth: bool = True,
                 max_iter: int = DEFAULT_MAX_ITER) -> List[SolveResult]:
    """Solve for every k in the strictly increasing list ``ks`` on one grid.

    Each solve after the first starts from the previous solution (a lower
    bound, since u_k increases with k).  Pointwise monotonicity in k is
    checked and recorded in every result's ``meta['monotone_in_k']``.
    """
    ks = [float(k) for k in ks]
    if any(b <= a for a, b in zip(ks, ks[1:])):
        raise DomainError("ks must be strictly increasing")
    grid = grid or GradedGrid()
    if auto_depth:
        depth = family_depth(order, g, ks[-1], grid.rho_min)
        if depth < grid.rho_min:
            grid = GradedGrid(depth, grid.q, grid.n_theta)
    out: List[SolveResult] = []
    prev = None
    monotone = True
    for k in ks:
        r = solve(dom, order, g, mu, k, grid, tol, max_iter,
                  initial=None if prev is None else prev.solution.values)
        if prev is not None:
            slack = 10.0 * tol * float(np.max(np.abs(r.solution.values)))
            if np.any(r.solution.values < prev.solution.values - slack):
                monotone = False
                log.warning("family lost monotonicity in k at k=%g", k)
        out.append(r)
        prev = r
    for r in out:
        r.meta["monotone_in_k"] = monotone
    return out


def nonlinear_correction(dom: BallDomain, order: FracOrder, g: Nonlinearity,
                         mu: BoundaryMeasure, k: float,
                         grid: Optional[GradedGrid] = None) -> FieldOnGrid:
    """G[g(k P)] on the grid, stored normalised, i.e. G[g(kP)] rho^(1-alpha)."""
    grid = grid or GradedGrid()
    prob = _Problem(order, grid, g, mu, k)
    return FieldOnGrid(grid, order.alpha, prob.W(prob.b), {"k": k, "g": g.name})
