"""Boundary blow-up solutions of semilinear fractional elliptic problems on the unit ball.

The package builds the objects of the existence theory numerically: the
Green and Martin kernels of the fractional Laplacian on the ball, boundary
potentials, the monotone fixed-point construction u = k P - G[g(u)], the
pointwise principal-value operator, and quantitative boundary-rate checks.
"""

import os as _os

# FRACBLOW_THREADS caps BLAS/OpenMP parallelism; it must be set before numpy loads
_threads = _os.environ.get("FRACBLOW_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_var, _threads)

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    BracketError, ConfigError, DegenerateField, DivergentIntegrand, DomainError, FracBlowError,
    Inconclusive, InsufficientWindow, InvalidLevel, InvalidSpec, NonConvergence,
    SubcriticalityViolated, SupersolutionViolated,
)
from .domain import BallDomain, FracOrder  # noqa: E402
from .quadrature import QuadResult, SingularitySpec, integrate, integrate_2d_polar  # noqa: E402
from .ctau import CTauValue, c_tau, sign_scan, tau0  # noqa: E402
from .grid import FieldOnGrid, GradedGrid, radial_field  # noqa: E402
from .green import GreenOperator, green_apply, green_kernel, martin_kernel  # noqa: E402
from .measures import (  # noqa: E402
    BoundaryMeasure, dirac, hausdorff, measure_sum, potential, potential_field,
)
from .nonlinearity import Custom, Power, Truncated, Zero, from_power, truncate  # noqa: E402
from .solver import SolveResult, nonlinear_correction, solve, solve_family  # noqa: E402
from .fraclap import ExplicitField, check_supersolution, frac_lap_eval  # noqa: E402
from .analysis import (  # noqa: E402
    RateFit, WeakNormEstimate, classify_regime, fit_boundary_rate, subcritical_check,
    weak_norm_decay,
)
from .config import ExperimentConfig  # noqa: E402
