"""Experiment configuration: validation, lossless JSON round trip and a stable hash."""

from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from typing import List, Optional

import numpy as np

from .errors import ConfigError

DEFAULT_SEED = 42


def _s2_over_log(s):
    return s ** 2 / np.log(np.e + s)


# named nonlinearities available to config files; value = (function, growth bound)
CUSTOM_NONLINEARITIES = {
    "s2_over_log": (_s2_over_log, 2.0),
    "exp_minus_one": (lambda s: np.expm1(np.minimum(s, 700.0)), 50.0),
}


@dataclass
class GridConfig:
    rho_min: float = 1e-4
    q: float = 1.35
    n_theta: int = 64


@dataclass
class ExperimentConfig:
    """Everything a subcommand needs; measure parts are [weight, kind, anchor] triples."""

    alpha: float = 0.5
    dim: int = 2
    nonlinearity: str = "power"
    p: float = 2.5
    custom: Optional[str] = None
    measure: str = "hausdorff"
    anchor: List[float] = field(default_factory=lambda: [1.0, 0.0])
    parts: List[list] = field(default_factory=list)
    k: float = 1.0
    ks: List[float] = field(default_factory=list)
    grid: GridConfig = field(default_factory=GridConfig)
    tol: float = 1e-6
    quad_tol: float = 1e-10
    max_iter: int = 200
    seed: int = DEFAULT_SEED
    n_points: int = 20
    output: str = "fracblow_out"

    # -- validation ---------------------------------------------------------
    def validate(self) -> "ExperimentConfig":
        errs = []
        if not (isinstance(self.alpha, (int, float)) and 0.0 < self.alpha < 1.0):
            errs.append("alpha must lie in (0, 1)")
        if int(self.dim) != self.dim or self.dim < 2:
            errs.append("dim must be an integer >= 2")
        if self.nonlinearity not in ("power", "zero", "custom"):
            errs.append("nonlinearity must be power, zero or custom")
        if self.nonlinearity == "power" and not (self.p > 0):
            errs.append("p must be positive")
        if self.nonlinearity == "custom" and self.custom not in CUSTOM_NONLINEARITIES:
            errs.append(f"custom must be one of {sorted(CUSTOM_NONLINEARITIES)}")
        if self.measure not in ("hausdorff", "dirac", "sum"):
            errs.append("measure must be hausdorff, dirac or sum")
        if self.measure == "dirac" and abs(math.hypot(*self.anchor) - 1.0) > 1e-12:
            errs.append("the Dirac anchor must lie on the unit circle")
        if self.measure == "sum":
            if not self.parts:
                errs.append("a sum measure needs parts")
            for part in self.parts:
                if len(part) != 3 or part[1] not in ("hausdorff", "dirac") or not part[0] >= 0:
                    errs.append(f"bad measure part {part!r}")
        if not self.k > 0:
            errs.append("k must be positive")
        if self.ks and any(b <= a for a, b in zip(self.ks, self.ks[1:])):
            errs.append("ks must be strictly increasing")
        if self.ks and not all(k > 0 for k in self.ks):
            errs.append("ks must be positive")
        g = self.grid
        if not (0.0 < g.rho_min < 0.1):
            errs.append("grid.rho_min must lie in (0, 0.1)")
        if not g.q > 1.0:
            errs.append("grid.q must exceed 1")
        if int(g.n_theta) != g.n_theta or g.n_theta < 1:
            errs.append("grid.n_theta must be a positive integer")
        if not (0.0 < self.tol < 1.0) or not (0.0 < self.quad_tol < 1.0):
            errs.append("tolerances must lie in (0, 1)")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            errs.append("max_iter must be a positive integer")
        if int(self.n_points) != self.n_points or self.n_points < 1:
            errs.append("n_points must be a positive integer")
        if errs:
            raise ConfigError("; ".join(errs))
        return self

    # -- serialization ------------------------------------------------------
    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = copy.deepcopy(d)
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        grid = d.pop("grid", {})
        if isinstance(grid, dict):
            gextra = set(grid) - set(GridConfig.__dataclass_fields__)
            if gextra:
                raise ConfigError(f"unknown grid keys: {sorted(gextra)}")
            grid = GridConfig(**grid)
        return cls(grid=grid, **d)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(data)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_json(fh.read())

    def config_hash(self) -> str:
        """Hash of everything that affects results (the output directory does not)."""
        d = self.to_dict()
        d.pop("output")
        canon = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()[:16]

    # -- model objects ------------------------------------------------------
    def order(self):
        from .domain import FracOrder
        return FracOrder(self.alpha)

    def domain(self):
        from .domain import BallDomain
        return BallDomain(self.dim)

    def make_grid(self):
        from .grid import GradedGrid
        return GradedGrid(self.grid.rho_min, self.grid.q, self.grid.n_theta)

    def make_nonlinearity(self):
        from .nonlinearity import Custom, Zero, from_power
        if self.nonlinearity == "zero":
            return Zero()
        if self.nonlinearity == "custom":
            fn, growth = CUSTOM_NONLINEARITIES[self.custom]
            return Custom(fn, self.custom, growth=growth)
        return from_power(self.p)

    def make_measure(self):
        from .measures import dirac, hausdorff, measure_sum
        if self.measure == "hausdorff":
            return hausdorff()
        if self.measure == "dirac":
            return dirac(tuple(self.anchor))
        return measure_sum([(w, hausdorff() if kind == "hausdorff" else dirac(tuple(anchor)))
                            for w, kind, anchor in self.parts])
