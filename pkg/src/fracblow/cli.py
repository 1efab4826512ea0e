"""Command-line front end: ``fracblow <subcommand> [flags]``.

Every subcommand writes its artifacts (CSV for fields and tables, JSON for
scalar reports) into ``--out`` with a metadata header carrying the config
hash, the package version and the wall time, and prints a one-line verdict.
Exit codes: 0 success, 1 module error (structured JSON on stdout), 2 config
validation failure.
"""

from __future__ import annotations

import argparse
import csv
import glob
import json
import math
import os
import sys
import time
from typing import List, Optional

import numpy as np

from . import __version__
from .config import ExperimentConfig, GridConfig
from .errors import ConfigError, FracBlowError

SUBCOMMANDS = ("ctau", "green", "potential", "solve", "family", "rates", "weaknorm",
               "classify", "residual", "verify-all")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


class Writer:
    """Writes artifacts with a shared metadata header."""

    def __init__(self, cfg: ExperimentConfig, command: str):
        self.cfg = cfg
        self.command = command
        self.t0 = time.perf_counter()
        self.paths: List[str] = []
        os.makedirs(cfg.output, exist_ok=True)

    def meta(self) -> dict:
        return {"config_hash": self.cfg.config_hash(), "version": __version__,
                "command": self.command, "wall_time": round(time.perf_counter() - self.t0, 6)}

    def json(self, name: str, payload: dict) -> str:
        path = os.path.join(self.cfg.output, name)
        with open(path, "w") as fh:
            json.dump(_jsonable({"meta": self.meta(), "config": self.cfg.to_dict(),
                                 "result": payload}), fh, indent=2, sort_keys=True)
            fh.write("\n")
        self.paths.append(path)
        return path

    def csv(self, name: str, header: List[str], rows) -> str:
        path = os.path.join(self.cfg.output, name)
        meta = self.meta()
        with open(path, "w", newline="") as fh:
            # wall time is kept out of CSV headers so identical configs give identical files
            fh.write(f"# config_hash={meta['config_hash']} version={meta['version']} "
                     f"command={self.command}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v
                            for v in row])
        self.paths.append(path)
        return path


def _field_rows(fld):
    rho = fld.rho
    phys = fld.physical()
    if fld.radial:
        for r, v, n in zip(rho, phys, fld.values):
            yield r, 0.0, v, n
    else:
        for i, r in enumerate(rho):
            for j, t in enumerate(fld.grid.theta):
                yield r, t, phys[i, j], fld.values[i, j]


# -- subcommands -------------------------------------------------------------

def cmd_ctau(cfg, args, out: Writer):
    from .ctau import c_tau, sign_scan, tau0
    o = cfg.order()
    scan = sign_scan(o, n=args.scan, tol=cfg.quad_tol)
    taus, vals = scan
    out.csv("ctau.csv", ["tau", "value"], zip(taus, vals))
    root = tau0(o, quad_tol=cfg.quad_tol)
    change = [(float(taus[i]), float(taus[i + 1])) for i in range(len(taus) - 1)
              if np.sign(vals[i]) != np.sign(vals[i + 1])]
    out.json("ctau.json", {"tau0": root, "expected": o.alpha - 1.0, "sign_change": change})
    return f"tau0 = {root:.10f} (alpha - 1 = {o.alpha - 1:.10f}), sign change in {change}"


def cmd_green(cfg, args, out: Writer):
    from .green import green_kernel, martin_kernel
    dom, o = cfg.domain(), cfg.order()
    x = np.zeros(cfg.dim)
    x[0] = 1.0 - args.x_rho
    ts = np.linspace(-0.99, 0.99, args.n)
    rows = []
    for t in ts:
        y = np.zeros(cfg.dim)
        y[1] = t
        if args.kind == "martin":
            z = np.zeros(cfg.dim)
            z[0] = math.cos(t * math.pi)
            z[1] = math.sin(t * math.pi)
            v = martin_kernel(dom, o, x, z).value
        else:
            v = green_kernel(dom, o, x, y).value
        rows.append((t, v))
    out.csv(f"{args.kind}_slice.csv", ["t", "value"], rows)
    return f"{args.kind} kernel slice with {len(rows)} samples"


def cmd_potential(cfg, args, out: Writer):
    from .measures import potential, potential_field
    dom, o, mu = cfg.domain(), cfg.order(), cfg.make_measure()
    grid = cfg.make_grid()
    if cfg.dim == 2:
        fld = potential_field(dom, o, mu, grid, tol=cfg.quad_tol).samples
        rows = [(r, (1 - r) * math.cos(t), v, n) for r, t, v, n in _field_rows(fld)]
    else:
        rows = []
        for r in grid.rho:
            x = np.zeros(cfg.dim)
            x[0] = 1.0 - r
            v = potential(dom, o, mu, x, tol=cfg.quad_tol)
            rows.append((r, x[0], v, v * r ** (1 - o.alpha)))
    out.csv("potential.csv", ["rho", "x", "value", "normalized_value"], rows)
    return f"potential of {mu.describe()} on {len(rows)} nodes"


def _solve(cfg):
    from .solver import solve
    return solve(cfg.domain(), cfg.order(), cfg.make_nonlinearity(), cfg.make_measure(), cfg.k,
                 cfg.make_grid(), tol=cfg.tol, max_iter=cfg.max_iter)


def cmd_solve(cfg, args, out: Writer):
    r = _solve(cfg)
    out.csv("solution.csv", ["rho", "theta", "value", "normalized_value"],
            _field_rows(r.solution))
    out.json("solve.json", {"iterations": r.iterations, "residual": r.residual,
                            "sandwich_ok": r.sandwich_ok, "method": r.method, "k": r.k,
                            "history": r.history})
    return (f"solve k={cfg.k:g}: {r.method}, {r.iterations} iterations, residual "
            f"{r.residual:.3e}, sandwich {'ok' if r.sandwich_ok else 'VIOLATED'}")


def _ks(cfg):
    return cfg.ks or [2.0 ** j for j in range(11)]


def _family(cfg):
    from .solver import solve_family
    return solve_family(cfg.domain(), cfg.order(), cfg.make_nonlinearity(), cfg.make_measure(),
                        _ks(cfg), cfg.make_grid(), tol=cfg.tol, max_iter=cfg.max_iter)


def cmd_family(cfg, args, out: Writer):
    fam = _family(cfg)
    rows = [(r.k, r.solution.at_point(np.zeros(2)), r.residual, int(r.sandwich_ok), r.method)
            for r in fam]
    out.csv("family.csv", ["k", "u_center", "residual", "sandwich_ok", "method"], rows)
    out.json("family.json", {"monotone_in_k": fam[0].meta["monotone_in_k"],
                             "grid_rho_min": fam[0].solution.grid.rho_min})
    return f"family of {len(fam)} solves, monotone in k: {fam[0].meta['monotone_in_k']}"


def cmd_rates(cfg, args, out: Writer):
    from .analysis import fit_boundary_rate
    from .measures import potential_field
    if args.field == "potential":
        fld = potential_field(cfg.domain(), cfg.order(), cfg.make_measure(), cfg.make_grid()).samples
    else:
        fld = _solve(cfg).solution
    fit = fit_boundary_rate(fld, (args.rho_lo, args.rho_hi))
    out.json("rates.json", vars(fit))
    return f"boundary exponent {fit.exponent:.5f} (r^2 = {fit.r_squared:.6f})"


def cmd_weaknorm(cfg, args, out: Writer):
    from .analysis import weak_norm_decay
    from .measures import potential_field
    o = cfg.order()
    fld = potential_field(cfg.domain(), o, cfg.make_measure(), cfg.make_grid()).samples
    kappa = args.kappa if args.kappa is not None else (
        o.p_star if cfg.make_measure().is_radial else o.p_star_N(2))
    w = weak_norm_decay(fld, o, kappa)
    out.json("weaknorm.json", {"kappa": w.kappa, "fitted_decay": w.fitted_decay,
                               "band_constant": w.band_constant, "lambdas": w.lambdas,
                               "m": w.m_values})
    return f"weak-norm decay {w.fitted_decay:.4f} for kappa {kappa:.4f}, band {w.band_constant:.4g}"


def cmd_classify(cfg, args, out: Writer):
    from .analysis import classify_regime
    fam = _family(cfg)
    v = classify_regime(fam, cfg.order(), cfg.p)
    out.json("classify.json", {"verdict": v.kind, "rate": None if v.rate is None else vars(v.rate),
                               "ks": v.ks, "probe_values": v.probe_values,
                               "last_decade_increment": v.last_decade_increment,
                               "last_decade_factor": v.last_decade_factor})
    extra = f" with exponent {v.rate.exponent:.4f}" if v.rate else ""
    return f"{v.kind}{extra}"


def cmd_residual(cfg, args, out: Writer):
    from .fraclap import ExplicitField, check_supersolution, frac_lap_eval
    dom, o = cfg.domain(), cfg.order()
    if args.target == "supersolution":
        rep = check_supersolution(dom, o, cfg.p, raise_on_fail=False)
        out.json("residual.json", {"c_p": rep.c_p, "lambda0": rep.lambda0, "points": rep.points,
                                   "ratios": rep.ratios, "residuals": rep.residuals, "ok": rep.ok})
        return f"super-solution check {'passed' if rep.ok else 'FAILED'}, c(p) = {rep.c_p:.5g}"
    rng = np.random.default_rng(cfg.seed)
    if args.target == "potential":
        from .measures import potential_field
        fld = potential_field(dom, o, cfg.make_measure(), cfg.make_grid()).samples
        g = None
    else:
        r = _solve(cfg)
        fld, g = r.solution, cfg.make_nonlinearity()
    u = ExplicitField.from_grid(fld)
    rows, worst = [], 0.0
    scale_v = float(np.max(np.abs(fld.values)))
    for _ in range(cfg.n_points):
        rho = 10.0 ** rng.uniform(math.log10(max(10 * fld.grid.rho_min, 1e-3)), math.log10(0.9))
        th = rng.uniform(0, 2 * math.pi)
        x = (1 - rho) * np.array([math.cos(th), math.sin(th)])
        lap = frac_lap_eval(dom, o, u, x, tol=1e-3, normalized=True)
        if g is not None:
            lap += float(g(u.at_points(x[None, :]))[0])
        rel = abs(lap) * rho ** (1 + o.alpha) / scale_v
        worst = max(worst, rel)
        rows.append((rho, th, lap, rel))
    out.csv("residual.csv", ["rho", "theta", "residual", "relative"], rows)
    out.json("residual.json", {"worst_relative": worst, "n_points": cfg.n_points})
    return f"classical residual of the {args.target}: worst relative {worst:.3e}"


def cmd_verify_all(cfg, args, out: Writer):
    from .verify import run_all
    results = []

    def report(r):
        print(r.line(), flush=True)
        out.json(f"criterion_{r.number}.json", {"number": r.number, "name": r.name,
                                                "passed": r.passed, "details": r.details,
                                                "seconds": r.seconds})
        results.append(r)

    run_all(quick=args.quick, seed=cfg.seed, report=report)
    summary = aggregate(cfg.output, cfg.config_hash())
    out.json("verify_all.json", summary)
    n_pass = sum(r.passed for r in results)
    return f"{n_pass}/{len(results)} criteria passed"


def aggregate(directory: str, expected_hash: str) -> dict:
    """Collect criterion files; refuse to mix results from different configs."""
    rows = {}
    for path in sorted(glob.glob(os.path.join(directory, "criterion_*.json"))):
        with open(path) as fh:
            data = json.load(fh)
        h = data["meta"]["config_hash"]
        if h != expected_hash:
            raise ConfigError(f"{path} has config hash {h}, expected {expected_hash}")
        rows[data["result"]["number"]] = data["result"]["passed"]
    return {"criteria": rows, "all_passed": all(rows.values()) if rows else False}


COMMANDS = {"ctau": cmd_ctau, "green": cmd_green, "potential": cmd_potential,
            "solve": cmd_solve, "family": cmd_family, "rates": cmd_rates,
            "weaknorm": cmd_weaknorm, "classify": cmd_classify, "residual": cmd_residual,
            "verify-all": cmd_verify_all}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fracblow", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON config file; flags override its values")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--alpha", type=float)
        sp.add_argument("--dim", type=int)
        sp.add_argument("--p", type=float, help="power of g; 0 selects g = 0")
        sp.add_argument("--custom", help="named custom nonlinearity")
        sp.add_argument("--k", type=float)
        sp.add_argument("--ks", type=float, nargs="+")
        sp.add_argument("--measure", choices=("hausdorff", "dirac", "sum"))
        sp.add_argument("--anchor", type=float, nargs="+")
        sp.add_argument("--grid", "--grid-rho-min", dest="grid_rho_min", type=float)
        sp.add_argument("--q", type=float)
        sp.add_argument("--n-theta", type=int)
        sp.add_argument("--tol", type=float)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--n-points", type=int)
        if name == "ctau":
            sp.add_argument("--scan", type=int, default=50)
        if name == "green":
            sp.add_argument("--kind", choices=("green", "martin"), default="green")
            sp.add_argument("--x-rho", type=float, default=0.5)
            sp.add_argument("--n", type=int, default=41)
        if name == "rates":
            sp.add_argument("--field", choices=("potential", "solution"), default="potential")
            sp.add_argument("--rho-lo", type=float, default=1e-4)
            sp.add_argument("--rho-hi", type=float, default=1e-2)
        if name == "weaknorm":
            sp.add_argument("--kappa", type=float)
        if name == "residual":
            sp.add_argument("--target", choices=("supersolution", "potential", "solution"),
                            default="supersolution")
        if name == "verify-all":
            sp.add_argument("--quick", action="store_true")
    return ap


def config_from_args(args) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    simple = {"alpha": "alpha", "dim": "dim", "k": "k", "ks": "ks", "anchor": "anchor",
              "tol": "tol", "seed": "seed", "n_points": "n_points", "out": "output",
              "custom": "custom"}
    for a, c in simple.items():
        v = getattr(args, a, None)
        if v is not None:
            setattr(cfg, c, v)
    if args.p is not None:
        cfg.p = args.p
        cfg.nonlinearity = "zero" if args.p == 0 else "power"
    if args.custom is not None:
        cfg.nonlinearity = "custom"
    if args.measure is not None:
        cfg.measure = args.measure
        if args.measure == "sum" and not cfg.parts:
            cfg.parts = [[1.0, "hausdorff", [1.0, 0.0]], [1.0, "dirac", list(cfg.anchor)]]
    g = cfg.grid
    cfg.grid = GridConfig(args.grid_rho_min if args.grid_rho_min is not None else g.rho_min,
                          args.q if args.q is not None else g.q,
                          args.n_theta if args.n_theta is not None else g.n_theta)
    return cfg.validate()


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
    except (ConfigError, TypeError, OSError) as exc:
        print(json.dumps({"error": "ConfigError", "message": str(exc)}))
        return 2
    out = Writer(cfg, args.command)
    try:
        verdict = COMMANDS[args.command](cfg, args, out)
    except ConfigError as exc:
        print(json.dumps({"error": "ConfigError", "message": str(exc)}))
        return 2
    except FracBlowError as exc:
        err = {"error": type(exc).__name__, "message": str(exc), "command": args.command,
               "config_hash": cfg.config_hash()}
        for attr in ("failures", "details"):
            if hasattr(exc, attr):
                err[attr] = _jsonable(getattr(exc, attr))
        print(json.dumps(err))
        return 1
    print(verdict)
    return 0


if __name__ == "__main__":
    sys.exit(main())
