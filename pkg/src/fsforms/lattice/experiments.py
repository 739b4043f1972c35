"""Lattice experiments: each returns checks with values and bounds, plus CSV rows.

CSV columns per experiment:

- projectors: boundary, quantity, value, bound, pass
- equivariance: N, dx, constant_residual, field_dependent_residual
- curvature: trial, norm, floor, ratio, free_closure_norm
- corner: N, dx, deviation, constant, thetaH_vertical, thetaH_shift, theta_shift, corner_shift
- gribov: N, t, lambda_min, condition
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Callable

import numpy as np

from . import core
from .core import CoulombConnection, LatticeConfig, norm
from .groups import get_group
from .settings import LatticeSettings


@dataclass
class Check:
    name: str
    value: float
    bound: float
    passed: bool
    note: str = ""

    def to_dict(self) -> dict:
        out = {"name": self.name, "verdict": "pass" if self.passed else "fail",
               "value": _num(self.value), "bound": _num(self.bound), "citations": []}
        if not self.passed:
            out["residual"] = f"{self.value:.6g} exceeds bound {self.bound:.6g}"
        if self.note:
            out["note"] = self.note
        return out


def _num(x: float):
    return x if np.isfinite(x) else str(x)


@dataclass
class ExperimentResult:
    experiment: str
    settings: LatticeSettings
    checks: list[Check]
    columns: list[str]
    rows: list[tuple]
    info: dict = field(default_factory=dict)
    timestamp: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self, timings: bool = True) -> dict:
        from ..suite import environment
        out = {"suite": f"lattice:{self.experiment}", "seed": self.settings.seed,
               "group": self.settings.group,
               "cases": [c.to_dict() for c in self.checks],
               "info": {k: _num(v) if isinstance(v, float) else v for k, v in self.info.items()},
               "environment": environment()}
        if timings:
            out["timestamp"] = self.timestamp
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([_cell(x) for x in row])
        return buf.getvalue()

    def to_text(self) -> str:
        head = f"lattice {self.experiment} ({self.settings.group}, seed {self.settings.seed}): " \
               f"{sum(c.passed for c in self.checks)}/{len(self.checks)} checks pass"
        lines = [head]
        for c in self.checks:
            lines.append(f"  {'PASS' if c.passed else 'FAIL'} {c.name}: {c.value:.6g} "
                         f"(bound {c.bound:.6g}){' ' + c.note if c.note else ''}")
        for k, v in self.info.items():
            lines.append(f"  info {k}: {v}")
        return "\n".join(lines)


def _cell(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    return str(x)


# ---------------------------------------------------------------------------
# seeded inputs


def _unit(v: np.ndarray, dx: float) -> np.ndarray:
    return v / norm(v, dx)


def random_setup(settings: LatticeSettings, n: int, rng: np.random.Generator):
    """Seeded smooth connection, Gauss-constrained electric field, tangent
    vectors u, v and a gauge parameter X, all unit norm."""
    G = get_group(settings.group)
    dx = 1.0 / (n - 1)
    A = _unit(core.smooth_field(rng, n, G.dim), dx)
    E = core.gauss_electric_field(G, A, rng.normal(size=G.dim))
    u = _unit(core.smooth_field(rng, n, G.dim), dx)
    v = _unit(core.smooth_field(rng, n, G.dim), dx)
    X = _unit(core.smooth_field(rng, n, G.dim), dx)
    return LatticeConfig(G, A, E), u, v, X


def _rng(seed: int, *extra: int) -> np.random.Generator:
    return np.random.default_rng([seed, *extra])


def _halving(name: str, residuals: list, ns: list, band: float) -> list[Check]:
    out = []
    for (n1, r1), (n2, r2) in zip(zip(ns, residuals), zip(ns[1:], residuals[1:])):
        ratio = r1 / r2 if r2 > 0 else float("inf")
        expected = (n2 - 1) / (n1 - 1)
        out.append(Check(f"{name} ratio N={n1}->{n2}", ratio, expected * (1 + band),
                         abs(ratio / expected - 1) <= band,
                         f"expected {expected:g} within {band:.0%}"))
    return out


# ---------------------------------------------------------------------------
# experiments


def run_projectors(s: LatticeSettings) -> ExperimentResult:
    checks, rows = [], []
    n = s.N[0]
    cfg, _, v, X = random_setup(s, n, _rng(s.seed))
    info = {}
    for boundary in ("free", "fixed"):
        conn = CoulombConnection(cfg, boundary, s.cutoff)
        Xp = conn.project_parameter(X)
        vv = v.ravel()
        I = np.eye(conn.V.shape[0])
        quantities = {
            "V^2 - V": np.linalg.norm(conn.V @ conn.V - conn.V, 2),
            "H^2 - H": np.linalg.norm(conn.H @ conn.H - conn.H, 2),
            "V + H - 1": np.linalg.norm(conn.V + conn.H - I, 2),
            "omega(Hv)": norm(conn.omega(conn.H @ vv), cfg.dx),
            "omega(X#) - X": norm(conn.omega(core.fundamental_vector(cfg, Xp)) - Xp, cfg.dx),
            "H(X#)": norm(conn.horizontal(core.fundamental_vector(cfg, Xp)), cfg.dx),
        }
        for q, val in quantities.items():
            ok = val <= s.tolerance
            checks.append(Check(f"{boundary}: {q}", float(val), s.tolerance, ok))
            rows.append((boundary, q, float(val), s.tolerance, ok))
        info[f"{boundary} condition number"] = conn.condition
    return ExperimentResult("projectors", s, checks,
                            ["boundary", "quantity", "value", "bound", "pass"], rows, info)


def run_equivariance(s: LatticeSettings) -> ExperimentResult:
    G = get_group(s.group)
    ns = sorted(s.N)
    const_res, field_res, rows = [], [], []
    for n in ns:
        cfg, _, v, X = random_setup(s, n, _rng(s.seed))
        rc = core.equivariance_check(cfg, v, X, s.t, s.boundary, s.cutoff)
        rf = core.field_dependent_check(cfg, v, core.local_beta(s.kappa), boundary=s.boundary,
                                        cutoff=s.cutoff)
        const_res.append(rc)
        field_res.append(rf)
        rows.append((n, cfg.dx, rc, rf))
    checks = []
    if G.abelian:
        checks += [Check(f"constant residual N={n}", r, s.tolerance, r <= s.tolerance)
                   for n, r in zip(ns, const_res)]
    else:
        checks += _halving("constant residual", const_res, ns, s.halving_band)
        checks.append(Check(f"constant residual N={ns[-1]}", const_res[-1], s.absolute_bound,
                            const_res[-1] <= s.absolute_bound))
        checks += _halving("field-dependent residual", field_res, ns, s.halving_band)
    return ExperimentResult("equivariance", s, checks,
                            ["N", "dx", "constant_residual", "field_dependent_residual"], rows,
                            {"t": s.t, "kappa": s.kappa, "boundary": s.boundary})


def run_curvature(s: LatticeSettings) -> ExperimentResult:
    G = get_group(s.group)
    n = s.N[0]
    rows = []
    hits = 0
    worst_flat = 0.0
    for trial in range(s.trials):
        cfg, u, v, _ = random_setup(s, n, _rng(s.seed, trial))
        p = core.curvature_probe(cfg, u, v, s.eps, s.boundary, s.cutoff)
        free = core.curvature_exact(cfg, u, v, "free", s.cutoff)
        free_norm = norm(free, cfg.dx)
        rows.append((trial, p.norm, p.floor, p.ratio, free_norm))
        if G.abelian:
            hits += p.norm <= p.floor
        else:
            hits += p.norm >= s.floor_factor * p.floor
        worst_flat = max(worst_flat, free_norm)
    frac = hits / s.trials
    if G.abelian:
        check = Check("fraction with norm <= floor", frac, 1.0, frac == 1.0)
    else:
        check = Check(f"fraction with norm >= {s.floor_factor:g} x floor", frac, s.fraction,
                      frac >= s.fraction)
    return ExperimentResult("curvature", s, [check],
                            ["trial", "norm", "floor", "ratio", "free_closure_norm"], rows,
                            {"boundary": s.boundary, "N": n, "eps": s.eps,
                             "max free-closure curvature": worst_flat})


def _log_ratio(cfg: LatticeConfig, g: np.ndarray, g0: np.ndarray) -> np.ndarray:
    G = cfg.group
    return G.log(G.mul(g, G.inv(g0)))


def run_corner(s: LatticeSettings) -> ExperimentResult:
    ns = sorted(s.N)
    rows, consts, checks = [], [], []
    beta = core.local_beta(s.kappa)
    for n in ns:
        cfg, _, v, X = random_setup(s, n, _rng(s.seed))
        vert = core.fundamental_vector(cfg, X)
        dev = abs(core.theta(cfg, vert) + core.corner_charge(cfg, X))
        th_vert = abs(core.theta_H(cfg, vert, s.boundary, s.cutoff))
        # transform by a field-dependent beta and compare potentials on the pushed tangent
        b0 = beta(cfg)
        cfg2 = core.gauge_transform(cfg, b0)
        h = 1e-5
        plus, minus = cfg.replace(A=cfg.A + h * v), cfg.replace(A=cfg.A - h * v)
        v2 = (core.gauge_transform(plus, beta(plus)).A - core.gauge_transform(minus, beta(minus)).A) / (2 * h)
        dbeta = (_log_ratio(cfg, beta(plus), b0) - _log_ratio(cfg, beta(minus), b0)) / (2 * h)
        th_shift = abs(core.theta_H(cfg2, v2, s.boundary, s.cutoff) - core.theta_H(cfg, v, s.boundary, s.cutoff))
        t_shift = core.theta(cfg2, v2) - core.theta(cfg, v)
        c_shift = -core.corner_charge(cfg2, dbeta)
        consts.append(dev / cfg.dx)
        rows.append((n, cfg.dx, dev, dev / cfg.dx, th_vert, th_shift, t_shift, c_shift))
        checks.append(Check(f"thetaH on vertical N={n}", th_vert, s.tolerance, th_vert <= s.tolerance))
    ref = consts[-1]
    spread = max(abs(c / ref - 1) for c in consts)
    checks.insert(0, Check("flux constant C spread", spread, s.stability_band, spread <= s.stability_band,
                           "C = |theta(X#) + corner| / dx"))
    return ExperimentResult("corner", s, checks,
                            ["N", "dx", "deviation", "constant", "thetaH_vertical", "thetaH_shift",
                             "theta_shift", "corner_shift"], rows,
                            {"C": [float(c) for c in consts], "boundary": s.boundary})


def run_gribov(s: LatticeSettings) -> ExperimentResult:
    G = get_group(s.group)
    rows, stars = [], []
    for n in sorted(s.N):
        cfg, _, _, _ = random_setup(s, n, _rng(s.seed))
        rep = core.gribov_scan(cfg, s.t_max, s.steps, s.boundary)
        rows += [(n, t, lam, cond) for t, lam, cond in rep.rows]
        stars.append((n, rep))
    checks = []
    info = {f"N={n}": rep.summary() for n, rep in stars}
    if G.abelian:
        for n, rep in stars:
            checks.append(Check(f"no crossing N={n}", float(rep.crossing), 0.0, not rep.crossing))
    else:
        for n, rep in stars:
            checks.append(Check(f"crossing found N={n}", float(rep.crossing), 1.0, rep.crossing))
        found = [rep.t_star for _, rep in stars if rep.crossing]
        if len(found) == len(stars) and len(found) > 1:
            rel = (max(found) - min(found)) / min(found)
            checks.append(Check("t* agreement across N", rel, s.crossing_agreement,
                                rel <= s.crossing_agreement))
    return ExperimentResult("gribov", s, checks, ["N", "t", "lambda_min", "condition"], rows, info)


EXPERIMENTS: dict[str, Callable[[LatticeSettings], ExperimentResult]] = {
    "projectors": run_projectors,
    "equivariance": run_equivariance,
    "curvature": run_curvature,
    "corner": run_corner,
    "gribov": run_gribov,
}

DEFAULTS: dict[str, LatticeSettings] = {
    "projectors": LatticeSettings(group="su2", N=(128,)),
    "equivariance": LatticeSettings(group="su2", N=(128, 256)),
    "curvature": LatticeSettings(group="su2", N=(64,), boundary="fixed", trials=100),
    "corner": LatticeSettings(group="su2", N=(128, 256, 512)),
    "gribov": LatticeSettings(group="su2", N=(128, 256), t_max=8.0, steps=32),
}


def run_experiment(name: str, settings: LatticeSettings) -> ExperimentResult:
    try:
        fn = EXPERIMENTS[name]
    except KeyError:
        raise KeyError(f"unknown experiment {name!r}") from None
    return fn(settings)
