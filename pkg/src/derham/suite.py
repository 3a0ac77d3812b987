"""Configurable verification suite spanning every module.

Configuration is a flat ``key = value`` file (``#`` comments, comma-separated
lists) with ``DERHAM_<KEY>`` environment overrides.  All validation errors are
collected before any check runs.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, fields
from fractions import Fraction
from pathlib import Path

import numpy as np
from scipy.optimize import minimize_scalar

from .bumps import bump_form
from .cohomology import (WindowMismatch, aniso_representative_basis, class_map_consistency,
                         generator, generator_keys, project_class, representative_basis,
                         solvability_check)
from .exterior import (Form, basis_form, codifferential, d, hodge_star, l2_inner,
                       multi_indices, random_poly_form, volume_form, wedge)
from .fields import Field, SampledField
from .harmonics import gram_matrix, harmonic_basis, laplacian_rank_dim
from .kernels import PRINTED_N2_CONSTANT, expansion_table, mollified_identity
from .potentials import (decay_profile, hodge_decompose, lemma_check, moment_functional,
                         potential)
from .quadrature import QuadratureSpec
from .report import FAIL, PASS, Check, Report
from .spaces import (TimeSampledForm, aniso_norm, classify_delta, gamma_norm, isotropic_norm,
                     make_grid, make_time_grid, verify_time_class, weight, weighted_sup_norm)

__all__ = ["SuiteConfig", "ConfigError", "load_config", "run_suite", "GROUPS", "CHECK_RUNNERS"]

GROUPS = ("algebra", "harmonics", "kernels", "potentials", "moments", "cohomology",
          "windows", "norms", "aniso")


class ConfigError(ValueError):
    """Invalid suite configuration; ``errors`` lists every problem found."""

    def __init__(self, errors: list):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass
class SuiteConfig:
    n: list = field(default_factory=lambda: [3])
    q: list = field(default_factory=lambda: [0, 1])
    m: list = field(default_factory=lambda: [0])
    delta: list = field(default_factory=lambda: [0.5, 2.5, 3.5])
    lam: float = 0.5
    mu: float = 0.25
    T: float = 1.0
    R: float = 12.0
    eps: float = 0.1
    tol: float = 1e-4
    panels: int = 24
    gauss_order: int = 8
    workers: int = 1
    grid_level: int = 1
    seed: int = 7
    checks: list = field(default_factory=lambda: list(GROUPS))
    out: str = "derham-report"
    suite_id: str = "smoke"

    def spec(self) -> QuadratureSpec:
        return QuadratureSpec(R=self.R, eps=self.eps, tol=self.tol, panels=self.panels,
                              gauss_order=self.gauss_order, workers=self.workers)

    def validate(self) -> "SuiteConfig":
        errs = []
        for n in self.n:
            if not isinstance(n, int) or not 2 <= n <= 5:
                errs.append(f"n={n!r} must be an integer in 2..5")
        nmin = min((n for n in self.n if isinstance(n, int) and 2 <= n <= 5), default=2)
        for q in self.q:
            if not isinstance(q, int) or not 0 <= q < nmin:
                errs.append(f"q={q!r} must be an integer in 0..{nmin - 1} (q+1 <= n)")
        for m in self.m:
            if not isinstance(m, int) or not 0 <= m <= 3:
                errs.append(f"m={m!r} must be an integer in 0..3")
        for dl in self.delta:
            if not isinstance(dl, (int, float, Fraction)) or not math.isfinite(float(dl)):
                errs.append(f"delta={dl!r} must be a finite number")
        if not 0 < self.lam <= 1:
            errs.append(f"lam={self.lam} must lie in (0, 1]")
        if not 0 <= self.mu <= 1:
            errs.append(f"mu={self.mu} must lie in [0, 1]")
        if not self.T > 0:
            errs.append(f"T={self.T} must be positive")
        if not 0 <= self.grid_level <= 3:
            errs.append(f"grid_level={self.grid_level} must lie in 0..3")
        unknown = [c for c in self.checks if c not in GROUPS]
        if unknown:
            errs.append(f"unknown check groups {unknown}; choose from {list(GROUPS)}")
        try:
            self.spec()
        except ValueError as exc:
            errs.append(f"quadrature: {exc}")
        if errs:
            raise ConfigError(errs)
        return self


_LISTS = {"n": int, "q": int, "m": int, "delta": float, "checks": str}


def _coerce(key: str, raw: str):
    types = {f.name: f.type for f in fields(SuiteConfig)}
    if key not in types:
        raise KeyError(key)
    raw = raw.strip()
    if key in _LISTS:
        conv = _LISTS[key]
        items = [s.strip() for s in raw.split(",") if s.strip()]
        return [conv(s) for s in items]
    default = getattr(SuiteConfig(), key)
    if isinstance(default, bool):
        return raw.lower() in ("1", "true", "yes")
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    return raw


def load_config(path: str | Path | None = None, overrides: dict | None = None,
                env: dict | None = None) -> SuiteConfig:
    """Read a flat key=value file, then DERHAM_* env vars, then ``overrides``."""
    values: dict = {}
    errs = []
    if path is not None:
        for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                errs.append(f"line {lineno}: expected key = value")
                continue
            key, raw = (s.strip() for s in line.split("=", 1))
            values[key] = raw
    env = os.environ if env is None else env
    for k, v in env.items():
        if k.startswith("DERHAM_"):
            values[k[len("DERHAM_"):].lower()] = v
    for k, v in (overrides or {}).items():
        if v is not None:
            values[k] = v
    cfg = SuiteConfig()
    for key, raw in values.items():
        try:
            val = _coerce(key, raw) if isinstance(raw, str) else raw
        except KeyError:
            errs.append(f"unknown key {key!r}")
            continue
        except ValueError as exc:
            errs.append(f"{key}: {exc}")
            continue
        setattr(cfg, key, val)
    try:
        cfg.validate()
    except ConfigError as exc:
        errs.extend(exc.errors)
    if errs:
        raise ConfigError(errs)
    return cfg


# ---------------------------------------------------------------------------
# check groups.  Each runner returns a list of Checks and may add plot series.

def _rng(cfg: SuiteConfig, *salt) -> np.random.Generator:
    return np.random.default_rng([cfg.seed, *[int(s) for s in salt]])


def _algebra(cfg: SuiteConfig, report: Report) -> list:
    out = []
    spec = cfg.spec()
    for n in cfg.n:
        rng = _rng(cfg, 1, n)
        forms = [random_poly_form(rng, n, q) for q in range(n + 1) for _ in range(5)]
        dd = all(d(d(a)).is_zero() for a in forms)
        ss = all(codifferential(codifferential(a)).is_zero() for a in forms)
        out.append(Check.exact(f"n{n}/d_squared_zero", "complex property of d",
                               {"n": n, "forms": len(forms), "seed": cfg.seed}, dd))
        out.append(Check.exact(f"n{n}/codiff_squared_zero", "complex property of d*",
                               {"n": n, "forms": len(forms), "seed": cfg.seed}, ss))
        star_ok = all(hodge_star(hodge_star(a)) == a * ((-1) ** (a.degree * (n - a.degree)))
                      for a in forms)
        vol_ok = all(wedge(basis_form(n, I), hodge_star(basis_form(n, I))) == volume_form(n)
                     for q in range(n + 1) for I in multi_indices(n, q))
        out.append(Check.exact(f"n{n}/star_star_sign", "Hodge star convention", {"n": n}, star_ok))
        out.append(Check.exact(f"n{n}/wedge_star_volume", "Hodge star convention", {"n": n},
                               vol_ok))
        if n > 3:
            out.append(Check.skipped(f"n{n}/adjointness", "formal adjointness of d and d*",
                                     {"n": n}, "quadrature pairing limited to n <= 3"))
            continue
        for q in cfg.q:
            rng = _rng(cfg, 2, n, q)
            a, b = bump_form(rng, n, q), bump_form(rng, n, q + 1)
            gap = abs(float(l2_inner(d(a), b, spec)) - float(l2_inner(a, codifferential(b), spec)))
            out.append(Check.compare(f"n{n}/q{q}/adjointness", "formal adjointness of d and d*",
                                     {"n": n, "q": q, "seed": cfg.seed}, gap, 10 * spec.tol))
    return out


def _harmonics(cfg: SuiteConfig, report: Report, kmax: int = 4) -> list:
    out = []
    for n in cfg.n:
        ks = range(kmax + 1)
        dims = {k: (len(harmonic_basis(n, k)), laplacian_rank_dim(n, k)) for k in ks}
        out.append(Check.exact(f"n{n}/harmonic_dimension", "harmonic polynomial spaces",
                               {"n": n, "k_max": kmax}, all(a == b for a, b in dims.values()),
                               {str(k): v[0] for k, v in dims.items()}))
        lap = all(h.field().laplacian().is_zero() for k in ks for h in harmonic_basis(n, k))
        out.append(Check.exact(f"n{n}/harmonic_laplace_zero", "harmonic polynomial spaces",
                               {"n": n, "k_max": kmax}, lap))
        gram_ok = True
        for k in ks:
            G = gram_matrix(harmonic_basis(n, k))
            gram_ok &= all(G[i][j] == (1 if i == j else 0)
                           for i in range(len(G)) for j in range(len(G)))
        out.append(Check.exact(f"n{n}/gram_identity", "orthonormal harmonic basis",
                               {"n": n, "k_max": kmax}, gram_ok))
    return out


def _kernels(cfg: SuiteConfig, report: Report) -> list:
    out = []
    spec = cfg.spec()
    for n in cfg.n:
        x = np.zeros(n)
        x[0] = 4.0
        y = np.zeros(n)
        y[0] = 1.0
        rows = expansion_table(n, x, y, 40)
        report.add_series(f"expansion_n{n}", ["m", "remainder", "ratio"],
                          [(m, rem, ratio) for m, _, rem, ratio in rows])
        worst = max(r[3] for r in rows[1:7])
        out.append(Check.compare(f"n{n}/expansion_ratio", "harmonic expansion of e(x - y)",
                                 {"n": n, "x": x, "y": y, "m": "1..6"}, worst, 0.6))
        out.append(Check.compare(f"n{n}/expansion_remainder_m40", "harmonic expansion of e(x - y)",
                                 {"n": n, "x": x, "y": y, "m": 40}, rows[40][2], 1e-6))
        profile = Field.gaussian(n, 1) * (Field.const(n, 1) + Field.var(n, 0))
        val, target = mollified_identity(profile, spec)
        err = abs(val - target)
        inputs = {"n": n, "profile": "(1 + x1) exp(-|x|^2)"}
        if n == 2:
            printed, _ = mollified_identity(profile, spec, constant=PRINTED_N2_CONSTANT)
            chk = Check.compare(f"n{n}/mollified_identity", "fundamental solution normalization",
                                inputs, err, 1e-3)
            chk.reason = f"printed 1/pi constant gives ratio {printed / target:.6f}"
            out.append(chk)
        else:
            out.append(Check.compare(f"n{n}/mollified_identity",
                                     "fundamental solution normalization", inputs, err, 1e-3))
    return out


def _potentials(cfg: SuiteConfig, report: Report) -> list:
    out = []
    spec = cfg.spec()
    for n in cfg.n:
        for q in cfg.q:
            name = f"n{n}/q{q}"
            if n > 3:
                out.append(Check.skipped(f"{name}/potential_identities", "potential identities",
                                         {"n": n, "q": q}, "singular quadrature limited to n <= 3"))
                continue
            rng = _rng(cfg, 3, n, q)
            f = d(bump_form(rng, n, q))
            g = codifferential(bump_form(rng, n, q)) if q >= 1 else None
            rep = lemma_check(f, g, spec)
            out.append(Check.compare(f"{name}/potential_identities", "potential identities",
                                     {"n": n, "q": q, "seed": cfg.seed, "step": rep.step},
                                     max(rep.residuals.values()), rep.budget))
            u = bump_form(_rng(cfg, 4, n, q), n, q)
            if q >= 1:
                hd = hodge_decompose(u, spec)
                out.append(Check.compare(f"{name}/hodge_decomposition", "Hodge decomposition",
                                         {"n": n, "q": q, "seed": cfg.seed},
                                         max(hd.residual, hd.codiff_coexact), 30 * spec.tol))
            if q == cfg.q[0]:
                # far-field decay of the potential, exported for plotting
                radii = np.array([1.0, 1.5, 2.0, 3.0, 4.0, 6.0])
                X = np.zeros((len(radii), n))
                X[:, 0] = radii
                X[:, 1] = 0.5 * radii
                vals = potential(f, "phi", X, spec).values
                peak = np.max(np.abs(vals), axis=1)
                lr = np.log(np.linalg.norm(X, axis=1))
                report.add_series(f"decay_n{n}_q{q}", ["log_r", "log_abs_phi_f"],
                                  list(zip(lr, np.log(peak))))
                report.add_series(f"data_decay_n{n}_q{q}", ["log_r", "log_max_abs_f"],
                                  decay_profile(f, spec.R))
                slope = float(np.polyfit(lr[-3:], np.log(peak[-3:]), 1)[0])
                out.append(Check.compare(f"{name}/potential_decay", "decay of potentials",
                                         {"n": n, "q": q, "radii": radii}, -slope, n - 1.25,
                                         above=True))
    return out


def _coboundary(rng, n: int, q: int) -> Form:
    """A decaying closed (q+1)-form whose moments vanish: d u with d* u = 0."""
    if q == 0:
        return d(bump_form(rng, n, 0))
    return d(codifferential(bump_form(rng, n, q + 1)))


def _active_keys(n: int, q: int, m: int, spec: QuadratureSpec) -> list:
    """Generator keys whose moment table is nonzero (they carry a certified class)."""
    thr = 10 * spec.tol
    return [key for key in generator_keys(n, q, m)
            if moment_functional(generator(n, *key), m, q, spec).max_abs() > thr]


def _certified_rank(n: int, q: int, m: int, spec: QuadratureSpec) -> tuple:
    """Numerical rank of the generators' moment matrix, and their exact span rank."""
    rows = [moment_functional(generator(n, *key), m, q, spec).vector()
            for key in generator_keys(n, q, m)]
    rank = int(np.linalg.matrix_rank(np.array(rows), tol=10 * spec.tol))
    return rank, representative_basis(n, q + 1, m).rank


def _moments(cfg: SuiteConfig, report: Report) -> list:
    out = []
    spec = cfg.spec()
    thr = 10 * spec.tol
    for n in cfg.n:
        for q in cfg.q:
            for m in cfg.m:
                name = f"n{n}/q{q}/m{m}"
                if n > 3:
                    out.append(Check.skipped(f"{name}/coboundary_moments", "solvability condition",
                                             {"n": n}, "quadrature limited to n <= 3"))
                    continue
                f = _coboundary(_rng(cfg, 5, n, q, m), n, q)
                tab = moment_functional(f, m, q, spec)
                out.append(Check.compare(f"{name}/coboundary_moments", "solvability condition",
                                         {"n": n, "q": q, "m": m, "seed": cfg.seed},
                                         tab.max_abs(), thr))
                if q == 0:
                    weakest = min(solvability_check(generator(n, *key), None, m, spec).max_abs
                                  for key in generator_keys(n, q, m))
                    out.append(Check.compare(f"{name}/generator_pairing", "solvability condition",
                                             {"n": n, "q": q, "m": m}, weakest, thr, above=True))
                    continue
                rank, span = _certified_rank(n, q, m, spec)
                out.append(Check(f"{name}/certified_rank", "solvability condition",
                                 {"n": n, "q": q, "m": m}, {"certified": rank, "span": span},
                                 "0 < certified <= span",
                                 PASS if 0 < rank <= span else FAIL))
    return out


def _cohomology(cfg: SuiteConfig, report: Report) -> list:
    out = []
    spec = cfg.spec()
    for n in cfg.n:
        for q in cfg.q:
            for m in cfg.m:
                name = f"n{n}/q{q}/m{m}"
                basis = representative_basis(n, q + 1, m)
                nxt = representative_basis(n, q + 1, m + 1)
                out.append(Check(f"{name}/representative_rank", "finite-dimensional cohomology",
                                 {"n": n, "q_out": q + 1, "m": m},
                                 {"rank": basis.rank, "bound": basis.upper_bound}, "rank <= bound",
                                 PASS if 0 < basis.rank <= basis.upper_bound else FAIL))
                out.append(Check.exact(f"{name}/generator_growth", "finite-dimensional cohomology",
                                       {"n": n, "q_out": q + 1, "m": m},
                                       len(nxt) > len(basis) and nxt.rank > basis.rank,
                                       {"m": len(basis), "m+1": len(nxt)}))
                if n > 3:
                    continue
                active = _active_keys(n, q, m, spec)
                g = generator(n, *active[0])
                u = bump_form(_rng(cfg, 6, n, q, m), n, q)
                other = generator(n, *active[-1])
                rep = class_map_consistency(g, u, m, spec, other=other)
                out.append(Check.compare(f"{name}/projection_invariance", "class map",
                                         {"n": n, "q": q, "m": m, "seed": cfg.seed},
                                         rep.max_gap, rep.threshold))
                pa = project_class(g, m, spec, rationalize=1000).form
                pb = project_class(other, m, spec, rationalize=1000).form
                out.append(Check.exact(f"{name}/distinct_projections", "class map",
                                       {"n": n, "q": q, "m": m}, not pa.equals_outer(pb)))
                cob = _coboundary(_rng(cfg, 7, n, q, m), n, q)
                pc = project_class(cob, m, spec)
                out.append(Check.compare(f"{name}/coboundary_annihilated", "class map",
                                         {"n": n, "q": q, "m": m, "seed": cfg.seed},
                                         pc.max_coefficient, 10 * spec.tol))
    return out


def _windows(cfg: SuiteConfig, report: Report) -> list:
    out = []
    spec = cfg.spec()
    for n in cfg.n:
        for delta in cfg.delta:
            win = classify_delta(n, delta)
            name = f"n{n}/delta{delta:g}"
            out.append(Check(f"{name}/classify", "weight windows", {"n": n, "delta": delta},
                             str(win), "window", PASS))
            dep = f"{name}/window_projection"
            inputs = {"n": n, "delta": delta}
            if not win.admissible:
                out.append(Check.skipped(dep, "class map", inputs,
                                         f"delta lies in the {win} region"))
                continue
            if n > 3:
                out.append(Check.skipped(dep, "class map", inputs, "quadrature limited to n <= 3"))
                continue
            m = win.m if win.kind == "Injection" else 0
            if m > 1:
                out.append(Check.skipped(dep, "class map", inputs,
                                         f"Injection m={m} exceeds the smoke budget"))
                continue
            g = generator(n, 1, 1, ())
            proj = project_class(g, m, spec, window=win)
            if win.kind == "Isomorphism":
                out.append(Check.exact(dep, "class map", inputs, proj.form.is_zero(),
                                       proj.max_coefficient))
            else:
                out.append(Check.compare(dep, "class map", inputs, proj.max_coefficient,
                                         10 * spec.tol, above=True))
            try:
                project_class(g, m + 1, spec, window=win)
                out.append(Check.exact(f"{name}/window_mismatch_rejected", "weight windows",
                                       inputs, win.kind == "Isomorphism"))
            except WindowMismatch:
                out.append(Check.exact(f"{name}/window_mismatch_rejected", "weight windows",
                                       inputs, True))
    return out


def gaussian_sup_oracle(delta: float) -> float:
    """max_r (1 + r^2)^(delta/2) exp(-r^2) by 1-D bounded minimization."""
    res = minimize_scalar(lambda r: -(1 + r * r) ** (delta / 2) * math.exp(-r * r),
                          bounds=(0.0, 10.0), method="bounded", options={"xatol": 1e-10})
    return max(-float(res.fun), 1.0)


def _norms(cfg: SuiteConfig, report: Report) -> list:
    out = []
    for n in cfg.n:
        grid = make_grid(n, cfg.grid_level)
        gauss = Form.scalar(Field.gaussian(n, 1))
        shifted = Form.scalar(Field.gaussian(n, 1, [Fraction(1, 3 + i) for i in range(n)]))
        for delta in cfg.delta:
            name = f"n{n}/delta{delta:g}"
            unit = Form.scalar(SampledField(n, lambda X, dl=delta: weight(X) ** (-dl),
                                            label="w^-delta"))
            v = weighted_sup_norm(unit, 0, delta, grid).value
            out.append(Check.compare(f"{name}/unit_weight_norm", "weighted Hoelder spaces",
                                     {"n": n, "delta": delta, "level": cfg.grid_level},
                                     abs(v - 1.0), 1e-14))
            est = weighted_sup_norm(gauss, 0, delta, grid).value
            oracle = gaussian_sup_oracle(delta)
            out.append(Check.compare(f"{name}/gaussian_sup_norm", "weighted Hoelder spaces",
                                     {"n": n, "delta": delta, "oracle": oracle},
                                     abs(est - oracle) / oracle, 0.05))
        delta = cfg.delta[0]
        vals = [isotropic_norm(shifted, 0, cfg.lam, delta, make_grid(n, lv)).value
                for lv in range(3)]
        report.add_series(f"refinement_n{n}", ["level", "estimate"], list(enumerate(vals)))
        out.append(Check.exact(f"n{n}/refinement_monotone", "weighted Hoelder spaces",
                               {"n": n, "delta": delta, "lam": cfg.lam, "levels": 3},
                               all(b >= a for a, b in zip(vals, vals[1:])), vals))
    return out


def _aniso_sample(n: int, times, scale: float) -> TimeSampledForm:
    g = Field.gaussian(n, 1)
    return TimeSampledForm.from_function(
        lambda t: Form(n, 1, {(i + 1,): g * Fraction(scale * (1 + t) ** (i + 1)).limit_denominator(10 ** 6)
                              * Field.var(n, (i + 1) % n) for i in range(n)}), times)


def _aniso(cfg: SuiteConfig, report: Report) -> list:
    out = []
    lam, T = cfg.lam, cfg.T
    cases = [("t", lambda t: t, "C^{s,0}", True),
             ("t", lambda t: t, "C^{s,lam/2}", True),
             ("t^(lam/2)", lambda t: t ** (lam / 2), "C^{s,lam/2}", True),
             ("t^(lam/4)", lambda t: t ** (lam / 4), "C^{s,lam/2}", False)]
    for label, fn, cls, expect in cases:
        rep = verify_time_class(fn, T, cls, lam)
        out.append(Check(f"time_class/{label}/{cls}", "time-dependent classes",
                         {"T": T, "lam": lam, "class": cls},
                         {"accepted": rep.accepted, "slope": rep.slope}, f"accepted={expect}",
                         PASS if rep.accepted == expect else FAIL, rep.reason))
    for n in cfg.n:
        grid = make_grid(n, 0)
        times = make_time_grid(T, 0).times
        u = _aniso_sample(n, times, 1.0)
        du, dsu = u.map(d), u.map(codifferential)
        gm = gamma_norm(u, du, dsu, 0, 0, lam, cfg.mu, 1.0, grid)
        parts = (aniso_norm(u, 0, 0, lam, cfg.mu, 1.0, grid).value
                 + aniso_norm(du, 0, 0, lam, cfg.mu, 2.0, grid).value
                 + aniso_norm(dsu, 0, 0, lam, cfg.mu, 2.0, grid).value)
        out.append(Check.exact(f"n{n}/gamma_additivity", "graph norm",
                               {"n": n, "lam": lam, "mu": cfg.mu}, gm.value == parts, gm.value))
        mono = True
        for s in range(3):
            us = _aniso_sample(n, times, 1.0 + s)
            a0 = aniso_norm(us, 0, 0, lam, 0.0, 1.0, grid).value
            a1 = aniso_norm(us, 0, 0, lam, lam / 2, 1.0, grid).value
            mono &= a0 <= a1
        out.append(Check.exact(f"n{n}/mu_monotone", "anisotropic spaces",
                               {"n": n, "lam": lam, "samples": 3}, mono))
        for q in cfg.q:
            for m in cfg.m:
                key = generator_keys(n, q, m)[0]
                rep = aniso_representative_basis(n, q + 1, m, {key: lambda t: t ** (lam / 2)}, T,
                                                 "C^{s,lam/2}", lam=lam)
                out.append(Check.exact(f"n{n}/q{q}/m{m}/aniso_slice_coherence",
                                       "time-dependent cohomology",
                                       {"n": n, "q_out": q + 1, "m": m, "T": T}, rep.coherent()))
    return out


CHECK_RUNNERS = {
    "algebra": _algebra, "harmonics": _harmonics, "kernels": _kernels,
    "potentials": _potentials, "moments": _moments, "cohomology": _cohomology,
    "windows": _windows, "norms": _norms, "aniso": _aniso,
}


def run_suite(config: SuiteConfig | None = None) -> Report:
    """Run the selected check groups; the report passes iff no check fails."""
    config = (config or SuiteConfig()).validate()
    report = Report(config.suite_id)
    for group in GROUPS:
        if group in config.checks:
            report.add(*CHECK_RUNNERS[group](config, report))
    return report
