"""Cocycle tests, solvability pairings, the class projection d(Phi - Phi_m)
and explicit representative bases (isotropic and time-parameterized).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Mapping

import numpy as np

from .exterior import Form, QuadratureSpec, codifferential, d, fd_d, l2_inner, multi_indices
from .fields import Field
from .harmonics import harmonic_basis, harmonic_dim
from .linalg import exact_rank, in_span
from .potentials import (MomentTable, PreconditionError, default_residual_grid, grid_norm,
                         moment_functional, representative_from_moments)
from .spaces import TimeClassReport, WeightWindow, classify_delta, make_time_grid, verify_time_class

__all__ = [
    "CocycleReport", "cocycle_check", "SolvabilityReport", "solvability_check",
    "WindowMismatch", "ClassProjection", "class_projection", "project_class",
    "CohomologyBasis", "representative_basis", "generator", "outer_vectors", "span_rank",
    "AnisoRepresentative", "TimeClassError", "aniso_representative_basis",
    "ConsistencyReport", "class_map_consistency", "threshold",
]


def threshold(spec: QuadratureSpec, factor: float = 10.0) -> float:
    return factor * spec.tol


# ---------------------------------------------------------------------------
# cocycles

@dataclass
class CocycleReport:
    degree: int
    symbolic_closed: bool | None
    residual: float | None
    differential: Form | None = field(default=None, repr=False)
    delta: float | None = None

    @property
    def closed(self) -> bool:
        if self.symbolic_closed is not None:
            return self.symbolic_closed
        return self.residual is not None and self.residual <= 1e-6


def cocycle_check(f: Form, *, delta: float | None = None, grid=None, step: float = 1e-3,
                  tol: float = 1e-6) -> CocycleReport:
    """Exact df = 0 for symbolic forms, otherwise a finite-difference grid residual."""
    if f.is_symbolic():
        df = d(f)
        return CocycleReport(f.degree, df.is_zero(), None, df, delta)
    grid = default_residual_grid(f.n) if grid is None else grid
    res = grid_norm(fd_d(f, step), grid) if f.degree < f.n else 0.0
    rep = CocycleReport(f.degree, None, res, None, delta)
    return rep


def _co_closed(g: Form) -> bool:
    if g.is_symbolic():
        return codifferential(g).is_zero()
    raise PreconditionError("co-closedness of sampled forms must be established by the caller")


# ---------------------------------------------------------------------------
# solvability pairings

@dataclass
class SolvabilityReport:
    n: int
    q: int
    m: int
    pairings: dict          # (t_index or None, k, j, I) -> value
    threshold: float
    tail_estimate: float

    @property
    def max_abs(self) -> float:
        return max((abs(v) for v in self.pairings.values()), default=0.0)

    @property
    def solvable(self) -> bool:
        return self.max_abs <= self.threshold

    def rows(self) -> list:
        return [(t, k, j, "".join(map(str, I)) or "-", v)
                for (t, k, j, I), v in sorted(self.pairings.items(), key=lambda kv: str(kv[0]))]


def _pairings(f: Form | None, g: Form | None, n: int, q: int, m: int, spec: QuadratureSpec,
              tindex=None) -> tuple[dict, float]:
    out = {}
    tail = 0.0
    for k in range(m + 2):
        for h in harmonic_basis(n, k):
            for I in multi_indices(n, q):
                hf = Form(n, q, {I: h.field()})
                total = 0.0
                if f is not None and f.coeffs:
                    r = l2_inner(f, d(hf), spec)
                    total += float(r)
                    tail = max(tail, r.tail_estimate)
                if g is not None and g.coeffs and q >= 1:
                    r = l2_inner(g, codifferential(hf), spec)
                    total += float(r)
                    tail = max(tail, r.tail_estimate)
                out[(tindex, k, h.j, I)] = total
    return out, tail


def solvability_check(f, g, m: int, spec: QuadratureSpec | None = None, *,
                      time_grid=None, factor: float = 10.0) -> SolvabilityReport:
    """Pairings (f, dh) + (g, d*h) over h in H_{<=m+1} of degree q.

    ``f`` has degree q+1 and ``g`` degree q-1 (either may be None).  With a
    time grid, ``f`` and ``g`` are TimeSampledForms and every slice is paired.
    """
    spec = spec or QuadratureSpec()
    if m < 0:
        raise ValueError("m must be non-negative")
    if time_grid is not None or hasattr(f, "slices") or hasattr(g, "slices"):
        ref = f if f is not None else g
        pairings: dict = {}
        tail = 0.0
        for ti in range(len(ref.times)):
            fs = f.slices[ti] if f is not None else None
            gs = g.slices[ti] if g is not None else None
            sub = solvability_check(fs, gs, m, spec, factor=factor)
            for (_, k, j, I), v in sub.pairings.items():
                pairings[(ti, k, j, I)] = v
            tail = max(tail, sub.tail_estimate)
            n, q = sub.n, sub.q
        return SolvabilityReport(n, q, m, pairings, threshold(spec, factor), tail)
    ref = f if f is not None else g
    if ref is None:
        raise ValueError("need at least one of f, g")
    n = ref.n
    q = f.degree - 1 if f is not None else g.degree + 1
    if f is not None and g is not None and g.degree != q - 1:
        raise ValueError("f must have degree q+1 and g degree q-1")
    if f is not None and f.coeffs and not cocycle_check(f).closed:
        raise PreconditionError("f is not a cocycle (df != 0)")
    if g is not None and g.coeffs and not _co_closed(g):
        raise PreconditionError("g is not a cocycle for d* (d*g != 0)")
    pairings, tail = _pairings(f, g, n, q, m, spec)
    return SolvabilityReport(n, q, m, pairings, threshold(spec, factor), tail)


# ---------------------------------------------------------------------------
# generators and exact span ranks

def generator(n: int, k: int, j: int, I: tuple) -> Form:
    """d( p_kj(x) dx_I / ((n+2k-2) theta^(n+2k-2)) ) with the integer harmonic p_kj."""
    h = harmonic_basis(n, k)[j - 1]
    power = n + 2 * k - 2
    coeff = h.field() * Field.theta_power(n, power) / power
    return d(Form(n, len(I), {tuple(I): coeff}))


def generator_keys(n: int, q: int, m: int) -> list:
    """(k, j, I) for 1 <= k <= m+1 and |I| = q."""
    return [(k, h.j, I) for k in range(1, m + 2) for h in harmonic_basis(n, k)
            for I in multi_indices(n, q)]


def outer_vectors(forms: list) -> list:
    """Exact coefficient vectors of forms restricted to |x| >= 2."""
    if not forms:
        return []
    shift = 0
    for f in forms:
        for c in f.coeffs.values():
            shift = max(shift, c.outer_canonical()[0])
    rows = []
    keys: dict = {}
    for f in forms:
        row = {}
        for I, c in f.coeffs.items():
            _, parts = c.outer_canonical(shift)
            for (l, Q, par), poly in parts.items():
                for alpha, v in poly.items():
                    key = (I, l, Q, par, alpha)
                    keys.setdefault(key, len(keys))
                    row[keys[key]] = v
        rows.append(row)
    return [[r.get(i, Fraction(0)) for i in range(len(keys))] for r in rows]


def span_rank(forms: list) -> int:
    vecs = outer_vectors(forms)
    return exact_rank(vecs) if vecs and vecs[0] else 0


@dataclass
class CohomologyBasis:
    n: int
    q: int                  # degree of the members (q_out)
    m: int
    members: list
    keys: list
    rank: int
    upper_bound: int
    window: WeightWindow | None = None

    def __len__(self):
        return len(self.members)


def representative_basis(n: int, q_out: int, m: int, *, delta: float | None = None,
                         order: list | None = None) -> CohomologyBasis:
    """All generators of degree q_out for k <= m+1, with the exact rank of their span.

    ``order`` permutes the generators (for basis-independence checks).
    """
    if q_out < 1 or q_out > n:
        raise ValueError(f"output degree must lie in 1..{n}")
    if m < 0:
        raise ValueError("m must be non-negative")
    keys = generator_keys(n, q_out - 1, m)
    if order is not None:
        keys = [keys[i] for i in order]
    members = [generator(n, k, j, I) for k, j, I in keys]
    bound = len(multi_indices(n, q_out - 1)) * sum(harmonic_dim(n, k) for k in range(1, m + 2))
    window = classify_delta(n, delta) if delta is not None else None
    return CohomologyBasis(n, q_out, m, members, keys, span_rank(members), bound, window)


# ---------------------------------------------------------------------------
# class projection

class WindowMismatch(ValueError):
    """Class projection requested outside its weight window."""


@dataclass
class ClassProjection:
    form: Form                   # degree q+1, symbolically closed
    representative: Form         # degree q
    table: MomentTable
    coefficients: dict           # (k, j, I) -> coefficient of the representative
    calibrated: bool = False

    @property
    def max_coefficient(self) -> float:
        return max((abs(float(v)) for v in self.coefficients.values()), default=0.0)


@lru_cache(maxsize=None)
def _generator_moment_matrix(n: int, q: int, m: int, spec: QuadratureSpec) -> tuple:
    keys = generator_keys(n, q, m)
    cols = []
    for k, j, I in keys:
        tab = moment_functional(generator(n, k, j, I), m, q, spec)
        cols.append([tab.entries[key] for key in keys])
    return tuple(keys), np.array(cols).T


def _resolve_window(window, n: int, m: int):
    if window is None:
        return None
    if not isinstance(window, WeightWindow):
        window = classify_delta(n, window)
    if window.kind == "Isomorphism":
        return "zero"
    if window.kind == "Injection":
        if window.m != m:
            raise WindowMismatch(f"window {window} does not match m={m}")
        return None
    raise WindowMismatch(f"no class projection in the {window} window")


def project_class(f: Form, m: int, spec: QuadratureSpec | None = None, *, window=None,
                  calibrated: bool = False, rationalize: int | None = None) -> ClassProjection:
    """d applied to the representative built from the moments of f.

    ``window`` (a WeightWindow or a delta) selects the regime: Isomorphism
    returns the exact zero class, Injection{m'} requires m' == m.
    ``calibrated`` rescales coefficients by the pseudo-inverse of the
    generators' own moment matrix so that generated representatives are
    fixed points.  ``rationalize`` rounds coefficients to denominators up to
    that bound before building the exact form.
    """
    spec = spec or QuadratureSpec()
    n, q = f.n, f.degree - 1
    if q < 0:
        raise ValueError("class projection needs a form of degree >= 1")
    mode = _resolve_window(window, n, m)
    if f.coeffs and not cocycle_check(f).closed:
        raise PreconditionError("f is not a cocycle (df != 0)")
    if mode == "zero" or not f.coeffs:
        keys = generator_keys(n, q, m)
        zero_tab = MomentTable(n, q, m, "phi", {k: 0.0 for k in keys}, {k: 0.0 for k in keys})
        return ClassProjection(Form.zero(n, q + 1), Form.zero(n, q), zero_tab,
                               {k: 0.0 for k in keys}, calibrated)
    table = moment_functional(f, m, q, spec)
    coeffs = dict(table.entries)
    if calibrated:
        keys, G = _generator_moment_matrix(n, q, m, spec)
        vec = np.array([table.entries[k] for k in keys])
        sol = np.linalg.pinv(G, rcond=1e-10) @ vec
        coeffs = {key: float(v) for key, v in zip(keys, sol)}
    if rationalize:
        coeffs = {k: Fraction(v).limit_denominator(rationalize) for k, v in coeffs.items()}
    rep_table = MomentTable(n, q, m, "phi", table.raw, coeffs, table.tail_estimate)
    rep = representative_from_moments(rep_table)
    return ClassProjection(d(rep), rep, table, coeffs, calibrated)


def class_projection(f: Form, m: int, spec: QuadratureSpec | None = None, **kw) -> Form:
    """Symbolic closed (q+1)-form d(Phi - Phi_m) f (see :func:`project_class`)."""
    return project_class(f, m, spec, **kw).form


# ---------------------------------------------------------------------------
# consistency of the class map

@dataclass
class ConsistencyReport:
    max_gap: float
    threshold: float
    consistent: bool
    distinct: bool | None = None
    distinct_gap: float | None = None


def class_map_consistency(g: Form, u: Form | None, m: int, spec: QuadratureSpec | None = None, *,
                          other: Form | None = None, factor: float = 20.0) -> ConsistencyReport:
    """Compare projections of g and g + du; optionally check that ``other`` differs."""
    spec = spec or QuadratureSpec()
    pg = project_class(g, m, spec)
    shifted = g if u is None or not u.coeffs else g + d(u)
    ps = pg if shifted is g else project_class(shifted, m, spec)
    gap = max((abs(pg.coefficients[k] - ps.coefficients[k]) for k in pg.coefficients), default=0.0)
    thr = threshold(spec, factor)
    distinct = dgap = None
    if other is not None:
        po = project_class(other, m, spec)
        dgap = max(abs(pg.coefficients[k] - po.coefficients[k]) for k in pg.coefficients)
        distinct = dgap > thr
    return ConsistencyReport(gap, thr, gap <= thr, distinct, dgap)


# ---------------------------------------------------------------------------
# time-parameterized representatives

class TimeClassError(ValueError):
    """Declared time class is inconsistent with the sampled coefficient."""


@dataclass
class AnisoRepresentative:
    base: CohomologyBasis
    times: np.ndarray
    coefficients: dict              # (k, j, I) -> samples over times
    time_class: str
    lam: float
    reports: dict = field(default_factory=dict)

    def slice(self, i: int, *, rationalize: int | None = None) -> Form:
        """Exact form at the i-th time sample."""
        out = Form.zero(self.base.n, self.base.q)
        for key, member in zip(self.base.keys, self.base.members):
            if key not in self.coefficients:
                continue
            a = self.coefficients[key][i]
            c = Fraction(a).limit_denominator(rationalize) if rationalize else Fraction(a)
            if c:
                out = out + member * c
        return out

    def slice_in_span(self, i: int) -> bool:
        return in_span(outer_vectors(self.base.members + [self.slice(i)])[:-1],
                       outer_vectors(self.base.members + [self.slice(i)])[-1])

    def coherent(self) -> bool:
        """Every slice closed and in the isotropic span (exact)."""
        vecs = outer_vectors(self.base.members + [self.slice(i) for i in range(len(self.times))])
        nb = len(self.base.members)
        base = vecs[:nb]
        r0 = exact_rank(base)
        for i in range(len(self.times)):
            if not d(self.slice(i)).is_zero():
                return False
            if exact_rank(base + [vecs[nb + i]]) != r0:
                return False
        return True


def aniso_representative_basis(n: int, q_out: int, m: int, a_samples: Mapping, T: float,
                               time_class: str = "C^{s,0}", *, lam: float = 0.5,
                               times=None, time_level: int = 0) -> AnisoRepresentative:
    """Time-parameterized representatives sum_key a_key(t) * generator_key.

    ``a_samples`` maps generator keys (k, j, I) to callables of t (checked on
    refining grids) or to arrays sampled on ``times``.
    """
    base = representative_basis(n, q_out, m)
    grid_times = make_time_grid(T, time_level).times if times is None else np.asarray(times, float)
    valid = set(base.keys)
    coeffs, reports = {}, {}
    for key, a in a_samples.items():
        key = (key[0], key[1], tuple(key[2]))
        if key not in valid:
            raise KeyError(f"{key} is not a generator key for n={n}, q_out={q_out}, m={m}")
        if callable(a):
            rep = verify_time_class(a, T, time_class, lam)
            samples = np.asarray(a(grid_times), dtype=float)
        else:
            samples = np.asarray(a, dtype=float)
            if samples.shape != grid_times.shape:
                raise ValueError("sampled coefficients must match the time grid")
            rep = _check_samples(samples, grid_times, time_class, lam)
        reports[key] = rep
        if not rep.accepted:
            raise TimeClassError(f"coefficient {key} rejected as {time_class}: {rep.reason}")
        coeffs[key] = samples
    return AnisoRepresentative(base, grid_times, coeffs, time_class, lam, reports)


def _check_samples(samples, times, time_class, lam) -> TimeClassReport:
    from .spaces import time_holder_quotient
    if time_class == "C^{s,0}":
        ok = bool(np.all(np.isfinite(samples)))
        return TimeClassReport(time_class, ok, [], [], 0.0, float("inf"),
                               "" if ok else "non-finite samples")
    q = time_holder_quotient(samples, times, lam / 2)
    ok = q <= 10.0
    return TimeClassReport(time_class, ok, [q], [float(times[1] - times[0])], 0.0, 10.0,
                           "" if ok else f"quotient {q:.3g} exceeds budget")
