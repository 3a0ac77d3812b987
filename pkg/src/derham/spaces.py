"""Weight windows and grid estimators for weighted Hölder norms.

Norm estimators are suprema over finite grids, hence lower bounds of the
true norms.  Grids at successive refinement levels are nested, so every
estimate is nondecreasing under refinement.  Pointwise sizes of forms are
the maximum absolute coefficient.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Callable, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .exterior import Form
from .fields import Field, fd_partial
from .quadrature import sphere_rule

__all__ = [
    "WeightWindow", "classify_delta", "weight", "SampleGrid", "make_grid", "NormEstimate",
    "weighted_sup_norm", "holder_seminorm", "isotropic_norm", "TimeGrid", "make_time_grid",
    "TimeSampledForm", "aniso_norm", "gamma_norm", "time_holder_quotient",
    "TimeClassReport", "verify_time_class", "InsufficientSampling", "SmoothnessBudgetError",
]

_INT_TOL = 1e-9


class InsufficientSampling(ValueError):
    """Too few time samples for a time-Hölder quotient."""


class SmoothnessBudgetError(ValueError):
    """Requested derivative order exceeds the coefficient smoothness budget."""


# ---------------------------------------------------------------------------
# weight windows

@dataclass(frozen=True)
class WeightWindow:
    n: int
    delta: float
    kind: str            # NonPositive | Isomorphism | BoundaryExcluded | Injection
    m: int | None = None

    def __str__(self):
        return f"Injection{{m={self.m}}}" if self.kind == "Injection" else self.kind

    @property
    def admissible(self) -> bool:
        return self.kind in ("Isomorphism", "Injection")


def classify_delta(n: int, delta: float) -> WeightWindow:
    """Place delta in the isomorphism / injection windows for dimension n."""
    if n < 2:
        raise ValueError("n must be at least 2")
    if isinstance(delta, Fraction):
        shift = delta + 1 - n
        on_boundary = shift.denominator == 1 and shift >= 0
    else:
        delta = float(delta)
        shift = delta + 1 - n
        on_boundary = shift > -_INT_TOL and abs(shift - round(shift)) < _INT_TOL
    if delta <= 0:
        return WeightWindow(n, delta, "NonPositive")
    if on_boundary:
        return WeightWindow(n, delta, "BoundaryExcluded")
    if shift < 0:
        return WeightWindow(n, delta, "Isomorphism")
    return WeightWindow(n, delta, "Injection", int(math.floor(shift)))


def weight(x) -> np.ndarray:
    """w(x) = sqrt(1 + |x|^2)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    return np.sqrt(1.0 + np.einsum("ij,ij->i", x, x))


# ---------------------------------------------------------------------------
# spatial grids

@lru_cache(maxsize=None)
def _stencil(n: int) -> np.ndarray:
    vecs = np.array([v for v in product((-1, 0, 1), repeat=n) if any(v)], dtype=float)
    return vecs / np.linalg.norm(vecs, axis=1, keepdims=True)


@dataclass(frozen=True)
class SampleGrid:
    """Sample points: dyadic shells plus a lattice in the unit ball U."""
    n: int
    points: np.ndarray = field(repr=False)
    level: int = 0
    R_grid: float = 64.0
    extra: int = 0

    @property
    def outside_U(self) -> np.ndarray:
        return np.linalg.norm(self.points, axis=1) >= 1.0

    def with_points(self, pts) -> "SampleGrid":
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return SampleGrid(self.n, np.vstack([self.points, pts]), self.level, self.R_grid,
                          self.extra + len(pts))

    def describe(self) -> dict:
        return {"n": self.n, "level": self.level, "R_grid": self.R_grid,
                "points": int(len(self.points)), "extra_points": self.extra}


def make_grid(n: int, level: int = 0, R_grid: float = 64.0) -> SampleGrid:
    """Nested grid: level L+1 contains every point of level L.

    Radii are 2^(j / 2^(L+2)) from 1 to R_grid; directions are the
    (3^n - 1)-point stencil plus sphere-rule directions added per level;
    U carries a cubic lattice with spacing halving per level.
    """
    if level < 0:
        raise ValueError("level must be non-negative")
    per_octave = 2 ** (level + 2)
    top = int(math.floor(math.log2(R_grid) * per_octave + 1e-9))
    radii = 2.0 ** (np.arange(0, top + 1) / per_octave)
    dirs = [_stencil(n)]
    for lv in range(level + 1):
        dirs.append(sphere_rule(n, lv + 2)[0])
    dirs = np.unique(np.round(np.vstack(dirs), 15), axis=0)
    shells = (radii[:, None, None] * dirs[None, :, :]).reshape(-1, n)
    h = 0.5 ** (level + (2 if n <= 3 else 1))
    ticks = np.arange(-1.0, 1.0 + h / 2, h)
    lattice = np.stack(np.meshgrid(*([ticks] * n), indexing="ij"), -1).reshape(-1, n)
    lattice = lattice[np.linalg.norm(lattice, axis=1) < 1.0]
    return SampleGrid(n, np.vstack([lattice, shells]), level, R_grid)


# ---------------------------------------------------------------------------
# isotropic estimators

@dataclass
class NormEstimate:
    value: float
    components: dict
    grid: dict

    def __float__(self):
        return float(self.value)


def _multi_derivs(n: int, order: int):
    """Multi-indices alpha with |alpha| == order, as axis tuples (sorted)."""
    from itertools import combinations_with_replacement
    return list(combinations_with_replacement(range(n), order))


def _derivative(form: Form, axes: tuple, step: float) -> Form:
    out = form
    for ax in axes:
        def diff(c, ax=ax):
            if isinstance(c, Field):
                return c.partial(ax)
            if c.smoothness is not None and c.smoothness < 1:
                raise SmoothnessBudgetError("derivative order exceeds the smoothness budget")
            return fd_partial(c, ax, step)
        out = out.map_coeffs(diff)
    return out


def _pointwise(form: Form, X: np.ndarray) -> np.ndarray:
    if not form.coeffs:
        return np.zeros(len(X))
    return np.max(np.abs(form.evaluate_dense(X)), axis=1)


def weighted_sup_norm(u: Form, s: int, delta: float, grid: SampleGrid, *,
                      step: float = 1e-3) -> NormEstimate:
    """sum_{|alpha| <= s} max_grid w^(delta+|alpha|) |d^alpha u|."""
    X = grid.points
    w = weight(X)
    comps = {}
    for order in range(s + 1):
        for axes in _multi_derivs(u.n, order):
            vals = _pointwise(_derivative(u, axes, step), X)
            comps[f"sup{list(axes)}"] = float(np.max(w ** (delta + order) * vals))
    return NormEstimate(sum(comps.values()), comps, grid.describe())


def _admissible_pairs(grid: SampleGrid):
    """Index pairs (i, j), i < j, outside U with |x_i - x_j| <= max(|x_i|, |x_j|)/2."""
    X = grid.points
    keep = np.flatnonzero(grid.outside_U)
    Y = X[keep]
    r = np.linalg.norm(Y, axis=1)
    tree = cKDTree(Y)
    lists = tree.query_ball_point(Y, r / 2 + 1e-12)
    ii, jj = [], []
    for a, nb in enumerate(lists):
        nb = np.asarray(nb, dtype=int)
        nb = nb[nb != a]
        ii.append(np.full(len(nb), a))
        jj.append(nb)
    if not ii:
        return np.zeros(0, int), np.zeros(0, int)
    ii = np.concatenate(ii)
    jj = np.concatenate(jj)
    lo, hi = np.minimum(ii, jj), np.maximum(ii, jj)
    pairs = np.unique(np.stack([lo, hi], 1), axis=0)
    return keep[pairs[:, 0]], keep[pairs[:, 1]]


_PAIR_CACHE: dict = {}


def _pairs_for(grid: SampleGrid):
    key = (grid.n, grid.points.shape, grid.points.tobytes().__hash__())
    if key not in _PAIR_CACHE:
        if len(_PAIR_CACHE) > 16:
            _PAIR_CACHE.clear()
        _PAIR_CACHE[key] = _admissible_pairs(grid)
    return _PAIR_CACHE[key]


def _holder_from_values(vals: np.ndarray, X: np.ndarray, lam: float, delta: float,
                        pairs) -> float:
    """vals: (P, C) coefficient values; max weighted quotient over pairs."""
    i, j = pairs
    if len(i) == 0:
        return 0.0
    wx = weight(X)
    diff = np.max(np.abs(vals[i] - vals[j]), axis=1)
    dist = np.linalg.norm(X[i] - X[j], axis=1)
    wxy = np.maximum(wx[i], wx[j])
    return float(np.max(wxy ** (delta + lam) * diff / dist ** lam))


def holder_seminorm(u: Form, lam: float, delta: float, grid: SampleGrid) -> NormEstimate:
    """Weighted Hölder seminorm estimate over admissible grid pairs."""
    if not 0 < lam <= 1:
        raise ValueError("Hölder exponent must lie in (0, 1]")
    vals = u.evaluate_dense(grid.points) if u.coeffs else np.zeros((len(grid.points), 1))
    value = _holder_from_values(vals, grid.points, lam, delta, _pairs_for(grid))
    return NormEstimate(value, {"holder": value}, grid.describe())


def isotropic_norm(u: Form, s: int, lam: float, delta: float, grid: SampleGrid, *,
                   step: float = 1e-3) -> NormEstimate:
    """C^{s,lam}_delta estimate: weighted sup part plus Hölder part of top derivatives."""
    sup = weighted_sup_norm(u, s, delta, grid, step=step)
    comps = dict(sup.components)
    for axes in _multi_derivs(u.n, s):
        h = holder_seminorm(_derivative(u, axes, step), lam, delta + s, grid)
        comps[f"holder{list(axes)}"] = h.value
    return NormEstimate(sum(comps.values()), comps, grid.describe())


# ---------------------------------------------------------------------------
# anisotropic estimators

@dataclass(frozen=True)
class TimeGrid:
    times: np.ndarray
    T: float

    def describe(self) -> dict:
        return {"T": self.T, "samples": int(len(self.times))}


def make_time_grid(T: float, level: int = 0, base: int = 8) -> TimeGrid:
    """Uniform nested time grid on [0, T] with base * 2^level intervals."""
    if T <= 0:
        raise ValueError("T must be positive")
    count = base * 2 ** level
    return TimeGrid(np.linspace(0.0, T, count + 1), float(T))


@dataclass
class TimeSampledForm:
    """A form depending on a time parameter, known on a time grid.

    ``slices[i]`` is the form at ``times[i]``.  Time derivatives are taken by
    second-order finite differences on the grid unless ``dt`` supplies them
    exactly (``dt(j)`` returns the j-th time derivative as a TimeSampledForm).
    """
    times: np.ndarray
    slices: list
    dt: Callable | None = None

    @classmethod
    def from_function(cls, fn: Callable[[float], Form], times, dt_fns: Sequence | None = None):
        times = np.asarray(times, dtype=float)
        slices = [fn(float(t)) for t in times]
        dt = None
        if dt_fns:
            def dt(j, fns=tuple(dt_fns)):
                return cls.from_function(fns[j - 1], times, fns[j:])
        return cls(times, slices, dt)

    @property
    def n(self) -> int:
        return self.slices[0].n

    @property
    def degree(self) -> int:
        return self.slices[0].degree

    def map(self, fn: Callable[[Form], Form]) -> "TimeSampledForm":
        return TimeSampledForm(self.times, [fn(s) for s in self.slices])

    def time_derivative(self, j: int = 1) -> "TimeSampledForm":
        if j == 0:
            return self
        if self.dt is not None:
            return self.dt(j)
        out = self
        for _ in range(j):
            t = out.times
            sl = out.slices
            new = []
            for i in range(len(t)):
                a, b = max(i - 1, 0), min(i + 1, len(t) - 1)
                new.append((sl[b] - sl[a]) * (1.0 / (t[b] - t[a])))
            out = TimeSampledForm(t, new)
        return out


def _slice_values(u: TimeSampledForm, X: np.ndarray) -> np.ndarray:
    """(times, points, components) coefficient values."""
    return np.stack([s.evaluate_dense(X) if s.coeffs else np.zeros((len(X), 1))
                     for s in u.slices])


def time_holder_quotient(values: np.ndarray, times: np.ndarray, mu: float) -> float:
    """max_{t != tau} |v(t) - v(tau)| / |t - tau|^mu; values shaped (times, ...)."""
    if len(times) < 8:
        raise InsufficientSampling("time-Hölder quotients need at least 8 time samples")
    v = values.reshape(len(times), -1)
    best = 0.0
    for i in range(len(times)):
        dt = np.abs(times[i + 1:] - times[i])
        if len(dt) == 0:
            continue
        diff = np.max(np.abs(v[i + 1:] - v[i]), axis=1)
        best = max(best, float(np.max(diff / dt ** mu)))
    return best


def _c00_lam_mu(u: TimeSampledForm, lam: float, mu: float, delta: float,
                grid: SampleGrid) -> dict:
    X = grid.points
    vals = _slice_values(u, X)
    wd = weight(X) ** delta
    sup = float(np.max(wd[None, :] * np.max(np.abs(vals), axis=2)))
    pairs = _pairs_for(grid)
    holder = max(_holder_from_values(vals[i], X, lam, delta, pairs) for i in range(len(u.times)))
    out = {"sup": sup, "holder": holder}
    if mu > 0:
        out["time"] = time_holder_quotient(vals * wd[None, :, None], u.times, mu)
    return out


def aniso_norm(u: TimeSampledForm, s: int, k: int, lam: float, mu: float, delta: float,
               grid: SampleGrid, *, step: float = 1e-3) -> NormEstimate:
    """Estimate of the C^{2s+k,s,lam,mu}_{delta,T} norm on the given grids.

    sum_{|beta|<=k} sum_{|alpha|+2j<=2s} ||dt^j dx^alpha dx^beta u|| in
    C^{0,0,lam,mu} with weight delta + |beta| + |alpha|.
    """
    if len(u.times) < 8:
        raise InsufficientSampling("anisotropic norms need at least 8 time samples")
    if not 0 < lam <= 1 or not 0 <= mu <= 1:
        raise ValueError("need 0 < lambda <= 1 and 0 <= mu <= 1")
    comps = {}
    n = u.n
    for bo in range(k + 1):
        for beta in _multi_derivs(n, bo):
            ub = u.map(lambda f, beta=beta: _derivative(f, beta, step))
            for j in range(s + 1):
                uj = ub.time_derivative(j)
                for ao in range(2 * s - 2 * j + 1):
                    for alpha in _multi_derivs(n, ao):
                        ua = uj.map(lambda f, alpha=alpha: _derivative(f, alpha, step))
                        parts = _c00_lam_mu(ua, lam, mu, delta + bo + ao, grid)
                        tag = f"b{list(beta)}t{j}a{list(alpha)}"
                        for name, v in parts.items():
                            comps[f"{name}[{tag}]"] = v
    total = sum(comps.values())
    return NormEstimate(total, comps, {**grid.describe(), "time_samples": int(len(u.times))})


def gamma_norm(u: TimeSampledForm, du: TimeSampledForm, dsu: TimeSampledForm, s: int, k: int,
               lam: float, mu: float, delta: float, grid: SampleGrid, *,
               step: float = 1e-3) -> NormEstimate:
    """||u|| + ||du|| + ||d*u|| with weights delta, delta+1, delta+1."""
    parts = {
        "u": aniso_norm(u, s, k, lam, mu, delta, grid, step=step).value,
        "du": aniso_norm(du, s, k, lam, mu, delta + 1, grid, step=step).value,
        "codiff_u": aniso_norm(dsu, s, k, lam, mu, delta + 1, grid, step=step).value,
    }
    return NormEstimate(parts["u"] + parts["du"] + parts["codiff_u"], parts, grid.describe())


# ---------------------------------------------------------------------------
# time-class verification

@dataclass
class TimeClassReport:
    time_class: str
    accepted: bool
    quotients: list
    spacings: list
    slope: float
    budget: float
    reason: str = ""


def verify_time_class(a: Callable, T: float, time_class: str, lam: float, *,
                      levels: int = 5, budget: float = 10.0, slope_floor: float = -0.02,
                      base: int = 8) -> TimeClassReport:
    """Check a sampled time coefficient against C^{s,0} or C^{s,lam/2} on [0,T].

    For the Hölder class, the quotient |a(t)-a(tau)|/|t-tau|^(lam/2) is
    computed on refining uniform grids; a fitted log-log slope against the
    grid spacing below ``slope_floor`` (growth as the spacing shrinks) or a
    value above ``budget`` rejects the declared class.
    """
    if time_class not in ("C^{s,0}", "C^{s,lam/2}"):
        raise ValueError(f"unknown time class {time_class!r}")
    grids = [make_time_grid(T, lv, base) for lv in range(levels)]
    spacings = [float(g.times[1] - g.times[0]) for g in grids]
    if time_class == "C^{s,0}":
        vals = [np.asarray(a(g.times), dtype=float) for g in grids]
        finite = all(np.all(np.isfinite(v)) for v in vals)
        jumps = [float(np.max(np.abs(np.diff(v)))) for v in vals]
        ok = finite and jumps[-1] <= jumps[0] * 1.5 + 1e-12
        return TimeClassReport(time_class, ok, jumps, spacings, 0.0, budget,
                               "" if ok else "samples are not continuous under refinement")
    mu = lam / 2
    quots = [time_holder_quotient(np.asarray(a(g.times), dtype=float), g.times, mu) for g in grids]
    slope = float(np.polyfit(np.log(spacings), np.log(np.maximum(quots, 1e-300)), 1)[0])
    reason = ""
    if slope < slope_floor:
        reason = f"quotient grows as spacing shrinks (slope {slope:.3f})"
    elif max(quots) > budget:
        reason = f"quotient {max(quots):.3g} exceeds budget {budget}"
    return TimeClassReport(time_class, not reason, quots, spacings, slope, budget, reason)
