"""Potential operators, the moment functional and the Hodge decomposition.

Orientation: with the kernels taken literally, ``int f(y) ^ phi_q(x, y)``
equals ``(-1)^q`` times ``-E d* f`` (``E`` = componentwise convolution with
the fundamental solution), and the hat kernel gives ``(-1)^(q+1)`` times
``-E d g``.  The potentials below include that orientation factor, so
``d Phi f = f`` for closed ``f``, ``d* Phi_hat g = g`` for co-closed ``g`` and
``u = d Phi u + d* Phi_hat u``.  The truncated potentials carry the same
factor.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .exterior import (Form, QuadratureSpec, basis_form, codifferential, complement, d,
                       fd_codifferential, fd_d, multi_indices, perm_sign)
from .fields import Field, SampledField
from .harmonics import harmonic_basis
from .kernels import _cached_phi, _kernel_scale, correction_y_forms
from .quadrature import QuadratureError, integrate_about_point, integrate_ball, sphere_rule

__all__ = [
    "DecayError", "PreconditionError", "PotentialResult", "MomentTable", "potential",
    "potential_form", "lemma_check", "LemmaReport", "solve_system", "system_residuals",
    "hodge_decompose", "HodgeDecomposition", "moment_functional",
    "representative_from_moments", "check_decay", "grid_norm", "default_residual_grid",
    "orientation_sign", "correction_values", "moment_keys", "decay_profile",
]


class DecayError(ValueError):
    """Input decays too slowly for the declared weight."""


class PreconditionError(ValueError):
    """Closedness or co-closedness precondition failed."""


def orientation_sign(variant: str, q: int) -> int:
    return (-1) ** q if variant == "phi" else (-1) ** (q + 1)


def parse_kernel_choice(choice) -> tuple[str, int | None]:
    """'phi', 'phi_hat', ('phi_m', m) or ('phi_hat_m', m) -> (variant, m)."""
    if isinstance(choice, str):
        if choice in ("phi", "phi_hat"):
            return choice, None
        for prefix, var in (("phi_hat_m", "phi_hat"), ("phi_m", "phi")):
            if choice.startswith(prefix):
                tail = choice[len(prefix):].lstrip(":=")
                if tail.isdigit():
                    return var, int(tail)
        raise ValueError(f"unknown kernel choice {choice!r}")
    name, m = choice
    if name == "phi_m":
        return "phi", int(m)
    if name == "phi_hat_m":
        return "phi_hat", int(m)
    raise ValueError(f"unknown kernel choice {choice!r}")


def _output_degree(f: Form, variant: str) -> int:
    q = f.degree - 1 if variant == "phi" else f.degree + 1
    if not 0 <= q <= f.n:
        raise ValueError(f"{variant} potential of a {f.degree}-form is not defined")
    return q


# ---------------------------------------------------------------------------
# decay

def _weight(r):
    return np.sqrt(1.0 + np.asarray(r, dtype=float) ** 2)


def check_decay(f: Form, delta: float, R: float = 12.0, slack: float = 0.25) -> float:
    """Fit the decay exponent of max|f| on shells R/4, R/2, R.

    Returns the fitted exponent (inf when f vanishes on the outer shells) and
    raises :class:`DecayError` when it is below ``delta + 1 - slack``.
    """
    if not f.coeffs:
        return float("inf")
    dirs, _ = sphere_rule(f.n, 6)
    radii = np.array([R / 4, R / 2, R])
    peaks = []
    for r in radii:
        vals = f.evaluate_dense(r * dirs)
        peaks.append(float(np.max(np.abs(vals))))
    peaks = np.array(peaks)
    if peaks[-1] == 0.0 or np.all(peaks[1:] < 1e-300):
        return float("inf")
    keep = peaks > 1e-300
    if keep.sum() < 2:
        return float("inf")
    slope = np.polyfit(np.log(_weight(radii[keep])), np.log(peaks[keep]), 1)[0]
    exponent = -float(slope)
    if exponent < delta + 1 - slack:
        raise DecayError(
            f"fitted decay exponent {exponent:.3f} is below the declared {delta + 1:.3f} "
            f"(slack {slack})")
    return exponent


def decay_profile(f: Form, R: float = 12.0, shells: int = 8) -> list:
    """(log r, log max|f|) pairs on dyadic shells, for plotting the decay fit."""
    dirs, _ = sphere_rule(f.n, 6)
    out = []
    for r in R * 2.0 ** -np.arange(shells)[::-1]:
        peak = float(np.max(np.abs(f.evaluate_dense(r * dirs)))) if f.coeffs else 0.0
        out.append((float(np.log(r)), float(np.log(peak)) if peak > 0 else float("-inf")))
    return out


# ---------------------------------------------------------------------------
# potentials

@dataclass
class PotentialResult:
    values: np.ndarray          # (points, C(n,q)) in lexicographic index order
    indices: tuple
    points: np.ndarray
    tail_estimate: float
    singular_patch_estimate: float
    spec: QuadratureSpec
    degree: int

    def component(self, idx) -> np.ndarray:
        return self.values[:, self.indices.index(tuple(idx))]

    def as_dict(self) -> dict:
        return {I: self.values[:, j] for j, I in enumerate(self.indices)}


def _contraction_terms(f: Form, sing: dict, out_indices: tuple):
    """(output column, f index, sign, kernel field) for sum_J sgn(K,J) f_K k_IJ."""
    n = f.n
    terms = []
    for col, I in enumerate(out_indices):
        yf = sing.get(I)
        if yf is None:
            continue
        for J, kf in yf.coeffs.items():
            K = complement(n, J)
            if K not in f.coeffs:
                continue
            terms.append((col, K, perm_sign(K + J), kf))
    return terms


def _singular_potential(f: Form, variant: str, X: np.ndarray, spec: QuadratureSpec):
    n = f.n
    q = _output_degree(f, variant)
    idxs = multi_indices(n, q)
    ker = _cached_phi(n, q, variant)
    terms = _contraction_terms(f, ker.singular, idxs)
    fks = sorted({t[1] for t in terms})
    factor = orientation_sign(variant, q) * ker.scale
    vals = np.zeros((len(X), len(idxs)))
    tail = patch = 0.0
    if not terms:
        return vals, tail, patch

    def integrand(Y, Z):
        fv = {K: f.coeffs[K].evaluate(Y) for K in fks}
        kv: dict = {}
        out = np.zeros((len(Y), len(idxs)))
        for col, K, s, kf in terms:
            key = id(kf)
            if key not in kv:
                kv[key] = kf.evaluate(Z)
            out[:, col] += s * fv[K] * kv[key]
        return out

    for p, x in enumerate(X):
        res = integrate_about_point(integrand, x, spec)
        vals[p] = factor * np.ravel(res.value)
        tail = max(tail, abs(factor) * res.tail_estimate)
        patch = max(patch, abs(factor) * res.singular_patch_estimate)
    return vals, tail, patch


def potential(f: Form, kernel_choice, x_points, spec: QuadratureSpec | None = None, *,
              delta: float | None = None, table: "MomentTable | None" = None) -> PotentialResult:
    """Quadrature value of the potential of ``f`` at ``x_points``.

    ``kernel_choice`` is 'phi', 'phi_hat', ('phi_m', m) or ('phi_hat_m', m).
    When ``delta`` is given the decay of ``f`` is verified first.
    """
    spec = spec or QuadratureSpec()
    variant, m = parse_kernel_choice(kernel_choice)
    n = f.n
    q = _output_degree(f, variant)
    X = np.atleast_2d(np.asarray(x_points, dtype=float))
    if X.shape[1] != n:
        raise ValueError("evaluation points have the wrong dimension")
    idxs = multi_indices(n, q)
    if not f.coeffs:
        return PotentialResult(np.zeros((len(X), len(idxs))), idxs, X, 0.0, 0.0, spec, q)
    if delta is not None:
        check_decay(f, delta, spec.R)
    vals, tail, patch = _singular_potential(f, variant, X, spec)
    if tail > spec.tol:
        raise QuadratureError(f"tail estimate {tail:.3e} exceeds tolerance {spec.tol:.1e}")
    if m is not None:
        table = table or moment_functional(f, m, q, spec, variant=variant)
        corr = correction_values(table, X)
        vals = vals + orientation_sign(variant, q) * corr
        tail += table.tail_estimate
    return PotentialResult(vals, idxs, X, tail, patch, spec, q)


def _point_key(x) -> bytes:
    return np.ascontiguousarray(x, dtype=float).tobytes()


def potential_form(f: Form, kernel_choice, spec: QuadratureSpec | None = None, *,
                   delta: float | None = None) -> Form:
    """The potential as a form with sampled coefficients.

    All components at a point are computed together and cached by point, so
    finite-difference stencils reuse work.
    """
    spec = spec or QuadratureSpec()
    variant, m = parse_kernel_choice(kernel_choice)
    q = _output_degree(f, variant)
    n = f.n
    idxs = multi_indices(n, q)
    if not f.coeffs:
        return Form.zero(n, q)
    if delta is not None:
        check_decay(f, delta, spec.R)
    table = moment_functional(f, m, q, spec, variant=variant) if m is not None else None
    cache: dict = {}

    def values(X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        missing = [x for x in X if _point_key(x) not in cache]
        if missing:
            res = potential(f, kernel_choice, np.array(missing), spec, table=table)
            for x, row in zip(missing, res.values):
                cache[_point_key(x)] = row
        return np.array([cache[_point_key(x)] for x in X])

    coeffs = {}
    for j, I in enumerate(idxs):
        coeffs[I] = SampledField(n, lambda X, j=j: values(X)[:, j],
                                 label=f"{kernel_choice}[{','.join(map(str, I))}]")
    return Form(n, q, coeffs)


# ---------------------------------------------------------------------------
# grids and residuals

def default_residual_grid(n: int) -> np.ndarray:
    """Fixed sample points inside |x| <= 2 used for residual norms."""
    rng = np.random.default_rng(20240601 + n)
    pts = [np.zeros(n), np.eye(n)[0] * 0.75]
    raw = rng.normal(size=(4, n))
    radii = np.array([0.4, 0.9, 1.3, 1.8])
    pts.extend(raw / np.linalg.norm(raw, axis=1, keepdims=True) * radii[:, None])
    return np.array(pts)


def grid_norm(form: Form, grid) -> float:
    """max over grid points and components of |coefficient|."""
    if not form.coeffs:
        return 0.0
    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    return float(max(np.max(np.abs(c.evaluate(grid))) for c in form.coeffs.values()))


def _is_closed(f: Form, op) -> bool:
    if f.is_symbolic():
        return op(f).is_zero()
    raise PreconditionError("closedness of sampled forms must be established by the caller")


@dataclass
class LemmaReport:
    d_phi_f_minus_f: float
    codiff_phi_f: float
    codiff_phihat_g_minus_g: float
    d_phihat_g: float
    budget: float
    step: float
    grid: np.ndarray = field(repr=False)

    @property
    def residuals(self) -> dict:
        return {"d_phi_f_minus_f": self.d_phi_f_minus_f, "codiff_phi_f": self.codiff_phi_f,
                "codiff_phihat_g_minus_g": self.codiff_phihat_g_minus_g,
                "d_phihat_g": self.d_phihat_g}

    @property
    def passed(self) -> bool:
        return all(v <= self.budget for v in self.residuals.values())


def lemma_check(f: Form | None, g: Form | None, spec: QuadratureSpec | None = None, *,
                grid=None, step: float = 2e-3, delta: float = 1.0,
                budget_factor: float = 20.0) -> LemmaReport:
    """Residuals of the four potential identities on a sample grid.

    ``f`` must be closed (its potential is d-exact), ``g`` co-closed; either
    may be None.
    """
    spec = spec or QuadratureSpec()
    ref = f if f is not None else g
    if ref is None:
        raise ValueError("need at least one of f, g")
    n = ref.n
    grid = default_residual_grid(n) if grid is None else np.atleast_2d(grid)
    r1 = r2 = r3 = r4 = 0.0
    if f is not None and f.coeffs:
        if not _is_closed(f, d):
            raise PreconditionError("f is not a cocycle (df != 0)")
        check_decay(f, delta, spec.R)
        pf = potential_form(f, "phi", spec)
        r1 = grid_norm(fd_d(pf, step) - f, grid)
        r2 = grid_norm(fd_codifferential(pf, step), grid)
    if g is not None and g.coeffs:
        if not _is_closed(g, codifferential):
            raise PreconditionError("g is not a cocycle for d* (d*g != 0)")
        check_decay(g, delta, spec.R)
        pg = potential_form(g, "phi_hat", spec)
        r3 = grid_norm(fd_codifferential(pg, step) - g, grid)
        r4 = grid_norm(fd_d(pg, step), grid)
    return LemmaReport(r1, r2, r3, r4, budget_factor * spec.tol, step, grid)


def solve_system(f: Form | None, g: Form | None, spec: QuadratureSpec | None = None, *,
                 delta: float | None = None) -> Form:
    """u = Phi f + Phi_hat g, solving du = f, d*u = g for closed f, co-closed g."""
    spec = spec or QuadratureSpec()
    ref = f if f is not None else g
    if ref is None:
        raise ValueError("need at least one of f, g")
    n = ref.n
    q = f.degree - 1 if f is not None else g.degree + 1
    if f is not None and g is not None and g.degree != q - 1:
        raise ValueError("f must have degree q+1 and g degree q-1")
    u = Form.zero(n, q)
    if f is not None and f.coeffs:
        if not _is_closed(f, d):
            raise PreconditionError("f is not a cocycle (df != 0)")
        u = u + potential_form(f, "phi", spec, delta=delta)
    if g is not None and g.coeffs:
        if not _is_closed(g, codifferential):
            raise PreconditionError("g is not a cocycle for d* (d*g != 0)")
        u = u + potential_form(g, "phi_hat", spec, delta=delta)
    return u


def system_residuals(u: Form, f: Form | None, g: Form | None, grid=None,
                     step: float = 2e-3) -> dict:
    n = u.n
    grid = default_residual_grid(n) if grid is None else np.atleast_2d(grid)
    f = f if f is not None else Form.zero(n, u.degree + 1)
    g = g if g is not None else Form.zero(n, u.degree - 1)
    du = fd_d(u, step) if u.coeffs else Form.zero(n, u.degree + 1)
    su = fd_codifferential(u, step) if u.coeffs else Form.zero(n, u.degree - 1)
    return {"du_minus_f": grid_norm(du - f, grid), "codiff_u_minus_g": grid_norm(su - g, grid)}


@dataclass
class HodgeDecomposition:
    exact_part: Form      # d Phi u
    coexact_part: Form    # d* Phi_hat u
    residual: float       # grid norm of u - exact - coexact
    codiff_coexact: float
    d_coexact_minus_du: float
    grid: np.ndarray = field(repr=False)


def hodge_decompose(u: Form, spec: QuadratureSpec | None = None, *, delta: float | None = None,
                    grid=None, step: float = 2e-3) -> HodgeDecomposition:
    """u = d* Phi_hat u + d Phi u, with the co-exact part solving dv = du, d*v = 0.

    Requires decay with weight exponent delta > n/2; the default declares
    delta = n/2 + 1/2.
    """
    spec = spec or QuadratureSpec()
    n, q = u.n, u.degree
    delta = n / 2 + 0.5 if delta is None else delta
    if not delta > n / 2:
        raise DecayError(
            f"decomposition needs delta > n/2 = {n / 2}; delta = {delta} lies outside that window")
    grid = default_residual_grid(n) if grid is None else np.atleast_2d(grid)
    if not u.coeffs:
        z = Form.zero(n, q)
        return HodgeDecomposition(z, z, 0.0, 0.0, 0.0, grid)
    check_decay(u, delta, spec.R)
    exact = fd_d(potential_form(u, "phi", spec), step) if q >= 1 else Form.zero(n, q)
    coexact = (fd_codifferential(potential_form(u, "phi_hat", spec), step)
               if q <= n - 1 else Form.zero(n, q))
    residual = grid_norm(u - exact - coexact, grid)
    cod = grid_norm(fd_codifferential(coexact, step), grid) if q >= 1 and coexact.coeffs else 0.0
    if q <= n - 1 and u.is_symbolic():
        dv = fd_d(coexact, step) if coexact.coeffs else Form.zero(n, q + 1)
        dgap = grid_norm(dv - d(u), grid)
    else:
        dgap = 0.0
    return HodgeDecomposition(exact, coexact, residual, cod, dgap, grid)


# ---------------------------------------------------------------------------
# moments

@dataclass
class MomentTable:
    """Moments of f against D_y(p(y) *dy_I) for harmonic p of degree k <= m+1.

    ``raw[(k, j, I)]`` is the integral with the integer polynomial ``p``;
    ``entries`` holds the coefficients ``raw / (N sigma_n)`` that multiply
    ``p(x) dx_I / ((n+2k-2) theta^(n+2k-2))`` in the representative.
    """
    n: int
    q: int
    m: int
    variant: str
    raw: dict
    entries: dict
    tail_estimate: float = 0.0

    def max_abs(self) -> float:
        return max((abs(v) for v in self.entries.values()), default=0.0)

    def vector(self) -> np.ndarray:
        return np.array([self.entries[k] for k in sorted(self.entries)])


def moment_keys(n: int, q: int, m: int) -> list:
    return [(k, h.j, I) for k in range(1, m + 2) for h in harmonic_basis(n, k)
            for I in multi_indices(n, q)]


@lru_cache(maxsize=None)
def _moment_forms(n: int, q: int, m: int, variant: str) -> tuple:
    out = []
    for k in range(1, m + 2):
        for h, I, yf in correction_y_forms(n, q, k, variant):
            out.append(((k, h.j, I), h, yf))
    return tuple(out)


def moment_functional(f: Form, m: int, q: int, spec: QuadratureSpec | None = None, *,
                      variant: str = "phi", strict: bool = True) -> MomentTable:
    """Table of ``int f(y) ^ D_y(p(y) *dy_I)`` over harmonic p, 1 <= k <= m+1."""
    spec = spec or QuadratureSpec()
    n = f.n
    if m < 0:
        raise ValueError("m must be non-negative")
    expected = q + 1 if variant == "phi" else q - 1
    if f.degree != expected:
        raise ValueError(f"{variant} moments of degree q={q} need a {expected}-form")
    specs = _moment_forms(n, q, m, variant)
    keys = [s[0] for s in specs]
    if not f.coeffs:
        zero = {k: 0.0 for k in keys}
        return MomentTable(n, q, m, variant, dict(zero), zero, 0.0)
    plan = []
    for col, (key, h, yf) in enumerate(specs):
        for J, c in yf.coeffs.items():
            K = complement(n, J)
            if K in f.coeffs:
                plan.append((col, K, perm_sign(K + J), c))
    fks = sorted({p[1] for p in plan})

    def integrand(Y):
        fv = {K: f.coeffs[K].evaluate(Y) for K in fks}
        out = np.zeros((len(Y), len(specs)))
        for col, K, s, c in plan:
            out[:, col] += s * fv[K] * c.evaluate(Y)
        return out

    res = integrate_ball(integrand, n, spec)
    if strict and res.tail_estimate > spec.tol:
        raise QuadratureError(f"moment tail estimate {res.tail_estimate:.3e} exceeds {spec.tol:.1e}")
    vals = np.atleast_1d(res.value)
    scale = _kernel_scale(n)
    raw = {key: float(vals[i]) for i, (key, _, _) in enumerate(specs)}
    entries = {key: raw[key] * scale / float(h.norm_sq) for key, h, _ in specs}
    return MomentTable(n, q, m, variant, raw, entries, res.tail_estimate)


def representative_from_moments(table: MomentTable, n: int | None = None, q: int | None = None,
                                *, limit_denominator: int | None = None) -> Form:
    """sum c_(k,j,I) p(x) dx_I / ((n+2k-2) theta^(n+2k-2)) as an exact form.

    Float table entries are converted exactly (or rounded to denominators up
    to ``limit_denominator``).
    """
    from fractions import Fraction
    n = table.n if n is None else n
    q = table.q if q is None else q
    acc: dict = {}
    for (k, j, I), c in sorted(table.entries.items()):
        c = Fraction(c) if not isinstance(c, Fraction) else c
        if limit_denominator:
            c = c.limit_denominator(limit_denominator)
        if c == 0:
            continue
        h = harmonic_basis(n, k)[j - 1]
        power = n + 2 * k - 2
        term = h.field() * Field.theta_power(n, power) * (c / power)
        acc[I] = acc[I] + term if I in acc else term
    return Form(n, q, acc)


def correction_values(table: MomentTable, X) -> np.ndarray:
    """Values of the representative form at points X, as (points, C(n,q))."""
    from .theta import theta_radial
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n, q = table.n, table.q
    idxs = multi_indices(n, q)
    out = np.zeros((len(X), len(idxs)))
    th = theta_radial(np.linalg.norm(X, axis=1))
    for (k, j, I), c in table.entries.items():
        if c == 0:
            continue
        h = harmonic_basis(n, k)[j - 1]
        power = n + 2 * k - 2
        out[:, idxs.index(I)] += c * h.field().evaluate(X) / (power * th ** power)
    return out
