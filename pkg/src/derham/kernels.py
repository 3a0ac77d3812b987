"""Fundamental solution of the Laplacian, double-form kernels and their
harmonic expansion.

Kernel entries are exact fields in the difference variable ``z = x - y``;
y-derivatives are taken as ``d/dy_i = -d/dz_i``.  Entries are stored without
the transcendental factor ``1 / sigma_n`` (``1 / (2 pi)`` for n = 2), which
is carried separately as ``scale``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Literal

import numpy as np

from .exterior import Form, codifferential, complement, d, hodge_star, multi_indices
from .fields import Field
from .harmonics import harmonic_basis, harmonic_dim, zonal_sum
from .quadrature import QuadratureSpec, integrate_about_point, sphere_area
from .theta import theta

__all__ = [
    "SingularityError", "fundamental_solution", "fundamental_field", "PRINTED_N2_CONSTANT",
    "N2_CONSTANT", "mollified_identity", "KernelDoubleForm", "kernel_e_q", "kernel_phi",
    "truncated_kernel", "expansion_term", "expansion_partial_sum", "theta", "y_partial",
    "y_derivative_form", "expansion_table", "correction_count",
]

Variant = Literal["phi", "phi_hat"]

# The n = 2 constant printed alongside the definition of e, kept for reports.
PRINTED_N2_CONSTANT = 1.0 / math.pi
# The constant that makes Laplace(e) the Dirac mass (checked by the mollified identity).
N2_CONSTANT = 1.0 / (2.0 * math.pi)

EXPLICIT_BASIS_MAX_K = 8


class SingularityError(ValueError):
    """Kernel evaluated on its singular locus."""


def _kernel_scale(n: int) -> float:
    return N2_CONSTANT if n == 2 else 1.0 / sphere_area(n)


@lru_cache(maxsize=None)
def fundamental_field(n: int) -> Field:
    """e without its scale: |z|^(2-n)/(2-n) for n >= 3, log|z| for n = 2."""
    if n < 2:
        raise ValueError("n must be at least 2")
    if n == 2:
        return Field.log_radius(2)
    return Field.radial(n, 2 - n) / (2 - n)


def fundamental_solution(n: int, x) -> float | np.ndarray:
    """Value of the fundamental solution e at point(s) x."""
    x = np.asarray(x, dtype=float)
    pts = np.atleast_2d(x)
    if pts.shape[1] != n:
        raise ValueError("point dimension does not match n")
    r = np.linalg.norm(pts, axis=1)
    if np.any(r == 0):
        raise SingularityError("fundamental solution is singular at x = 0")
    if n == 2:
        val = N2_CONSTANT * np.log(r)
    else:
        val = r ** (2 - n) / ((2 - n) * sphere_area(n))
    return float(val[0]) if x.ndim == 1 else val


def mollified_identity(profile: Field, spec: QuadratureSpec | None = None, constant: float | None = None):
    """Return (int e * Laplace(profile), profile(0)).

    ``constant`` replaces the n = 2 normalization (e.g. the printed 1/pi) so
    the two candidates can be compared.
    """
    n = profile.n
    spec = spec or QuadratureSpec()
    lap = profile.laplacian()
    base = fundamental_field(n)
    scale = _kernel_scale(n) if constant is None or n != 2 else constant

    def integrand(Y, Z):
        return base.evaluate(Y) * lap.evaluate(Y)

    res = integrate_about_point(integrand, np.zeros(n), spec)
    return scale * float(np.ravel(res.value)[0]), float(profile.evaluate(np.zeros((1, n)))[0])


def y_partial(c: Field, axis: int) -> Field:
    """d/dy_axis of a field of z = x - y."""
    return -c.partial(axis)


def y_derivative_form(form: Form, variant: Variant) -> Form:
    """Apply d*_y (variant phi) or d_y (variant phi_hat) to a y-form in z."""
    if variant == "phi":
        return codifferential(form, y_partial)
    if variant == "phi_hat":
        return d(form, y_partial)
    raise ValueError(f"unknown kernel variant {variant!r}")


def _x_derivative_form(form: Form, variant: Variant) -> Form:
    # same operators, but on genuine y-polynomials (no z sign flip)
    return codifferential(form) if variant == "phi" else d(form)


@dataclass(frozen=True)
class KernelDoubleForm:
    """Bi-form sum_{I,J} k_IJ(x, y) dy_J (x) dx_I.

    ``singular[I]`` is the y-form (fields in z = x - y) paired with dx_I.
    ``smooth[I]`` lists ``(x_field, y_form)`` products added to it, used by
    the truncated kernels.  All values carry the common factor ``scale``.
    """
    n: int
    q: int
    variant: str
    scale: float
    singular: dict
    smooth: dict = field(default_factory=dict)
    m: int | None = None

    @property
    def y_degree(self) -> int:
        forms = list(self.singular.values())
        return forms[0].degree if forms else self.n - self.q

    def entries(self) -> dict:
        """(I, J) -> singular coefficient field in z."""
        out = {}
        for I, yf in self.singular.items():
            for J, c in yf.coeffs.items():
                out[(I, J)] = c
        return out

    def evaluate(self, x, y) -> dict:
        """Numeric entries (I, J) -> value at one pair (x, y), scale included."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        z = (x - y)[None, :]
        if not np.any(z):
            raise SingularityError("kernel evaluated on the diagonal x = y")
        out: dict = {}
        for (I, J), c in self.entries().items():
            out[(I, J)] = out.get((I, J), 0.0) + self.scale * float(c.evaluate(z)[0])
        for I, parts in self.smooth.items():
            for fx, yf in parts:
                vx = float(fx.evaluate(x[None, :])[0])
                for J, c in yf.coeffs.items():
                    out[(I, J)] = out.get((I, J), 0.0) + self.scale * vx * float(c.evaluate(y[None, :])[0])
        return out

    def y_apply(self, variant: Variant) -> "KernelDoubleForm":
        """Apply d*_y or d_y to every y-form of the kernel."""
        sing = {I: y_derivative_form(f, variant) for I, f in self.singular.items()}
        smooth = {I: [(fx, _x_derivative_form(yf, variant)) for fx, yf in parts]
                  for I, parts in self.smooth.items()}
        return KernelDoubleForm(self.n, self.q, f"{self.variant}+{variant}", self.scale,
                                sing, smooth, self.m)

    def is_zero(self) -> bool:
        return (all(f.is_zero() for f in self.singular.values())
                and all(yf.is_zero() for parts in self.smooth.values() for _, yf in parts))


def _check_degree(n: int, q: int):
    if n < 2:
        raise ValueError("n must be at least 2")
    if not 0 <= q <= n:
        raise ValueError(f"degree q={q} outside 0..{n}")


def kernel_e_q(n: int, q: int, base: Field | None = None) -> KernelDoubleForm:
    """e(x - y) (*dy_I) (x) dx_I summed over |I| = q.

    ``base`` replaces the fundamental field (used to test the kernel algebra
    with smooth stand-ins).
    """
    _check_degree(n, q)
    base = fundamental_field(n) if base is None else base
    sing = {I: hodge_star(Form(n, q, {I: base})) for I in multi_indices(n, q)}
    return KernelDoubleForm(n, q, "e", _kernel_scale(n), sing)


def kernel_phi(n: int, q: int, variant: Variant = "phi", base: Field | None = None) -> KernelDoubleForm:
    """phi_q = d*_y e_q, or phi_hat_q = d_y e_q (exact symbolic y-derivatives)."""
    _check_degree(n, q)
    if variant not in ("phi", "phi_hat"):
        raise ValueError(f"unknown kernel variant {variant!r}")
    ker = kernel_e_q(n, q, base)
    sing = {I: y_derivative_form(f, variant) for I, f in ker.singular.items()}
    return KernelDoubleForm(n, q, variant, ker.scale, sing)


@lru_cache(maxsize=None)
def _cached_phi(n: int, q: int, variant: str) -> KernelDoubleForm:
    return kernel_phi(n, q, variant)


def correction_y_forms(n: int, q: int, k: int, variant: Variant) -> list:
    """[(harmonic member, I, D_y(p(y) *dy_I))] for degree k, D = d* or d."""
    out = []
    for h in harmonic_basis(n, k):
        p = h.field()
        for I in multi_indices(n, q):
            yf = _x_derivative_form(hodge_star(Form(n, q, {I: p})), variant)
            out.append((h, I, yf))
    return out


@lru_cache(maxsize=None)
def truncated_kernel(n: int, q: int, m: int, variant: Variant = "phi") -> KernelDoubleForm:
    """phi_{m,q} (or phi_hat_{m,q}): the kernel plus its expansion correction.

    Correction for each 1 <= k <= m+1, harmonic member p/sqrt(N) and |I| = q:
    ``p(x) / (N (n+2k-2) theta(x)^(n+2k-2)) dx_I (x) D_y(p(y) *dy_I)``.
    """
    if m < 0:
        raise ValueError("m must be non-negative")
    ker = _cached_phi(n, q, variant)
    smooth: dict = {I: [] for I in multi_indices(n, q)}
    for k in range(1, m + 2):
        power = n + 2 * k - 2
        for h, I, yf in correction_y_forms(n, q, k, variant):
            fx = h.field() * Field.theta_power(n, power) / (h.norm_sq * power)
            smooth[I].append((fx, yf))
    return KernelDoubleForm(n, q, variant, ker.scale, dict(ker.singular), smooth, m)


# ---------------------------------------------------------------------------
# harmonic expansion of e(x - y)

def expansion_term(n: int, k: int, x, y) -> float:
    """sum_j h_j(x) h_j(y) / (sigma_n (n+2k-2) |x|^(n+2k-2)) for one degree k."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if k <= EXPLICIT_BASIS_MAX_K:
        zs = 0.0
        for h in harmonic_basis(n, k):
            f = h.field()
            zs += float(f.evaluate(x[None])[0]) * float(f.evaluate(y[None])[0]) / float(h.norm_sq)
    else:
        zs = float(zonal_sum(n, k, x, y))
    power = n + 2 * k - 2
    return _kernel_scale(n) * zs / (power * np.linalg.norm(x) ** power)


def expansion_partial_sum(n: int, m_terms: int, x, y) -> float:
    """e(x) - sum_{k=1}^{m_terms} expansion_term(k); requires |x| > |y|."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != (n,) or y.shape != (n,):
        raise ValueError("x and y must be points in R^n")
    if not np.linalg.norm(x) > np.linalg.norm(y):
        raise ValueError("expansion converges only for |x| > |y|")
    if m_terms < 0:
        raise ValueError("m_terms must be non-negative")
    total = fundamental_solution(n, x)
    for k in range(1, m_terms + 1):
        total -= expansion_term(n, k, x, y)
    return total


def expansion_table(n: int, x, y, max_m: int) -> list:
    """Rows (m, partial_sum, remainder, ratio) for m = 0..max_m."""
    exact = fundamental_solution(n, np.asarray(x, dtype=float) - np.asarray(y, dtype=float))
    rows = []
    prev = None
    total = fundamental_solution(n, np.asarray(x, dtype=float))
    for m in range(max_m + 1):
        if m:
            total -= expansion_term(n, m, x, y)
        rem = abs(exact - total)
        ratio = rem / prev if prev else float("nan")
        rows.append((m, total, rem, ratio))
        prev = rem
    return rows


def correction_count(n: int, q: int, m: int) -> int:
    """Number of correction products per dx_I in the truncated kernel."""
    return sum(harmonic_dim(n, k) for k in range(1, m + 2))
