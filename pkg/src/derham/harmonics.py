"""Homogeneous harmonic polynomials with exact rational arithmetic.

Inner products use the normalized sphere measure ``dS / sigma_n``, so every
Gram entry is rational.  Each basis member is stored as an orthogonal
polynomial ``p`` with integer coefficients together with its squared norm
``N``; the orthonormal function is ``p / sqrt(N)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations_with_replacement
from math import comb, gcd, lcm

import numpy as np
from scipy.special import eval_chebyt, eval_gegenbauer

from .exterior import Form, multi_indices
from .fields import Field, Poly, poly_add, poly_laplacian, poly_mul, _radius_sq_power
from .linalg import exact_rank

try:
    from gmpy2 import mpq as _Q
except ImportError:  # pragma: no cover
    _Q = Fraction


def _check(n: int, k: int):
    if n < 2:
        raise ValueError("harmonics need n >= 2")
    if k < 0:
        raise ValueError("degree k must be non-negative")


def harmonic_dim(n: int, k: int) -> int:
    """Dimension of degree-k homogeneous harmonics in n variables."""
    _check(n, k)
    return comb(n + k - 1, k) - (comb(n + k - 3, k - 2) if k >= 2 else 0)


@lru_cache(maxsize=None)
def monomials(n: int, k: int) -> tuple:
    """Exponent vectors of degree k, lexicographically descending in x_1."""
    out = []
    for combo in combinations_with_replacement(range(n), k):
        alpha = [0] * n
        for i in combo:
            alpha[i] += 1
        out.append(tuple(alpha))
    return tuple(sorted(out, reverse=True))


def laplacian_rank_dim(n: int, k: int) -> int:
    """Nullity of the Laplacian from degree-k to degree-(k-2) monomials (brute force)."""
    _check(n, k)
    src = monomials(n, k)
    if k < 2:
        return len(src)
    tgt = {a: i for i, a in enumerate(monomials(n, k - 2))}
    rows = [[0] * len(src) for _ in tgt]
    for j, alpha in enumerate(src):
        for beta, c in poly_laplacian({alpha: Fraction(1)}, n).items():
            rows[tgt[beta]][j] = c
    return len(src) - exact_rank(rows)


def _double_factorial(m: int) -> int:
    out = 1
    while m > 1:
        out *= m
        m -= 2
    return out


@lru_cache(maxsize=None)
def sphere_moment(n: int, alpha: tuple) -> Fraction:
    """Average of x^alpha over the unit sphere S^(n-1) (exact)."""
    alpha = tuple(alpha)
    if any(a < 0 for a in alpha):
        raise ValueError("exponents must be non-negative")
    if any(a % 2 for a in alpha):
        return Fraction(0)
    num = 1
    for a in alpha:
        num *= _double_factorial(a - 1)
    den = 1
    for j in range(sum(alpha) // 2):
        den *= n + 2 * j
    return Fraction(num, den)


def sphere_inner(p: Poly, q: Poly, n: int) -> Fraction:
    """Normalized sphere inner product of two polynomials."""
    total = Fraction(0)
    for a, ca in p.items():
        for b, cb in q.items():
            total += ca * cb * sphere_moment(n, tuple(x + y for x, y in zip(a, b)))
    return total


def harmonic_projection(p: Poly, n: int, k: int) -> Poly:
    """Harmonic part of a homogeneous degree-k polynomial."""
    out: Poly = {}
    coef = Fraction(1)
    lap = dict(p)
    j = 0
    while lap:
        term = poly_mul(lap, dict(_radius_sq_power(n, j))) if j else lap
        out = poly_add(out, term, coef)
        denom = 2 * (j + 1) * (2 * k - 2 * j + n - 4)
        lap = poly_laplacian(lap, n)
        if lap and denom == 0:
            raise ArithmeticError("degenerate harmonic projection")
        if lap:
            coef = -coef / denom
        j += 1
    return out


@dataclass(frozen=True)
class HarmonicPoly:
    n: int
    k: int
    j: int              # 1-based position within degree k
    poly: tuple         # sorted ((alpha, Fraction), ...), integer coefficients
    norm_sq: Fraction   # normalized sphere norm of poly; member = poly / sqrt(norm_sq)

    @property
    def as_dict(self) -> Poly:
        return dict(self.poly)

    def field(self) -> Field:
        """The (unnormalized) polynomial as an exact field."""
        return Field.from_poly(self.n, self.as_dict)

    def evaluate(self, X) -> np.ndarray:
        """Values of the orthonormal member p / sqrt(N) at points X."""
        return self.field().evaluate(X) / np.sqrt(float(self.norm_sq))

    def leading_exponent(self) -> tuple:
        return max(a for a, _ in self.poly)


@dataclass(frozen=True)
class HarmonicBasis:
    n: int
    k: int
    members: tuple

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __getitem__(self, i):
        return self.members[i]


def _integerize(p: dict) -> tuple[dict, Fraction]:
    """Scale p to coprime integer coefficients; returns (poly, scale)."""
    den = lcm(*(c.denominator for c in p.values()))
    nums = [int(c * den) for c in p.values()]
    g = gcd(*nums)
    lead = max(p)
    if p[lead] < 0:
        g = -g
    scale = Fraction(den, g)
    return {a: c * scale for a, c in p.items()}, scale


@lru_cache(maxsize=None)
def harmonic_basis(n: int, k: int) -> HarmonicBasis:
    """Orthonormal basis of degree-k harmonics (normalized sphere measure).

    Spans projections of the monomials with exponent of x_1 at most one, in
    lexicographic order, then orthogonalizes with exact Gram-Schmidt.
    Different parity classes of exponents are orthogonal, which keeps the
    elimination block-sparse.
    """
    _check(n, k)
    spanning = [a for a in monomials(n, k) if a[0] <= 1]
    orth: list = []   # (poly as mpq dict, norm_sq mpq, parity)
    members = []
    for alpha in spanning:
        parity = tuple(a % 2 for a in alpha)
        v = {b: _Q(c.numerator, c.denominator)
             for b, c in harmonic_projection({alpha: Fraction(1)}, n, k).items()}
        for u, nu, par in orth:
            if par != parity:
                continue
            c = _inner_q(v, u, n) / nu
            if c:
                for b, cb in u.items():
                    nv = v.get(b, 0) - c * cb
                    if nv:
                        v[b] = nv
                    else:
                        v.pop(b, None)
        nv = _inner_q(v, v, n)
        if not nv:
            raise ArithmeticError("spanning set is degenerate")
        orth.append((v, nv, parity))
        pf = {b: Fraction(int(c.numerator), int(c.denominator)) for b, c in v.items()}
        pf, scale = _integerize(pf)
        norm = Fraction(int(nv.numerator), int(nv.denominator)) * scale * scale
        members.append((pf, norm))
    out = tuple(
        HarmonicPoly(n, k, j + 1, tuple(sorted(p.items(), reverse=True)), norm)
        for j, (p, norm) in enumerate(members))
    return HarmonicBasis(n, k, out)


def _inner_q(p: dict, q: dict, n: int):
    total = _Q(0)
    for a, ca in p.items():
        for b, cb in q.items():
            m = sphere_moment(n, tuple(x + y for x, y in zip(a, b)))
            if m:
                total += ca * cb * _Q(m.numerator, m.denominator)
    return total


def gram_matrix(basis: HarmonicBasis | list) -> list:
    """Exact Gram matrix of the orthonormal members.

    Off-diagonal entries that are not rational after normalization are
    returned as floats; for a correct basis all of them are exactly 0.
    """
    mem = list(basis)
    out = []
    for a in mem:
        row = []
        for b in mem:
            g = sphere_inner(a.as_dict, b.as_dict, a.n)
            if g == 0:
                row.append(Fraction(0))
                continue
            prod = a.norm_sq * b.norm_sq
            num, den = _isqrt_exact(prod.numerator), _isqrt_exact(prod.denominator)
            if num is not None and den is not None:
                row.append(g / Fraction(num, den))
            else:
                row.append(float(g) / float(prod) ** 0.5)
        out.append(row)
    return out


def _isqrt_exact(v: int):
    from math import isqrt
    r = isqrt(v)
    return r if r * r == v else None


def harmonic_qform_space(n: int, m: int, q: int) -> list:
    """Basis of q-forms with harmonic coefficients of degree <= m.

    Coefficients are the orthogonal integer polynomials of
    :func:`harmonic_basis`; the span is what matters downstream.
    """
    if not 0 <= q <= n:
        raise ValueError(f"degree q={q} outside 0..{n}")
    if m < 0:
        raise ValueError("m must be non-negative")
    out = []
    for k in range(m + 1):
        for h in harmonic_basis(n, k):
            for idx in multi_indices(n, q):
                out.append(Form(n, q, {idx: h.field()}))
    return out


def zonal_sum(n: int, k: int, x, y) -> np.ndarray:
    """sum_j h_j(x) h_j(y) for the orthonormal degree-k basis, via the addition theorem.

    Works for any k without building the basis; ``x`` and ``y`` are single
    points or broadcastable (..., n) arrays.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    rx = np.linalg.norm(x, axis=-1)
    ry = np.linalg.norm(y, axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        t = np.where(rx * ry > 0, np.sum(x * y, axis=-1) / (rx * ry), 1.0)
    t = np.clip(t, -1.0, 1.0)
    if k == 0:
        return np.ones_like(t)
    if n == 2:
        zon = eval_chebyt(k, t)
    else:
        a = (n - 2) / 2
        zon = eval_gegenbauer(k, a, t) / eval_gegenbauer(k, a, 1.0)
    return harmonic_dim(n, k) * zon * (rx * ry) ** k


def zonal_sum_explicit(n: int, k: int, x, y) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    total = 0.0
    for h in harmonic_basis(n, k):
        total = total + h.field().evaluate(x) * h.field().evaluate(y) / float(h.norm_sq)
    return total
