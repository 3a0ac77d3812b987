"""Scalar coefficient fields for exterior forms.

A symbolic :class:`Field` is a finite sum of terms

    c * x^alpha * |x|^r * theta^(-p) * prod_j theta^(j) * log(|x|)^l * exp(Q(x))

with ``c`` an exact rational, ``theta^(j)`` the j-th radial derivative of the
splice function from :mod:`derham.theta`, and ``Q`` a polynomial of degree at
most two (Gaussian bumps).  The family is closed under products and partial
derivatives, so ``d`` and ``d*`` stay exact.  Coordinate axes are 0-based here;
multi-indices on forms are 1-based.

A :class:`SampledField` wraps a numeric callable and only supports linear
combinations and evaluation.
"""
from __future__ import annotations

from collections import defaultdict
from fractions import Fraction
from functools import lru_cache
from numbers import Number, Rational
from typing import Callable, Iterable

import numpy as np

from .theta import theta_radial

Exponent = tuple  # tuple[int, ...]
Poly = dict  # Exponent -> Fraction


class OutsideValidityRegion(ValueError):
    """A sampled field was evaluated outside the region where it is defined."""


def _frac(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, (int, Rational)):
        return Fraction(c)
    if isinstance(c, float):
        return Fraction(c)
    if isinstance(c, np.floating):
        return Fraction(float(c))
    if isinstance(c, np.integer):
        return Fraction(int(c))
    raise TypeError(f"cannot use {type(c).__name__} as an exact coefficient")


# ---------------------------------------------------------------------------
# small exact polynomial helpers (dict: exponent tuple -> Fraction)

def poly_add(a: Poly, b: Poly, scale=1) -> Poly:
    out = dict(a)
    for k, v in b.items():
        nv = out.get(k, 0) + scale * v
        if nv:
            out[k] = nv
        else:
            out.pop(k, None)
    return out


def poly_mul(a: Poly, b: Poly) -> Poly:
    out: dict = defaultdict(Fraction)
    for ka, va in a.items():
        for kb, vb in b.items():
            out[tuple(i + j for i, j in zip(ka, kb))] += va * vb
    return {k: v for k, v in out.items() if v}


def poly_partial(a: Poly, i: int) -> Poly:
    out: dict = defaultdict(Fraction)
    for k, v in a.items():
        if k[i]:
            kk = list(k)
            kk[i] -= 1
            out[tuple(kk)] += v * k[i]
    return {k: v for k, v in out.items() if v}


def poly_laplacian(a: Poly, n: int) -> Poly:
    out: Poly = {}
    for i in range(n):
        out = poly_add(out, poly_partial(poly_partial(a, i), i))
    return out


@lru_cache(maxsize=None)
def _radius_sq_power(n: int, a: int) -> tuple:
    """(x_1^2 + ... + x_n^2)^a as a sorted tuple of (exponent, int)."""
    base = {tuple(2 if j == i else 0 for j in range(n)): Fraction(1) for i in range(n)}
    acc = {(0,) * n: Fraction(1)}
    for _ in range(a):
        acc = poly_mul(acc, base)
    return tuple(sorted(acc.items()))


def _eval_poly(poly, X: np.ndarray, powcache: dict) -> np.ndarray:
    out = np.zeros(X.shape[0])
    for alpha, c in poly:
        out += float(c) * _monomial(alpha, X, powcache)
    return out


def _monomial(alpha, X, powcache) -> np.ndarray:
    val = None
    for i, a in enumerate(alpha):
        if a == 0:
            continue
        key = (i, a)
        if key not in powcache:
            powcache[key] = X[:, i] ** a
        val = powcache[key] if val is None else val * powcache[key]
    if val is None:
        return np.ones(X.shape[0])
    return val


# ---------------------------------------------------------------------------

class Field:
    """Exact symbolic scalar field on R^n (see module docstring)."""

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms: dict | None = None):
        self.n = n
        self.terms = {k: v for k, v in (terms or {}).items() if v}

    # -- constructors ---------------------------------------------------
    @classmethod
    def const(cls, n: int, c=1) -> "Field":
        return cls(n, {cls._key(n): _frac(c)})

    @classmethod
    def var(cls, n: int, axis: int) -> "Field":
        alpha = [0] * n
        alpha[axis] = 1
        return cls(n, {cls._key(n, tuple(alpha)): Fraction(1)})

    @classmethod
    def monomial(cls, n: int, alpha, c=1) -> "Field":
        return cls(n, {cls._key(n, tuple(alpha)): _frac(c)})

    @classmethod
    def from_poly(cls, n: int, poly: Poly) -> "Field":
        return cls(n, {cls._key(n, tuple(a)): _frac(c) for a, c in poly.items()})

    @classmethod
    def radial(cls, n: int, r: int) -> "Field":
        """|x|^r."""
        return cls(n, {cls._key(n, r=r): Fraction(1)})

    @classmethod
    def theta_power(cls, n: int, p: int) -> "Field":
        """theta(x)^(-p)."""
        return cls(n, {cls._key(n, p=p): Fraction(1)})

    @classmethod
    def log_radius(cls, n: int) -> "Field":
        return cls(n, {cls._key(n, l=1): Fraction(1)})

    @classmethod
    def exp_poly(cls, n: int, q: Poly, c=1) -> "Field":
        """c * exp(q(x)) for a polynomial q of degree <= 2."""
        qt = tuple(sorted((tuple(a), _frac(v)) for a, v in q.items() if v))
        return cls(n, {cls._key(n, Q=qt): _frac(c)})

    @classmethod
    def gaussian(cls, n: int, a=1, center=None, c=1) -> "Field":
        """c * exp(-a |x - center|^2)."""
        a = _frac(a)
        center = [Fraction(0)] * n if center is None else [_frac(v) for v in center]
        q: dict = defaultdict(Fraction)
        for i in range(n):
            e2 = tuple(2 if j == i else 0 for j in range(n))
            e1 = tuple(1 if j == i else 0 for j in range(n))
            q[e2] -= a
            q[e1] += 2 * a * center[i]
            q[(0,) * n] -= a * center[i] ** 2
        return cls.exp_poly(n, dict(q), c)

    @staticmethod
    def _key(n, alpha=None, r=0, p=0, tk=(), l=0, Q=()):
        return (alpha if alpha is not None else (0,) * n, r, p, tk, l, Q)

    # -- algebra ----------------------------------------------------------
    def _coerce(self, other) -> "Field":
        if isinstance(other, Field):
            if other.n != self.n:
                raise ValueError(f"dimension mismatch: {self.n} vs {other.n}")
            return other
        return Field.const(self.n, other)

    def __add__(self, other):
        if isinstance(other, SampledField):
            return NotImplemented
        other = self._coerce(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return Field(self.n, out)

    __radd__ = __add__

    def __neg__(self):
        return Field(self.n, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, SampledField):
            return NotImplemented
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, SampledField):
            return NotImplemented
        if not isinstance(other, Field):
            c = _frac(other)
            return Field(self.n, {k: v * c for k, v in self.terms.items()})
        other = self._coerce(other)
        out: dict = defaultdict(Fraction)
        for ka, va in self.terms.items():
            for kb, vb in other.terms.items():
                out[_key_mul(ka, kb)] += va * vb
        return Field(self.n, out)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self * (1 / _frac(c))

    def __eq__(self, other):
        if isinstance(other, Field):
            return self.n == other.n and (self - other).is_zero()
        if isinstance(other, Number):
            return (self - other).is_zero()
        return NotImplemented

    def __hash__(self):
        return hash((self.n, frozenset(self.terms.items())))

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __repr__(self):
        if not self.terms:
            return f"Field(n={self.n}, 0)"
        return f"Field(n={self.n}, {len(self.terms)} terms)"

    @property
    def is_polynomial(self) -> bool:
        return all(k[1:] == (0, 0, (), 0, ()) for k in self.terms)

    def poly(self) -> Poly:
        """Coefficient dict of a purely polynomial field."""
        if not self.is_polynomial:
            raise ValueError("field is not a plain polynomial")
        return {k[0]: v for k, v in self.terms.items()}

    def degree(self) -> int:
        return max((sum(k[0]) for k in self.terms), default=0)

    # -- calculus ---------------------------------------------------------
    def partial(self, axis: int) -> "Field":
        """Exact partial derivative along 0-based ``axis``."""
        out: dict = defaultdict(Fraction)
        for key, c in self.terms.items():
            for k2, c2 in _term_partial(key, axis, self.n):
                out[k2] += c * c2
        return Field(self.n, out)

    def laplacian(self) -> "Field":
        acc = Field(self.n)
        for i in range(self.n):
            acc = acc + self.partial(i).partial(i)
        return acc

    # -- evaluation -------------------------------------------------------
    def evaluate(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.n:
            raise ValueError(f"points have dimension {X.shape[1]}, field has {self.n}")
        out = np.zeros(X.shape[0])
        if not self.terms:
            return out
        powcache: dict = {}
        cache: dict = {}

        def rho():
            if "rho" not in cache:
                cache["rho"] = np.sqrt(np.einsum("ij,ij->i", X, X))
            return cache["rho"]

        def get(name, fn):
            if name not in cache:
                cache[name] = fn()
            return cache[name]

        for (alpha, r, p, tk, l, Q), c in self.terms.items():
            val = float(c) * _monomial(alpha, X, powcache)
            if r:
                val = val * get(("r", r), lambda: rho() ** r)
            if p:
                val = val * get(("p", p), lambda: theta_radial(rho()) ** (-p))
            for j in tk:
                val = val * get(("tk", j), lambda: theta_radial(rho(), j))
            if l:
                val = val * get(("l", l), lambda: np.log(rho()) ** l)
            if Q:
                val = val * get(("Q", Q), lambda: np.exp(_eval_poly(Q, X, powcache)))
            out += val
        return out

    def __call__(self, X):
        return self.evaluate(X)

    def evaluate_exact(self, point) -> Fraction:
        """Exact value at a rational point.

        Radial factors need a rational |x|; theta factors need |x| >= 2.
        Log and exponential factors are rejected.
        """
        pt = [_frac(v) for v in point]
        r2 = sum(v * v for v in pt)
        rho = _rational_sqrt(r2)
        total = Fraction(0)
        for (alpha, r, p, tk, l, Q), c in self.terms.items():
            if l or Q:
                raise ValueError("log and exp factors have no exact value")
            val = c
            for v, a in zip(pt, alpha):
                val *= v**a
            if r or p or tk:
                if rho is None:
                    raise ValueError("|x| is irrational at this point")
                if (p or tk) and rho < 2:
                    raise ValueError("theta is only exact for |x| >= 2")
                if any(j >= 2 for j in tk):
                    continue
                val *= rho ** (r - p)
            total += val
        return total

    # -- restriction to |x| >= 2 ------------------------------------------
    def restrict_outer(self) -> "Field":
        """The same field on |x| >= 2, where theta = |x|, theta' = 1, theta'' = 0."""
        out: dict = defaultdict(Fraction)
        for (alpha, r, p, tk, l, Q), c in self.terms.items():
            if any(j >= 2 for j in tk):
                continue
            out[(alpha, r - p, 0, (), l, Q)] += c
        return Field(self.n, out)

    def outer_canonical(self, shift: int | None = None):
        """Canonical form on |x| >= 2.

        Returns ``(shift, parts)`` where ``|x|^shift * field = sum A_(l,Q)(x) +
        |x| * B_(l,Q)(x)`` and ``parts`` maps ``(l, Q, parity)`` to the
        polynomial (dict) ``A`` or ``B``.  Since |x| is not a rational function,
        two fields agree on |x| >= 2 iff their canonical parts agree.
        """
        f = self.restrict_outer()
        min_r = min((k[1] for k in f.terms), default=0)
        need = max(0, -min_r)
        need += need % 2
        if shift is None:
            shift = need
        elif shift < need or shift % 2:
            raise ValueError("shift must be even and large enough")
        parts: dict = defaultdict(dict)
        for (alpha, r, _p, _tk, l, Q), c in f.terms.items():
            rr = r + shift
            par, a = rr % 2, rr // 2
            tgt = parts[(l, Q, par)]
            for beta, cb in _radius_sq_power(self.n, a):
                key = tuple(i + j for i, j in zip(alpha, beta))
                nv = tgt.get(key, 0) + c * cb
                if nv:
                    tgt[key] = nv
                else:
                    tgt.pop(key, None)
        return shift, {k: v for k, v in parts.items() if v}

    def equals_outer(self, other: "Field") -> bool:
        return not (self - other).outer_canonical()[1]

    # -- serialization ----------------------------------------------------
    def to_json_entries(self) -> list:
        groups: dict = defaultdict(list)
        for (alpha, r, p, tk, l, Q), c in sorted(self.terms.items(), key=_sort_key):
            groups[(r, p, tk, l, Q)].append([c.numerator, c.denominator, list(alpha)])
        out = []
        for (r, p, tk, l, Q), poly in groups.items():
            entry = {"poly": poly, "theta_power": p, "radial_power": r,
                     "log": bool(l) if l <= 1 else l}
            if tk:
                entry["theta_derivs"] = list(tk)
            if Q:
                entry["exp_poly"] = [[v.numerator, v.denominator, list(a)] for a, v in Q]
            out.append(entry)
        return out

    @classmethod
    def from_json_entries(cls, n: int, entries: Iterable[dict]) -> "Field":
        acc = cls(n)
        for e in entries:
            Q = tuple(sorted((tuple(a), Fraction(num, den)) for num, den, a in e.get("exp_poly", [])))
            tk = tuple(sorted(e.get("theta_derivs", [])))
            l = int(e.get("log", 0))
            terms = {}
            for num, den, alpha in e["poly"]:
                if len(alpha) != n:
                    raise ValueError("exponent vector length does not match n")
                key = (tuple(alpha), int(e.get("radial_power", 0)), int(e.get("theta_power", 0)), tk, l, Q)
                terms[key] = terms.get(key, 0) + Fraction(num, den)
            acc = acc + cls(n, terms)
        return acc


def _sort_key(item):
    (alpha, r, p, tk, l, Q), _ = item
    return (r, p, tk, l, Q, alpha)


def _rational_sqrt(x: Fraction):
    from math import isqrt

    if x < 0:
        return None
    a, b = isqrt(x.numerator), isqrt(x.denominator)
    if a * a == x.numerator and b * b == x.denominator:
        return Fraction(a, b)
    return None


def _key_mul(ka, kb):
    alpha = tuple(i + j for i, j in zip(ka[0], kb[0]))
    tk = tuple(sorted(ka[3] + kb[3]))
    Q = ka[5]
    if kb[5]:
        Q = tuple(sorted(poly_add(dict(ka[5]), dict(kb[5])).items()))
    return (alpha, ka[1] + kb[1], ka[2] + kb[2], tk, ka[4] + kb[4], Q)


def _term_partial(key, i, n):
    """Derivative of one term along axis i as a list of (key, coeff)."""
    alpha, r, p, tk, l, Q = key
    out = []
    up = list(alpha)
    up[i] += 1
    up = tuple(up)
    if alpha[i]:
        down = list(alpha)
        down[i] -= 1
        out.append(((tuple(down), r, p, tk, l, Q), Fraction(alpha[i])))
    if r:
        # d|x|^r = r |x|^(r-2) x_i
        out.append(((up, r - 2, p, tk, l, Q), Fraction(r)))
    if p:
        # d theta^-p = -p theta^(-p-1) theta' x_i / |x|
        out.append(((up, r - 1, p + 1, tuple(sorted(tk + (1,))), l, Q), Fraction(-p)))
    seen = set()
    for j in tk:
        if j in seen:
            continue
        seen.add(j)
        mult = tk.count(j)
        rest = list(tk)
        rest.remove(j)
        new_tk = tuple(sorted(rest + [j + 1]))
        out.append(((up, r - 1, p, new_tk, l, Q), Fraction(mult)))
    if l:
        out.append(((up, r - 2, p, tk, l - 1, Q), Fraction(l)))
    if Q:
        dq = poly_partial(dict(Q), i)
        for beta, c in dq.items():
            a2 = tuple(x + y for x, y in zip(alpha, beta))
            out.append(((a2, r, p, tk, l, Q), c))
    return out


# ---------------------------------------------------------------------------

class SampledField:
    """Numeric coefficient: a callable on (N, n) point arrays.

    ``radius`` bounds the validity region (|x| <= radius); ``smoothness`` is
    the number of derivatives the caller vouches for (None = unlimited).
    """

    __slots__ = ("n", "func", "radius", "smoothness", "label")

    def __init__(self, n: int, func: Callable[[np.ndarray], np.ndarray],
                 radius: float = np.inf, smoothness: int | None = None, label: str = ""):
        self.n = n
        self.func = func
        self.radius = radius
        self.smoothness = smoothness
        self.label = label

    def evaluate(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if np.isfinite(self.radius):
            if np.any(np.linalg.norm(X, axis=1) > self.radius * (1 + 1e-12)):
                raise OutsideValidityRegion(
                    f"sampled field {self.label or ''} evaluated beyond |x| = {self.radius}")
        return np.asarray(self.func(X), dtype=float).reshape(X.shape[0])

    __call__ = evaluate

    def _combine(self, other, op):
        a = as_sampled(self.n, self)
        b = as_sampled(self.n, other)
        smooth = _min_none(a.smoothness, b.smoothness)
        return SampledField(self.n, lambda X: op(a.func(X), b.func(X)),
                            min(a.radius, b.radius), smooth)

    def __add__(self, other):
        return self._combine(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def __rsub__(self, other):
        return as_sampled(self.n, other) - self

    def __mul__(self, other):
        if isinstance(other, (Field, SampledField)):
            return self._combine(other, np.multiply)
        c = float(other)
        f = self.func
        return SampledField(self.n, lambda X: c * f(X), self.radius, self.smoothness, self.label)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def __repr__(self):
        return f"SampledField(n={self.n}, radius={self.radius}, label={self.label!r})"


def _min_none(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def as_sampled(n: int, value) -> SampledField:
    if isinstance(value, SampledField):
        return value
    if isinstance(value, Field):
        return SampledField(n, value.evaluate)
    c = float(value)
    return SampledField(n, lambda X: np.full(np.atleast_2d(X).shape[0], c))


def fd_partial(field, axis: int, step: float) -> SampledField:
    """Central difference along ``axis`` with spacing ``step``."""
    if step <= 0:
        raise ValueError("step must be positive")
    f = as_sampled(field.n, field)
    n = f.n

    def func(X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        Xp = X.copy()
        Xm = X.copy()
        Xp[:, axis] += step
        Xm[:, axis] -= step
        return (f.evaluate(Xp) - f.evaluate(Xm)) / (2 * step)

    smooth = None if f.smoothness is None else f.smoothness - 1
    return SampledField(n, func, f.radius - step, smooth)
