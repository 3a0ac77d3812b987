"""Exterior algebra on R^n with the Euclidean metric.

Multi-indices are strictly increasing tuples of 1-based axis labels.  The
orientation is ``dx_1 ^ ... ^ dx_n`` and the Hodge star is fixed by
``dx_I ^ *dx_I = dx_1 ^ ... ^ dx_n``.
"""
from __future__ import annotations

import json
from functools import lru_cache
from itertools import combinations
from typing import Callable, Iterable, Mapping

import numpy as np

from .fields import Field, SampledField, as_sampled, fd_partial
from .quadrature import QuadratureError, QuadratureSpec, integrate_ball

__all__ = [
    "Form", "QuadratureSpec", "multi_indices", "complement", "perm_sign",
    "wedge", "hodge_star", "d", "codifferential", "codiff_sign", "fd_d",
    "fd_codifferential", "l2_inner", "L2Result", "volume_form", "basis_form",
    "form_to_json", "form_from_json", "laplacian_form", "random_poly_form",
]


@lru_cache(maxsize=None)
def multi_indices(n: int, q: int) -> tuple:
    """All increasing multi-indices of length q, in lexicographic order."""
    if q < 0 or q > n:
        return ()
    return tuple(combinations(range(1, n + 1), q))


def complement(n: int, idx) -> tuple:
    s = set(idx)
    return tuple(i for i in range(1, n + 1) if i not in s)


def perm_sign(seq) -> int:
    """Sign of the permutation sorting ``seq``; 0 on repeated entries."""
    seq = list(seq)
    if len(set(seq)) != len(seq):
        return 0
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


def _check_index(n: int, idx) -> tuple:
    idx = tuple(int(i) for i in idx)
    if any(b <= a for a, b in zip(idx, idx[1:])):
        raise ValueError(f"multi-index {idx} is not strictly increasing")
    if idx and (idx[0] < 1 or idx[-1] > n):
        raise ValueError(f"multi-index {idx} out of range for n={n}")
    return idx


class Form:
    """Differential form of fixed degree with sparse coefficients.

    Coefficients are :class:`Field` or :class:`SampledField` objects.  Degrees
    -1 and n+1 are allowed only as the empty form.
    """

    __slots__ = ("n", "degree", "coeffs")

    def __init__(self, n: int, degree: int, coeffs: Mapping | None = None):
        if n < 1:
            raise ValueError("dimension must be positive")
        if degree < -1 or degree > n + 1:
            raise ValueError(f"degree {degree} outside -1..{n + 1}")
        clean = {}
        for idx, c in (coeffs or {}).items():
            idx = _check_index(n, idx)
            if len(idx) != degree:
                raise ValueError(f"index {idx} has length {len(idx)}, expected {degree}")
            if isinstance(c, Field):
                if c.n != n:
                    raise ValueError("coefficient dimension mismatch")
                if c.is_zero():
                    continue
            elif not isinstance(c, SampledField):
                c = Field.const(n, c)
                if c.is_zero():
                    continue
            clean[idx] = c
        if clean and not 0 <= degree <= n:
            raise ValueError("forms of degree -1 or n+1 must be empty")
        self.n = n
        self.degree = degree
        self.coeffs = clean

    @classmethod
    def zero(cls, n: int, degree: int) -> "Form":
        return cls(n, degree, {})

    @classmethod
    def scalar(cls, field: Field | SampledField) -> "Form":
        return cls(field.n, 0, {(): field})

    # -- algebra ----------------------------------------------------------
    def _check(self, other: "Form"):
        if not isinstance(other, Form):
            raise TypeError("expected a Form")
        if other.n != self.n:
            raise ValueError(f"dimension mismatch: {self.n} vs {other.n}")
        if other.degree != self.degree:
            raise ValueError(f"degree mismatch: {self.degree} vs {other.degree}")

    def __add__(self, other: "Form") -> "Form":
        self._check(other)
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out[k] + v if k in out else v
        return Form(self.n, self.degree, out)

    def __neg__(self) -> "Form":
        return Form(self.n, self.degree, {k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other: "Form") -> "Form":
        return self + (-other)

    def __mul__(self, c) -> "Form":
        """Multiply every coefficient by a scalar or scalar field."""
        return Form(self.n, self.degree, {k: v * c for k, v in self.coeffs.items()})

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, Form):
            return NotImplemented
        if (self.n, self.degree) != (other.n, other.degree):
            return False
        return (self - other).is_zero()

    __hash__ = None

    def is_symbolic(self) -> bool:
        return all(isinstance(c, Field) for c in self.coeffs.values())

    def is_zero(self) -> bool:
        """Exact test; sampled coefficients never count as zero."""
        return all(isinstance(c, Field) and c.is_zero() for c in self.coeffs.values())

    def __getitem__(self, idx):
        idx = tuple(idx)
        return self.coeffs.get(idx, Field(self.n))

    def components(self):
        return sorted(self.coeffs.items())

    def evaluate(self, X) -> dict:
        """Map each stored multi-index to its values at points X."""
        return {k: v.evaluate(X) for k, v in self.coeffs.items()}

    def evaluate_dense(self, X) -> np.ndarray:
        """(N, C(n,q)) array of coefficient values in lexicographic index order."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        idxs = multi_indices(self.n, self.degree)
        out = np.zeros((X.shape[0], len(idxs)))
        for j, idx in enumerate(idxs):
            if idx in self.coeffs:
                out[:, j] = self.coeffs[idx].evaluate(X)
        return out

    def map_coeffs(self, fn: Callable) -> "Form":
        return Form(self.n, self.degree, {k: fn(v) for k, v in self.coeffs.items()})

    def restrict_outer(self) -> "Form":
        return self.map_coeffs(lambda c: c.restrict_outer())

    def equals_outer(self, other: "Form") -> bool:
        diff = self - other
        return all(c.outer_canonical()[1] == {} for c in diff.coeffs.values())

    def __repr__(self):
        if not self.coeffs:
            return f"Form(n={self.n}, degree={self.degree}, 0)"
        parts = " + ".join(f"c{list(k)}" for k in sorted(self.coeffs))
        return f"Form(n={self.n}, degree={self.degree}, {parts})"


def basis_form(n: int, idx, coeff=1) -> Form:
    idx = tuple(idx)
    return Form(n, len(idx), {idx: coeff if isinstance(coeff, (Field, SampledField)) else Field.const(n, coeff)})


def volume_form(n: int, coeff=1) -> Form:
    return basis_form(n, tuple(range(1, n + 1)), coeff)


def wedge(a: Form, b: Form) -> Form:
    if a.n != b.n:
        raise ValueError(f"dimension mismatch: {a.n} vs {b.n}")
    n = a.n
    q = a.degree + b.degree
    if a.degree < 0 or b.degree < 0 or q > n:
        return Form.zero(n, min(max(q, -1), n + 1))
    out: dict = {}
    for I, ca in a.coeffs.items():
        for J, cb in b.coeffs.items():
            s = perm_sign(I + J)
            if not s:
                continue
            K = tuple(sorted(I + J))
            term = ca * cb if s > 0 else -(ca * cb)
            out[K] = out[K] + term if K in out else term
    return Form(n, q, out)


@lru_cache(maxsize=None)
def _star_sign(n: int, idx: tuple) -> int:
    return perm_sign(idx + complement(n, idx))


def hodge_star(a: Form) -> Form:
    n = a.n
    if not 0 <= a.degree <= n:
        return Form.zero(n, n - a.degree)
    out = {}
    for I, c in a.coeffs.items():
        s = _star_sign(n, I)
        out[complement(n, I)] = c if s > 0 else -c
    return Form(n, n - a.degree, out)


def _default_partial(c, axis):
    if isinstance(c, SampledField):
        raise TypeError("d needs symbolic coefficients; use fd_d for sampled forms")
    return c.partial(axis)


def d(a: Form, partial: Callable | None = None) -> Form:
    """Exterior derivative.  ``partial(coeff, axis)`` overrides differentiation."""
    partial = partial or _default_partial
    n, q = a.n, a.degree
    if q < 0 or q >= n:
        return Form.zero(n, min(q + 1, n + 1))
    out: dict = {}
    for I, c in a.coeffs.items():
        for i in range(1, n + 1):
            if i in I:
                continue
            s = (-1) ** sum(1 for k in I if k < i)
            dc = partial(c, i - 1)
            if isinstance(dc, Field) and dc.is_zero():
                continue
            K = tuple(sorted(I + (i,)))
            term = dc if s > 0 else -dc
            out[K] = out[K] + term if K in out else term
    return Form(n, q + 1, out)


def _interior_formula(beta: Form) -> Form:
    """-sum_i i_{e_i} d_i beta: the formal L2 adjoint of d on Euclidean space."""
    n, q = beta.n, beta.degree
    out: dict = {}
    for I, c in beta.coeffs.items():
        for pos, i in enumerate(I):
            dc = c.partial(i - 1)
            if dc.is_zero():
                continue
            K = I[:pos] + I[pos + 1:]
            term = -dc if pos % 2 == 0 else dc
            out[K] = out[K] + term if K in out else term
    return Form(n, q - 1, out)


@lru_cache(maxsize=None)
def codiff_sign(n: int, q: int) -> int:
    """Sign s with d* = s * (*d*) on q-forms, derived symbolically.

    Compares *d* with the interior-product adjoint formula on the test form
    x_1 dx_(1..q); the adjointness quadrature test validates the result.
    """
    if q < 1 or q > n:
        return 1
    I = tuple(range(1, q + 1))
    beta = basis_form(n, I, Field.var(n, 0))
    ref = _interior_formula(beta)
    sds = hodge_star(d(hodge_star(beta)))
    K = I[1:]
    a, b = ref[K], sds[K]
    if b.is_zero():
        raise ArithmeticError("degenerate test form for codifferential sign")
    if (a - b).is_zero():
        return 1
    if (a + b).is_zero():
        return -1
    raise ArithmeticError("*d* is not proportional to the adjoint formula")


def codifferential(a: Form, partial: Callable | None = None) -> Form:
    """Formal adjoint d* = s(n,q) * (*d*) of the exterior derivative."""
    n, q = a.n, a.degree
    if q <= 0:
        return Form.zero(n, q - 1 if q >= 0 else -1)
    out = hodge_star(d(hodge_star(a), partial))
    return out if codiff_sign(n, q) > 0 else -out


def laplacian_form(a: Form) -> Form:
    """Componentwise Euclidean Laplacian sum_i d_i^2 (symbolic)."""
    return a.map_coeffs(lambda c: c.laplacian())


def _fd_partial_factory(step: float):
    def partial(c, axis):
        return fd_partial(c, axis, step)
    return partial


def fd_d(a: Form, step: float) -> Form:
    """Central-difference exterior derivative (O(step^2))."""
    if step <= 0:
        raise ValueError("step must be positive")
    sampled = a.map_coeffs(lambda c: as_sampled(a.n, c))
    return d(sampled, _fd_partial_factory(step))


def fd_codifferential(a: Form, step: float) -> Form:
    if step <= 0:
        raise ValueError("step must be positive")
    if a.degree <= 0:
        return Form.zero(a.n, a.degree - 1 if a.degree >= 0 else -1)
    sampled = a.map_coeffs(lambda c: as_sampled(a.n, c))
    out = hodge_star(d(hodge_star(sampled), _fd_partial_factory(step)))
    return out if codiff_sign(a.n, a.degree) > 0 else -out


class L2Result(float):
    """Float value of an L2 pairing carrying its tail estimate."""

    tail_estimate: float

    def __new__(cls, value, tail):
        obj = super().__new__(cls, value)
        obj.tail_estimate = tail
        return obj


def l2_inner(a: Form, b: Form, spec: QuadratureSpec | None = None, *, strict: bool = True) -> L2Result:
    """Truncated-ball quadrature of ``int sum_I a_I b_I dx``.

    Raises :class:`QuadratureError` when the tail estimate exceeds ``spec.tol``
    (unless ``strict`` is False).
    """
    spec = spec or QuadratureSpec()
    if a.n != b.n or a.degree != b.degree:
        raise ValueError("l2_inner needs forms of equal dimension and degree")
    common = sorted(set(a.coeffs) & set(b.coeffs))
    if not common:
        return L2Result(0.0, 0.0)

    def integrand(Y):
        acc = np.zeros(Y.shape[0])
        for idx in common:
            acc += a.coeffs[idx].evaluate(Y) * b.coeffs[idx].evaluate(Y)
        return acc

    res = integrate_ball(integrand, a.n, spec)
    if strict and res.tail_estimate > spec.tol:
        raise QuadratureError(
            f"tail estimate {res.tail_estimate:.3e} exceeds tolerance {spec.tol:.1e}")
    return L2Result(float(res.value), res.tail_estimate)


# ---------------------------------------------------------------------------
# JSON

def form_to_json(form: Form) -> dict:
    if not form.is_symbolic():
        raise TypeError("only symbolic forms serialize")
    coeffs = []
    for idx, c in form.components():
        for entry in c.to_json_entries():
            coeffs.append({"index": list(idx), **entry})
    return {"n": form.n, "degree": form.degree, "coeffs": coeffs}


def form_from_json(doc: dict | str) -> Form:
    if isinstance(doc, str):
        doc = json.loads(doc)
    n, q = int(doc["n"]), int(doc["degree"])
    acc: dict = {}
    for entry in doc["coeffs"]:
        idx = tuple(entry["index"])
        f = Field.from_json_entries(n, [entry])
        acc[idx] = acc[idx] + f if idx in acc else f
    return Form(n, q, acc)


def random_poly_form(rng: np.random.Generator, n: int, q: int, max_deg: int = 3,
                     n_terms: int = 3, coeff_range: int = 5) -> Form:
    """Random nonzero form with small-integer polynomial coefficients (for tests)."""
    idxs = multi_indices(n, q)
    chosen = [I for I in idxs if rng.random() >= 0.3] or [idxs[int(rng.integers(len(idxs)))]]
    nonzero = [c for c in range(-coeff_range, coeff_range + 1) if c]
    coeffs = {}
    for idx in chosen:
        terms: dict = {}
        for _ in range(n_terms):
            deg = int(rng.integers(0, max_deg + 1))
            alpha = tuple(int(v) for v in rng.multinomial(deg, [1 / n] * n))
            terms[alpha] = terms.get(alpha, 0) + int(rng.choice(nonzero))
        terms = {a: c for a, c in terms.items() if c}
        if not terms:
            terms = {(0,) * n: 1}
        coeffs[idx] = Field.from_poly(n, terms)
    return Form(n, q, coeffs)
