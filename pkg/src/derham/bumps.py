"""Random smooth rapidly decaying test forms (Gaussian-times-polynomial bumps).

Gaussians stand in for compactly supported bumps: at the default truncation
radius their tails are far below any quadrature tolerance.
"""
from __future__ import annotations

from fractions import Fraction

import numpy as np

from .exterior import Form, multi_indices
from .fields import Field


def gaussian_bump(rng: np.random.Generator, n: int, max_deg: int = 1,
                  widths=(1, Fraction(3, 2), 2)) -> Field:
    """Polynomial times Gaussian with small rational centre and width."""
    a = Fraction(widths[int(rng.integers(len(widths)))])
    center = [Fraction(int(v), 4) for v in rng.integers(-2, 3, size=n)]
    poly = {(0,) * n: Fraction(int(rng.integers(1, 4)))}
    for _ in range(max_deg + 1):
        alpha = [0] * n
        for _ in range(int(rng.integers(1, max_deg + 1))):
            alpha[int(rng.integers(n))] += 1
        poly[tuple(alpha)] = poly.get(tuple(alpha), 0) + Fraction(int(rng.integers(-2, 3)), 2)
    return Field.from_poly(n, poly) * Field.gaussian(n, a, center)


def bump_form(rng: np.random.Generator, n: int, q: int, density: float = 0.7,
              max_deg: int = 1) -> Form:
    """Random q-form with Gaussian bump coefficients (never identically zero)."""
    idxs = multi_indices(n, q)
    chosen = [I for I in idxs if rng.random() < density] or [idxs[int(rng.integers(len(idxs)))]]
    return Form(n, q, {I: gaussian_bump(rng, n, max_deg) for I in chosen})
