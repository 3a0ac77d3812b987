"""Exact linear algebra over the rationals (row reduction with Fractions)."""
from __future__ import annotations

from fractions import Fraction

try:  # gmpy2 rationals are a drop-in speedup when present
    from gmpy2 import mpq as _Q
except ImportError:  # pragma: no cover
    _Q = Fraction


def _to_q(v):
    if isinstance(v, Fraction):
        return _Q(v.numerator, v.denominator)
    return _Q(v)


def _from_q(v) -> Fraction:
    return Fraction(int(v.numerator), int(v.denominator))


def row_reduce(rows) -> tuple[list, list]:
    """Reduced row echelon form; returns (nonzero rows, pivot columns)."""
    mat = [[_to_q(v) for v in r] for r in rows]
    if not mat:
        return [], []
    ncol = len(mat[0])
    pivots: list = []
    r = 0
    for c in range(ncol):
        piv = next((i for i in range(r, len(mat)) if mat[i][c] != 0), None)
        if piv is None:
            continue
        mat[r], mat[piv] = mat[piv], mat[r]
        inv = 1 / mat[r][c]
        mat[r] = [v * inv for v in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][c] != 0:
                f = mat[i][c]
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[r])]
        pivots.append(c)
        r += 1
        if r == len(mat):
            break
    return [[_from_q(v) for v in row] for row in mat[:r]], pivots


def exact_rank(rows) -> int:
    return len(row_reduce(rows)[1])


def nullspace(rows, ncol: int | None = None) -> list:
    """Basis of {v : rows @ v = 0} as lists of Fractions."""
    if ncol is None:
        ncol = len(rows[0]) if rows else 0
    red, piv = row_reduce(rows)
    free = [c for c in range(ncol) if c not in piv]
    basis = []
    for fc in free:
        v = [Fraction(0)] * ncol
        v[fc] = Fraction(1)
        for row, pc in zip(red, piv):
            v[pc] = -row[fc]
        basis.append(v)
    return basis


def in_span(rows, vec) -> bool:
    return exact_rank(list(rows) + [vec]) == exact_rank(rows)
