"""Smooth radial splice used to desingularize |x|-powers.

``theta(rho) = 2 + chi(rho) * (rho - 2)`` where ``chi`` is the standard
C-infinity step built from ``exp(-1/t)``: ``chi = 0`` for ``rho <= 1`` and
``chi = 1`` for ``rho >= 2``.  Hence ``theta == |x|`` outside the ball of
radius 2 and ``theta >= 1`` everywhere.
"""
from __future__ import annotations

from collections import defaultdict
from functools import lru_cache
from math import factorial

import numpy as np
from scipy.special import expit

# Outside this window the step is flat to below 1e-400 and is clamped.
_T_LO = 1e-3
_T_HI = 1.0 - 1e-3


@lru_cache(maxsize=None)
def _step_derivative_terms(order: int) -> tuple:
    """Derivative of ``S = expit(g)`` as a polynomial in ``S`` and ``g', g'', ...``.

    Terms are ``(coeff, s_power, g_exponents)`` where ``g_exponents[i]`` is the
    power of ``g^{(i+1)}``.  Uses ``dS/dt = g' S (1 - S)``.
    """
    terms = {(1, ()): 1}
    for _ in range(order):
        new = defaultdict(int)
        for (sp, gexp), c in terms.items():
            if sp:
                # d(S^sp) = sp S^(sp-1) * (g1 S - g1 S^2)
                ge = list(gexp) + [0] * max(0, 1 - len(gexp))
                ge[0] += 1
                key = tuple(ge)
                new[(sp, key)] += c * sp
                new[(sp + 1, key)] -= c * sp
            for i, e in enumerate(gexp):
                if e == 0:
                    continue
                ge = list(gexp) + [0] * max(0, i + 2 - len(gexp))
                ge[i] -= 1
                ge[i + 1] += 1
                new[(sp, tuple(ge))] += c * e
        terms = defaultdict(int)
        for (sp, ge), c in new.items():
            ge = list(ge)
            while ge and ge[-1] == 0:
                ge.pop()
            terms[(sp, tuple(ge))] += c
        terms = {k: v for k, v in terms.items() if v}
    return tuple((c, sp, ge) for (sp, ge), c in sorted(terms.items()))


def _g_derivative(k: int, t: np.ndarray) -> np.ndarray:
    # g(t) = 1/(1-t) - 1/t
    if k == 0:
        return 1.0 / (1.0 - t) - 1.0 / t
    return factorial(k) / (1.0 - t) ** (k + 1) - (-1) ** k * factorial(k) / t ** (k + 1)


def smooth_step(t, order: int = 0) -> np.ndarray:
    """``order``-th derivative of the C-infinity step S on [0, 1]."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    if order == 0:
        out[t >= _T_HI] = 1.0
    inside = (t > _T_LO) & (t < _T_HI)
    if not inside.any():
        return out
    ti = t[inside]
    if order == 0:
        out[inside] = expit(_g_derivative(0, ti))
        return out
    # S(t) = 1 - S(1 - t): evaluate on the half where S is small, since the
    # polynomial in S cancels badly as S -> 1.
    flip = ti > 0.5
    ti = np.where(flip, 1.0 - ti, ti)
    s = expit(_g_derivative(0, ti))
    acc = np.zeros_like(ti)
    gcache = {}
    for c, sp, ge in _step_derivative_terms(order):
        val = c * s**sp
        for i, e in enumerate(ge):
            if e:
                if i + 1 not in gcache:
                    gcache[i + 1] = _g_derivative(i + 1, ti)
                val = val * gcache[i + 1] ** e
        acc += val
    out[inside] = np.where(flip, (-1) ** (order + 1) * acc, acc)
    return out


def chi(rho, order: int = 0) -> np.ndarray:
    return smooth_step(np.asarray(rho, dtype=float) - 1.0, order)


def theta_radial(rho, order: int = 0) -> np.ndarray:
    """``order``-th radial derivative of theta at radius ``rho``."""
    rho = np.asarray(rho, dtype=float)
    if order == 0:
        return 2.0 + chi(rho) * (rho - 2.0)
    return chi(rho, order) * (rho - 2.0) + order * chi(rho, order - 1)


def theta(x) -> np.ndarray | float:
    """Evaluate theta at point(s) ``x`` (last axis = coordinates)."""
    x = np.asarray(x, dtype=float)
    val = theta_radial(np.linalg.norm(x, axis=-1))
    return float(val) if val.ndim == 0 else val
