"""Product Gauss rules on balls in R^n.

Two schemes are provided:

* :func:`integrate_ball` -- polar coordinates about the origin, for smooth
  integrands (L2 pairings, moments, far-field potentials).
* :func:`integrate_about_point` -- polar coordinates about a target point
  ``x``.  The Jacobian ``r^(n-1)`` cancels kernels homogeneous of degree
  ``1 - n``, so the integrand is smooth along every ray.  The first radial
  panel ``[0, eps]`` is the singular shell.

Work is split into a fixed number of chunks which are summed in order, so the
result does not depend on the worker count.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
from scipy.special import gamma, roots_jacobi

_DEFAULT_ANGULAR = {2: 48, 3: 24, 4: 10, 5: 6}


class QuadratureError(RuntimeError):
    """Quadrature did not meet its tolerance (tail or refinement estimate)."""


@dataclass(frozen=True)
class QuadratureSpec:
    R: float = 12.0
    eps: float = 0.1
    panels: int = 24
    tol: float = 1e-4
    workers: int = 1
    gauss_order: int = 8
    angular_order: int | None = None
    chunks: int = 8

    def __post_init__(self):
        if not self.R > 2:
            raise ValueError("truncation radius R must exceed 2")
        if not 0 < self.eps < self.R:
            raise ValueError("singular shell radius must satisfy 0 < eps < R")
        if not self.tol > 0:
            raise ValueError("tolerance must be positive")
        if self.panels < 1 or self.gauss_order < 2 or self.workers < 1 or self.chunks < 1:
            raise ValueError("panel, order, worker and chunk counts must be positive")

    def angular(self, n: int) -> int:
        return self.angular_order or _DEFAULT_ANGULAR.get(n, 4)

    def with_(self, **kw) -> "QuadratureSpec":
        return replace(self, **kw)


def sphere_area(n: int) -> float:
    """Surface area of the unit sphere S^(n-1) in R^n."""
    return float(2 * math.pi ** (n / 2) / gamma(n / 2))


@lru_cache(maxsize=None)
def sphere_rule(n: int, order: int):
    """Directions and weights on S^(n-1); weights sum to the sphere area.

    Exact for polynomials of degree < 2*order restricted to the sphere.
    """
    if n < 2:
        raise ValueError("sphere rules need n >= 2")
    if n == 2:
        m = 2 * order
        th = 2 * np.pi * np.arange(m) / m
        dirs = np.stack([np.cos(th), np.sin(th)], axis=1)
        return dirs, np.full(m, 2 * np.pi / m)
    a = (n - 3) / 2
    t, wt = roots_jacobi(order, a, a)
    sub, wsub = sphere_rule(n - 1, order)
    s = np.sqrt(1 - t**2)
    dirs = np.concatenate(
        [np.column_stack([np.full(len(sub), ti), si * sub]) for ti, si in zip(t, s)])
    w = np.concatenate([wi * wsub for wi in wt])
    dirs.setflags(write=False)
    w.setflags(write=False)
    return dirs, w


@lru_cache(maxsize=None)
def _gauss(order: int):
    return np.polynomial.legendre.leggauss(order)


def _map_chunks(fn, items, spec: QuadratureSpec):
    if spec.workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=spec.workers) as pool:
            return list(pool.map(fn, items))
    return [fn(it) for it in items]


@dataclass
class BallIntegral:
    value: np.ndarray
    tail_estimate: float
    shells: np.ndarray = field(repr=False)


def integrate_ball(func, n: int, spec: QuadratureSpec, R: float | None = None,
                   center=None) -> BallIntegral:
    """Integrate ``func(Y)`` over the ball of radius ``R`` about ``center``.

    ``func`` maps an (N, n) array to (N,) or (N, m) values.  The tail estimate
    is eight times the magnitude of the outermost R/8 shell.
    """
    R = spec.R if R is None else R
    center = np.zeros(n) if center is None else np.asarray(center, dtype=float)
    dirs, wd = sphere_rule(n, spec.angular(n))
    gx, gw = _gauss(spec.gauss_order)
    edges = np.linspace(0.0, R, spec.panels + 1)

    def panel(i):
        a, b = edges[i], edges[i + 1]
        r = 0.5 * (b - a) * gx + 0.5 * (a + b)
        wr = 0.5 * (b - a) * gw * r ** (n - 1)
        Y = center + (r[:, None, None] * dirs[None, :, :]).reshape(-1, n)
        W = (wr[:, None] * wd[None, :]).reshape(-1)
        vals = np.asarray(func(Y), dtype=float)
        if vals.ndim == 1:
            return W @ vals
        return W @ vals.reshape(len(W), -1)

    shells = np.array(_map_chunks(panel, list(range(spec.panels)), spec))
    value = shells.sum(axis=0)
    n_out = max(1, math.ceil(spec.panels / 8))
    tail = 8.0 * float(np.max(np.abs(shells[-n_out:].sum(axis=0))))
    return BallIntegral(value, tail, shells)


@dataclass
class PointIntegral:
    value: np.ndarray
    tail_estimate: float
    singular_patch_estimate: float


def integrate_about_point(func, x, spec: QuadratureSpec) -> PointIntegral:
    """Integrate ``func(Y, Z)`` (``Z = x - Y``) over the ball |Y| <= R.

    Polar coordinates are centred at ``x``; the singular shell ``[0, eps]`` is
    also integrated at half order to estimate its error.  When ``x`` lies
    outside the ball the integrand is smooth and the origin-centred rule is
    used instead.
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    R = spec.R
    if np.linalg.norm(x) >= R - 1e-12:
        res = integrate_ball(lambda Y: func(Y, x - Y), n, spec)
        return PointIntegral(res.value, res.tail_estimate, 0.0)

    dirs, wd = sphere_rule(n, spec.angular(n))
    gx, gw = _gauss(spec.gauss_order)
    hx, hw = _gauss(max(2, spec.gauss_order // 2))
    xd = dirs @ x
    rmax = -xd + np.sqrt(xd**2 - x @ x + R * R)
    ndir = len(dirs)
    bounds = np.linspace(0, ndir, min(spec.chunks, ndir) + 1).astype(int)
    outer_cut = (7.0 / 8.0) * R

    def rays(idx, nodes, weights, a, b):
        # radial nodes for directions idx on [a, b] (arrays over directions)
        half = 0.5 * (b - a)
        r = half[:, None] * nodes[None, :] + (0.5 * (a + b))[:, None]
        wr = half[:, None] * weights[None, :] * r ** (n - 1)
        W = wr * wd[idx][:, None]
        Y = x + r[:, :, None] * dirs[idx][:, None, :]
        return Y.reshape(-1, n), W.reshape(-1)

    def chunk(bi):
        idx = np.arange(bounds[bi], bounds[bi + 1])
        if len(idx) == 0:
            return None
        rm = rmax[idx]
        inner = np.minimum(spec.eps, rm)
        blocks = []
        Y0, W0 = rays(idx, gx, gw, np.zeros_like(rm), inner)
        Yh, Wh = rays(idx, hx, hw, np.zeros_like(rm), inner)
        edges = inner[:, None] + (rm - inner)[:, None] * np.linspace(0, 1, spec.panels + 1)[None, :]
        blocks.append((Y0, W0))
        for p in range(spec.panels):
            blocks.append(rays(idx, gx, gw, edges[:, p], edges[:, p + 1]))
        Y = np.concatenate([b[0] for b in blocks] + [Yh])
        W = np.concatenate([b[1] for b in blocks])
        vals = np.asarray(func(Y, x - Y), dtype=float)
        if vals.ndim == 1:
            vals = vals[:, None]
        nmain = len(W)
        main = vals[:nmain]
        total = W @ main
        tail = (W * (np.linalg.norm(Y[:nmain], axis=1) > outer_cut)) @ main
        n0 = len(W0)
        patch_full = W0 @ main[:n0]
        patch_half = Wh @ vals[nmain:]
        return total, tail, patch_full - patch_half

    parts = [p for p in _map_chunks(chunk, list(range(len(bounds) - 1)), spec) if p is not None]
    total = sum(p[0] for p in parts)
    tail = 8.0 * float(np.max(np.abs(sum(p[1] for p in parts))))
    patch = float(np.max(np.abs(sum(p[2] for p in parts))))
    return PointIntegral(total, tail, patch)
