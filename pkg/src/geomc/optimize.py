"""Riemannian gradient ascent, used to compare the modes that chains find."""

from __future__ import annotations

import math

import numpy as np

from geomc.manifolds import Product


def ascend(target, x, scales=None, step=1.0, max_iter=2000, tol=1e-10):
    """Climb ``target.log_density`` from ``x`` along geodesics.

    Each iteration moves along the geodesic with initial velocity
    ``step * P(w * grad)`` for unit time, where ``w`` holds per-component
    ``scales`` on a product manifold. The step halves on failure and grows
    by 1.5 on success. Returns ``(x, log_density)``.
    """
    m = target.manifold
    w = 1.0
    if scales is not None and isinstance(m, Product):
        w = m.expand(np.asarray(scales, dtype=float))
    x = np.array(x, dtype=float)
    f = target.log_density(x)
    for _ in range(max_iter):
        d = m.project(x, w * target.gradient(x))
        improved = False
        while step > 1e-14:
            with np.errstate(all="ignore"):
                y, _ = m.flow(x, step * d, 1.0)
                fy = target.log_density(y)
            if math.isfinite(fy) and fy > f:
                improved = True
                break
            step *= 0.5
        if not improved:
            break
        gain = fy - f
        x, f = y, fy
        step *= 1.5
        if gain < tol * max(1.0, abs(f)):
            break
    return x, f
