"""Adaptive Gauss-Legendre quadrature over segments and convex polygons.

Each estimate pairs a 7-point and a 15-point rule; intervals (or
triangles) whose two estimates disagree beyond the local tolerance are
subdivided. This path is deliberately independent of the closed-form
moment code so the two can cross-check each other.

Parameters follow a common pattern:

f : callable
    Integrand f(x, y) -> float or 1-D array. Evaluated pointwise.
tol : float
    Absolute tolerance on the final estimate (per component).
max_depth : int
    Refinement limit; exceeding it raises QuadratureNonConvergence.
"""

from __future__ import annotations

import numpy as np

from .errors import QuadratureNonConvergence

_X7, _W7 = np.polynomial.legendre.leggauss(7)
_X15, _W15 = np.polynomial.legendre.leggauss(15)


def _segment_estimate(f, ax, ay, bx, by, nodes, weights):
    half = 0.5
    acc = None
    for xk, wk in zip(nodes, weights):
        t = half * (xk + 1.0)
        val = np.asarray(f(ax + t * (bx - ax), ay + t * (by - ay)), dtype=float)
        acc = wk * val if acc is None else acc + wk * val
    # weights sum to 2 on [-1, 1]; scale to the unit parameter interval
    return half * acc


def integrate_segment(f, a, b, tol=1e-10, max_depth=30):
    """Line integral of f along segment a->b with respect to arc length."""
    ax, ay = float(a[0]), float(a[1])
    bx, by = float(b[0]), float(b[1])
    length = float(np.hypot(bx - ax, by - ay))
    if length == 0.0:
        probe = np.asarray(f(ax, ay), dtype=float)
        return probe * 0.0

    def recurse(t0, t1, budget, depth):
        p0 = (ax + t0 * (bx - ax), ay + t0 * (by - ay))
        p1 = (ax + t1 * (bx - ax), ay + t1 * (by - ay))
        coarse = _segment_estimate(f, *p0, *p1, _X7, _W7)
        fine = _segment_estimate(f, *p0, *p1, _X15, _W15)
        err = np.max(np.abs(fine - coarse)) * length * (t1 - t0)
        if err <= budget:
            return fine * (t1 - t0)
        if depth >= max_depth:
            raise QuadratureNonConvergence(
                f"segment quadrature stalled at depth {depth} (err {err:.3e})"
            )
        tm = 0.5 * (t0 + t1)
        return (recurse(t0, tm, 0.5 * budget, depth + 1)
                + recurse(tm, t1, 0.5 * budget, depth + 1))

    return length * recurse(0.0, 1.0, tol, 0)


def _triangle_estimate(f, a, b, c, nodes, weights):
    # Duffy map of the unit square onto the triangle; jacobian 2*A*u
    ax, ay = a
    abx, aby = b[0] - ax, b[1] - ay
    acx, acy = c[0] - ax, c[1] - ay
    area2 = abx * acy - aby * acx
    acc = None
    for xu, wu in zip(nodes, weights):
        u = 0.5 * (xu + 1.0)
        for xv, wv in zip(nodes, weights):
            v = 0.5 * (xv + 1.0)
            px = ax + u * ((1.0 - v) * abx + v * acx)
            py = ay + u * ((1.0 - v) * aby + v * acy)
            val = np.asarray(f(px, py), dtype=float)
            w = wu * wv * u
            acc = w * val if acc is None else acc + w * val
    return 0.25 * area2 * acc


def integrate_polygon(f, vertices, tol=1e-10, max_depth=18):
    """Area integral of f over a convex ccw polygon, fanned from the
    vertex average and refined per triangle."""
    verts = [(float(v[0]), float(v[1])) for v in vertices]
    m = len(verts)
    cx = sum(v[0] for v in verts) / m
    cy = sum(v[1] for v in verts) / m

    def recurse(a, b, c, budget, depth):
        coarse = _triangle_estimate(f, a, b, c, _X7, _W7)
        fine = _triangle_estimate(f, a, b, c, _X15, _W15)
        err = np.max(np.abs(fine - coarse))
        if err <= budget:
            return fine
        if depth >= max_depth:
            raise QuadratureNonConvergence(
                f"polygon quadrature stalled at depth {depth} (err {err:.3e})"
            )
        ab = (0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]))
        bc = (0.5 * (b[0] + c[0]), 0.5 * (b[1] + c[1]))
        ca = (0.5 * (c[0] + a[0]), 0.5 * (c[1] + a[1]))
        quarter = 0.25 * budget
        return (recurse(a, ab, ca, quarter, depth + 1)
                + recurse(ab, b, bc, quarter, depth + 1)
                + recurse(ca, bc, c, quarter, depth + 1)
                + recurse(ab, bc, ca, quarter, depth + 1))

    total = None
    budget = tol / m
    for k in range(m):
        part = recurse((cx, cy), verts[k], verts[(k + 1) % m], budget, 0)
        total = part if total is None else total + part
    return total
