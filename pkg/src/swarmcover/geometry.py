"""Planar primitives for convex-region coverage geometry.

Coordinates are meters. Polygons are counterclockwise (x, y) vertex tuples;
all operations reject NaN/inf input. Hot paths work on plain floats, numpy
shows up only at the array-facing edges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    CoincidentGenerators,
    CollinearGenerators,
    DegenerateCell,
    DegenerateFace,
    InvalidPolygon,
)

GEOM_EPS = 1e-9   # coincidence / collinearity tolerance (m)
AREA_EPS = 1e-12  # empty-area threshold (m^2)
_ON_EPS = 1e-12   # clip: signed distance treated as on-plane (m)

# Quarter-turn rotation: SKEW @ v rotates v by +90 degrees.
SKEW = np.array([[0.0, -1.0], [1.0, 0.0]])


def _checked_point(q):
    x, y = float(q[0]), float(q[1])
    if not (math.isfinite(x) and math.isfinite(y)):
        raise ValueError(f"non-finite coordinate: {q!r}")
    return x, y


@dataclass(frozen=True)
class ConvexPolygon:
    """Counterclockwise convex polygon, validated at construction."""

    vertices: tuple[tuple[float, float], ...]

    def __post_init__(self):
        _validate_convex_ccw(self.vertices)

    @classmethod
    def from_points(cls, points) -> "ConvexPolygon":
        return cls(tuple((float(p[0]), float(p[1])) for p in points))

    @property
    def area(self) -> float:
        return 0.5 * _shoelace2(self.vertices)

    def as_array(self) -> np.ndarray:
        return np.array(self.vertices, dtype=float)

    def contains(self, q, tol: float = GEOM_EPS) -> bool:
        x, y = float(q[0]), float(q[1])
        verts = self.vertices
        m = len(verts)
        for k in range(m):
            x1, y1 = verts[k]
            x2, y2 = verts[(k + 1) % m]
            if (x2 - x1) * (y - y1) - (y2 - y1) * (x - x1) < -tol:
                return False
        return True

    def edge_normals_offsets(self):
        """Outward unit normals n and offsets b with the polygon = {q: n.q <= b}."""
        out = []
        verts = self.vertices
        m = len(verts)
        for k in range(m):
            nx, ny = outward_normal(verts[k], verts[(k + 1) % m])
            out.append((nx, ny, nx * verts[k][0] + ny * verts[k][1]))
        return out


def _validate_convex_ccw(verts):
    if len(verts) < 3:
        raise InvalidPolygon(f"need at least 3 vertices, got {len(verts)}")
    m = len(verts)
    for k in range(m):
        x, y = verts[k]
        if not (math.isfinite(x) and math.isfinite(y)):
            raise InvalidPolygon(f"non-finite vertex {k}: ({x}, {y})")
    for k in range(m):
        x1, y1 = verts[k]
        x2, y2 = verts[(k + 1) % m]
        if (x2 - x1) ** 2 + (y2 - y1) ** 2 <= GEOM_EPS * GEOM_EPS:
            raise InvalidPolygon(f"vertices {k} and {(k + 1) % m} coincide")
    for k in range(m):
        x0, y0 = verts[k]
        x1, y1 = verts[(k + 1) % m]
        x2, y2 = verts[(k + 2) % m]
        cross = (x1 - x0) * (y2 - y1) - (y1 - y0) * (x2 - x1)
        if cross < -GEOM_EPS:
            raise InvalidPolygon(f"reflex turn at vertex {(k + 1) % m}")
    if _shoelace2(verts) <= 0.0:
        raise InvalidPolygon("vertices are not counterclockwise")


@dataclass(frozen=True)
class HalfPlane:
    """Half-plane {q : normal . q <= offset} with unit normal."""

    normal: tuple[float, float]
    offset: float

    def __post_init__(self):
        nx, ny = _checked_point(self.normal)
        if not math.isfinite(self.offset):
            raise ValueError("non-finite half-plane offset")
        if abs(math.hypot(nx, ny) - 1.0) > GEOM_EPS:
            raise ValueError("half-plane normal must be unit length")

    @classmethod
    def bisector(cls, p_i, p_j) -> "HalfPlane":
        """Half-plane of points at least as close to p_i as to p_j."""
        xi, yi = _checked_point(p_i)
        xj, yj = _checked_point(p_j)
        dx, dy = xj - xi, yj - yi
        d = math.hypot(dx, dy)
        if d <= GEOM_EPS:
            raise CoincidentGenerators(f"generators coincide: {p_i!r}, {p_j!r}")
        nx, ny = dx / d, dy / d
        mx, my = 0.5 * (xi + xj), 0.5 * (yi + yj)
        return cls((nx, ny), nx * mx + ny * my)

    def contains(self, q, tol: float = GEOM_EPS) -> bool:
        x, y = _checked_point(q)
        return self.normal[0] * x + self.normal[1] * y <= self.offset + tol


# ---------------------------------------------------------------------------
# shoelace moments

def _shoelace2(verts) -> float:
    """Twice the signed area, wraparound included."""
    total = 0.0
    m = len(verts)
    for k in range(m):
        x1, y1 = verts[k]
        x2, y2 = verts[(k + 1) % m]
        total += x1 * y2 - x2 * y1
    return total


def mass_centroid_of(verts):
    """(mass, centroid) of a raw ccw vertex list under unit density.

    mass = 1/2 sum V_{k+1}^T S V_k and centroid = (1/6m) sum (V_k + V_{k+1})
    (V_{k+1}^T S V_k), both with wraparound V_{M+1} = V_1.
    """
    m = len(verts)
    a2 = 0.0
    cx = 0.0
    cy = 0.0
    for k in range(m):
        x1, y1 = verts[k]
        x2, y2 = verts[(k + 1) % m]
        w = x1 * y2 - x2 * y1
        a2 += w
        cx += (x1 + x2) * w
        cy += (y1 + y2) * w
    mass = 0.5 * a2
    if mass < AREA_EPS:
        raise DegenerateCell(f"cell area {mass:.3e} below {AREA_EPS:.0e}")
    scale = 1.0 / (6.0 * mass)
    return mass, (cx * scale, cy * scale)


def polygon_mass_centroid(poly: ConvexPolygon):
    """Uniform-density mass (area) and centroid of a convex polygon."""
    return mass_centroid_of(poly.vertices)


# ---------------------------------------------------------------------------
# clipping

def clip_tagged(verts, tags, nx, ny, off, new_tag):
    """Clip a ccw polygon against {q : nx*qx + ny*qy <= off}.

    tags[k] labels the edge from verts[k] to verts[k+1] and survives
    truncation; the new edge created along the clip line gets new_tag.
    Returns (verts, tags) with near-duplicate vertices merged, or None when
    the intersection is empty. The input lists are returned unchanged (same
    objects) when the half-plane does not cut the polygon.
    """
    m = len(verts)
    dist = [nx * verts[k][0] + ny * verts[k][1] - off for k in range(m)]
    hi = max(dist)
    if hi <= _ON_EPS:
        return verts, tags
    if min(dist) >= -_ON_EPS:
        return None
    out_v = []
    out_t = []
    for k in range(m):
        k2 = (k + 1) % m
        dk, dk2 = dist[k], dist[k2]
        inside_k = dk <= _ON_EPS
        inside_k2 = dk2 <= _ON_EPS
        if inside_k:
            out_v.append(verts[k])
            out_t.append(tags[k])
            if not inside_k2:
                t = dk / (dk - dk2)
                x1, y1 = verts[k]
                x2, y2 = verts[k2]
                out_v.append((x1 + t * (x2 - x1), y1 + t * (y2 - y1)))
                out_t.append(new_tag)
        elif inside_k2:
            t = dk / (dk - dk2)
            x1, y1 = verts[k]
            x2, y2 = verts[k2]
            out_v.append((x1 + t * (x2 - x1), y1 + t * (y2 - y1)))
            out_t.append(tags[k])
    merged = _merge_close(out_v, out_t)
    if merged is None:
        return None
    mv, mt = merged
    if len(mv) < 3 or _shoelace2(mv) <= 2.0 * AREA_EPS:
        return None
    return mv, mt


def _merge_close(verts, tags):
    """Drop vertices that duplicate their predecessor within GEOM_EPS."""
    m = len(verts)
    if m == 0:
        return None
    keep_v = []
    keep_t = []
    for k in range(m):
        if keep_v:
            px, py = keep_v[-1]
            x, y = verts[k]
            if (x - px) ** 2 + (y - py) ** 2 <= GEOM_EPS * GEOM_EPS:
                # zero-length edge: the outgoing tag replaces the incoming one
                keep_t[-1] = tags[k]
                continue
        keep_v.append(verts[k])
        keep_t.append(tags[k])
    # wraparound: last may duplicate first
    while len(keep_v) >= 2:
        x, y = keep_v[-1]
        fx, fy = keep_v[0]
        if (x - fx) ** 2 + (y - fy) ** 2 <= GEOM_EPS * GEOM_EPS:
            # the closing edge is zero length; drop it and its tag
            keep_v.pop()
            keep_t.pop()
        else:
            break
    if len(keep_v) < 3:
        return None
    return keep_v, keep_t


def clip_halfplane(poly: ConvexPolygon, hp: HalfPlane):
    """Intersection of a convex polygon with a half-plane, or None if empty."""
    verts = list(poly.vertices)
    tags = [None] * len(verts)
    res = clip_tagged(verts, tags, hp.normal[0], hp.normal[1], hp.offset, None)
    if res is None:
        return None
    return ConvexPolygon(tuple(res[0]))


# ---------------------------------------------------------------------------
# vertex constructions

def circumcenter(p_i, p_j, p_k):
    """Point equidistant from three non-collinear generators.

    Uses the barycentric-weight form: V = (a_i p_i + a_j p_j + a_k p_k) /
    (2 (|p_ij|^2 |p_jk|^2 - (p_ij . p_jk)^2)) with pairwise difference
    vectors p_ab = p_b - p_a.
    """
    xi, yi = _checked_point(p_i)
    xj, yj = _checked_point(p_j)
    xk, yk = _checked_point(p_k)
    ijx, ijy = xj - xi, yj - yi
    jkx, jky = xk - xj, yk - yj
    ikx, iky = xk - xi, yk - yi
    n_ij = ijx * ijx + ijy * ijy
    n_jk = jkx * jkx + jky * jky
    n_ik = ikx * ikx + iky * iky
    scale2 = max(n_ij, n_jk, n_ik)
    cross = ijx * jky - ijy * jkx
    if abs(cross) <= GEOM_EPS * scale2:
        raise CollinearGenerators(
            f"generators nearly collinear (cross {cross:.3e})"
        )
    dot = ijx * jkx + ijy * jky
    denom = n_ij * n_jk - dot * dot
    a_i = n_jk * (ijx * ikx + ijy * iky)
    a_j = n_ik * (ijx * (-jkx) + ijy * (-jky))
    a_k = n_ij * (ikx * jkx + iky * jky)
    s = 0.5 / denom
    return (s * (a_i * xi + a_j * xj + a_k * xk),
            s * (a_i * yi + a_j * yj + a_k * yk))


def bisector_edge_intersection(p_i, p_j, edge_start, edge_end):
    """Crossing of the (p_i, p_j) perpendicular bisector with a segment.

    The segment runs q(tau) = start + tau (end - start). Returns
    (tau, point) with tau in [0, 1], or None when the bisector misses the
    segment or runs parallel to it.
    """
    xi, yi = _checked_point(p_i)
    xj, yj = _checked_point(p_j)
    ax, ay = _checked_point(edge_start)
    bx, by = _checked_point(edge_end)
    dx, dy = xj - xi, yj - yi
    dn = math.hypot(dx, dy)
    if dn <= GEOM_EPS:
        raise CoincidentGenerators(f"generators coincide: {p_i!r}, {p_j!r}")
    ux, uy = bx - ax, by - ay
    un = math.hypot(ux, uy)
    denom = dx * ux + dy * uy
    if abs(denom) <= GEOM_EPS * dn * un:
        return None
    mx, my = 0.5 * (xi + xj), 0.5 * (yi + yj)
    tau = (dx * (mx - ax) + dy * (my - ay)) / denom
    if tau < -1e-12 or tau > 1.0 + 1e-12:
        return None
    tau = min(1.0, max(0.0, tau))
    return tau, (ax + tau * ux, ay + tau * uy)


def outward_normal(v1, v2):
    """Unit outward normal of a ccw boundary edge from v1 to v2."""
    x1, y1 = _checked_point(v1)
    x2, y2 = _checked_point(v2)
    ex, ey = x2 - x1, y2 - y1
    length = math.hypot(ex, ey)
    if length <= GEOM_EPS:
        raise DegenerateFace(f"face endpoints coincide: {v1!r}, {v2!r}")
    # S^T e / |e| for the ccw quarter-turn matrix S
    return ey / length, -ex / length


# ---------------------------------------------------------------------------
# projection helpers (containment policy)

def point_segment_distance(q, a, b):
    """(distance, closest point) from q to segment ab."""
    qx, qy = float(q[0]), float(q[1])
    ax, ay = float(a[0]), float(a[1])
    bx, by = float(b[0]), float(b[1])
    ux, uy = bx - ax, by - ay
    L2 = ux * ux + uy * uy
    if L2 <= GEOM_EPS * GEOM_EPS:
        return math.hypot(qx - ax, qy - ay), (ax, ay)
    t = ((qx - ax) * ux + (qy - ay) * uy) / L2
    t = min(1.0, max(0.0, t))
    cx, cy = ax + t * ux, ay + t * uy
    return math.hypot(qx - cx, qy - cy), (cx, cy)


def project_into(poly: ConvexPolygon, q, margin: float = GEOM_EPS):
    """q unchanged when at least margin inside poly, else the closest point
    of the margin-inset polygon. Keeps projected agents strictly interior."""
    x, y = float(q[0]), float(q[1])
    planes = poly.edge_normals_offsets()
    if all(nx * x + ny * y <= b - margin for nx, ny, b in planes):
        return q
    verts = list(poly.vertices)
    tags = [None] * len(verts)
    for nx, ny, b in planes:
        res = clip_tagged(verts, tags, nx, ny, b - margin, None)
        if res is None:
            raise DegenerateCell("margin inset of the domain is empty")
        verts, tags = res
    best = None
    m = len(verts)
    for k in range(m):
        d, c = point_segment_distance((x, y), verts[k], verts[(k + 1) % m])
        if best is None or d < best[0]:
            best = (d, c)
    return best[1]
