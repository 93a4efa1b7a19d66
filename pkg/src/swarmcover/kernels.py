"""Coverage integrals: cell moments, locational cost, and the analytic
centroid derivatives that feed the control laws.

Under uniform density every quantity here has a closed form. The
boundary-integral derivative of a centroid with respect to a generator
reduces, per shared face with endpoints v1, v2 and edge vector e = v2 - v1,
to

    -(|e| / (m_i |p_i - p_j|)) * [ (v1-c_i)(v1-p_j)^T
        + 1/2 ((v1-c_i) e^T + e (v1-p_j)^T) + 1/3 e e^T ]

for the off-diagonal block. The diagonal block uses the same segment
parameterization with kernel (q-c_i)(q-p_i)^T, summed over all shared
faces with positive sign. Quadrature-based oracles for everything live at
the bottom; they share no code with the closed forms.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import CoincidentGenerators
from .geometry import GEOM_EPS, mass_centroid_of
from .quadrature import integrate_polygon, integrate_segment
from .tessellation import BOUNDARY, INTERIOR, Tessellation


@dataclass(frozen=True)
class CellMoments:
    mass: np.ndarray      # (n,)
    centroid: np.ndarray  # (n, 2)


@dataclass(frozen=True)
class DensityField:
    """Scalar field phi(x, y, t) > 0 with optional time derivative.

    dphi_dt None means the field is constant in time; the density term of
    the centroid rate is then exactly zero.
    """

    phi: Callable[[float, float, float], float]
    dphi_dt: Optional[Callable[[float, float, float], float]] = None

    @staticmethod
    def uniform() -> "DensityField":
        return DensityField(phi=lambda x, y, t: 1.0, dphi_dt=None)


@dataclass
class JacobianBlocks:
    """Sparse 2x2 blocks of the centroid/generator derivative matrix."""

    n: int
    blocks: dict[tuple[int, int], np.ndarray]

    def to_dense(self) -> np.ndarray:
        out = np.zeros((2 * self.n, 2 * self.n))
        for (i, j), blk in self.blocks.items():
            out[2 * i:2 * i + 2, 2 * j:2 * j + 2] = blk
        return out

    def apply(self, vec: np.ndarray) -> np.ndarray:
        """Blockwise product with a stacked (n, 2) vector."""
        out = np.zeros_like(vec)
        for (i, j), blk in self.blocks.items():
            out[i] += blk @ vec[j]
        return out


def cell_moments(tess: Tessellation) -> CellMoments:
    n = tess.n
    mass = np.empty(n)
    centroid = np.empty((n, 2))
    for i, cell in enumerate(tess.cells):
        m, (cx, cy) = mass_centroid_of(cell.polygon.vertices)
        mass[i] = m
        centroid[i] = (cx, cy)
    return CellMoments(mass, centroid)


def _triangle_second_moment(ax, ay, bx, by, cx, cy, px, py):
    # integral of |q - p|^2 over the triangle abc
    area = 0.5 * ((bx - ax) * (cy - ay) - (by - ay) * (cx - ax))
    d1x, d1y = ax - px, ay - py
    d2x, d2y = bx - px, by - py
    d3x, d3y = cx - px, cy - py
    s = (d1x * d1x + d1y * d1y + d2x * d2x + d2y * d2y + d3x * d3x + d3y * d3y
         + d1x * d2x + d1y * d2y + d2x * d3x + d2y * d3y + d3x * d1x + d3y * d1y)
    return area * s / 6.0


def locational_cost(tess: Tessellation, moments: CellMoments, positions) -> float:
    """Sum over cells of the second moment about each generator, fanned
    from the cell centroid."""
    pos = np.asarray(positions, dtype=float)
    total = 0.0
    for i, cell in enumerate(tess.cells):
        verts = cell.polygon.vertices
        ccx, ccy = moments.centroid[i]
        px, py = pos[i]
        m = len(verts)
        for k in range(m):
            ax, ay = verts[k]
            bx, by = verts[(k + 1) % m]
            total += _triangle_second_moment(ccx, ccy, ax, ay, bx, by, px, py)
    return float(total)


def _face_outer(v1x, v1y, v2x, v2y, cx, cy, rx, ry):
    """|e| * integral over tau in [0,1] of (q - c)(q - r)^T for
    q = v1 + tau e, returned as four floats (row major)."""
    ex, ey = v2x - v1x, v2y - v1y
    length = np.hypot(ex, ey)
    ax, ay = v1x - cx, v1y - cy      # v1 - c
    bx, by = v1x - rx, v1y - ry      # v1 - r
    third = 1.0 / 3.0
    m00 = ax * bx + 0.5 * (ax * ex + ex * bx) + third * ex * ex
    m01 = ax * by + 0.5 * (ax * ey + ex * by) + third * ex * ey
    m10 = ay * bx + 0.5 * (ay * ex + ey * bx) + third * ey * ex
    m11 = ay * by + 0.5 * (ay * ey + ey * by) + third * ey * ey
    return length * m00, length * m01, length * m10, length * m11


def dci_dpj(face, p_i, p_j, c_i, m_i) -> np.ndarray:
    """Off-diagonal derivative block of centroid i with respect to
    neighbor generator j, for their shared face (v1, v2).

    A face of (near) zero length contributes the zero matrix, the
    continuous limit of the boundary integral.
    """
    (v1, v2) = face
    dx = p_j[0] - p_i[0]
    dy = p_j[1] - p_i[1]
    dist = float(np.hypot(dx, dy))
    if dist <= GEOM_EPS:
        raise CoincidentGenerators(f"generators coincide: {p_i!r}, {p_j!r}")
    if np.hypot(v2[0] - v1[0], v2[1] - v1[1]) <= GEOM_EPS:
        return np.zeros((2, 2))
    m00, m01, m10, m11 = _face_outer(
        v1[0], v1[1], v2[0], v2[1], c_i[0], c_i[1], p_j[0], p_j[1])
    s = -1.0 / (m_i * dist)
    return np.array([[s * m00, s * m01], [s * m10, s * m11]])


def dci_dpi(faces, p_i, c_i, m_i) -> np.ndarray:
    """Diagonal derivative block of centroid i with respect to its own
    generator. faces is a list of (v1, v2, p_j) over the shared faces of
    cell i; cells with no interior faces get the zero matrix."""
    acc = np.zeros((2, 2))
    pix, piy = p_i
    for v1, v2, p_j in faces:
        dx, dy = p_j[0] - pix, p_j[1] - piy
        dist = float(np.hypot(dx, dy))
        if dist <= GEOM_EPS:
            raise CoincidentGenerators(f"generators coincide: {p_i!r}, {p_j!r}")
        if np.hypot(v2[0] - v1[0], v2[1] - v1[1]) <= GEOM_EPS:
            continue
        m00, m01, m10, m11 = _face_outer(
            v1[0], v1[1], v2[0], v2[1], c_i[0], c_i[1], pix, piy)
        s = 1.0 / (m_i * dist)
        acc[0, 0] += s * m00
        acc[0, 1] += s * m01
        acc[1, 0] += s * m10
        acc[1, 1] += s * m11
    return acc


def jacobian_blocks(tess: Tessellation, moments: CellMoments, positions) -> JacobianBlocks:
    pos = np.asarray(positions, dtype=float)
    blocks: dict[tuple[int, int], np.ndarray] = {}
    for i, cell in enumerate(tess.cells):
        nbrs = set(tess.neighbors[i])
        c_i = moments.centroid[i]
        m_i = moments.mass[i]
        own_faces = []
        for f in cell.faces:
            if f.tag.kind != INTERIOR or f.tag.index not in nbrs:
                continue
            j = f.tag.index
            blocks[(i, j)] = dci_dpj((f.v1, f.v2), pos[i], pos[j], c_i, m_i)
            own_faces.append((f.v1, f.v2, pos[j]))
        blocks[(i, i)] = dci_dpi(own_faces, pos[i], c_i, m_i)
    return JacobianBlocks(tess.n, blocks)


def dci_dt_static_density(boundary_faces, c_i, m_i) -> np.ndarray:
    """Centroid rate of cell i from moving domain boundary faces under
    uniform density. boundary_faces is a list of (v1, v2, nu) with nu the
    outward normal speed of the hosting domain edge."""
    gx = 0.0
    gy = 0.0
    cx, cy = c_i
    for v1, v2, nu in boundary_faces:
        if nu == 0.0:
            continue
        length = np.hypot(v2[0] - v1[0], v2[1] - v1[1])
        gx += nu * ((v1[0] - cx) + (v2[0] - cx)) * length
        gy += nu * ((v1[1] - cy) + (v2[1] - cy)) * length
    s = 0.5 / m_i
    return np.array([gx * s, gy * s])


def feedforward_vectors(tess: Tessellation, moments: CellMoments, edge_velocities) -> np.ndarray:
    """Per-agent centroid rates induced by domain boundary motion.

    edge_velocities maps domain edge index to outward normal speed; cells
    with no boundary faces (or all-zero speeds) get exactly zero.
    """
    n = tess.n
    out = np.zeros((n, 2))
    if not any(v != 0.0 for v in edge_velocities):
        return out
    for i, cell in enumerate(tess.cells):
        faces = [
            (f.v1, f.v2, edge_velocities[f.tag.index])
            for f in cell.faces
            if f.tag.kind == BOUNDARY
        ]
        if faces:
            out[i] = dci_dt_static_density(faces, moments.centroid[i], moments.mass[i])
    return out


def dci_dt_density_term(polygon, c_i, m_i, density: DensityField, t, tol=1e-10) -> np.ndarray:
    """Static-domain part of the centroid rate for a time-varying density:
    (1/m_i) * integral over the cell of (q - c_i) dphi/dt."""
    if density.dphi_dt is None:
        return np.zeros(2)
    cx, cy = float(c_i[0]), float(c_i[1])

    def f(x, y):
        r = density.dphi_dt(x, y, t)
        return np.array([(x - cx) * r, (y - cy) * r])

    val = integrate_polygon(f, polygon.vertices, tol=tol)
    return val / m_i


# ---------------------------------------------------------------------------
# quadrature oracles (no shared code with the closed forms above)

def oracle_moments(polygon, density: DensityField, t, tol=1e-10):
    """(mass, centroid) by adaptive quadrature over the cell."""
    def f(x, y):
        p = density.phi(x, y, t)
        return np.array([p, x * p, y * p])

    m0, mx, my = integrate_polygon(f, polygon.vertices, tol=tol)
    return float(m0), np.array([mx / m0, my / m0])


def oracle_dci_dpj(face, p_i, p_j, c_i, m_i, density: DensityField, t, tol=1e-10) -> np.ndarray:
    """Off-diagonal derivative block by line quadrature over the face."""
    (v1, v2) = face
    dist = float(np.hypot(p_j[0] - p_i[0], p_j[1] - p_i[1]))
    cx, cy = float(c_i[0]), float(c_i[1])
    rx, ry = float(p_j[0]), float(p_j[1])

    def f(x, y):
        p = density.phi(x, y, t)
        return np.array([
            (x - cx) * (x - rx) * p, (x - cx) * (y - ry) * p,
            (y - cy) * (x - rx) * p, (y - cy) * (y - ry) * p,
        ])

    vals = integrate_segment(f, v1, v2, tol=tol)
    return -vals.reshape(2, 2) / (m_i * dist)


def oracle_dci_dt(polygon, boundary_faces, c_i, m_i, density: DensityField, t, tol=1e-10) -> np.ndarray:
    """Centroid rate by quadrature: density term over the cell plus the
    boundary sweep term over each moving face."""
    cx, cy = float(c_i[0]), float(c_i[1])
    total = np.zeros(2)
    if density.dphi_dt is not None:
        def fd(x, y):
            r = density.dphi_dt(x, y, t)
            return np.array([(x - cx) * r, (y - cy) * r])
        total = total + integrate_polygon(fd, polygon.vertices, tol=tol)

    for v1, v2, nu in boundary_faces:
        if nu == 0.0:
            continue

        def fb(x, y):
            p = density.phi(x, y, t)
            return np.array([(x - cx) * p, (y - cy) * p])

        total = total + nu * integrate_segment(fb, v1, v2, tol=tol)
    return total / m_i
