"""Bounded Voronoi partition of a convex domain.

Each cell is built by clipping the domain polygon with perpendicular
bisector half-planes, in order of generator distance, pruning generators
that provably cannot cut the current cell. Faces keep provenance tags so
downstream derivative code knows which neighbor or domain edge made them.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from .errors import AgentOutsideDomain, CoincidentAgents
from .geometry import GEOM_EPS, ConvexPolygon, clip_tagged

INTERIOR = "interior"
BOUNDARY = "boundary"


@dataclass(frozen=True)
class FaceTag:
    """Provenance of a cell face: bisector with a neighbor, or domain edge."""

    kind: str
    index: int

    @classmethod
    def interior(cls, j: int) -> "FaceTag":
        return cls(INTERIOR, j)

    @classmethod
    def boundary(cls, edge: int) -> "FaceTag":
        return cls(BOUNDARY, edge)


@dataclass(frozen=True)
class Face:
    v1: tuple[float, float]
    v2: tuple[float, float]
    tag: FaceTag

    @property
    def length(self) -> float:
        return float(np.hypot(self.v2[0] - self.v1[0], self.v2[1] - self.v1[1]))


@dataclass(frozen=True)
class VoronoiCell:
    owner: int
    polygon: ConvexPolygon
    faces: tuple[Face, ...]


@dataclass(frozen=True)
class Tessellation:
    cells: tuple[VoronoiCell, ...]
    neighbors: tuple[tuple[int, ...], ...]
    domain: ConvexPolygon

    @property
    def n(self) -> int:
        return len(self.cells)


@dataclass(frozen=True)
class VertexProvenance:
    """kind is 'circumcenter' (j, k), 'boundary' (j, edge) or 'corner' (vertex,)."""

    kind: str
    indices: tuple[int, ...]


def voronoi_partition(positions, domain: ConvexPolygon) -> Tessellation:
    """Partition the domain among generators by nearest-distance ownership.

    Positions must be strictly inside the domain and pairwise separated by
    more than GEOM_EPS. Clipping visits other generators nearest-first
    (ties broken by index) and stops once the remaining bisectors provably
    miss the cell.
    """
    pos = np.asarray(positions, dtype=float)
    if pos.ndim != 2 or pos.shape[1] != 2:
        raise ValueError(f"positions must be (n, 2), got {pos.shape}")
    if not np.all(np.isfinite(pos)):
        raise ValueError("positions contain non-finite values")
    n = pos.shape[0]

    _check_inside(pos, domain)

    pts = [(float(pos[i, 0]), float(pos[i, 1])) for i in range(n)]
    diff = pos[:, None, :] - pos[None, :, :]
    d2 = np.einsum("ijk,ijk->ij", diff, diff)
    _check_separation(d2)

    domain_verts = list(domain.vertices)
    domain_tags = [FaceTag.boundary(k) for k in range(len(domain_verts))]

    cells = []
    face_length: dict[tuple[int, int], float] = {}
    for i in range(n):
        order = np.argsort(d2[i], kind="stable")
        verts = domain_verts
        tags = domain_tags
        xi, yi = pts[i]
        r2 = max((vx - xi) ** 2 + (vy - yi) ** 2 for vx, vy in verts)
        for j in order:
            j = int(j)
            if j == i:
                continue
            if d2[i, j] >= 4.0 * r2:
                break
            xj, yj = pts[j]
            dx, dy = xj - xi, yj - yi
            dn = float(np.hypot(dx, dy))
            nx, ny = dx / dn, dy / dn
            off = nx * 0.5 * (xi + xj) + ny * 0.5 * (yi + yj)
            res = clip_tagged(verts, tags, nx, ny, off, FaceTag.interior(j))
            if res is None:
                raise AgentOutsideDomain(i, f"cell of agent {i} vanished while clipping")
            new_verts, new_tags = res
            if new_verts is not verts:
                verts, tags = new_verts, new_tags
                r2 = max((vx - xi) ** 2 + (vy - yi) ** 2 for vx, vy in verts)
        polygon = ConvexPolygon(tuple(verts))
        faces = tuple(
            Face(verts[k], verts[(k + 1) % len(verts)], tags[k])
            for k in range(len(verts))
        )
        for f in faces:
            if f.tag.kind == INTERIOR:
                face_length[(i, f.tag.index)] = f.length
        cells.append(VoronoiCell(i, polygon, faces))

    by_owner: dict[int, list[tuple[int, float]]] = {}
    for (a, b), length in face_length.items():
        by_owner.setdefault(a, []).append((b, length))
    neighbors = []
    for i in range(n):
        nbrs = [
            b for b, length in by_owner.get(i, ())
            if min(length, face_length.get((b, i), 0.0)) > GEOM_EPS
        ]
        neighbors.append(tuple(sorted(nbrs)))
    return Tessellation(tuple(cells), tuple(neighbors), domain)


def _check_inside(pos, domain):
    planes = domain.edge_normals_offsets()
    normals = np.array([[p[0], p[1]] for p in planes])
    offsets = np.array([p[2] for p in planes])
    signed = pos @ normals.T - offsets
    bad = np.nonzero(np.any(signed >= 0.0, axis=1))[0]
    if bad.size:
        raise AgentOutsideDomain(int(bad[0]))


def _check_separation(d2):
    n = d2.shape[0]
    if n < 2:
        return
    masked = d2 + np.diag(np.full(n, np.inf))
    k = int(np.argmin(masked))
    i, j = divmod(k, n)
    if masked[i, j] <= GEOM_EPS * GEOM_EPS:
        raise CoincidentAgents(min(i, j), max(i, j))


def cell_vertices(tess: Tessellation, i: int):
    """Vertices of cell i with provenance derived from adjacent face tags."""
    cell = tess.cells[i]
    faces = cell.faces
    m = len(faces)
    out = []
    for k in range(m):
        incoming = faces[k - 1].tag
        outgoing = faces[k].tag
        point = faces[k].v1
        if incoming.kind == INTERIOR and outgoing.kind == INTERIOR:
            prov = VertexProvenance("circumcenter", (incoming.index, outgoing.index))
        elif incoming.kind == INTERIOR:
            prov = VertexProvenance("boundary", (incoming.index, outgoing.index))
        elif outgoing.kind == INTERIOR:
            prov = VertexProvenance("boundary", (outgoing.index, incoming.index))
        else:
            # corner of the domain: vertex index equals the outgoing edge index
            prov = VertexProvenance("corner", (outgoing.index,))
        out.append((point, prov))
    return out


def shared_face(tess: Tessellation, i: int, j: int):
    """Endpoints of the face between cells i and j, or None."""
    if j not in tess.neighbors[i]:
        return None
    for f in tess.cells[i].faces:
        if f.tag.kind == INTERIOR and f.tag.index == j:
            return f.v1, f.v2
    return None


def neighbor_histogram(tess: Tessellation) -> dict[int, int]:
    """Histogram of neighbor counts: {count: number of agents}."""
    return dict(sorted(Counter(len(nb) for nb in tess.neighbors).items()))
