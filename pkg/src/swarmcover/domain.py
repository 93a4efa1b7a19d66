"""Time-varying convex domains and their boundary motion.

A domain script maps time to a DomainState: the polygon S(t) plus the
outward normal speed of every boundary edge. Scripts are restricted to
motions that keep each edge's normal speed constant along the edge
(translation and axis-aligned scaling); rotation is rejected when a
keyframe script is validated.

Keyframe interpolation is deliberately anchored so that evaluating at a
keyframe time returns the stored polygon bit-for-bit; the live gateway
leans on this to make command-driven sessions replayable in batch.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass

import numpy as np

from .errors import (
    FaceNotOnBoundary,
    InvalidPolygon,
    NonconvexInterpolation,
    RotatingSegment,
    TimeOutOfRange,
)
from .geometry import ConvexPolygon, outward_normal, point_segment_distance

_TIME_SLACK = 1e-9
_ROTATION_TOL = 1e-9


@dataclass(frozen=True)
class DomainState:
    polygon: ConvexPolygon
    edge_speeds: tuple[float, ...]  # outward normal speed per ccw edge


@dataclass(frozen=True)
class StaticScript:
    polygon: ConvexPolygon

    @property
    def horizon(self) -> float:
        return math.inf

    def at(self, t: float) -> DomainState:
        _check_time(t)
        return DomainState(self.polygon, (0.0,) * len(self.polygon.vertices))


@dataclass(frozen=True)
class CircularTranslationScript:
    """Base polygon translating (without rotation) along a circle.

    The offset is R (cos wt - 1, sin wt), so the polygon starts at its
    base placement and returns to it every period.
    """

    polygon: ConvexPolygon
    radius: float
    omega: float  # rad/s

    def __post_init__(self):
        if not (math.isfinite(self.radius) and math.isfinite(self.omega)):
            raise ValueError("radius and omega must be finite")

    @classmethod
    def from_period(cls, polygon, radius, period):
        if period <= 0:
            raise ValueError("period must be positive")
        return cls(polygon, radius, 2.0 * math.pi / period)

    @property
    def horizon(self) -> float:
        return math.inf

    def at(self, t: float) -> DomainState:
        _check_time(t)
        wt = self.omega * t
        ox = self.radius * (math.cos(wt) - 1.0)
        oy = self.radius * math.sin(wt)
        vx = -self.radius * self.omega * math.sin(wt)
        vy = self.radius * self.omega * math.cos(wt)
        verts = tuple((x + ox, y + oy) for x, y in self.polygon.vertices)
        m = len(verts)
        speeds = []
        for k in range(m):
            nx, ny = outward_normal(verts[k], verts[(k + 1) % m])
            speeds.append(nx * vx + ny * vy)
        return DomainState(ConvexPolygon(verts), tuple(speeds))


class KeyframeScript:
    """Piecewise-linear vertex interpolation between timed polygons."""

    def __init__(self, times, polygons):
        times = tuple(float(t) for t in times)
        polys = []
        for p in polygons:
            if isinstance(p, ConvexPolygon):
                polys.append(p.vertices)
            else:
                polys.append(ConvexPolygon.from_points(p).vertices)
        if len(times) != len(polys):
            raise ValueError("times and polygons differ in length")
        if len(times) < 2:
            raise ValueError("need at least two keyframes")
        counts = {len(p) for p in polys}
        if len(counts) != 1:
            raise ValueError("keyframe polygons must share a vertex count")
        for a, b in zip(times, times[1:]):
            if not b > a:
                raise ValueError("keyframe times must be strictly increasing")
        self.times = times
        self.polygons = tuple(polys)
        _validate_segments(self.times, self.polygons)

    @property
    def horizon(self) -> float:
        return self.times[-1]

    def at(self, t: float) -> DomainState:
        _check_time(t)
        return keyframe_state(self.times, self.polygons, t)


def _validate_segments(times, polys):
    samples = np.linspace(0.0, 1.0, 9)
    for k in range(len(times) - 1):
        dt = times[k + 1] - times[k]
        a = polys[k]
        b = polys[k + 1]
        m = len(a)
        vel = [((b[i][0] - a[i][0]) / dt, (b[i][1] - a[i][1]) / dt) for i in range(m)]
        for u in samples[1:-1]:
            verts = tuple(
                (a[i][0] + u * (b[i][0] - a[i][0]), a[i][1] + u * (b[i][1] - a[i][1]))
                for i in range(m)
            )
            try:
                ConvexPolygon(verts)
            except InvalidPolygon as err:
                raise NonconvexInterpolation(
                    f"segment {k} nonconvex at fraction {u:.3f}: {err}"
                ) from err
        for i in range(m):
            v1 = vel[i]
            v2 = vel[(i + 1) % m]
            nx, ny = outward_normal(a[i], a[(i + 1) % m])
            mismatch = abs(nx * v1[0] + ny * v1[1] - nx * v2[0] - ny * v2[1])
            scale = max(1.0, math.hypot(*v1), math.hypot(*v2))
            if mismatch > _ROTATION_TOL * scale:
                raise RotatingSegment(
                    f"segment {k} edge {i}: normal speed varies along the edge "
                    f"(mismatch {mismatch:.3e}); only translation and "
                    "axis-aligned scaling are supported"
                )


def keyframe_state(times, polys, t: float) -> DomainState:
    """Interpolated DomainState of a raw keyframe list at time t.

    Exact keyframe hits return the stored polygon bitwise. Edge speeds use
    the segment starting at t (right-continuous), except at the final
    keyframe which keeps the last segment's speeds.
    """
    t0, t1 = times[0], times[-1]
    if t < t0 - _TIME_SLACK or t > t1 + _TIME_SLACK:
        raise TimeOutOfRange(f"t={t!r} outside keyframe span [{t0}, {t1}]")
    t = min(max(t, t0), t1)
    if t == t1:
        k = len(times) - 2
        verts = polys[-1]
    else:
        k = bisect_right(times, t) - 1
        if t == times[k]:
            verts = polys[k]
        else:
            u = (t - times[k]) / (times[k + 1] - times[k])
            a = polys[k]
            b = polys[k + 1]
            verts = tuple(
                (ax + u * (bx - ax), ay + u * (by - ay))
                for (ax, ay), (bx, by) in zip(a, b)
            )
    dt = times[k + 1] - times[k]
    a = polys[k]
    b = polys[k + 1]
    m = len(verts)
    vel = [((b[i][0] - a[i][0]) / dt, (b[i][1] - a[i][1]) / dt) for i in range(m)]
    speeds = []
    for i in range(m):
        nx, ny = outward_normal(verts[i], verts[(i + 1) % m])
        wx = 0.5 * (vel[i][0] + vel[(i + 1) % m][0])
        wy = 0.5 * (vel[i][1] + vel[(i + 1) % m][1])
        speeds.append(nx * wx + ny * wy)
    return DomainState(ConvexPolygon(verts), tuple(speeds))


def domain_at(script, t: float) -> DomainState:
    """Evaluate any domain script at time t."""
    return script.at(t)


def face_velocity(state: DomainState, v1, v2) -> float:
    """Outward normal speed of the domain edge hosting the face (v1, v2)."""
    verts = state.polygon.vertices
    m = len(verts)
    for k in range(m):
        a = verts[k]
        b = verts[(k + 1) % m]
        d1, _ = point_segment_distance(v1, a, b)
        d2, _ = point_segment_distance(v2, a, b)
        if d1 <= 1e-9 and d2 <= 1e-9:
            return state.edge_speeds[k]
    raise FaceNotOnBoundary(f"face ({v1!r}, {v2!r}) lies on no domain edge")


def _check_time(t: float):
    if not math.isfinite(t):
        raise TimeOutOfRange(f"non-finite time {t!r}")
