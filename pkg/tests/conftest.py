from __future__ import annotations

import numpy as np
import pytest

from swarmcover.geometry import ConvexPolygon


@pytest.fixture
def unit_square():
    return ConvexPolygon.from_points([(0, 0), (1, 0), (1, 1), (0, 1)])


@pytest.fixture
def pentagon():
    # generic convex pentagon used by several oracle cross-checks
    return ConvexPolygon.from_points(
        [(0.1, 0.0), (0.9, 0.1), (1.0, 0.7), (0.4, 1.0), (-0.1, 0.5)]
    )


def sample_inside(poly: ConvexPolygon, n: int, rng: np.random.Generator, margin=1e-6):
    """Rejection-sample n points strictly inside poly."""
    arr = poly.as_array()
    lo = arr.min(axis=0)
    hi = arr.max(axis=0)
    out = []
    while len(out) < n:
        q = rng.uniform(lo, hi)
        if poly.contains(q, tol=-margin):
            out.append(q)
    return np.array(out)
