"""Coverage control for robot swarms on time-varying convex domains."""

__version__ = "0.1.0"

from .geometry import ConvexPolygon, HalfPlane  # noqa: F401
from .tessellation import Tessellation, voronoi_partition  # noqa: F401
