"""Error taxonomy shared across the package.

Every failure mode callers are expected to handle gets its own class so
tests and the CLI can match on type rather than message text.
"""


class CoverageError(Exception):
    """Base class for all package-specific errors."""


class InvalidPolygon(CoverageError):
    """Vertex list is not a counterclockwise convex polygon."""


class DegenerateCell(CoverageError):
    """Cell area fell below the empty-area threshold."""


class CollinearGenerators(CoverageError):
    """Three generators are too close to a common line for a circumcenter."""


class CoincidentGenerators(CoverageError):
    """Two generators coincide within the geometric tolerance."""


class DegenerateFace(CoverageError):
    """Face endpoints coincide; no direction or normal is defined."""


class AgentOutsideDomain(CoverageError):
    def __init__(self, index, message=None):
        self.index = index
        super().__init__(message or f"agent {index} lies outside the domain")


class CoincidentAgents(CoverageError):
    def __init__(self, i, j, message=None):
        self.pair = (i, j)
        super().__init__(message or f"agents {i} and {j} coincide")


class QuadratureNonConvergence(CoverageError):
    """Adaptive quadrature hit maximum refinement without meeting tolerance."""


class SingularSystem(CoverageError):
    """The implicit control-law system matrix is numerically singular."""


class TimeOutOfRange(CoverageError):
    """Requested time lies outside the domain script's keyframe span."""


class NonconvexInterpolation(CoverageError):
    """A keyframe segment passes through a nonconvex polygon."""


class RotatingSegment(CoverageError):
    """Keyframe segment rotates an edge; edge normal speeds are not constant."""


class FaceNotOnBoundary(CoverageError):
    """Queried face does not lie on any domain boundary edge."""


class WindowTooLong(CoverageError):
    """Steady-state window exceeds the logged time span."""


class InvalidScenario(CoverageError):
    """Scenario file or config fails schema or semantic validation."""
