"""Exception types shared across the package."""


class CapCoverError(Exception):
    """Base class for all capcover errors."""


class DegenerateInput(CapCoverError):
    """Input point set is not affinely full-dimensional."""


class Unbounded(CapCoverError):
    """Halfspace intersection is unbounded (dual hull misses the origin)."""


class DimensionError(CapCoverError):
    """Dimension outside the supported range 2 <= d <= 5 (1 allowed internally)."""


class OutsideBody(CapCoverError):
    """Query point lies outside the body."""


class OriginQuery(CapCoverError):
    """Ray-based query issued at the origin."""


class OriginPolar(CapCoverError):
    """Polar of the origin point / a hyperplane through the origin."""


class CenterNotInterior(CapCoverError):
    """Polar center is not strictly interior to the polytope."""


class NotConverged(CapCoverError):
    """Iterative fit failed to reach tolerance."""


class DepthTooLarge(CapCoverError):
    """Requested boundary depth exceeds the depth of the origin."""


class WidthTooLarge(CapCoverError):
    """Requested cap width exceeds the body's width in that direction."""


class BoundaryPoint(CapCoverError):
    """Macbeath center is (numerically) on the boundary."""


class EpsilonTooLarge(CapCoverError):
    """epsilon is too large relative to the body's inradius."""


class GeometryInvalid(CapCoverError):
    """Geometric preconditions of an operation are violated."""


class ConstantsInfeasible(CapCoverError):
    """Layer constants produce a total support gap above epsilon."""


class NotNested(CapCoverError):
    """Inner polytope has a vertex outside the enclosing body."""


class ConfigError(CapCoverError):
    """Bad CLI / experiment configuration."""
