"""Exception hierarchy shared by all occupath modules."""


class OccupathError(Exception):
    """Base class for all library errors."""


class InvalidArgumentError(OccupathError, ValueError):
    """A caller-supplied argument violates a documented precondition."""


class UnsupportedOrderError(InvalidArgumentError):
    """Requested derivative order is not available for this feature map."""


class NumericalError(OccupathError):
    """A numerical operation failed (factorization, non-finite values)."""


class DegenerateDataError(OccupathError):
    """Training data cannot support a model (e.g. single-class labels)."""


class DomainError(OccupathError):
    """A query point lies outside the supported domain."""


class EmptyLogError(OccupathError):
    """A sensor log contained no parseable scan records."""


class InvalidPoseError(InvalidArgumentError):
    """A sensor pose lies inside an obstacle."""


class InvalidEndpointError(OccupathError):
    """A start or goal configuration is occupied or outside the map."""


class BoundaryEnforcementError(OccupathError):
    """Boundary correction failed to reach the requested residual."""


class ConfigError(OccupathError):
    """A configuration file or flag set is invalid."""
