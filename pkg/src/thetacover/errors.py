"""Exception types shared across the package."""


class CoverError(Exception):
    """Base class for every error raised by thetacover."""


class InvalidArgumentError(CoverError, ValueError):
    """Non-finite input, bad parameter, or a violated precondition."""


class PoleProximityError(CoverError):
    """Evaluation requested too close to a pole or lattice point."""


class ConstructionError(CoverError):
    """A covering map was requested for a divisor that does not validate."""

    def __init__(self, message, failures=()):
        super().__init__(message)
        self.failures = tuple(failures)


class CompletionError(CoverError):
    """No admissible solution of the lattice condition in range."""


class GenerationError(CoverError):
    """Random divisor generation exhausted its retry budget."""


class RootFindingError(CoverError):
    """Simultaneous polynomial root iteration failed to converge."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class QuadratureError(CoverError):
    """Adaptive contour quadrature hit its refinement limit."""

    def __init__(self, message, worst_panel=None):
        super().__init__(message)
        self.worst_panel = worst_panel


class ContourError(CoverError):
    """Malformed contour, or a contour passing too close to a singularity."""
