"""Exception hierarchy shared across the package."""


class PolyflatError(Exception):
    """Base class for all errors raised by polyflat."""


class InvalidInputError(PolyflatError):
    """Malformed or dimensionally inconsistent input."""


class InconsistencyError(PolyflatError):
    """Stored metadata contradicts the data (e.g. a bounded flag on an unbounded region)."""


class EmptyFaceError(PolyflatError):
    """The requested facet index set does not cut out a nonempty face."""


class NonSmoothFaceError(PolyflatError):
    """A face chart basis does not extend to a basis of the ambient lattice."""


class DomainError(PolyflatError):
    """A point lies outside the domain of the requested evaluation."""


class FaceBoundaryError(DomainError):
    """A face-interior computation ran into the relative boundary of the face."""


class NumericalError(PolyflatError):
    """An iterative numerical procedure failed to converge."""

    def __init__(self, message, residual=None, trace=None):
        super().__init__(message)
        self.residual = residual
        self.trace = trace


class NoSolutionError(NumericalError):
    """The target of a gradient-map inversion is not attained on the domain."""


class NotTorifiableError(PolyflatError):
    """The polytope cannot carry a mixture family (zero-sum condition fails)."""


class DegenerateError(PolyflatError):
    """Degenerate data, e.g. a nonpositive offset sum when normalizing probabilities."""
