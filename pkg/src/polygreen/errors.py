"""Exception types shared across the package."""


class PolyGreenError(Exception):
    """Base class for every error raised by this package."""


class PreconditionError(PolyGreenError):
    """Arguments violate a documented precondition."""


class DomainError(PolyGreenError):
    """A point lies outside the region where a kernel or map is defined."""


class SingularityError(PolyGreenError):
    """Evaluation requested on the diagonal x = y of a Green kernel."""


class SingularSystemError(PolyGreenError):
    """A modal interface system could not be solved reliably."""

    def __init__(self, message, condition_estimate=None):
        super().__init__(message)
        self.condition_estimate = condition_estimate


class StencilMarginError(PolyGreenError):
    """A finite-difference stencil would leave the admissible domain."""
