"""Exception types shared across the package."""


class InvalidArgument(ValueError):
    """A caller-supplied value violates a documented precondition."""


class ShapeError(ValueError):
    """Array dimensions do not match what an operation requires."""


class StateError(RuntimeError):
    """An operation was invoked out of order (e.g. backward before forward)."""
