"""Exception types raised across the package."""


class NeudirError(Exception):
    """Base class for all package errors."""


class GeometryError(NeudirError, ValueError):
    pass


class SelfIntersecting(GeometryError):
    pass


class DegenerateEdge(GeometryError):
    pass


class EarClipFailure(GeometryError):
    def __init__(self, message, vertex=None):
        super().__init__(message)
        self.vertex = vertex


class NotEnoughDof(NeudirError, ValueError):
    pass


class SolverFailure(NeudirError, RuntimeError):
    pass


class MassNotPD(SolverFailure):
    pass


class NoConvergence(SolverFailure):
    def __init__(self, message, best_residual=None):
        super().__init__(message)
        self.best_residual = best_residual


class NonConvexCorner(NeudirError, ValueError):
    pass


class BracketFailure(NeudirError, RuntimeError):
    def __init__(self, message, interval=None):
        super().__init__(message)
        self.interval = interval


class MetadataMismatch(NeudirError, ValueError):
    pass


class NotEnoughEigenvalues(NeudirError, ValueError):
    pass


class NonMonotone(NeudirError, ArithmeticError):
    def __init__(self, message, values=None):
        super().__init__(message)
        self.values = values
