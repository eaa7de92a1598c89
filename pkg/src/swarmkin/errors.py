"""Exception hierarchy shared by all modules."""


class SwarmkinError(Exception):
    """Base class for every error raised by this package."""


class EmptyMeasure(SwarmkinError, ValueError):
    pass


class NonpositiveMass(SwarmkinError, ValueError):
    pass


class DimensionMismatch(SwarmkinError, ValueError):
    pass


class SizeCapExceeded(SwarmkinError, ValueError):
    pass


class NotOneDimensional(SwarmkinError, ValueError):
    pass


class NotLipschitz(SwarmkinError, ValueError):
    pass


class SupportViolation(SwarmkinError, ValueError):
    pass


class InvalidSpec(SwarmkinError, ValueError):
    pass


class NonFiniteState(SwarmkinError, FloatingPointError):
    def __init__(self, t, message=None):
        self.t = float(t)
        super().__init__(message or f"non-finite state at t={self.t:.6g}")


class ShockSuspected(SwarmkinError, RuntimeError):
    def __init__(self, t, indicator, threshold):
        self.t = float(t)
        self.indicator = float(indicator)
        self.threshold = float(threshold)
        super().__init__(
            f"max|du/dx|*dx = {self.indicator:.3g} exceeds {self.threshold:.3g} at t={self.t:.4g}"
        )


class DegenerateInitialDistance(SwarmkinError, ValueError):
    pass


class SolverFailure(SwarmkinError, RuntimeError):
    pass
