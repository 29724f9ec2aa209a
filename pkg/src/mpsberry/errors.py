"""Exception and warning types shared across the package."""


class MpsBerryError(Exception):
    """Base class for all errors raised by mpsberry."""


class DimensionError(MpsBerryError, ValueError):
    pass


class ConvergenceError(MpsBerryError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class InjectivityError(MpsBerryError):
    pass


class EmptyStateError(MpsBerryError):
    pass


class CapacityError(MpsBerryError):
    pass


class PhaseTransitionError(MpsBerryError):
    pass


class NotCloseError(MpsBerryError):
    """Leading eigenvalue of a mixed transfer map is not separated in modulus."""

    def __init__(self, message, edge=None, gap=None):
        super().__init__(message)
        self.edge = edge
        self.gap = gap


class ChargeTransitionError(MpsBerryError):
    pass


class RefinementError(MpsBerryError):
    pass


class IllConditionedTriangleError(MpsBerryError):
    def __init__(self, message, face=None):
        super().__init__(message)
        self.face = face


class ConstructionError(MpsBerryError):
    pass


class DegeneratePatchError(MpsBerryError):
    pass


class NotSymmetricError(MpsBerryError):
    pass


class InconsistentGaugeError(MpsBerryError):
    pass


class SolverError(MpsBerryError):
    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace or []


class SymmetrizationError(SolverError):
    def __init__(self, message, tensors=None, fidelity=None, trace=None):
        super().__init__(message, trace)
        self.tensors = tensors
        self.fidelity = fidelity


class ConfigError(MpsBerryError, ValueError):
    pass


class DegeneracyWarning(UserWarning):
    """Leading eigenvalue nearly degenerate in modulus."""


class RefinementWarning(UserWarning):
    """A tetrahedron carries a curvature too large for the real-valued reading."""
