"""Exception hierarchy shared by all modules."""


class SteeringError(ValueError):
    """Base class for every error raised by qsteer."""


class InvalidState(SteeringError):
    """Input violates a DensityMatrix / ThetaMatrix invariant."""


class NotPhysical(SteeringError):
    """A Theta matrix or geometric data set does not correspond to a positive state."""


class NotPSD(SteeringError):
    pass


class Superluminal(SteeringError):
    pass


class ProductState(SteeringError):
    """Bob's Bloch vector has unit length; the ellipsoid is a single point."""


class Singular(SteeringError):
    pass


class NotPositive(SteeringError):
    """POVM element outside the forward light cone."""


class InternalInconsistency(SteeringError):
    """Two routes that must agree analytically disagree numerically."""


class BadDecomposition(SteeringError):
    pass


class Unreachable(SteeringError):
    """The requested ensemble cannot be steered to by any POVM."""


class NotSeparable(SteeringError):
    pass


class SimplexNotFound(SteeringError):
    """Tangent-simplex search exhausted its budget."""


class NotTangent(SteeringError):
    pass


class Incompatible(SteeringError):
    """Geometric data admits no orthogonal matrix solving the reconstruction constraint."""


class LengthMismatch(SteeringError):
    pass
