"""Exception types raised by the library."""


class InvalidArgument(ValueError):
    """An input is outside the range an operation accepts."""


class DomainViolation(InvalidArgument):
    """An oriented angle falls outside J = [-pi/2, pi/2]."""

    def __init__(self, index: int, angle: float):
        self.index = index
        self.angle = angle
        super().__init__(
            f"oriented angle {angle:.6g} at bond {index} lies outside [-pi/2, pi/2]"
        )


class ScalingUndefined(InvalidArgument):
    """The near-critical scaling 1/mu_alpha is undefined (alpha >= 4)."""


class SingularPoint(InvalidArgument):
    """alpha = 4 is the singular point of the equivalence; nothing to evaluate."""


class CostGuard(InvalidArgument):
    """An exhaustive search was refused because it would be too expensive."""
