"""Exception hierarchy shared by the analysis modules."""


class BDDynError(Exception):
    """Base class for every error raised by this package."""


class DomainError(BDDynError, ValueError):
    """Input outside the model's domain (non-finite or negative state, bad parameter)."""


class UsageError(BDDynError, ValueError):
    """Caller passed an argument combination the operation does not accept."""


class EquilibriumError(BDDynError):
    """No feasible interior equilibrium exists at the requested growth rate."""

    def __init__(self, r, message=None):
        self.r = r
        super().__init__(message or f"no feasible interior equilibrium at r={r!r}")


class NoBifurcationInBracket(BDDynError):
    """C2 does not change sign on the supplied bracket."""


class NotAHopfPoint(BDDynError):
    """C2 vanishes but k2 <= 0, so there is no purely imaginary pair."""


class SingularBasisError(BDDynError):
    """The closed-form eigenbasis has a vanishing denominator."""


class DegenerateHopfError(BDDynError):
    """The center-manifold coefficient system is singular."""


class IntegrationError(BDDynError):
    """Integration stopped early; ``trajectory`` holds what was computed."""

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class StiffnessError(IntegrationError):
    """Step size fell below the representable minimum."""


class DivergenceError(IntegrationError):
    """State became non-finite."""
