"""Exception types shared across the package."""


class GtdError(Exception):
    """Base class for all gtdkit errors."""


class ExpressionSyntaxError(GtdError):
    """Raised when expression text cannot be parsed.

    Carries the byte offset of the offending position.
    """

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class UnknownIdentifierError(GtdError):
    """Raised for an identifier that is not declared and not a function."""

    def __init__(self, name: str, offset: int):
        super().__init__(f"unknown identifier '{name}' (offset {offset})")
        self.name = name
        self.offset = offset


class UnboundNameError(GtdError):
    """Raised when evaluation cannot resolve a name to a value."""

    def __init__(self, name: str):
        super().__init__(f"unbound name '{name}'")
        self.name = name


class DomainError(GtdError):
    """Raised when evaluation leaves the real domain (sqrt/log/pow/div)."""


class ComputationError(GtdError):
    """Raised when an internal numerical consistency check fails."""


class ValidationError(GtdError):
    """Raised when a system violates one of its invariants."""


class LoadError(GtdError):
    """Raised when a system file cannot be read or decoded."""


class SamplingError(GtdError):
    """Raised when no admissible sample points could be drawn."""


class NoHomogeneityError(GtdError):
    """Raised when weights are required but none could be determined."""


class SingularRepresentation(GtdError):
    """Raised when the chosen representation variable has a vanishing
    conjugate intensive (e.g. the extremal locus T = 0)."""

    def __init__(self, variable: str, intensive: str, value: float):
        super().__init__(
            f"singular representation '{variable}': intensive {intensive} = {value:.3e}"
        )
        self.variable = variable
        self.intensive = intensive
        self.value = value


class DegenerateConformalFactor(GtdError):
    """Raised when the conformal prefactor sum(xi_a * I_a * E^a) vanishes."""
