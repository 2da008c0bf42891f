"""Exception hierarchy shared by all modules."""


class RcdError(Exception):
    """Base class for every error raised by this package."""


class NumericDomainError(RcdError, ValueError):
    """A numeric input was outside the domain of an operation (NaN, inf, ...)."""


class RootFindingError(RcdError, ArithmeticError):
    """Polynomial root finding failed.

    The offending polynomial (highest power first) is kept on ``coeffs``.
    """

    def __init__(self, message, coeffs):
        super().__init__(message)
        self.coeffs = list(coeffs)


class AssumptionViolation(RcdError, ValueError):
    """A model breaks the structural assumptions the detector theory relies on.

    ``kind`` is a short machine-readable tag such as ``"cancellation"``,
    ``"repeated_pole"``, ``"not_strictly_proper"``, ``"non_unique_dominant_pole"``,
    ``"unstable"``, ``"disconnected"`` or ``"weight_spectrum"``.
    """

    def __init__(self, kind, message, agent=None):
        super().__init__(message)
        self.kind = kind
        self.agent = agent


class GraphGenerationError(RcdError, RuntimeError):
    """Random graph generation gave up before producing a connected sample."""


class DegenerateProblemError(RcdError, ValueError):
    """The whitened signal carries no energy, so the hypotheses are indistinguishable."""


class ConfigError(RcdError, ValueError):
    """Malformed experiment configuration."""
