"""Exception types shared across the package.

Every error raised by qglab's own logic derives from QglabError so callers
can distinguish library failures from programming mistakes.  Validation
errors carry enough context (ids, values) to be actionable from the CLI.
"""


class QglabError(Exception):
    """Base class for all qglab errors."""


class GraphValidationError(QglabError):
    """Base class for graph construction failures."""


class DuplicateId(GraphValidationError):
    pass


class DanglingEndpoint(GraphValidationError):
    pass


class SelfLoopEdge(GraphValidationError):
    pass


class NonPositiveLength(GraphValidationError):
    pass


class DisconnectedGraph(GraphValidationError):
    pass


class PotentialError(QglabError):
    """Base class for potential parsing / evaluation failures."""


class ExpressionSyntaxError(PotentialError):
    """Raised when an expression string does not conform to the grammar.

    Carries the byte offset of the offending token in ``position``.
    """

    def __init__(self, message, position=None):
        if position is not None:
            message = "%s (at offset %d)" % (message, position)
        super().__init__(message)
        self.position = position


class UnknownFunction(ExpressionSyntaxError):
    """An identifier used as a function is not one of sin/cos/exp/sqrt/abs."""


class UnknownIdentifier(ExpressionSyntaxError):
    """A bare identifier other than 'x' or 'pi' appeared in an expression."""


class DomainError(PotentialError):
    """A potential evaluated to a non-finite value inside its edge."""


class IntegrationError(QglabError):
    """Base class for ODE propagation failures."""


class StepFailure(IntegrationError):
    """The adaptive integrator could not meet the error target."""


class WronskianViolation(IntegrationError):
    """The propagated fundamental system lost its unit Wronskian."""


class QuadratureError(QglabError):
    """Adaptive quadrature failed to converge to the requested tolerance."""


class MeshTooLarge(QglabError):
    """A discretization request exceeds the configured DOF budget."""


class MassNotPositiveDefinite(QglabError):
    """The assembled mass matrix failed its positive definiteness check."""


class SpectrumError(QglabError):
    """Eigenvalue computation failed or could not be certified internally."""


class DiscontinuousAtVertex(QglabError):
    """A sampled test function disagrees across edge ends at a vertex."""


class DegenerateNorm(QglabError):
    """A Rayleigh quotient was requested for a function with zero L2 norm."""
