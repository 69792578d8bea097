"""
This module contains the exceptions raised by the sbpglue framework.

Every exception carries an ``exit_code`` that the command line interface returns
when the exception escapes a subcommand.
"""

class SbpGlueException(Exception):
    """
    Exceptions raised by the sbpglue framework.
    """

    exit_code = 1

    def __init__(self, message: str):
        """
        Initializes the exception with the given message.
        """
        super().__init__(message)

    @property
    def message(self) -> str:
        return str(self)


class ConfigParse(SbpGlueException):
    """A configuration file or flag could not be parsed or failed validation."""

    exit_code = 2


class UnsupportedOrder(SbpGlueException):
    """The requested boundary order is outside the supported families."""

    exit_code = 10


class GridTooSmall(SbpGlueException):
    """The grid cannot hold the boundary closures or projection stencils without overlap."""

    exit_code = 11


class InconsistentConstraints(SbpGlueException):
    """A least-squares construction left a residual above its tolerance."""

    exit_code = 12


class NotNested(SbpGlueException):
    """A glue space is not contained in the space it is mapped into."""

    exit_code = 13


class PartitionMismatch(SbpGlueException):
    """The interface partitions of the two sides do not both tile [-1, 1]."""

    exit_code = 14


class NonPositiveJacobian(SbpGlueException):
    """A coordinate transform or element map has J <= 0 at an evaluation point."""

    exit_code = 15


class NonPositiveSurfaceJacobian(SbpGlueException):
    """A face or edge has a surface Jacobian <= 0."""

    exit_code = 16


class ShapeMismatch(SbpGlueException):
    """Operator, metric, trace or state shapes disagree."""

    exit_code = 17


class NegativeAlpha(SbpGlueException):
    """The upwind parameter alpha is negative."""

    exit_code = 18


class UnresolvedFace(SbpGlueException):
    """A block face has neither a boundary condition nor an interface."""

    exit_code = 19


class SingularMass(SbpGlueException):
    """A DG element mass matrix is not symmetric positive definite."""

    exit_code = 20


class GlueOrderTooLow(SbpGlueException):
    """The glue polynomial order cannot represent the DG edge traces."""

    exit_code = 21


class QuadratureTooCoarse(SbpGlueException):
    """The DG edge quadrature does not reproduce the edge mass matrix."""

    exit_code = 22


class SystemTooLarge(SbpGlueException):
    """The coupled system is too large for dense operator assembly."""

    exit_code = 23


class NonFiniteState(SbpGlueException):
    """The time integrator produced NaN or infinite values."""

    exit_code = 24


class IncompatibleProjection(SbpGlueException):
    """A constructed or composed projection pair violates its compatibility relation."""

    exit_code = 25


class CoefficientFormat(SbpGlueException):
    """A coefficient file is malformed."""

    exit_code = 26


class InvalidMaterial(SbpGlueException):
    """Density or bulk modulus is not strictly positive."""

    exit_code = 27
