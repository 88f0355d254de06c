"""Exception hierarchy shared by every module."""


class GeometryError(ValueError):
    """Base class for all numerical-geometry failures."""


class DomainExceeded(GeometryError):
    """A finite-difference stencil left the curve's parameter domain."""


class ToleranceNotMet(GeometryError):
    """Adaptive quadrature exhausted its subdivision budget."""


class SpeedZero(GeometryError):
    """The curve is not regular at the requested parameter."""


class NormalUndefined(GeometryError):
    """Curvature vanishes, so N, B and the torsion are meaningless."""


class TorsionCurvatureDegenerate(GeometryError):
    """kappa**2 + tau**2 is too small for the slant-helix quantities."""


class CurvatureSingular(GeometryError):
    """The closed-form curvature denominator vanishes."""


class ParameterSingular(GeometryError):
    """sin(theta) = 0: the family parametrization stalls there."""


class InvalidParams(GeometryError):
    """Family parameters violate their invariants."""


class InvalidRatio(GeometryError):
    """A closure ratio p/q that no real a can produce."""


class DegenerateRecovery(GeometryError):
    """theta' vanishes, so the slant constant cannot be recovered."""


class UnwrapFailed(GeometryError):
    """Angle samples are too coarse to unwrap continuously."""


class TorsionDegenerate(GeometryError):
    """|tau| too small for the Wong criteria that divide by it."""


class CurvatureDegenerate(GeometryError):
    """kappa <= 1 where the Y-indicatrix formulas need kappa > 1."""


class NotOnSphere(GeometryError):
    """The curve does not lie on the unit sphere."""


class SphereFitFailed(GeometryError):
    """The reconstructed samples do not fit a sphere tightly enough."""

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual
