"""Exception types raised across the package."""


class ElflowError(Exception):
    """Base class for all package errors."""


class NonPositiveGamma1(ElflowError, ValueError):
    """Rotational viscosity alpha3 - alpha2 is not strictly positive."""


class NonSymmetric(ElflowError, ValueError):
    pass


class NonTraceFree(ElflowError, ValueError):
    pass


class NegativeEta(ElflowError, ValueError):
    pass


class NonPositiveLambda(ElflowError, ValueError):
    pass


class QuadratureMismatch(ElflowError, ArithmeticError):
    """Doubled-node quadrature disagrees with the requested node count."""


class ShapeMismatch(ElflowError, ValueError):
    pass


class NotUnitLength(ElflowError, ValueError):
    pass


class NonFiniteField(ElflowError, FloatingPointError):
    """NaN or Inf appeared in a field, usually a sign of instability."""


class ConfigError(ElflowError, ValueError):
    pass


class CoefficientParseError(ConfigError):
    pass
