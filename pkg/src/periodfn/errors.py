"""Exception hierarchy shared by all modules."""


class PeriodFnError(Exception):
    """Base class for every error raised by the package."""


class DomainError(PeriodFnError, ValueError):
    """Evaluation requested outside the admissible interval of a function."""


class EnergyOutOfAnnulus(PeriodFnError, ValueError):
    """Energy is not inside the period annulus (0, E_star)."""


class NoConjugate(PeriodFnError):
    pass


class QuadratureFailure(PeriodFnError):
    pass


class EventNotFound(PeriodFnError):
    pass


class DriftExceeded(PeriodFnError):
    pass


class NoCertifiedRegion(PeriodFnError):
    pass


class NonPositiveLinearPart(PeriodFnError, ValueError):
    pass


class CaseMismatch(PeriodFnError):
    pass


class NoRootInAnnulus(PeriodFnError):
    pass


class NoBracket(PeriodFnError):
    pass


class UnknownExample(PeriodFnError, KeyError):
    pass


class InvalidGeometry(PeriodFnError, ValueError):
    pass


class NoSignChange(PeriodFnError):
    pass


class ConfigError(PeriodFnError, ValueError):
    """Malformed CLI or config-file input."""

