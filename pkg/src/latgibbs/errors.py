"""Exception hierarchy shared across the package.

Every error raised by the numerical code derives from LatGibbsError so the
CLI can map failures onto exit codes without pattern-matching messages.
"""


class LatGibbsError(Exception):
    """Base class for all package errors. CLI exit code 4 (numerical/domain)."""

    exit_code = 4


class SingularBasisError(LatGibbsError):
    """Basis matrix is singular or numerically rank-deficient."""


class DomainError(LatGibbsError):
    """A parameter is outside its valid domain (delta, alpha, sigma, ...)."""


class SupportError(LatGibbsError):
    """Invalid sampling support: empty alphabet, start outside support, or a
    support incompatible with the requested chain."""


class EnumerationLimitError(LatGibbsError):
    """Exact enumeration was requested over too large a state space."""


class SchemaError(LatGibbsError):
    """A config file or record violates its schema. CLI exit code 2."""

    exit_code = 2
