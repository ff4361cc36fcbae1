"""Exception hierarchy shared by every module."""


class CSSPAError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(CSSPAError, ValueError):
    """A parameter lies outside the domain where an operation is defined."""


class DivergenceError(DomainError):
    """A closed form has a vanishing (or negative) denominator."""


class TieError(CSSPAError):
    """Two sampled scores compare equal; a probability-zero event under the model."""


class ProtocolViolation(CSSPAError):
    """A strategy attempted an action the game does not permit."""


class QueryDisabled(ProtocolViolation):
    """A strategy queried its VRF in a round where it may do no computation."""


class UnsupportedConfiguration(CSSPAError):
    """A strategy was asked to play under parameters it is not defined for."""


class NonRecurrenceError(CSSPAError):
    """A renewal cycle exceeded its round cap."""


class ResourceError(CSSPAError):
    """A requested computation exceeds the configured budget."""
