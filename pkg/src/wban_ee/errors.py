"""Exception hierarchy shared by every module of the package."""


class WbanError(Exception):
    """Base class for all errors raised by wban_ee."""


class ValidationError(WbanError, ValueError):
    """A parameter record or configuration violates one of its invariants."""


class ParseError(WbanError, ValueError):
    """A configuration file could not be parsed."""


class ReducibleChain(WbanError):
    """The harvest chain has more than one closed class; no unique steady state."""


class MalformedProblem(WbanError, ValueError):
    pass


class TooLarge(WbanError, ValueError):
    """An exponential-time oracle was asked to handle too many variables."""


class Cycling(WbanError, RuntimeError):
    pass


class NoActiveSensors(WbanError):
    pass


class InfeasibleSlot(WbanError):
    """The per-slot LP is infeasible, i.e. the battery bounds are inconsistent."""


class DegenerateAlpha(WbanError):
    pass


class EnergyViolation(WbanError, RuntimeError):
    """A battery fell below its minimum level after a slot."""
