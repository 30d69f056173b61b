"""Exception types raised across the package."""


class DrMctsError(Exception):
    """Base class for all package errors."""


class IllegalMove(DrMctsError, ValueError):
    """Move on an occupied cell or on a finished board."""


class NoLegalAction(DrMctsError, ValueError):
    """A policy or selection rule was asked to act in a terminal state."""


class InvalidTemperature(DrMctsError, ValueError):
    pass


class ZeroBehaviorProbability(DrMctsError, ValueError):
    """An importance ratio would divide by a zero behavior probability."""


class EmptySample(DrMctsError, ValueError):
    pass


class BetaOutOfRange(DrMctsError, ValueError):
    pass


class InvalidK(DrMctsError, ValueError):
    pass


class TerminalRoot(DrMctsError, ValueError):
    """Search was started from a finished position."""


class UnknownSuite(DrMctsError, ValueError):
    pass


class IndexOutOfRange(DrMctsError, IndexError):
    pass
