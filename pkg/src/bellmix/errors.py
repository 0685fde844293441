"""Exception hierarchy.

Every error carries a stable ``exit_code`` so the command line front end can
map failures to distinct process exit codes.
"""


class BellmixError(Exception):
    exit_code = 1


class InvalidState(BellmixError, ValueError):
    exit_code = 10


class NotHermitian(InvalidState):
    pass


class NotUnitTrace(InvalidState):
    pass


class NotPSD(InvalidState):
    pass


class NotAState(InvalidState):
    """A correlator tensor that does not reconstruct a physical state."""


class DimensionMismatch(BellmixError, ValueError):
    exit_code = 11


class BadPartyIndex(BellmixError, ValueError):
    exit_code = 12


class WrongPartyCount(BellmixError, ValueError):
    exit_code = 12


class BadPartyCount(BellmixError, ValueError):
    exit_code = 12


class OutOfRange(BellmixError, ValueError):
    exit_code = 13


class BadSpectrum(BellmixError, ValueError):
    exit_code = 14


class NotNormalized(BellmixError, ValueError):
    exit_code = 14


class NotOrthogonal(BellmixError, ValueError):
    exit_code = 14


class NotBellDiagonal(BellmixError, ValueError):
    exit_code = 15


class NoConvergence(BellmixError, RuntimeError):
    exit_code = 16


class SchemaMismatch(BellmixError, ValueError):
    exit_code = 17


class ParseError(BellmixError, ValueError):
    exit_code = 18
