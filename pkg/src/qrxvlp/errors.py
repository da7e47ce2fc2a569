"""Exception types raised across the package."""


class QrxVlpError(Exception):
    """Base class for all package errors."""


class BehindBaseline(QrxVlpError, ValueError):
    """Transmitter is not ahead of the receiver baseline (y <= 0)."""


class NonPositiveSpot(QrxVlpError, ValueError):
    """Optical configuration yields a spot diameter <= 0."""


class ZeroIllumination(QrxVlpError, ValueError):
    """Spot misses every quadrant of the photodiode."""


class BijectionViolated(QrxVlpError, ValueError):
    """Forward map is not strictly monotone on the sampled grid."""


class LinkDown(QrxVlpError):
    """Receiver is outside the transmitter cone or vice versa."""


class DecodeFailure(QrxVlpError):
    """Too many bits fell below the demodulator energy margin."""


class InvalidPower(QrxVlpError, ValueError):
    """Sum of estimated quadrant powers is not positive."""


class DegenerateGeometry(QrxVlpError, ValueError):
    """Bearing rays are (nearly) parallel."""


class NegativeRange(QrxVlpError, ValueError):
    """Triangulated point lies behind the receiver baseline."""


class Unavailable(QrxVlpError):
    """Estimate is flagged invalid and carries no error value."""


class SingularFim(QrxVlpError, ValueError):
    """Fisher information matrix cannot be inverted reliably."""


class InsufficientTrials(QrxVlpError, ValueError):
    """Too few Monte Carlo trials requested."""


class InvalidParams(QrxVlpError, ValueError):
    """Scenario or run parameters are out of their validity bounds."""
