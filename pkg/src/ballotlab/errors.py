"""Exception types raised across the library.

Every error that a caller is expected to catch and act on (e.g. falling back
from exact DP to Monte Carlo on StateSpaceTooLargeError) lives here.
"""


class BallotLabError(Exception):
    """Base class for all ballotlab errors."""


class SingleAtomError(BallotLabError):
    """Lattice analysis needs at least two distinct atom values."""


class NotFiniteSupportError(BallotLabError):
    """Operation requires a finite-support distribution."""


class MeanNotZeroError(BallotLabError):
    """Walk queries require a step law with mean exactly zero."""


class UnacceptableWindowError(BallotLabError):
    """Window width A is below the lattice span, so [k, k+A) can miss the lattice."""


class NonIntegerOrderError(BallotLabError):
    """Signed moments are only defined for positive integer orders; pass absolute=True otherwise."""


class StateSpaceTooLargeError(BallotLabError):
    """The DP state space exceeds the configured cap; caller should fall back to Monte Carlo."""


class ZeroDenominatorError(BallotLabError):
    """A conditional probability was requested against an event of zero mass."""


class ZeroDenominatorSampleError(BallotLabError):
    """Monte Carlo conditional estimate saw zero hits in the denominator event."""


class TooLargeForExactError(BallotLabError):
    """Exact permutation enumeration is capped at 12 elements."""


class OffLatticeError(BallotLabError):
    """Requested point is not on the walk's lattice at that step count."""


class UnknownNameError(BallotLabError):
    """No built-in distribution registered under that name."""


class InvalidGError(BallotLabError):
    """Heavy-level value function must be integer, strictly increasing, >= the tower function, with g(0)=1."""


class NegativeMassError(BallotLabError):
    """Level masses sum to >= 1, leaving nothing for the unit atoms."""


class TowerOverflowError(BallotLabError):
    """Tower value is too large to materialize (the exponent itself exceeds memory)."""
