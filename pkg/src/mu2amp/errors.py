"""Exception and warning types shared across the package."""


class Mu2AmpError(Exception):
    """Base class for all errors raised by mu2amp."""


class InvalidSpec(Mu2AmpError, ValueError):
    """Parameters outside the domain of an operation."""


class CutoffInsufficient(Mu2AmpError, RuntimeError):
    """A truncated Fock space is too small for the populated levels."""


class SingularOrdering(Mu2AmpError, ValueError):
    """Normal ordering (s = +1) makes the input SNR singular."""


class SuboptimalSpec(UserWarning):
    """The requested stage design works but wastes success probability."""
