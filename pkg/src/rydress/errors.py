"""Exception hierarchy shared by all rydress modules."""


class RydressError(Exception):
    """Base class for every error raised by this package."""


class DegenerateBranchError(RydressError, ValueError):
    """Zero dressing detuning leaves the ground-connected branch undefined."""

    def __init__(self, msg=None):
        super().__init__(
            msg
            or "degenerate branch: detuning must be nonzero to define the "
            "ground-connected branch"
        )


class BranchTrackingError(RydressError):
    """Adiabatic continuation lost the eigenvector (near-degenerate crossing)."""


class DomainError(RydressError, ValueError):
    """Argument outside the physical domain (e.g. non-positive distance)."""


class NotFoundError(RydressError):
    """A root or crossing was searched for and not found."""


class IntegratorError(RydressError):
    """Time evolution violated its trace-preservation tolerance."""


class FitError(RydressError):
    """A least-squares fit could not be set up or did not converge."""

    def __init__(self, msg, last_params=None):
        super().__init__(msg)
        self.last_params = last_params


class ExtractionError(RydressError):
    """A spectral feature needed for extraction is missing."""


class BlockadeValidityError(RydressError):
    """Microwave Rabi frequency too large compared with J (strict mode)."""


class BlockadeValidityWarning(UserWarning):
    """Microwave Rabi frequency too large compared with J."""


class ConfigError(RydressError):
    """Invalid experiment configuration; message carries the field path."""
