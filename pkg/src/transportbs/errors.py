"""Exception types shared across the package."""


class PeriodMismatchError(ValueError):
    """Two coefficient vectors with different periods were combined."""


class BandwidthError(ValueError):
    """A state exceeds the working bandwidth of an operator."""


class ControllabilityError(ValueError):
    """A controller coefficient vanishes (or a finite-dimensional pair is
    uncontrollable), so no feedback can be synthesized.

    The offending mode (or a description) is stored in ``mode``.
    """

    def __init__(self, message, mode=None):
        super().__init__(message)
        self.mode = mode


class DegenerateJumpsError(ValueError):
    """All jump coefficients vanish: the controller is too regular for the
    requested order and the singular/regular split does not exist."""


class InstabilityError(RuntimeError):
    """A time integration blew past the theoretical decay envelope."""


class ConfigError(ValueError):
    """An experiment configuration failed schema validation.

    ``path`` holds a ``/``-separated location of the offending key.
    """

    def __init__(self, message, path=""):
        super().__init__(message)
        self.path = path
