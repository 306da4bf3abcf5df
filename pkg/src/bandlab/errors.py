"""Exception hierarchy shared by all bandlab modules."""


class BandLabError(Exception):
    """Base class for every error raised by bandlab."""


class InvalidParameterError(BandLabError, ValueError):
    pass


class DegenerateProfileError(BandLabError, ValueError):
    """The variance profile has no mass on the torus."""


class NumericalFailureError(BandLabError, ArithmeticError):
    pass


class DomainError(BandLabError, ValueError):
    """A spectral parameter lies outside the region where an object is defined."""


class ConfigurationError(BandLabError, ValueError):
    """Invalid experiment configuration; ``path`` names the offending field."""

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")
