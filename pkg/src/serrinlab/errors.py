"""Exception types shared across the package."""


class SerrinLabError(Exception):
    """Base class for all package-specific failures."""


class NumericsError(SerrinLabError):
    """A numerical procedure failed (divergence, NaN, no convergence)."""


class BracketError(NumericsError):
    """A root/shooting bracket could not be established or was exhausted."""


class IterationLimitError(NumericsError):
    """An iterative solver hit its iteration cap before reaching tolerance."""


class GridError(SerrinLabError):
    """Grid construction or grid-based extraction failed."""


class ReflectionOutsideDomain(SerrinLabError):
    """A reflected point left the domain mask (signals s below the critical position)."""


class ConfigError(SerrinLabError):
    """An experiment configuration file could not be parsed or validated."""
