"""Error taxonomy shared by the fitting and I/O layers."""


class SpiralresError(Exception):
    """Base class for all package-specific failures."""


class GeometryError(SpiralresError):
    """Spiral geometry violates a structural constraint."""


class ModelDomainError(SpiralresError):
    """Physics model evaluated outside its validity domain."""


class NoDipFound(SpiralresError):
    """Reflection trace has no resonance dip above the noise floor."""


class NoConvergence(SpiralresError):
    """Fit failed to converge within the iteration budget."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class BoundsViolation(SpiralresError):
    """Starting point lies outside the declared parameter bounds."""


class InsufficientSpan(SpiralresError):
    """Sweep does not cover the range the fit needs."""


class InsufficientFeatures(SpiralresError):
    """Too few detected features for the requested fit."""


class DegenerateSaturation(SpiralresError):
    """Power sweep never leaves the low-power plateau; n_c unidentifiable.

    Carries the one-sided bound that is still recoverable.
    """

    def __init__(self, message, nc_lower_bound):
        super().__init__(message)
        self.nc_lower_bound = nc_lower_bound


class PrefixTooShort(SpiralresError):
    """Not enough field points below the vortex onset for a quadratic fit."""


class ParseError(SpiralresError):
    """Input file failed to parse.  Carries the 1-based line number."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class UnitError(SpiralresError):
    """Column header or key does not match any accepted unit layout."""


class IdentifiabilityWarning(UserWarning):
    """Two fit parameters are so correlated the data cannot separate them."""


class CurrentSheetAccuracyWarning(UserWarning):
    """Geometry outside the s <= 3w band where the inductance formula is good."""
