"""Exception types shared across the package.

Each error marks a *mathematically meaningful* failure mode, not a coding
bug: callers (and the CLI) can map them onto exit codes and diagnostics.
"""


class BqscatterError(Exception):
    """Base class for all package-specific errors."""


class SingularDiagonalizer(BqscatterError):
    """The spectral dressing matrix P(k) is singular (k = 0)."""


class DomainViolation(BqscatterError):
    """A sectionally-analytic quantity was requested outside the closed
    region where it is bounded, beyond the tolerated amplification."""


class ZeroMeanViolation(BqscatterError):
    """Constructing v0 from a time derivative requires the time-derivative
    slice to integrate to zero; it does not."""


class AssumptionViolation(BqscatterError):
    """A genericity assumption (non-vanishing of a scattering entry on the
    closure of its sector) failed at the scanned resolution."""


class FredholmSingular(BqscatterError):
    """The Nystrom linear system for a sectional eigenfunction is singular
    or numerically unresolvable at the requested point."""


class PatternMismatch(BqscatterError):
    """A quantity with a known algebraic shape (patterned coefficient
    matrix, real-valued family) failed to fit that shape beyond the
    advertised residual -- an internal inconsistency, not bad input."""


class EvolutionDiverged(BqscatterError):
    """The time stepper detected blow-up (sup-norm growth beyond the
    configured factor) before reaching the requested time."""


class ExtrapolationRefused(BqscatterError):
    """A Richardson extrapolation was requested with parameters for which
    the error model is invalid (non-monotone tail, too few levels)."""


class GridEmpty(BqscatterError):
    """A sampling grid in the configuration selects no points."""


class ConfigError(BqscatterError):
    """Malformed or inconsistent run configuration."""
