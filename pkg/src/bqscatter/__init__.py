"""Direct scattering and Riemann-Hilbert data for the good Boussinesq system."""

__version__ = "0.1.0"

from ._backend import active_backend
from .errors import (
    AssumptionViolation,
    BqscatterError,
    ConfigError,
    DomainViolation,
    EvolutionDiverged,
    ExtrapolationRefused,
    FredholmSingular,
    GridEmpty,
    PatternMismatch,
    SingularDiagonalizer,
    ZeroMeanViolation,
)
from .potentials import InitialData, builtin, from_samples

__all__ = [
    "__version__",
    "active_backend",
    "AssumptionViolation",
    "BqscatterError",
    "ConfigError",
    "DomainViolation",
    "EvolutionDiverged",
    "ExtrapolationRefused",
    "FredholmSingular",
    "GridEmpty",
    "PatternMismatch",
    "SingularDiagonalizer",
    "ZeroMeanViolation",
    "InitialData",
    "builtin",
    "from_samples",
]
