"""Utils package: Hermite-Gauss numerics, CSV emission and error types."""

from .errors import ConfigError, NumericalGuardError
from .hgbasis import (
    QuadratureWindowError,
    hermite_functions,
    hg_eval,
    hg_stack,
    turning_point,
    build_quadrature,
    quadrature_points,
)

__all__ = [
    # Errors
    "ConfigError",
    "NumericalGuardError",
    "QuadratureWindowError",
    # Hermite-Gauss numerics
    "hermite_functions",
    "hg_eval",
    "hg_stack",
    "turning_point",
    "build_quadrature",
    "quadrature_points",
]
