"""
Normalized Hermite-Gauss functions and composite quadrature rules.

Hermite functions are generated by the three-term recurrence on the
normalized functions themselves, never through raw H_n and n!, so mode
indices in the thousands stay finite. Values far outside the Gaussian
envelope are carried with a separate exponent to avoid underflow.
"""

import logging
import math
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from models import HermiteGaussEval, QuadratureRule
from utils.errors import NumericalGuardError

logger = logging.getLogger(__name__)

PI_M14 = math.pi ** -0.25
_RESCALE = 1e150
_LOG_RESCALE = math.log(_RESCALE)
_EXP_FLOOR = -700.0

ArrayLike = Union[float, Sequence[float], np.ndarray]


class QuadratureWindowError(NumericalGuardError):
    """Raised when a quadrature window cannot cover the integrand support."""
    pass


def _check_points(u: np.ndarray) -> None:
    if not np.all(np.isfinite(u)):
        raise ValueError("Hermite functions require finite evaluation points")


def _apply_log_scale(values: np.ndarray, log_scale: np.ndarray) -> np.ndarray:
    """Return values * exp(log_scale) without underflowing the factor alone."""
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        direct = values * np.exp(np.maximum(log_scale, _EXP_FLOOR))
        logged = np.sign(values) * np.exp(np.log(np.abs(values)) + log_scale)
    return np.where(log_scale > _EXP_FLOOR, direct, logged)


def hermite_functions(n_max: int, u: ArrayLike) -> np.ndarray:
    """
    Evaluate phi_0 .. phi_{n_max} at dimensionless points u.

    phi_n(u) = pi^{-1/4} (2^n n!)^{-1/2} exp(-u^2/2) H_n(u), generated by
    phi_{n+1} = sqrt(2/(n+1)) u phi_n - sqrt(n/(n+1)) phi_{n-1}.

    Returns:
        Array of shape (n_max + 1, len(u))
    """
    if n_max < 0:
        raise ValueError(f"Hermite order must be non-negative, got {n_max}")

    u = np.atleast_1d(np.asarray(u, dtype=float))
    _check_points(u)

    out = np.empty((n_max + 1, u.size))
    log_scale = -0.5 * u ** 2
    prev = np.zeros_like(u)
    curr = np.full_like(u, PI_M14)
    out[0] = _apply_log_scale(curr, log_scale)

    for n in range(n_max):
        nxt = math.sqrt(2.0 / (n + 1)) * u * curr - math.sqrt(n / (n + 1)) * prev
        prev, curr = curr, nxt

        big = np.abs(curr) > _RESCALE
        if big.any():
            curr[big] /= _RESCALE
            prev[big] /= _RESCALE
            log_scale[big] += _LOG_RESCALE

        out[n + 1] = _apply_log_scale(curr, log_scale)

    return out


def hg_eval(n: int, s: float, center: float, x: ArrayLike) -> Union[float, np.ndarray]:
    """
    L2-normalized Hermite-Gauss function sqrt(s) * phi_n(s * (x - center)).

    Source modes use s = sqrt(2c), waveguide modes s = sqrt(k*omega).
    """
    if not (math.isfinite(s) and s > 0):
        raise ValueError(f"Scale must be positive and finite, got {s}")
    if not math.isfinite(center):
        raise ValueError(f"Center must be finite, got {center}")

    scalar = np.ndim(x) == 0
    x_arr = np.atleast_1d(np.asarray(x, dtype=float))
    _check_points(x_arr)

    values = math.sqrt(s) * hermite_functions(n, s * (x_arr - center))[n]
    return float(values[0]) if scalar else values


def hg_stack(n_max: int, s: float, center: float, x: ArrayLike) -> np.ndarray:
    """All normalized functions of orders 0..n_max on x, shape (n_max + 1, len(x))."""
    if not (math.isfinite(s) and s > 0):
        raise ValueError(f"Scale must be positive and finite, got {s}")
    x_arr = np.atleast_1d(np.asarray(x, dtype=float))
    return math.sqrt(s) * hermite_functions(n_max, s * (x_arr - center))


def evaluate(fn: HermiteGaussEval, x: ArrayLike) -> Union[float, np.ndarray]:
    """Evaluate a HermiteGaussEval description at x."""
    return hg_eval(fn.order, fn.scale, fn.center, x)


def turning_point(n: int, s: float) -> float:
    """Classical turning point |x - center| of the order-n function at scale s."""
    return math.sqrt(2 * n + 1) / s


def build_quadrature(
    x_min: float,
    x_max: float,
    points: int,
    rule: str = "simpson",
    cover: Optional[Tuple[float, float]] = None,
) -> QuadratureRule:
    """
    Build a composite rule on the uniform grid x_min..x_max.

    Args:
        x_min, x_max: Window limits (um)
        points: Number of nodes (odd for Simpson)
        rule: 'simpson' or 'trapezoid'
        cover: Interval the window must contain; otherwise QuadratureWindowError

    Returns:
        QuadratureRule with nodes and weights
    """
    if not (math.isfinite(x_min) and math.isfinite(x_max)) or x_min >= x_max:
        raise ValueError(f"Invalid quadrature window [{x_min}, {x_max}]")
    if points < 3:
        raise ValueError(f"Quadrature needs at least 3 points, got {points}")

    if cover is not None:
        lo, hi = cover
        if lo < x_min or hi > x_max:
            raise QuadratureWindowError(
                f"Quadrature window [{x_min:.3f}, {x_max:.3f}] um does not cover "
                f"the required support [{lo:.3f}, {hi:.3f}] um"
            )

    nodes = np.linspace(x_min, x_max, points)
    h = (x_max - x_min) / (points - 1)

    if rule == "simpson":
        if points % 2 == 0:
            raise ValueError(f"Composite Simpson needs an odd number of points, got {points}")
        weights = np.full(points, 2.0)
        weights[1::2] = 4.0
        weights[0] = weights[-1] = 1.0
        weights *= h / 3.0
    elif rule == "trapezoid":
        weights = np.full(points, h)
        weights[0] = weights[-1] = h / 2.0
    else:
        raise ValueError(f"Unknown quadrature rule: {rule}")

    return QuadratureRule(nodes=nodes, weights=weights, rule=rule)


def quadrature_points(halfwidth: float, spacing: float, rule: str = "simpson") -> int:
    """Node count for a symmetric window at (at most) the given spacing."""
    points = int(math.ceil(2.0 * halfwidth / spacing)) + 1
    if rule == "simpson" and points % 2 == 0:
        points += 1
    return max(points, 3)


__all__ = [
    "QuadratureWindowError",
    "hermite_functions",
    "hg_eval",
    "hg_stack",
    "evaluate",
    "turning_point",
    "build_quadrature",
    "quadrature_points",
]
