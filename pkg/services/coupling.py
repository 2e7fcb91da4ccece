"""
Overlap integrals T[p][m] = <psi_m | Phi_p(. - x0)> between source modes and
waveguide modes, computed by direct quadrature.
"""

import logging
import math
from typing import Optional, Tuple

import numpy as np

from models import CouplingMatrix, ModeBasis, QuadratureRule, SourceDecomposition
from services.source import mode_scale as source_scale, source_modes
from services.waveguide import waveguide_modes
from utils.errors import NumericalGuardError
from utils.hgbasis import build_quadrature, quadrature_points, turning_point

logger = logging.getLogger(__name__)

# Decay margin past the classical turning point, in units of 1/s
_TAIL_LENGTHS = 8.0
_SAFETY = 5.0


class CompletenessError(NumericalGuardError):
    """Raised when a source mode is not captured by the retained waveguide modes."""

    def __init__(self, message: str, p: int = -1, achieved: float = float("nan")):
        super().__init__(message)
        self.p = p
        self.achieved = achieved


def required_support(dec: SourceDecomposition, basis: ModeBasis, x0: float) -> float:
    """Half-width that holds both the highest guided mode and the displaced source modes."""
    s_src = source_scale(dec)
    guide = turning_point(basis.M, basis.scale) + _TAIL_LENGTHS / basis.scale
    launch = abs(x0) + turning_point(dec.P, s_src) + _TAIL_LENGTHS / s_src
    return max(guide, launch)


def overlap_window(
    dec: SourceDecomposition,
    basis: ModeBasis,
    x0: float,
    halfwidth: float = 0.0,
    extent: float = 0.0,
) -> Tuple[float, float]:
    """
    Quadrature half-width and required support for the overlap integrals.

    Args:
        halfwidth: Explicit half-width; 0 derives one from the mode scales
        extent: Profile grid half-width the window must also contain

    Returns:
        (halfwidth, required support)
    """
    required = required_support(dec, basis, x0)
    if halfwidth > 0:
        return halfwidth, required

    w0 = math.sqrt(2.0) / basis.scale
    beam = abs(x0) + 12.0 * max(dec.spec.a0, w0)
    return max(required, beam, extent) + _SAFETY, required


def build_overlap_rule(
    dec: SourceDecomposition,
    basis: ModeBasis,
    x0: float,
    spacing: float = 0.05,
    rule: str = "simpson",
    halfwidth: float = 0.0,
    extent: float = 0.0,
) -> QuadratureRule:
    """Symmetric quadrature rule covering the supports of both mode families."""
    halfwidth, required = overlap_window(dec, basis, x0, halfwidth, extent)
    points = quadrature_points(halfwidth, spacing, rule)
    logger.debug(
        f"Overlap quadrature: [-{halfwidth:.2f}, {halfwidth:.2f}] um, "
        f"{points} points ({rule}), required support {required:.2f} um"
    )
    return build_quadrature(-halfwidth, halfwidth, points, rule=rule, cover=(-required, required))


def overlap_matrix(
    dec: SourceDecomposition,
    basis: ModeBasis,
    x0: Optional[float],
    rule: QuadratureRule,
    comp_tol: float = 1e-10,
) -> CouplingMatrix:
    """
    T[p][m] = integral psi_m(x) Phi_p(x - x0) dx by quadrature.

    Raises:
        CompletenessError: some source mode keeps less than 1 - comp_tol of its norm
    """
    if x0 is None:
        x0 = dec.spec.x0

    phi = source_modes(dec, rule.nodes, x0)
    psi = waveguide_modes(basis, rule.nodes)
    T = (phi * rule.weights) @ psi.T

    if not np.all(np.isfinite(T)):
        raise CompletenessError("Overlap matrix contains non-finite entries")

    completeness = np.sum(T ** 2, axis=1)
    deficit = 1.0 - completeness
    worst = int(np.argmax(np.abs(deficit)))
    logger.debug(
        f"Coupling {T.shape[0]}x{T.shape[1]}: worst completeness deficit "
        f"{deficit[worst]:.3e} at p={worst}"
    )

    if abs(deficit[worst]) > comp_tol:
        raise CompletenessError(
            f"Source mode p={worst} keeps sum_m T^2 = {completeness[worst]:.12f} "
            f"with M={basis.M} modes (tolerance {comp_tol:g}); "
            f"increase the mode count or widen the quadrature window",
            p=worst,
            achieved=float(completeness[worst]),
        )

    return CouplingMatrix(
        T=T,
        source_ref=f"a0={dec.spec.a0:g},r0={dec.spec.r0:g},x0={x0:g},P={dec.P}",
        basis_ref=f"n0={basis.spec.n0:g},omega={basis.spec.omega:g},lambda={basis.spec.wavelength:g},M={basis.M}",
        completeness=completeness,
    )


def mean_mode_number(coupling: CouplingMatrix, dec: SourceDecomposition) -> float:
    """sum_p lambda_bar[p] sum_m m T[p][m]^2."""
    m = np.arange(coupling.T.shape[1])
    return float(dec.lambda_bar @ (coupling.T ** 2 @ m))


__all__ = [
    "CompletenessError",
    "required_support",
    "overlap_window",
    "build_overlap_rule",
    "overlap_matrix",
    "mean_mode_number",
]
