"""
Parabolic graded-index waveguide: guided modes, propagation constants and
characteristic lengths.

Modes are centered Hermite-Gauss functions of scale sqrt(k*omega). The exact
propagation constants beta_m = k n0 sqrt(1 - 2 omega (m + 1/2) / (k n0^2)) are
non-equidistant; the paraxial ones are their linear expansion in m.
"""

import logging
import math
import sys
from typing import Optional, Union

import numpy as np

from models import (
    CharacteristicLengths,
    ModeBasis,
    Regime,
    SourceDecomposition,
    SourceSpec,
    WaveguideSpec,
)
from utils.errors import NumericalGuardError
from utils.hgbasis import ArrayLike, hg_eval, hg_stack

logger = logging.getLogger(__name__)

_SQUEEZE_TAIL_FLOOR = 1e-16


class CutoffError(NumericalGuardError):
    """Raised when a requested mode lies beyond the guided-mode cutoff."""
    pass


def mode_scale(spec: WaveguideSpec) -> float:
    """sqrt(k*omega), the Hermite-Gauss scale of the guided modes (1/um)."""
    return math.sqrt(spec.k * spec.omega)


def m_guided(spec: WaveguideSpec) -> int:
    """Largest m with 2 (omega/k)(m + 1/2) < n0^2."""
    bound = spec.k * spec.n0 ** 2 / (2.0 * spec.omega) - 0.5
    if not math.isfinite(bound) or bound > sys.maxsize:
        return sys.maxsize
    return int(math.ceil(bound)) - 1


def _u(spec: WaveguideSpec, m: Union[int, np.ndarray]) -> Union[float, np.ndarray]:
    return 2.0 * spec.omega * (np.asarray(m, dtype=float) + 0.5) / (spec.k * spec.n0 ** 2)


def beta(spec: WaveguideSpec, m: int, regime: Union[Regime, str] = Regime.EXACT) -> float:
    """
    Propagation constant of mode m (1/um).

    Exact: k n0 sqrt(1 - u_m) with u_m = 2 omega (m + 1/2)/(k n0^2).
    Paraxial: k n0 - (omega/n0)(m + 1/2).

    Raises:
        CutoffError: exact regime and m beyond the guided-mode cutoff
    """
    if m < 0:
        raise ValueError(f"Mode index must be non-negative, got {m}")
    kn0 = spec.k * spec.n0
    if Regime(regime) == Regime.PARAXIAL:
        return kn0 - spec.omega / spec.n0 * (m + 0.5)

    cutoff = m_guided(spec)
    if m > cutoff:
        raise CutoffError(f"Mode {m} is evanescent (guided modes end at m={cutoff})")
    return kn0 * math.sqrt(1.0 - float(_u(spec, m)))


def betas(spec: WaveguideSpec, M: int, regime: Union[Regime, str] = Regime.EXACT) -> np.ndarray:
    """Propagation constants of modes 0..M-1."""
    m = np.arange(M)
    kn0 = spec.k * spec.n0
    if Regime(regime) == Regime.PARAXIAL:
        return kn0 - spec.omega / spec.n0 * (m + 0.5)
    if M - 1 > m_guided(spec):
        raise CutoffError(f"{M} modes requested but guided modes end at m={m_guided(spec)}")
    return kn0 * np.sqrt(1.0 - _u(spec, m))


def relative_betas(
    spec: WaveguideSpec,
    M: int,
    m_ref: int,
    regime: Union[Regime, str] = Regime.EXACT,
) -> np.ndarray:
    """
    beta_m - beta_{m_ref} for m = 0..M-1 without forming the large betas.

    The exact difference is evaluated as
    (2 omega/n0)(m_ref - m) / (sqrt(1 - u_m) + sqrt(1 - u_ref)).
    """
    m = np.arange(M, dtype=float)
    if Regime(regime) == Regime.PARAXIAL:
        return -(spec.omega / spec.n0) * (m - m_ref)

    if M - 1 > m_guided(spec):
        raise CutoffError(f"{M} modes requested but guided modes end at m={m_guided(spec)}")
    root_m = np.sqrt(1.0 - _u(spec, m))
    root_ref = math.sqrt(1.0 - float(_u(spec, m_ref)))
    return (2.0 * spec.omega / spec.n0) * (m_ref - m) / (root_m + root_ref)


def build_mode_basis(spec: WaveguideSpec, M: int, m_ref: int = 0) -> ModeBasis:
    """
    Retain modes 0..M-1 with both sets of propagation constants.

    Args:
        spec: Waveguide parameters
        M: Number of retained modes
        m_ref: Reference mode for the relative phases (clipped into 0..M-1)
    """
    if M < 1:
        raise ValueError(f"At least one mode must be retained, got M={M}")

    cutoff = m_guided(spec)
    if M - 1 > cutoff:
        raise CutoffError(f"Requested M={M} modes exceeds the guided-mode cutoff M_guided={cutoff}")

    m_ref = int(min(max(m_ref, 0), M - 1))

    return ModeBasis(
        spec=spec,
        M=M,
        m_guided=cutoff,
        scale=mode_scale(spec),
        m_ref=m_ref,
        betas_exact=betas(spec, M, Regime.EXACT),
        betas_paraxial=betas(spec, M, Regime.PARAXIAL),
        delta_exact=relative_betas(spec, M, m_ref, Regime.EXACT),
        delta_paraxial=relative_betas(spec, M, m_ref, Regime.PARAXIAL),
    )


def waveguide_mode(basis: ModeBasis, m: int, x: ArrayLike) -> Union[float, np.ndarray]:
    """Normalized guided mode psi_m(x), centered on the axis."""
    if not 0 <= m < basis.M:
        raise ValueError(f"Waveguide mode index {m} outside 0..{basis.M - 1}")
    return hg_eval(m, basis.scale, 0.0, x)


def waveguide_modes(basis: ModeBasis, x: ArrayLike) -> np.ndarray:
    """All retained modes on x, shape (M, len(x))."""
    return hg_stack(basis.M - 1, basis.scale, 0.0, x)


def characteristic_lengths(spec: WaveguideSpec) -> CharacteristicLengths:
    """
    Ray period, revival estimates and fundamental waist.

    L_osc = pi n0/omega; z_rev ~ pi n0/eta with eta = omega^2/(k n0^2);
    z_cat ~ z_rev/2; w0 = (2/(k omega))^(1/2). The quadratic expansion of
    beta_m revives at 2 pi k n0^3/omega^2. Revival figures are estimates only.
    """
    k, n0, omega = spec.k, spec.n0, spec.omega
    z_rev = math.pi * k * n0 ** 3 / omega ** 2
    return CharacteristicLengths(
        L_osc=math.pi * n0 / omega,
        z_rev_estimate=z_rev,
        z_cat_estimate=0.5 * z_rev,
        w0=math.sqrt(2.0 / (k * omega)),
        z_rev_quadratic=2.0 * z_rev,
    )


def estimate_mean_mode_number(source: SourceSpec, spec: WaveguideSpec) -> float:
    """
    Mean excited mode number of a GSM launch from its z=0 moments.

    (k omega <x^2> + k <p^2>/omega - 1)/2 with <x^2> = x0^2 + a0^2/4 and
    <p^2> = (1/a0^2 + 2/r0^2)/k^2.
    """
    k_omega = spec.k * spec.omega
    inv_r2 = 0.0 if source.coherent else 1.0 / source.r0 ** 2
    spread = 1.0 / source.a0 ** 2 + 2.0 * inv_r2
    return 0.5 * (k_omega * (source.x0 ** 2 + source.a0 ** 2 / 4.0) + spread / k_omega - 1.0)


def displacement_mode_number(source: SourceSpec, spec: WaveguideSpec) -> float:
    """Coherent-state estimate k omega x0^2 / 2 of the displacement contribution."""
    return 0.5 * spec.k * spec.omega * source.x0 ** 2


def default_mode_count(
    dec: SourceDecomposition,
    spec: WaveguideSpec,
    max_modes: Optional[int] = None,
) -> int:
    """
    Heuristic number of retained modes.

    Takes the largest of m_bar + 10 sqrt(m_bar + 1) + P + 20, a bound on the
    highest source mode seen in the guide and the length of the squeezing
    tail left by a width mismatch, capped at the cutoff.
    """
    cap = m_guided(spec) + 1
    if max_modes:
        return min(max_modes, cap)

    m_bar = max(estimate_mean_mode_number(dec.spec, spec), 0.0)
    heuristic = m_bar + 10.0 * math.sqrt(m_bar + 1.0) + dec.P + 20

    s2 = 2.0 * dec.c / (spec.k * spec.omega)
    alpha = math.sqrt(displacement_mode_number(dec.spec, spec))
    m_hi = (math.sqrt((dec.P + 0.5) * max(s2, 1.0 / s2)) + alpha) ** 2
    top = m_hi + 8.0 * math.sqrt(m_hi) + 10

    # Width mismatch leaves a geometric tail of ratio |s2 - 1| / (s2 + 1)
    squeeze = abs(s2 - 1.0) / (s2 + 1.0)
    tail = m_hi
    if 0.0 < squeeze < 1.0:
        tail += math.log(_SQUEEZE_TAIL_FLOOR) / math.log(squeeze)

    M = int(math.ceil(max(heuristic, top, tail)))
    if M > cap:
        logger.warning(f"Mode heuristic M={M} capped at the guided-mode count {cap}")
    return min(M, cap)


__all__ = [
    "CutoffError",
    "mode_scale",
    "m_guided",
    "beta",
    "betas",
    "relative_betas",
    "build_mode_basis",
    "waveguide_mode",
    "waveguide_modes",
    "characteristic_lengths",
    "estimate_mean_mode_number",
    "displacement_mode_number",
    "default_mode_count",
]
