"""
Evolution of the coherence matrix in the waveguide-mode basis and synthesis
of intensity profiles.

G[m][n](z) = sum_p lambda_bar[p] T[p][m] T[p][n] exp(i (beta_m - beta_n) z).
The diagonal (m = n) terms form the classical mixture; the off-diagonal
terms carry the interference (coherence) structure and no net power.
"""

import logging
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy.integrate import trapezoid
from scipy.signal import argrelextrema

from models import (
    CoherenceMatrix,
    CouplingMatrix,
    FringeResult,
    IntensityProfile,
    LobeCentroids,
    ModeBasis,
    Regime,
    SourceDecomposition,
)
from services.waveguide import waveguide_modes
from utils.errors import NumericalGuardError

logger = logging.getLogger(__name__)

# Relative floor below which adjacent extrema are treated as roundoff
_FRINGE_CONTRAST_FLOOR = 1e-9


class CoherenceMatrixError(NumericalGuardError):
    """Raised when G loses Hermiticity, positivity or its trace."""
    pass


def modal_coherence(coupling: CouplingMatrix, dec: SourceDecomposition) -> np.ndarray:
    """z-independent part G0 = T^T diag(lambda_bar) T, real symmetric (M, M)."""
    T = coupling.T
    if T.shape[0] != dec.lambda_bar.size:
        raise ValueError(
            f"Coupling has {T.shape[0]} source modes, decomposition has {dec.lambda_bar.size}"
        )
    W = np.sqrt(dec.lambda_bar)[:, None] * T
    return W.T @ W


def phases(basis: ModeBasis, z: float, regime: Union[Regime, str]) -> np.ndarray:
    """exp(i (beta_m - beta_ref) z) for the retained modes."""
    return np.exp(1j * basis.delta_beta(regime) * z)


def evolve(G0: np.ndarray, basis: ModeBasis, z: float, regime: Union[Regime, str]) -> CoherenceMatrix:
    """Apply the modal phases to a precomputed G0."""
    if G0.shape != (basis.M, basis.M):
        raise ValueError(f"G0 has shape {G0.shape}, basis retains {basis.M} modes")
    ph = phases(basis, z, regime)
    G = G0 * np.outer(ph, ph.conj())
    return CoherenceMatrix(G=G, z=float(z), regime=Regime(regime))


def gamma_at(
    coupling: CouplingMatrix,
    dec: SourceDecomposition,
    basis: ModeBasis,
    z: float,
    regime: Union[Regime, str] = Regime.EXACT,
) -> CoherenceMatrix:
    """Coherence matrix at distance z (um) in the given regime."""
    if coupling.T.shape[1] != basis.M:
        raise ValueError(f"Coupling has {coupling.T.shape[1]} waveguide modes, basis retains {basis.M}")
    return evolve(modal_coherence(coupling, dec), basis, z, regime)


def check_coherence_matrix(
    cm: CoherenceMatrix,
    reference_trace: Optional[float] = None,
    psd_tol: float = 1e-12,
    trace_tol: float = 1e-12,
    psd: bool = True,
) -> None:
    """
    Verify Hermiticity, positive semidefiniteness and trace conservation.

    Args:
        psd: Also check the lowest eigenvalue (O(M^3))

    Raises:
        CoherenceMatrixError: on any violation
    """
    G = cm.G
    scale = float(np.max(np.abs(G))) if G.size else 0.0
    trace = cm.trace

    if trace <= 0:
        raise CoherenceMatrixError(f"Coherence matrix at z={cm.z:g} has trace {trace:.3e}")

    asym = float(np.max(np.abs(G - G.conj().T)))
    if asym > 1e-13 * scale:
        raise CoherenceMatrixError(f"Coherence matrix at z={cm.z:g} is not Hermitian (residue {asym:.3e})")

    if psd:
        lowest = float(np.linalg.eigvalsh(G)[0])
        if lowest < -psd_tol * trace:
            raise CoherenceMatrixError(
                f"Coherence matrix at z={cm.z:g} has negative eigenvalue {lowest:.3e}"
            )

    if reference_trace is not None and abs(trace - reference_trace) > trace_tol * reference_trace:
        raise CoherenceMatrixError(
            f"Trace drifted from {reference_trace:.15g} to {trace:.15g} at z={cm.z:g}"
        )


def intensity_profile(
    cm: CoherenceMatrix,
    basis: ModeBasis,
    grid: np.ndarray,
    power: float = 1.0,
    psi: Optional[np.ndarray] = None,
) -> IntensityProfile:
    """
    Intensity at coincident points with its diagonal/cross split.

    Args:
        cm: Coherence matrix at some z
        basis: Mode basis of cm
        grid: x positions (um)
        power: Scale applied to every part (source power for absolute units)
        psi: Precomputed waveguide_modes(basis, grid), reused across z
    """
    grid = np.asarray(grid, dtype=float)
    if psi is None:
        psi = waveguide_modes(basis, grid)
    if psi.shape != (basis.M, grid.size):
        raise ValueError(f"Mode table shape {psi.shape} does not match M={basis.M}, grid={grid.size}")

    G = cm.G
    diag = np.real(np.diag(G))
    off = G - np.diag(np.diag(G))

    diagonal_part = diag @ psi ** 2
    cross = np.einsum("mx,mx->x", psi, off @ psi)

    peak = float(np.max(np.abs(diagonal_part))) if grid.size else 0.0
    residue = float(np.max(np.abs(cross.imag))) if grid.size else 0.0
    if residue > 1e-12 * max(peak, 1e-300):
        logger.warning(f"Intensity at z={cm.z:g} has imaginary residue {residue:.3e}")

    cross_part = cross.real
    return IntensityProfile(
        grid=grid,
        total=power * (diagonal_part + cross_part),
        diagonal_part=power * diagonal_part,
        cross_part=power * cross_part,
    )


def mixture_profile(profiles: Sequence[IntensityProfile], weights: Sequence[float]) -> IntensityProfile:
    """Pointwise weighted sum of profiles on a common grid."""
    if not profiles:
        raise ValueError("At least one profile is required")
    if len(profiles) != len(weights):
        raise ValueError(f"{len(profiles)} profiles but {len(weights)} weights")
    if any(w < 0 for w in weights):
        raise ValueError("Mixture weights must be non-negative")

    grid = profiles[0].grid
    for profile in profiles[1:]:
        if profile.grid.shape != grid.shape or not np.array_equal(profile.grid, grid):
            raise ValueError("Mixture profiles must share the same grid")

    def _combine(attr: str) -> np.ndarray:
        return sum(w * getattr(p, attr) for p, w in zip(profiles, weights))

    return IntensityProfile(
        grid=grid.copy(),
        total=_combine("total"),
        diagonal_part=_combine("diagonal_part"),
        cross_part=_combine("cross_part"),
    )


def mirror_profile(profile: IntensityProfile) -> IntensityProfile:
    """Profile reflected through x = 0 on the reflected grid."""
    return IntensityProfile(
        grid=-profile.grid[::-1],
        total=profile.total[::-1].copy(),
        diagonal_part=profile.diagonal_part[::-1].copy(),
        cross_part=profile.cross_part[::-1].copy(),
    )


def fringe_visibility(
    profile: IntensityProfile,
    window: Optional[Tuple[float, float]] = None,
    values: Optional[np.ndarray] = None,
) -> FringeResult:
    """
    Mean (I_max - I_min)/(I_max + I_min) over adjacent extrema inside window.

    Fewer than three extrema above the roundoff floor yields visibility 0
    with has_fringes False.
    """
    grid = profile.grid
    intensity = profile.total if values is None else np.asarray(values, dtype=float)

    if window is None:
        mask = np.ones(grid.size, dtype=bool)
    else:
        lo, hi = window
        if lo >= hi or lo < grid[0] or hi > grid[-1]:
            raise ValueError(f"Window [{lo}, {hi}] not inside grid [{grid[0]}, {grid[-1]}]")
        mask = (grid >= lo) & (grid <= hi)

    segment = intensity[mask]
    no_fringes = FringeResult(visibility=0.0, has_fringes=False, n_extrema=0)
    if segment.size < 3:
        return no_fringes

    maxima = argrelextrema(segment, np.greater)[0]
    minima = argrelextrema(segment, np.less)[0]
    order = np.sort(np.concatenate([maxima, minima]))
    n_extrema = int(order.size)
    if n_extrema < 3:
        return FringeResult(visibility=0.0, has_fringes=False, n_extrema=n_extrema)

    floor = _FRINGE_CONTRAST_FLOOR * float(np.max(np.abs(segment)))
    is_max = np.isin(order, maxima)
    ratios = []
    for i in range(n_extrema - 1):
        if is_max[i] == is_max[i + 1]:
            continue
        a, b = segment[order[i]], segment[order[i + 1]]
        i_max, i_min = max(a, b), min(a, b)
        if i_max - i_min <= floor or i_max + i_min <= 0:
            continue
        ratios.append((i_max - i_min) / (i_max + i_min))

    if len(ratios) < 2:
        return FringeResult(visibility=0.0, has_fringes=False, n_extrema=n_extrema)

    return FringeResult(visibility=float(np.mean(ratios)), has_fringes=True, n_extrema=n_extrema)


def lobe_centroids(profile: IntensityProfile) -> LobeCentroids:
    """Split the total intensity at its centroid and locate each half's centroid."""
    x, I = profile.grid, np.clip(profile.total, 0.0, None)
    norm = trapezoid(I, x)
    if norm <= 0:
        raise ValueError("Profile carries no power")
    center = trapezoid(x * I, x) / norm

    def _centroid(mask: np.ndarray) -> float:
        weight = trapezoid(I[mask], x[mask]) if mask.sum() > 1 else 0.0
        if weight <= 0:
            return center
        return float(trapezoid(x[mask] * I[mask], x[mask]) / weight)

    left = _centroid(x < center)
    right = _centroid(x >= center)
    return LobeCentroids(center=float(center), left=left, right=right, separation=right - left)


def profile_power(profile: IntensityProfile) -> Tuple[float, float]:
    """(integral of total, integral of cross part) over the grid."""
    return (
        float(trapezoid(profile.total, profile.grid)),
        float(trapezoid(profile.cross_part, profile.grid)),
    )


__all__ = [
    "CoherenceMatrixError",
    "modal_coherence",
    "phases",
    "evolve",
    "gamma_at",
    "check_coherence_matrix",
    "intensity_profile",
    "mixture_profile",
    "mirror_profile",
    "fringe_visibility",
    "lobe_centroids",
    "profile_power",
]
