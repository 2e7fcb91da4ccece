"""
Scalar diagnostics of a coherence matrix: second-order moments, coherence
radius, squeezing, uncertainty products, purity and entropy.

Position and momentum act through ladder operators in the guided-mode basis,
x = l (a + a^+), p = i p0 (a^+ - a), with l^2 = 1/(2 k omega) and
p0^2 = omega/(2k), so that [x, p] = i/k. Only the first two off-diagonals of
G enter the moments.
"""

import logging
import math
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from models import (
    CoherenceMatrix,
    CouplingMatrix,
    ModeBasis,
    Moments,
    ObservableRecord,
    Regime,
    SourceDecomposition,
    SourceSpec,
)
from services.evolution import gamma_at
from services.source import coherence_function, entropy as source_entropy
from utils.errors import NumericalGuardError

logger = logging.getLogger(__name__)

ArrayOrFloat = Union[float, np.ndarray]


class TraceError(NumericalGuardError):
    """Raised when a coherence matrix has non-positive trace."""
    pass


def heisenberg_bound(k: float) -> float:
    """1/(4k^2), the coherent-state minimum of sigma_x^2 sigma_p^2."""
    return 0.25 / k ** 2


def up_bound(spec: SourceSpec, k: float) -> float:
    """(1/4k^2)(1 + 2 a0^2/r0^2), attained by the GSM launch."""
    if spec.coherent:
        return heisenberg_bound(k)
    return heisenberg_bound(k) * (1.0 + 2.0 * spec.a0 ** 2 / spec.r0 ** 2)


def _trace(G: np.ndarray) -> float:
    trace = float(np.trace(G).real)
    if not trace > 0:
        raise TraceError(f"Coherence matrix trace must be positive, got {trace:.3e}")
    return trace


def ladder_weights(M: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """sqrt(n) on the first off-diagonal, sqrt(n(n-1)) on the second, n on the diagonal."""
    n = np.arange(M, dtype=float)
    return np.sqrt(n[1:]), np.sqrt(n[2:] * n[1:-1]), n


def ladder_expectations(G: np.ndarray) -> Tuple[complex, complex, float]:
    """Normalized <a>, <a^2> and <a^+ a> of a coherence matrix."""
    trace = _trace(G)
    w1, w2, n = ladder_weights(G.shape[0])
    alpha = np.sum(w1 * np.diagonal(G, offset=-1)) / trace
    a2 = np.sum(w2 * np.diagonal(G, offset=-2)) / trace
    nbar = float(np.sum(n * np.real(np.diagonal(G)))) / trace
    return complex(alpha), complex(a2), nbar


def moments_from_ladder(
    alpha: ArrayOrFloat,
    a2: ArrayOrFloat,
    nbar: ArrayOrFloat,
    k: float,
    omega: float,
) -> Dict[str, ArrayOrFloat]:
    """
    Central moments from ladder expectations; vectorizes over arrays.

    Returns:
        Dict with mean_x, mean_p, sigma_x2, sigma_p2, sigma_xp and up_sr,
        where up_sr = (1/4k^2)((2n'+1)^2 - 4|A|^2) avoids forming
        sigma_x2 sigma_p2 - sigma_xp^2 by cancellation.
    """
    alpha = np.asarray(alpha)
    A = np.asarray(a2) - alpha ** 2
    n_exc = np.asarray(nbar) - (alpha.real ** 2 + alpha.imag ** 2)
    ell2 = 1.0 / (2.0 * k * omega)
    p02 = omega / (2.0 * k)

    return {
        "mean_x": 2.0 * math.sqrt(ell2) * alpha.real,
        "mean_p": 2.0 * math.sqrt(p02) * alpha.imag,
        "sigma_x2": ell2 * (2.0 * A.real + 2.0 * n_exc + 1.0),
        "sigma_p2": p02 * (2.0 * n_exc + 1.0 - 2.0 * A.real),
        "sigma_xp": A.imag / k,
        "up_sr": heisenberg_bound(k) * ((2.0 * n_exc + 1.0) ** 2 - 4.0 * (A.real ** 2 + A.imag ** 2)),
    }


def moments(cm: CoherenceMatrix, basis: ModeBasis) -> Moments:
    """
    First moments and central second moments of x and p.

    Raises:
        TraceError: trace(G) <= 0
    """
    if cm.G.shape != (basis.M, basis.M):
        raise ValueError(f"G has shape {cm.G.shape}, basis retains {basis.M} modes")
    alpha, a2, nbar = ladder_expectations(cm.G)
    values = moments_from_ladder(alpha, a2, nbar, basis.spec.k, basis.spec.omega)
    return Moments(**{key: float(values[key]) for key in Moments.model_fields})


def schrodinger_robertson(m: Moments) -> float:
    """sigma_x^2 sigma_p^2 - sigma_xp^2."""
    return m.sigma_x2 * m.sigma_p2 - m.sigma_xp ** 2


def coherence_radius(
    m: Moments,
    k: float,
    eps: Optional[float] = None,
    up_sr: Optional[ArrayOrFloat] = None,
) -> ArrayOrFloat:
    """
    r_c from 1/r_c^2 = k^2 (up_sr - 1/4k^2)/(2 sigma_x^2).

    Args:
        m: Moments (sigma_x2 used; a dict of arrays is also accepted)
        k: Wavenumber (1/um)
        eps: Numerator guard; defaults to 1e-9/(4k^2)
        up_sr: Precomputed Schrodinger-Robertson combination

    Returns:
        r_c in um, math.inf in the coherent limit
    """
    if eps is None:
        eps = 1e-9 * heisenberg_bound(k)
    sigma_x2 = m["sigma_x2"] if isinstance(m, dict) else m.sigma_x2
    if up_sr is None:
        up_sr = m["up_sr"] if isinstance(m, dict) else schrodinger_robertson(m)

    excess = np.asarray(up_sr, dtype=float) - heisenberg_bound(k)
    with np.errstate(divide="ignore", invalid="ignore"):
        r_c = np.where(
            excess > eps,
            np.sqrt(2.0 * np.asarray(sigma_x2) / (k ** 2 * np.maximum(excess, eps))),
            np.inf,
        )
    return float(r_c) if r_c.ndim == 0 else r_c


def squeezing(m: Moments, omega: float) -> float:
    """nu = omega sigma_x / sigma_p."""
    if m.sigma_p2 <= 0:
        raise ValueError(f"sigma_p2 must be positive, got {m.sigma_p2}")
    return omega * math.sqrt(m.sigma_x2 / m.sigma_p2)


def purity_numeric(cm: Union[CoherenceMatrix, np.ndarray]) -> float:
    """sum |G_mn|^2 / (trace G)^2."""
    G = cm.G if isinstance(cm, CoherenceMatrix) else np.asarray(cm)
    trace = _trace(G)
    return float(np.sum(np.abs(G) ** 2)) / trace ** 2


def purity_from_kernel(spec: SourceSpec, points_per_width: int = 10, max_points: int = 4001) -> float:
    """
    Purity of the launch coherence function by direct double quadrature,
    integral |G(x, x')|^2 / (integral G(x, x))^2.
    """
    narrow = spec.a0 if spec.coherent else min(spec.a0, spec.r0)
    half = 6.0 * spec.a0
    points = int(math.ceil(2.0 * half * points_per_width / narrow)) + 1
    if points > max_points:
        logger.debug(f"Kernel purity grid capped at {max_points} points (requested {points})")
        points = max_points

    x = np.linspace(spec.x0 - half, spec.x0 + half, points)
    h = x[1] - x[0]
    kernel = coherence_function(spec, x[:, None], x[None, :])
    numerator = np.sum(kernel ** 2) * h * h
    denominator = (np.sum(np.diagonal(kernel)) * h) ** 2
    return float(numerator / denominator)


def _split_moments(values: Dict[str, ArrayOrFloat], i: Optional[int] = None) -> Tuple[Moments, float]:
    """Moments and the cancellation-free SR combination, at index i of array values."""
    pick = float if i is None else (lambda v: float(v[i]))
    m = Moments(**{key: pick(values[key]) for key in Moments.model_fields})
    return m, pick(values["up_sr"])


def _record(
    z: float,
    m: Moments,
    up_sr: float,
    k: float,
    omega: float,
    bound: float,
    purity: float,
    entropy: float,
    eps: Optional[float],
) -> ObservableRecord:
    return ObservableRecord(
        z=float(z),
        sigma_x2=m.sigma_x2,
        sigma_p2=m.sigma_p2,
        sigma_xp=m.sigma_xp,
        mean_x=m.mean_x,
        mean_p=m.mean_p,
        r_c=coherence_radius(m, k, eps=eps, up_sr=up_sr),
        nu=squeezing(m, omega),
        up_h=m.sigma_x2 * m.sigma_p2,
        up_sr=up_sr,
        up_bound=bound,
        sr_excess=up_sr / bound,
        purity=purity,
        entropy=entropy,
    )


def record_at(
    z: float,
    coupling: CouplingMatrix,
    dec: SourceDecomposition,
    basis: ModeBasis,
    regime: Union[Regime, str] = Regime.EXACT,
    eps: Optional[float] = None,
) -> ObservableRecord:
    """All diagnostics at z, built from the full coherence matrix."""
    cm = gamma_at(coupling, dec, basis, z, regime)
    k, omega = basis.spec.k, basis.spec.omega
    alpha, a2, nbar = ladder_expectations(cm.G)
    m, up_sr = _split_moments(moments_from_ladder(alpha, a2, nbar, k, omega))
    return _record(
        z,
        m,
        up_sr,
        k,
        omega,
        up_bound(dec.spec, k),
        purity_numeric(cm),
        source_entropy(dec),
        eps,
    )


class LadderBands:
    """
    z-independent band sums of G0 for O(M) moment evaluation per distance.

    <a>(z) = sum_n sqrt(n) G0[n][n-1] exp(i (db_n - db_{n-1}) z) / tr, and
    likewise for <a^2> on the second off-diagonal; <a^+ a> is z-invariant.
    """

    def __init__(self, G0: np.ndarray, basis: ModeBasis, regime: Union[Regime, str]):
        self.trace = _trace(G0)
        w1, w2, n = ladder_weights(basis.M)
        delta = basis.delta_beta(regime)
        self.regime = Regime(regime)
        self.b1 = w1 * np.diagonal(G0, offset=-1)
        self.b2 = w2 * np.diagonal(G0, offset=-2)
        self.d1 = delta[1:] - delta[:-1]
        self.d2 = delta[2:] - delta[:-2]
        self.nbar = float(n @ np.diagonal(G0).real) / self.trace
        self.k = basis.spec.k
        self.omega = basis.spec.omega

    def moments(self, zs: np.ndarray) -> Dict[str, np.ndarray]:
        """Moments at every z in zs."""
        zs = np.atleast_1d(np.asarray(zs, dtype=float))
        # Summed mode by mode along axis 0, so each z sees the same order whatever the batch
        alpha = (np.exp(1j * np.outer(self.d1, zs)) * self.b1[:, None]).sum(axis=0) / self.trace
        a2 = (np.exp(1j * np.outer(self.d2, zs)) * self.b2[:, None]).sum(axis=0) / self.trace
        return moments_from_ladder(alpha, a2, np.full(zs.size, self.nbar), self.k, self.omega)


def records_from_bands(
    bands: LadderBands,
    zs: np.ndarray,
    bound: float,
    purity: float,
    entropy: float,
    eps: Optional[float] = None,
) -> List[ObservableRecord]:
    """ObservableRecords for a batch of distances via the band sums."""
    values = bands.moments(zs)
    zs = np.atleast_1d(np.asarray(zs, dtype=float))
    return [
        _record(z, *_split_moments(values, i), bands.k, bands.omega, bound, purity, entropy, eps)
        for i, z in enumerate(zs)
    ]


__all__ = [
    "TraceError",
    "heisenberg_bound",
    "up_bound",
    "ladder_weights",
    "ladder_expectations",
    "moments_from_ladder",
    "moments",
    "schrodinger_robertson",
    "coherence_radius",
    "squeezing",
    "purity_numeric",
    "purity_from_kernel",
    "record_at",
    "LadderBands",
    "records_from_bands",
]
