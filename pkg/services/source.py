"""
Coherent-mode decomposition of a displaced Gaussian-Schell-model source.

The launch coherence function

    G(x, x') = I0 exp(-((x-x0)^2 + (x'-x0)^2)/a0^2) exp(-(x-x')^2/r0^2)

diagonalizes into Hermite-Gauss modes of scale sqrt(2c) with a geometric
eigenvalue law lambda_p ~ xi^p.
"""

import logging
import math
from typing import Optional, Union

import numpy as np

from models import HermiteGaussEval, SourceDecomposition, SourceSpec
from utils.hgbasis import ArrayLike, evaluate, hg_stack

logger = logging.getLogger(__name__)


def mode_parameter(spec: SourceSpec) -> float:
    """c = (1/a0^4 + 2/(a0^2 r0^2))^(1/2), inverse area (1/um^2)."""
    inv_a2 = 1.0 / spec.a0 ** 2
    if spec.coherent:
        return inv_a2
    inv_r2 = 1.0 / spec.r0 ** 2
    return math.sqrt(inv_a2 ** 2 + 2.0 * inv_a2 * inv_r2)


def spectral_ratio(spec: SourceSpec, c: Optional[float] = None) -> float:
    """xi = (1/r0^2) / (1/a0^2 + 1/r0^2 + c); zero for a fully coherent source."""
    if spec.coherent:
        return 0.0
    if c is None:
        c = mode_parameter(spec)
    inv_r2 = 1.0 / spec.r0 ** 2
    return inv_r2 / (1.0 / spec.a0 ** 2 + inv_r2 + c)


def truncation_order(xi: float, tail_tol: float) -> int:
    """Smallest P with xi^(P+1) <= tail_tol."""
    if xi <= 0.0 or xi <= tail_tol:
        return 0
    P = max(int(math.ceil(math.log(tail_tol) / math.log(xi))) - 1, 0)
    # Guard the log ratio against rounding at exact powers
    while xi ** (P + 1) > tail_tol:
        P += 1
    while P > 0 and xi ** P <= tail_tol:
        P -= 1
    return P


def decompose(spec: SourceSpec, tail_tol: float = 1e-12) -> SourceDecomposition:
    """
    Coherent-mode decomposition with normalized weights.

    Args:
        spec: Source parameters
        tail_tol: Spectral tail bound, xi^(P+1) <= tail_tol

    Returns:
        SourceDecomposition with lambda_bar[p] = (1 - xi) xi^p, p = 0..P
    """
    if not 0.0 < tail_tol < 1.0:
        raise ValueError(f"tail_tol must lie in (0, 1), got {tail_tol}")

    c = mode_parameter(spec)
    xi = spectral_ratio(spec, c)

    if spec.coherent:
        P = 0
        lambda_bar = np.array([1.0])
        tail = 0.0
    else:
        P = truncation_order(xi, tail_tol)
        p = np.arange(P + 1)
        lambda_bar = (1.0 - xi) * xi ** p
        tail = xi ** (P + 1)

    logger.debug(f"Source decomposition: c={c:.6g} 1/um^2, xi={xi:.6g}, P={P}, tail={tail:.3g}")

    return SourceDecomposition(
        spec=spec,
        c=c,
        xi=xi,
        lambda_bar=lambda_bar,
        P=P,
        tail=tail,
    )


def mode_scale(dec: SourceDecomposition) -> float:
    """Hermite-Gauss scale of the source modes, sqrt(2c)."""
    return math.sqrt(2.0 * dec.c)


def source_mode(dec: SourceDecomposition, p: int, x: ArrayLike, x0: Optional[float] = None) -> Union[float, np.ndarray]:
    """Normalized source mode Phi_p(x - x0); x0 defaults to the spec displacement."""
    if not 0 <= p <= dec.P:
        raise ValueError(f"Source mode index {p} outside 0..{dec.P}")
    if x0 is None:
        x0 = dec.spec.x0
    return evaluate(HermiteGaussEval(order=p, scale=mode_scale(dec), center=x0), x)


def source_modes(dec: SourceDecomposition, x: ArrayLike, x0: Optional[float] = None) -> np.ndarray:
    """All retained source modes on x, shape (P + 1, len(x))."""
    if x0 is None:
        x0 = dec.spec.x0
    return hg_stack(dec.P, mode_scale(dec), x0, x)


def eigenvalues(dec: SourceDecomposition) -> np.ndarray:
    """Unnormalized eigenvalues lambda_p, summing to the source power."""
    return dec.power * dec.lambda_bar


def purity_closed_form(dec: SourceDecomposition) -> float:
    """(1 - xi)/(1 + xi), the geometric-law value of sum(lambda_bar^2)."""
    return (1.0 - dec.xi) / (1.0 + dec.xi)


def entropy(dec: SourceDecomposition) -> float:
    """S = -ln(1 - xi) - xi ln(xi)/(1 - xi); zero for coherent light."""
    xi = dec.xi
    if xi <= 0.0:
        return 0.0
    return -math.log1p(-xi) - xi * math.log(xi) / (1.0 - xi)


def spectral_entropy(weights: np.ndarray) -> float:
    """-sum(w ln w) over the non-zero entries of a normalized spectrum."""
    w = np.asarray(weights, dtype=float)
    w = w[w > 0]
    return float(-np.sum(w * np.log(w)))


def coherence_function(spec: SourceSpec, x: ArrayLike, x_prime: ArrayLike) -> np.ndarray:
    """Launch coherence function G(x, x', 0), broadcast over x and x'."""
    x = np.asarray(x, dtype=float)
    x_prime = np.asarray(x_prime, dtype=float)
    envelope = np.exp(-((x - spec.x0) ** 2 + (x_prime - spec.x0) ** 2) / spec.a0 ** 2)
    if spec.coherent:
        return spec.I0 * envelope
    return spec.I0 * envelope * np.exp(-((x - x_prime) ** 2) / spec.r0 ** 2)


def reconstruct(dec: SourceDecomposition, x: ArrayLike, x_prime: ArrayLike) -> np.ndarray:
    """sum_p lambda_p Phi_p(x) Phi_p(x') as a matrix over (x, x')."""
    phi_x = source_modes(dec, x)
    phi_xp = source_modes(dec, x_prime)
    return np.einsum("p,px,py->xy", eigenvalues(dec), phi_x, phi_xp)


__all__ = [
    "mode_parameter",
    "spectral_ratio",
    "truncation_order",
    "decompose",
    "mode_scale",
    "source_mode",
    "source_modes",
    "eigenvalues",
    "purity_closed_form",
    "entropy",
    "spectral_entropy",
    "coherence_function",
    "reconstruct",
]
