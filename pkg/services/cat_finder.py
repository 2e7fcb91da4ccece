"""
Numerical location of the cat distance from the coherence-radius envelope,
and of the nearby distance where the central interference fringes peak.
"""

import logging
import math
from typing import NamedTuple, Optional, Tuple, Union

import numpy as np

from models import CatSearchResult, FindCatBlock, FringeResult, Regime
from services.engine import Engine
from services.evolution import fringe_visibility

logger = logging.getLogger(__name__)

# Sampling of the central fringe window (um)
FRINGE_GRID_SPACING = 0.02


class EnvelopeScan(NamedTuple):
    """Per-block maxima of r_c and nu; each block samples one L_osc."""
    block_start: np.ndarray
    z_at_max: np.ndarray
    r_c_envelope: np.ndarray
    nu_envelope: np.ndarray


def envelope_scan(
    engine: Engine,
    z_lo: float,
    z_hi: float,
    blocks: int,
    samples: int,
    regime: Union[Regime, str] = Regime.EXACT,
) -> EnvelopeScan:
    """Sample `samples` points over one L_osc at each of `blocks` starts in [z_lo, z_hi - L_osc]."""
    period = engine.lengths.L_osc
    last = max(z_hi - period, z_lo)
    starts = np.linspace(z_lo, last, blocks)
    offsets = np.arange(samples) * (period / samples)
    zs = (starts[:, None] + offsets[None, :]).ravel()

    arrays = engine.scan_arrays(zs, regime)
    r_c = arrays["r_c"].reshape(blocks, samples)
    nu = arrays["nu"].reshape(blocks, samples)

    rows = np.arange(blocks)
    best = np.argmax(r_c, axis=1)
    return EnvelopeScan(
        block_start=starts,
        z_at_max=zs.reshape(blocks, samples)[rows, best],
        r_c_envelope=r_c[rows, best],
        nu_envelope=nu.max(axis=1),
    )


def _not_found(message: str, z_rev: float, contrast: Optional[float] = None) -> CatSearchResult:
    logger.warning(f"✗ No cat found: {message}")
    return CatSearchResult(found=False, message=message, z_rev_estimate=z_rev, envelope_contrast=contrast)


def find_cat(engine: Engine, options: Optional[FindCatBlock] = None) -> Tuple[CatSearchResult, EnvelopeScan]:
    """
    Coarse r_c envelope over [window_lo, window_hi] * z_rev_estimate, then a
    finer envelope around the best coarse block.

    Returns:
        (result, coarse envelope scan)
    """
    options = options or FindCatBlock()
    z_rev = engine.lengths.z_rev_estimate
    regime = Regime(options.regime)

    coarse = envelope_scan(
        engine,
        options.window_lo * z_rev,
        options.window_hi * z_rev,
        options.blocks,
        options.samples_per_period,
        regime,
    )
    envelope = coarse.r_c_envelope
    finite = np.isfinite(envelope)

    if not finite.any():
        return _not_found(
            "coherence radius is infinite across the window; the excitation is a "
            "stationary coherent state with no recoherence dynamics",
            z_rev,
        ), coarse

    floor = float(np.median(envelope[finite]))
    best = int(np.argmax(np.where(finite, envelope, -np.inf)))
    contrast = float(envelope[best] / floor) if floor > 0 else math.inf

    if not (contrast >= options.min_contrast) or not finite.all():
        return _not_found(
            f"no recoherence peak above the noise floor (peak/median = {contrast:.3f}, "
            f"required {options.min_contrast:g}); try a longer window or other parameters",
            z_rev,
            contrast,
        ), coarse

    spacing = float(coarse.block_start[1] - coarse.block_start[0]) if options.blocks > 1 else engine.lengths.L_osc
    center = float(coarse.block_start[best])
    refined = envelope_scan(
        engine,
        max(center - 2.0 * spacing, 0.0),
        center + 2.0 * spacing + engine.lengths.L_osc,
        options.refine_blocks,
        options.refine_samples,
        regime,
    )
    top = int(np.argmax(np.where(np.isfinite(refined.r_c_envelope), refined.r_c_envelope, -np.inf)))
    z_cat = float(refined.z_at_max[top])

    logger.info(f"✓ Cat found at z={z_cat:.6g} um ({z_cat / z_rev:.4f} of the revival estimate)")
    return CatSearchResult(
        found=True,
        message="recoherence peak found",
        z_rev_estimate=z_rev,
        z_cat=z_cat,
        r_c_at_cat=float(refined.r_c_envelope[top]),
        nu_envelope_at_cat=float(refined.nu_envelope[top]),
        ratio_to_estimate=z_cat / z_rev,
        envelope_contrast=contrast,
    ), coarse


def central_window(engine: Engine, halfwidth: float = 0.0) -> float:
    """Half-width of the central fringe window; defaults to |x0|/2 (w0 on axis)."""
    if halfwidth > 0:
        return halfwidth
    x0 = abs(engine.source.x0)
    return 0.5 * x0 if x0 > 0 else engine.lengths.w0


def central_grid(engine: Engine, halfwidth: float = 0.0) -> np.ndarray:
    """Finely sampled grid over the central window."""
    half = central_window(engine, halfwidth)
    points = int(math.ceil(2.0 * half / FRINGE_GRID_SPACING)) + 1
    return np.linspace(-half, half, points)


def find_fringe_distance(
    engine: Engine,
    z_center: float,
    span: Optional[float] = None,
    samples: int = 61,
    halfwidth: float = 0.0,
    regime: Union[Regime, str] = Regime.EXACT,
) -> Tuple[float, FringeResult]:
    """
    Distance within z_center +/- span (default L_osc) of largest central fringe visibility.

    Returns:
        (z_fringe, fringe result there)
    """
    span = engine.lengths.L_osc if span is None else span
    grid = central_grid(engine, halfwidth)
    psi = engine.mode_table(grid)
    window = (float(grid[0]), float(grid[-1]))

    best_z, best = float(z_center), FringeResult(visibility=0.0, has_fringes=False, n_extrema=0)
    for z in np.linspace(max(z_center - span, 0.0), z_center + span, samples):
        result = fringe_visibility(engine.profile(float(z), regime, grid=grid, psi=psi), window)
        if result.visibility > best.visibility:
            best_z, best = float(z), result

    logger.info(f"Central fringes peak at z={best_z:.6g} um (visibility {best.visibility:.3f})")
    return best_z, best


__all__ = [
    "FRINGE_GRID_SPACING",
    "EnvelopeScan",
    "envelope_scan",
    "find_cat",
    "central_window",
    "central_grid",
    "find_fringe_distance",
]
