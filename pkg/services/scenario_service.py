"""
Scenario drivers behind the CLI subcommands. Each driver resolves its
output location, runs the engine and writes CSV files.
"""

import logging
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from config import settings
from models import CatSearchResult, FringeResult, RunConfig, SourceSpec
from services.cat_finder import (
    central_grid,
    find_cat,
    find_fringe_distance,
)
from services.engine import Engine
from services.evolution import fringe_visibility, lobe_centroids, mirror_profile, mixture_profile, profile_power
from services.observables import purity_from_kernel
from services.scan_service import run_scan, scan_regimes, write_scan_csv
from services.source import decompose, entropy, purity_closed_form
from utils.csv_utils import write_csv
from utils.errors import ConfigError

logger = logging.getLogger(__name__)

PROFILE_COLUMNS = ["x_um", "I_total", "I_diagonal", "I_cross"]

# Relative mismatch tolerated between the -x0 profile and the mirrored +x0 one
_PARITY_TOL = 1e-10


def output_dir(config: RunConfig, override: Optional[Union[str, Path]] = None) -> Path:
    """Directory for a run: explicit override, then outputs.directory, then OUTPUT_DIR."""
    if override:
        path = Path(override)
    elif config.outputs.directory:
        path = Path(config.outputs.directory)
    else:
        settings.ensure_directories()
        path = settings.OUTPUT_DIR
    path.mkdir(parents=True, exist_ok=True)
    return path


def z_label(z: float) -> str:
    return "%.12g" % z


def write_profile_csv(path: Path, profile, config: RunConfig, split: bool = True) -> Path:
    if split:
        rows = zip(profile.grid, profile.total, profile.diagonal_part, profile.cross_part)
        return write_csv(path, PROFILE_COLUMNS, rows, config=config)
    return write_csv(path, PROFILE_COLUMNS[:2], zip(profile.grid, profile.total), config=config)


def write_coupling_csv(path: Path, engine: Engine, config: RunConfig) -> Path:
    """T as rows p, columns m."""
    T = engine.coupling.T
    header = ["p"] + [f"m{m}" for m in range(T.shape[1])]
    rows = ([p] + list(T[p]) for p in range(T.shape[0]))
    return write_csv(path, header, rows, config=config)


def cmd_scan(
    config: RunConfig,
    out: Optional[Union[str, Path]] = None,
    engine: Optional[Engine] = None,
    backend: Optional[str] = None,
    workers: Optional[int] = None,
) -> List[Path]:
    """One scan CSV per regime (two files for regime = both)."""
    directory = output_dir(config, out)
    if engine is None and (backend or settings.SCAN_BACKEND) == "local":
        engine = Engine.from_config(config)

    paths = []
    for regime in scan_regimes(config.scan):
        records = run_scan(config, regime, backend=backend, workers=workers, engine=engine)
        path = directory / f"{config.outputs.prefix}_scan_{regime.value}.csv"
        paths.append(write_scan_csv(path, records, config))
    return paths


def cmd_profile(
    config: RunConfig,
    z: Optional[float] = None,
    split: Optional[bool] = None,
    out: Optional[Union[str, Path]] = None,
    engine: Optional[Engine] = None,
) -> Path:
    """Intensity profile at z with optional diagonal/cross columns."""
    z = config.profile.z if z is None else z
    split = config.profile.split if split is None else split
    engine = engine or Engine.from_config(config)

    profile = engine.profile(z, config.profile.regime)
    total, cross = profile_power(profile)
    logger.info(f"Profile power at z={z:g} um: {total:.6g} (cross part {cross:.3e})")
    path =output_dir(config, out) / f"{config.outputs.prefix}_profile_z{z_label(z)}.csv"
    return write_profile_csv(path, profile, config, split)


def _fringe_distance(engine: Engine, config: RunConfig) -> float:
    result, _ = find_cat(engine, config.find_cat)
    if not result.found:
        logger.warning(f"Cat search failed ({result.message}); using the revival estimate")
        return engine.lengths.z_rev_estimate
    z, _ = find_fringe_distance(engine, result.z_cat, halfwidth=config.mixture.window, regime=config.find_cat.regime)
    return z


def cmd_mixture(
    config: RunConfig,
    z: Optional[float] = None,
    out: Optional[Union[str, Path]] = None,
    engine: Optional[Engine] = None,
) -> Dict[str, object]:
    """
    Profiles of the +x0 and -x0 launches, their overlay and their weighted
    incoherent sum, with central fringe visibilities.

    Returns:
        Dict with z, file paths and FringeResults for plus, minus and sum
    """
    engine = engine or Engine.from_config(config)
    mirror = engine.mirrored()
    mix = config.mixture
    if z is None:
        z = _fringe_distance(engine, config) if mix.z == "auto" else float(mix.z)

    directory = output_dir(config, out)
    prefix = config.outputs.prefix
    grid = engine.default_grid()
    plus = engine.profile(z, grid=grid)
    minus = mirror.profile(z, grid=grid)
    total = mixture_profile([plus, minus], [mix.weight_plus, mix.weight_minus])
    parity = float(np.max(np.abs(mirror_profile(plus).total - minus.total)))
    if parity > _PARITY_TOL * float(np.max(plus.total)):
        logger.warning(f"✗ -x0 profile deviates from the mirrored +x0 profile by {parity:.3e}")

    paths = {
        "plus": write_profile_csv(directory / f"{prefix}_mixture_plus.csv", plus, config),
        "minus": write_profile_csv(directory / f"{prefix}_mixture_minus.csv", minus, config),
        "overlay": write_csv(
            directory / f"{prefix}_mixture_overlay.csv",
            ["x_um", "I_plus", "I_minus"],
            zip(grid, plus.total, minus.total),
            config=config,
        ),
        "sum": write_profile_csv(directory / f"{prefix}_mixture_sum.csv", total, config),
    }

    fine = central_grid(engine, mix.window)
    window = (float(fine[0]), float(fine[-1]))
    fine_plus = engine.profile(z, grid=fine)
    fine_minus = mirror.profile(z, grid=fine)
    fine_sum = mixture_profile([fine_plus, fine_minus], [mix.weight_plus, mix.weight_minus])
    visibility: Dict[str, FringeResult] = {
        "plus": fringe_visibility(fine_plus, window),
        "minus": fringe_visibility(fine_minus, window),
        "sum": fringe_visibility(fine_sum, window),
    }
    for name, result in visibility.items():
        logger.info(f"Fringe visibility ({name}) in |x| <= {window[1]:.2f} um: {result.visibility:.4f}")

    return {"z": float(z), "paths": paths, "visibility": visibility}


def cmd_find_cat(
    config: RunConfig,
    out: Optional[Union[str, Path]] = None,
    engine: Optional[Engine] = None,
) -> Tuple[CatSearchResult, Path]:
    """Cat distance with fringe distance and lobe separation; coarse envelope to CSV."""
    engine = engine or Engine.from_config(config)
    result, coarse = find_cat(engine, config.find_cat)

    if result.found:
        z_fringe, _ = find_fringe_distance(
            engine, result.z_cat, halfwidth=config.mixture.window, regime=config.find_cat.regime
        )
        lobes = lobe_centroids(engine.profile(result.z_cat, config.find_cat.regime))
        result = result.model_copy(update={"z_fringe": z_fringe, "lobe_separation": lobes.separation})

    path = write_csv(
        output_dir(config, out) / f"{config.outputs.prefix}_find_cat.csv",
        ["block_start_um", "z_at_max_um", "r_c_envelope_um", "nu_envelope"],
        zip(coarse.block_start, coarse.z_at_max, coarse.r_c_envelope, coarse.nu_envelope),
        config=config,
    )
    return result, path


def purity_curve_ratios(config: RunConfig) -> np.ndarray:
    curve = config.purity_curve
    if curve.spacing == "log":
        return np.geomspace(curve.ratio_min, curve.ratio_max, curve.n)
    return np.linspace(curve.ratio_min, curve.ratio_max, curve.n)


def cmd_purity_curve(config: RunConfig, out: Optional[Union[str, Path]] = None) -> Path:
    """
    Purity (closed form and kernel quadrature) and entropy against r0/a0,
    sweeping r0 at fixed a0 or a0 at fixed r0.
    """
    base = config.source
    vary = config.purity_curve.vary
    if vary == "a0" and base.coherent:
        raise ConfigError("purity_curve.vary: sweeping a0 needs a finite source.r0")

    rows = []
    for ratio in purity_curve_ratios(config):
        if vary == "r0":
            spec = SourceSpec(a0=base.a0, r0=ratio * base.a0, x0=base.x0, I0=base.I0)
        else:
            spec = SourceSpec(a0=base.r0 / ratio, r0=base.r0, x0=base.x0, I0=base.I0)
        dec = decompose(spec, config.numerics.tail_tol)
        rows.append([
            ratio,
            spec.a0,
            spec.r0,
            dec.xi,
            purity_closed_form(dec),
            purity_from_kernel(spec),
            entropy(dec),
        ])

    return write_csv(
        output_dir(config, out) / f"{config.outputs.prefix}_purity_curve.csv",
        ["r0_over_a0", "a0_um", "r0_um", "xi", "purity_closed_form", "purity_numeric", "entropy"],
        rows,
        config=config,
    )


def info(config: RunConfig, engine: Optional[Engine] = None) -> Dict[str, float]:
    """Characteristic lengths, decomposition and mode counts of a configuration."""
    engine = engine or Engine.from_config(config)
    return engine.summary()


__all__ = [
    "PROFILE_COLUMNS",
    "output_dir",
    "z_label",
    "write_profile_csv",
    "write_coupling_csv",
    "cmd_scan",
    "cmd_profile",
    "cmd_mixture",
    "cmd_find_cat",
    "purity_curve_ratios",
    "cmd_purity_curve",
    "info",
]
