"""
Propagation engine: decomposition, mode basis, coupling and the
z-independent coherence matrix of one (source, waveguide) pair, built once
and queried at any number of distances.
"""

import logging
import math
from typing import Dict, List, Optional, Sequence, Union

import numpy as np

from models import (
    CoherenceMatrix,
    IntensityProfile,
    NumericsBlock,
    ObservableRecord,
    Regime,
    RunConfig,
    SourceSpec,
    WaveguideSpec,
)
from services import coupling as coupling_service
from services import observables
from services.coupling import CompletenessError
from services.evolution import (
    CoherenceMatrixError,
    check_coherence_matrix,
    evolve,
    intensity_profile,
    modal_coherence,
)
from services.source import coherence_function, decompose, entropy, purity_closed_form, reconstruct, spectral_entropy
from services.waveguide import (
    build_mode_basis,
    characteristic_lengths,
    default_mode_count,
    displacement_mode_number,
    estimate_mean_mode_number,
    waveguide_modes,
)

logger = logging.getLogger(__name__)

# Distances evaluated per vectorized block in band scans
_Z_BLOCK = 512
_GROWTH = 1.5


class Engine:
    """Immutable-after-build propagation state for one run configuration."""

    def __init__(
        self,
        source: SourceSpec,
        waveguide: WaveguideSpec,
        numerics: Optional[NumericsBlock] = None,
    ):
        self.source = source
        self.waveguide = waveguide
        self.numerics = numerics or NumericsBlock()
        self.k = waveguide.k
        self.lengths = characteristic_lengths(waveguide)
        self.eps = self.numerics.coherent_eps * observables.heisenberg_bound(self.k)
        self._bands: Dict[Regime, observables.LadderBands] = {}
        self._build()

    @classmethod
    def from_config(cls, config: RunConfig) -> "Engine":
        return cls(config.source, config.waveguide, config.numerics)

    def mirrored(self) -> "Engine":
        """Engine for the same source launched at -x0."""
        return Engine(self.source.model_copy(update={"x0": -self.source.x0}), self.waveguide, self.numerics)

    def _build(self):
        numerics = self.numerics
        self.decomposition = decompose(self.source, numerics.tail_tol)
        dec = self.decomposition

        m_bar = estimate_mean_mode_number(self.source, self.waveguide)
        m_ref = int(round(max(m_bar, 0.0)))
        self.grid_extent = numerics.grid_extent or (
            abs(self.source.x0) + 6.0 * max(self.source.a0, self.lengths.w0 * math.sqrt(max(m_bar, 0.0) + 1.0))
        )

        M = default_mode_count(dec, self.waveguide, numerics.max_modes or None)
        while True:
            basis = build_mode_basis(self.waveguide, M, m_ref)
            rule = coupling_service.build_overlap_rule(
                dec,
                basis,
                self.source.x0,
                spacing=numerics.quad_spacing,
                rule=numerics.quad_rule,
                halfwidth=numerics.quad_halfwidth,
                extent=self.grid_extent,
            )
            try:
                coupling = coupling_service.overlap_matrix(dec, basis, self.source.x0, rule, numerics.comp_tol)
                break
            except CompletenessError as e:
                cap = basis.m_guided + 1
                if numerics.max_modes or e.achieved > 1.0 or M >= cap:
                    logger.error(f"✗ Coupling incomplete: {e}")
                    raise
                M = min(int(math.ceil(M * _GROWTH)), cap)
                logger.info(f"Completeness deficit at p={e.p}; growing mode count to M={M}")

        self.basis = basis
        self.rule = rule
        self.coupling = coupling
        self.G0 = modal_coherence(coupling, dec)
        try:
            check_coherence_matrix(CoherenceMatrix(G=self.G0, z=0.0, regime=Regime.EXACT))
        except CoherenceMatrixError as e:
            logger.error(f"✗ {e}")
            raise
        self.trace0 = float(np.trace(self.G0))
        self.purity = observables.purity_numeric(self.G0)
        self.entropy = entropy(dec)
        self.up_bound = observables.up_bound(self.source, self.k)

        logger.info(
            f"✓ Engine ready: P={dec.P} source modes, M={basis.M} guided modes "
            f"(cutoff {basis.m_guided}), {rule.nodes.size} quadrature nodes"
        )

    # ------------------------------------------------------------------
    # Coherence matrix and profiles
    # ------------------------------------------------------------------

    def coherence(self, z: float, regime: Union[Regime, str] = Regime.EXACT) -> CoherenceMatrix:
        return evolve(self.G0, self.basis, z, regime)

    def default_grid(self) -> np.ndarray:
        return np.linspace(-self.grid_extent, self.grid_extent, self.numerics.grid_points)

    def mode_table(self, grid: np.ndarray) -> np.ndarray:
        """Guided modes tabulated on grid, reusable across distances."""
        return waveguide_modes(self.basis, grid)

    def profile(
        self,
        z: float,
        regime: Union[Regime, str] = Regime.EXACT,
        grid: Optional[np.ndarray] = None,
        psi: Optional[np.ndarray] = None,
    ) -> IntensityProfile:
        """Intensity at z in source-power units, I(x, 0) = I0 exp(-2(x-x0)^2/a0^2)."""
        if grid is None:
            grid = self.default_grid()
        cm = self.coherence(z, regime)
        # G(z) is unitarily similar to G0, whose positivity _build checks
        check_coherence_matrix(cm, reference_trace=self.trace0, psd=False)
        return intensity_profile(cm, self.basis, grid, power=self.source.power, psi=psi)

    # ------------------------------------------------------------------
    # Observables
    # ------------------------------------------------------------------

    def record_at(self, z: float, regime: Union[Regime, str] = Regime.EXACT) -> ObservableRecord:
        """Record from the full coherence matrix at z."""
        return observables.record_at(z, self.coupling, self.decomposition, self.basis, regime, eps=self.eps)

    def bands(self, regime: Union[Regime, str]) -> observables.LadderBands:
        regime = Regime(regime)
        if regime not in self._bands:
            self._bands[regime] = observables.LadderBands(self.G0, self.basis, regime)
        return self._bands[regime]

    def records(self, zs: Sequence[float], regime: Union[Regime, str] = Regime.EXACT) -> List[ObservableRecord]:
        """Records for many distances through the O(M) band sums."""
        zs = np.atleast_1d(np.asarray(zs, dtype=float))
        bands = self.bands(regime)
        out: List[ObservableRecord] = []
        for start in range(0, zs.size, _Z_BLOCK):
            out.extend(
                observables.records_from_bands(
                    bands,
                    zs[start:start + _Z_BLOCK],
                    self.up_bound,
                    self.purity,
                    self.entropy,
                    eps=self.eps,
                )
            )
        return out

    def scan_arrays(self, zs: Sequence[float], regime: Union[Regime, str] = Regime.EXACT) -> Dict[str, np.ndarray]:
        """r_c, nu and up_sr arrays for many distances without building records."""
        zs = np.atleast_1d(np.asarray(zs, dtype=float))
        bands = self.bands(regime)
        parts = {"r_c": [], "nu": [], "up_sr": [], "sigma_x2": []}
        for start in range(0, zs.size, _Z_BLOCK):
            values = bands.moments(zs[start:start + _Z_BLOCK])
            parts["r_c"].append(observables.coherence_radius(values, self.k, eps=self.eps))
            parts["nu"].append(self.waveguide.omega * np.sqrt(values["sigma_x2"] / values["sigma_p2"]))
            parts["up_sr"].append(values["up_sr"])
            parts["sigma_x2"].append(values["sigma_x2"])
        arrays = {key: np.atleast_1d(np.concatenate([np.atleast_1d(v) for v in chunks])) for key, chunks in parts.items()}
        arrays["z"] = zs
        return arrays

    # ------------------------------------------------------------------
    # Summary
    # ------------------------------------------------------------------

    def mean_mode_number(self) -> float:
        return coupling_service.mean_mode_number(self.coupling, self.decomposition)

    def kernel_residual(self, points: int = 41) -> float:
        """Largest error of the truncated mode sum against the launch kernel, in units of I0."""
        x = self.source.x0 + self.source.a0 * np.linspace(-3.0, 3.0, points)
        exact = coherence_function(self.source, x[:, None], x[None, :])
        return float(np.max(np.abs(reconstruct(self.decomposition, x, x) - exact))) / self.source.I0

    def summary(self) -> Dict[str, float]:
        """Scalar description of the built engine."""
        dec = self.decomposition
        return {
            "k": self.k,
            "L_osc": self.lengths.L_osc,
            "z_rev_estimate": self.lengths.z_rev_estimate,
            "z_cat_estimate": self.lengths.z_cat_estimate,
            "z_rev_quadratic": self.lengths.z_rev_quadratic,
            "w0": self.lengths.w0,
            "a0_over_w0": self.source.a0 / self.lengths.w0,
            "c": dec.c,
            "xi": dec.xi,
            "P": dec.P,
            "purity": purity_closed_form(dec),
            "purity_numeric": self.purity,
            "entropy": self.entropy,
            "entropy_spectrum": spectral_entropy(dec.lambda_bar),
            "kernel_residual": self.kernel_residual(),
            "M": self.basis.M,
            "M_guided": self.basis.m_guided,
            "m_ref": self.basis.m_ref,
            "mean_mode_number": self.mean_mode_number(),
            "mean_mode_estimate": estimate_mean_mode_number(self.source, self.waveguide),
            "displacement_mode_number": displacement_mode_number(self.source, self.waveguide),
            "min_completeness": float(np.min(self.coupling.completeness)),
            "quadrature_halfwidth": self.rule.x_max,
            "quadrature_points": int(self.rule.nodes.size),
        }


__all__ = ["Engine"]
