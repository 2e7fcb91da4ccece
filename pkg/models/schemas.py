"""
Pydantic schemas for physical specs, run configuration blocks and results.

All lengths are in micrometers, inverse lengths in 1/um, angles in rad.
"""

import enum
import math
from typing import List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


_INFINITY_WORDS = {"inf", "+inf", "infinity", "+infinity", "∞"}


def _parse_infinity(value):
    if isinstance(value, str) and value.strip().lower() in _INFINITY_WORDS:
        return math.inf
    return value


class Regime(str, enum.Enum):
    """Propagation-constant regimes."""
    EXACT = "exact"
    PARAXIAL = "paraxial"


# ---------------------------------------------------------------------------
# Physical specs
# ---------------------------------------------------------------------------

class SourceSpec(BaseModel):
    """Displaced Gaussian-Schell-model source."""
    model_config = ConfigDict(frozen=True)

    a0: float = Field(gt=0, allow_inf_nan=False)
    r0: float = Field(gt=0)  # math.inf for a fully coherent beam
    x0: float = Field(default=0.0, allow_inf_nan=False)
    I0: float = Field(default=1.0, gt=0, allow_inf_nan=False)

    @field_validator("r0", mode="before")
    @classmethod
    def _coerce_r0(cls, value):
        return _parse_infinity(value)

    @property
    def coherent(self) -> bool:
        return math.isinf(self.r0)

    @property
    def power(self) -> float:
        """Total power of the launch intensity I0*exp(-2(x-x0)^2/a0^2)."""
        return self.I0 * self.a0 * math.sqrt(math.pi / 2.0)


class WaveguideSpec(BaseModel):
    """Parabolic graded-index waveguide n^2 = n0^2 - omega^2 x^2."""
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    n0: float = Field(gt=1, allow_inf_nan=False)
    omega: float = Field(gt=0, allow_inf_nan=False)
    wavelength: float = Field(gt=0, allow_inf_nan=False, alias="lambda")

    @property
    def k(self) -> float:
        return 2.0 * math.pi / self.wavelength


class HermiteGaussEval(BaseModel):
    """A single normalized Hermite-Gauss function of order n, scale s, center."""
    model_config = ConfigDict(frozen=True)

    order: int = Field(ge=0)
    scale: float = Field(gt=0, allow_inf_nan=False)
    center: float = Field(default=0.0, allow_inf_nan=False)


# ---------------------------------------------------------------------------
# Numerical containers
# ---------------------------------------------------------------------------

class _ArrayModel(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)


class QuadratureRule(_ArrayModel):
    """Nodes and weights of a composite rule on a finite window."""
    nodes: np.ndarray
    weights: np.ndarray
    rule: str = "simpson"

    @property
    def x_min(self) -> float:
        return float(self.nodes[0])

    @property
    def x_max(self) -> float:
        return float(self.nodes[-1])

    def integrate(self, values: np.ndarray) -> float:
        return float(np.dot(self.weights, values))


class SourceDecomposition(_ArrayModel):
    """Coherent-mode spectrum of a GSM source."""
    spec: SourceSpec
    c: float
    xi: float
    lambda_bar: np.ndarray
    P: int
    tail: float

    @property
    def n_modes(self) -> int:
        return self.P + 1

    @property
    def power(self) -> float:
        return self.spec.power


class CharacteristicLengths(BaseModel):
    """Oscillation, revival and waist lengths of a waveguide (um)."""
    L_osc: float
    z_rev_estimate: float
    z_cat_estimate: float
    w0: float
    z_rev_quadratic: float


class ModeBasis(_ArrayModel):
    """Retained waveguide modes and their propagation constants."""
    spec: WaveguideSpec
    M: int
    m_guided: int
    scale: float
    m_ref: int
    betas_exact: np.ndarray
    betas_paraxial: np.ndarray
    delta_exact: np.ndarray
    delta_paraxial: np.ndarray

    def delta_beta(self, regime: "Regime") -> np.ndarray:
        """Propagation constants relative to the reference mode m_ref."""
        return self.delta_exact if Regime(regime) == Regime.EXACT else self.delta_paraxial


class CouplingMatrix(_ArrayModel):
    """Overlaps T[p][m] between source modes and waveguide modes."""
    T: np.ndarray
    source_ref: str
    basis_ref: str
    completeness: np.ndarray


class CoherenceMatrix(_ArrayModel):
    """Coherence matrix G[m][n] in the waveguide-mode basis at distance z."""
    G: np.ndarray
    z: float
    regime: Regime

    @property
    def trace(self) -> float:
        return float(np.trace(self.G).real)


class IntensityProfile(_ArrayModel):
    """Intensity on a grid, split into diagonal (mixture) and cross (coherence) parts."""
    grid: np.ndarray
    total: np.ndarray
    diagonal_part: np.ndarray
    cross_part: np.ndarray


class FringeResult(BaseModel):
    """Fringe visibility over a window; has_fringes is False for smooth profiles."""
    visibility: float
    has_fringes: bool
    n_extrema: int


class Moments(BaseModel):
    """First and central second-order moments of x and p."""
    mean_x: float
    mean_p: float
    sigma_x2: float
    sigma_p2: float
    sigma_xp: float


class ObservableRecord(BaseModel):
    """All scalar diagnostics at one propagation distance."""
    z: float
    sigma_x2: float
    sigma_p2: float
    sigma_xp: float
    mean_x: float
    mean_p: float
    r_c: float
    nu: float
    up_h: float
    up_sr: float
    up_bound: float
    sr_excess: float
    purity: float
    entropy: float


class LobeCentroids(BaseModel):
    """Centroids of the two halves of a profile split at its intensity center."""
    center: float
    left: float
    right: float
    separation: float


class CatSearchResult(BaseModel):
    """Outcome of the cat-distance search."""
    found: bool
    message: str
    z_rev_estimate: float
    z_cat: Optional[float] = None
    r_c_at_cat: Optional[float] = None
    nu_envelope_at_cat: Optional[float] = None
    ratio_to_estimate: Optional[float] = None
    envelope_contrast: Optional[float] = None
    z_fringe: Optional[float] = None
    lobe_separation: Optional[float] = None


# ---------------------------------------------------------------------------
# Run configuration blocks
# ---------------------------------------------------------------------------

class NumericsBlock(BaseModel):
    model_config = ConfigDict(frozen=True)

    tail_tol: float = Field(default=1e-12, gt=0, lt=1)
    comp_tol: float = Field(default=1e-10, gt=0, lt=1)
    coherent_eps: float = Field(default=1e-9, gt=0, lt=1)
    grid_points: int = Field(default=2048, ge=3)
    grid_extent: float = Field(default=0.0, ge=0)  # 0 -> derived from the beam
    quad_spacing: float = Field(default=0.05, gt=0)
    quad_halfwidth: float = Field(default=0.0, ge=0)  # 0 -> derived from the scales
    quad_rule: Literal["simpson", "trapezoid"] = "simpson"
    max_modes: int = Field(default=0, ge=0)  # 0 -> heuristic


class ScanBlock(BaseModel):
    model_config = ConfigDict(frozen=True)

    z_min: float = Field(default=0.0, ge=0)
    z_max: float = Field(default=0.0, ge=0)
    n_z: int = Field(default=1, ge=1)
    regime: Literal["exact", "paraxial", "both"] = "exact"
    spacing: Literal["linear", "log"] = "linear"

    @model_validator(mode="after")
    def _check_range(self):
        if self.z_min > self.z_max:
            raise ValueError("z_min must not exceed z_max")
        if self.spacing == "log" and self.z_min <= 0:
            raise ValueError("log spacing requires z_min > 0")
        return self


class OutputsBlock(BaseModel):
    model_config = ConfigDict(frozen=True)

    directory: str = ""  # empty -> settings.OUTPUT_DIR
    prefix: str = "run"


class ProfileBlock(BaseModel):
    model_config = ConfigDict(frozen=True)

    z: float = Field(default=0.0, ge=0)
    split: bool = True
    regime: Literal["exact", "paraxial"] = "exact"


class MixtureBlock(BaseModel):
    model_config = ConfigDict(frozen=True)

    z: Union[float, Literal["auto"]] = "auto"
    weight_plus: float = Field(default=0.5, ge=0)
    weight_minus: float = Field(default=0.5, ge=0)
    window: float = Field(default=0.0, ge=0)  # central half-width; 0 -> x0/2

    @field_validator("z", mode="before")
    @classmethod
    def _coerce_z(cls, value):
        if isinstance(value, str) and value.strip().lower() == "auto":
            return "auto"
        return value


class FindCatBlock(BaseModel):
    model_config = ConfigDict(frozen=True)

    window_lo: float = Field(default=0.25, gt=0)
    window_hi: float = Field(default=1.25, gt=0)
    blocks: int = Field(default=400, ge=8)
    samples_per_period: int = Field(default=24, ge=20)
    refine_blocks: int = Field(default=81, ge=3)
    refine_samples: int = Field(default=48, ge=20)
    min_contrast: float = Field(default=1.5, gt=1)
    regime: Literal["exact", "paraxial"] = "exact"

    @model_validator(mode="after")
    def _check_window(self):
        if self.window_lo >= self.window_hi:
            raise ValueError("window_lo must be below window_hi")
        return self


class PurityCurveBlock(BaseModel):
    model_config = ConfigDict(frozen=True)

    vary: Literal["r0", "a0"] = "r0"
    ratio_min: float = Field(default=0.1, gt=0)
    ratio_max: float = Field(default=10.0, gt=0)
    n: int = Field(default=40, ge=2)
    spacing: Literal["linear", "log"] = "log"

    @model_validator(mode="after")
    def _check_range(self):
        if self.ratio_min >= self.ratio_max:
            raise ValueError("ratio_min must be below ratio_max")
        return self


class RunConfig(BaseModel):
    """Complete resolved configuration of one run."""
    model_config = ConfigDict(frozen=True)

    source: SourceSpec
    waveguide: WaveguideSpec
    numerics: NumericsBlock = NumericsBlock()
    scan: ScanBlock = ScanBlock()
    outputs: OutputsBlock = OutputsBlock()
    profile: ProfileBlock = ProfileBlock()
    mixture: MixtureBlock = MixtureBlock()
    find_cat: FindCatBlock = FindCatBlock()
    purity_curve: PurityCurveBlock = PurityCurveBlock()


SECTION_ORDER: List[str] = [
    "source",
    "waveguide",
    "numerics",
    "scan",
    "outputs",
    "profile",
    "mixture",
    "find_cat",
    "purity_curve",
]
