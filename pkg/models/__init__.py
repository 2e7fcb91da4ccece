"""Models package: pydantic schemas for specs, configuration and results."""

from .schemas import (
    Regime,
    SourceSpec,
    WaveguideSpec,
    HermiteGaussEval,
    QuadratureRule,
    SourceDecomposition,
    CharacteristicLengths,
    ModeBasis,
    CouplingMatrix,
    CoherenceMatrix,
    IntensityProfile,
    FringeResult,
    Moments,
    ObservableRecord,
    LobeCentroids,
    CatSearchResult,
    NumericsBlock,
    ScanBlock,
    OutputsBlock,
    ProfileBlock,
    MixtureBlock,
    FindCatBlock,
    PurityCurveBlock,
    RunConfig,
    SECTION_ORDER,
)

__all__ = [
    # Physical specs
    "Regime",
    "SourceSpec",
    "WaveguideSpec",
    "HermiteGaussEval",
    # Numerical containers
    "QuadratureRule",
    "SourceDecomposition",
    "CharacteristicLengths",
    "ModeBasis",
    "CouplingMatrix",
    "CoherenceMatrix",
    "IntensityProfile",
    "FringeResult",
    "Moments",
    "ObservableRecord",
    "LobeCentroids",
    "CatSearchResult",
    # Run configuration
    "NumericsBlock",
    "ScanBlock",
    "OutputsBlock",
    "ProfileBlock",
    "MixtureBlock",
    "FindCatBlock",
    "PurityCurveBlock",
    "RunConfig",
    "SECTION_ORDER",
]
