"""Services package: source, waveguide, coupling, evolution, observables and the scan drivers."""

from .engine import Engine
from .source import decompose, purity_closed_form, entropy
from .waveguide import characteristic_lengths, m_guided, build_mode_basis
from .coupling import overlap_matrix
from .evolution import evolve, intensity_profile, fringe_visibility
from .observables import moments, coherence_radius, squeezing

__all__ = [
    "Engine",
    "decompose",
    "purity_closed_form",
    "entropy",
    "characteristic_lengths",
    "m_guided",
    "build_mode_basis",
    "overlap_matrix",
    "evolve",
    "intensity_profile",
    "fringe_visibility",
    "moments",
    "coherence_radius",
    "squeezing",
]
