"""Core services: foundational numerical operations"""

from sinaispectra.services.core.brownian_service import BrownianService
from sinaispectra.services.core.extrema_service import ExtremaService
from sinaispectra.services.core.potential_theory_service import PotentialTheoryService
from sinaispectra.services.core.spectral_service import SpectralService
from sinaispectra.services.core.walk_service import WalkService

__all__ = [
    "BrownianService",
    "ExtremaService",
    "PotentialTheoryService",
    "SpectralService",
    "WalkService",
]
