"""Service Layer - Organized by architectural role

Core: Numerical services for extrema, potential theory, spectra, Brownian paths and walks
Composite: Suite orchestration built on the core services
"""
# Re-export all services for convenience
from sinaispectra.services.core import (
    BrownianService,
    ExtremaService,
    PotentialTheoryService,
    SpectralService,
    WalkService,
)
from sinaispectra.services.composite import SuiteService

__all__ = [
    # Core
    "BrownianService",
    "ExtremaService",
    "PotentialTheoryService",
    "SpectralService",
    "WalkService",
    # Composite
    "SuiteService",
]
