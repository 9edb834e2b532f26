"""Custom exceptions for sinai-spectra operations"""

from typing import Optional


class SinaiSpectraError(Exception):
    """Base exception for sinai-spectra operations"""
    pass


class ConfigurationError(SinaiSpectraError):
    """Configuration file or parameter issues"""
    pass


class FileFormatError(SinaiSpectraError):
    """Malformed environment, potential or path files"""
    pass


class WindowError(SinaiSpectraError):
    """Lattice window too small for the requested operation"""
    pass


class OverlapError(SinaiSpectraError):
    """Site sets that must be disjoint overlap"""
    pass


class DegenerateError(SinaiSpectraError):
    """Exact ties that make a labeling or decimation ambiguous"""
    pass


class EllipticityError(SinaiSpectraError):
    """Potential increment beyond the ellipticity bound"""

    def __init__(self, site: int, increment: float, bound: float):
        self.site = site
        self.increment = increment
        self.bound = bound
        super().__init__(
            f"Increment {increment:.6g} at site {site} exceeds ellipticity bound {bound:.6g}"
        )


class WindowExitError(WindowError):
    """Simulated walk left the environment window"""

    def __init__(self, time: int, position: int):
        self.time = time
        self.position = position
        super().__init__(f"Walk left the environment window at time {time} (position {position})")


class SpectrumCollisionError(SinaiSpectraError):
    """Spectral parameter lies on the spectrum of the Dirichlet operator"""

    def __init__(self, lam: float, nearest: float):
        self.lam = lam
        self.nearest = nearest
        super().__init__(
            f"lambda={lam:.6e} lies on the spectrum (nearest eigenvalue {nearest:.6e})"
        )


class InsufficientSpanError(SinaiSpectraError):
    """Too few interior slopes for stationary statistics"""

    def __init__(self, count: int, required: int, span: Optional[float] = None):
        self.count = count
        self.required = required
        message = f"Only {count} interior slopes found, {required} required"
        if span is not None:
            message += f" (span={span:g})"
        super().__init__(message)


class AdjointnessError(SinaiSpectraError):
    """Dirichlet generator failed the L2(mu) self-adjointness check"""
    pass


class RejectedPathError(SinaiSpectraError):
    """Rescaled potential is not a good path for the requested (h, delta)"""

    def __init__(self, reason: str):
        self.reason = reason
        super().__init__(f"Good-path certificate rejected: {reason}")
