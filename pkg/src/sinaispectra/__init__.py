"""sinai-spectra: spectral theory of Sinai's random walk"""

__version__ = "0.1.0"
