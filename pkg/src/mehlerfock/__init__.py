"""Harmonic analysis on the hyperbolic disk: conical functions, Mehler-Fock transforms,
invariant kernel densities, and the texture and desaturation pipelines built on them."""

from .conical import QuadratureConfig, QuadratureError, conical_p, conical_p_grid
from .density import DiskDensity, RadialKernel, SampleSet, kde_direct, kde_spectral
from .hypgeo import DiskPoint, MoebiusElement
from .mft import RadialFunction, RadialGrid, SpectralGrid, Spectrum, mft_forward, mft_inverse

__version__ = "0.1.0"

__all__ = [
    "QuadratureConfig",
    "QuadratureError",
    "conical_p",
    "conical_p_grid",
    "DiskDensity",
    "RadialKernel",
    "SampleSet",
    "kde_direct",
    "kde_spectral",
    "DiskPoint",
    "MoebiusElement",
    "RadialFunction",
    "RadialGrid",
    "SpectralGrid",
    "Spectrum",
    "mft_forward",
    "mft_inverse",
]
