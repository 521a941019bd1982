"""Numerical checks for two-photon Bell tests and marginal-faithful
phase-space constructions.

Modules:
    spinor   polarization states, analyzer correlations, CHSH
    lhv      local-hidden-variable feasibility for 2x2x2 behaviors
    waves    grid wavefunctions and the centered unitary Fourier transform
    causal   CDF-matching momentum transport maps, 1-D and chained 2-D
    psbell   quadrant Bell functional on the +/- wavefunction family
    wigner   discrete Wigner transform, displaced-parity CHSH
    akmeas   simultaneous two-pointer measurement records
"""

__version__ = "0.1.0"

from . import akmeas, causal, lhv, psbell, spinor, waves, wigner
from .errors import (
    BellforgeError,
    DomainError,
    GridResolutionError,
    NormalizationError,
    ToleranceError,
    TruncationError,
    ValidationError,
)

__all__ = [
    "__version__",
    "akmeas",
    "causal",
    "lhv",
    "psbell",
    "spinor",
    "waves",
    "wigner",
    "BellforgeError",
    "ValidationError",
    "NormalizationError",
    "DomainError",
    "ToleranceError",
    "TruncationError",
    "GridResolutionError",
]
