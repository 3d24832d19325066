"""chaoslim: polynomial-chaos scaling limits of disordered systems.

Subpackages
-----------
chaos    sparse multi-linear polynomial algebra and Lindeberg-type bounds
wiener   discretized white noise and Wiener-chaos series
simplex  ordered-simplex gap integrals (closed form and quadrature oracle)
pinning  disordered pinning model with exact DP oracles
polymer  (long-range) directed polymer with exact DP oracles
ising    desk-scale critical 2D Ising / RFIM by exact enumeration
tilting  exponential tilting with verified quantitative bounds
harness  seeded Monte Carlo studies, KS diagnostics, report emission
"""

from . import chaos, dists, harness, ising, pinning, polymer, simplex, tilting, wiener
from .errors import (
    ChaoslimError,
    ConditioningError,
    DomainError,
    InputError,
    NumericError,
    PreconditionError,
    ResourceError,
)

__all__ = [
    "chaos",
    "dists",
    "harness",
    "ising",
    "pinning",
    "polymer",
    "simplex",
    "tilting",
    "wiener",
    "ChaoslimError",
    "ConditioningError",
    "DomainError",
    "InputError",
    "NumericError",
    "PreconditionError",
    "ResourceError",
]

__version__ = "0.1.0"
