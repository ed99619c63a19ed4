"""Fractional superdiffusion of energy in a long-range stochastic harmonic chain.

Submodules: dispersion, scattering, kinetic_mc, resolvent, frac_pde,
chain_sim, io, verify, cli. They are imported on demand.
"""

from .params import (
    CheckFailure,
    ConfigError,
    DomainError,
    FracChainError,
    ModelParams,
    UnsupportedTheta,
    stable_index,
)

__version__ = "0.1.0"

__all__ = [
    "CheckFailure",
    "ConfigError",
    "DomainError",
    "FracChainError",
    "ModelParams",
    "UnsupportedTheta",
    "stable_index",
    "__version__",
]
