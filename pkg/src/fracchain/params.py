"""Model parameters and the error hierarchy shared by all modules."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np


class FracChainError(Exception):
    """Base class for all library errors."""


class NonConvergence(FracChainError):
    pass


class UnsupportedTheta(FracChainError):
    pass


class DomainError(FracChainError, ValueError):
    pass


class DegenerateState(FracChainError):
    pass


class NoExceedance(FracChainError):
    pass


class FitDegenerate(FracChainError):
    pass


class QuadratureFailure(FracChainError):
    pass


class GridMismatch(FracChainError, ValueError):
    pass


class InsufficientReplicas(FracChainError):
    pass


class ConfigError(FracChainError):
    pass


class CheckFailure(FracChainError):
    pass


class AliasWarning(UserWarning):
    pass


@dataclass(frozen=True)
class ModelParams:
    """Physical configuration of the chain.

    theta: decay exponent of the couplings alpha_x = -|x|^-theta.
    gamma0: noise strength; the noise used at scale eps is eps**s * gamma0.
    s: noise-scaling exponent in [0, 1].
    series_tol: absolute tolerance for lattice sums.
    series_max_terms: cap on quadrature nodes used by the lattice-sum evaluator.
    """

    theta: float
    gamma0: float = 1.0
    s: float = 0.0
    series_tol: float = 1e-13
    series_max_terms: int = 200_000

    def __post_init__(self):
        if not np.isfinite(self.theta) or self.theta <= 1.0:
            raise DomainError(f"theta must exceed 1, got {self.theta}")
        if not self.gamma0 > 0:
            raise DomainError(f"gamma0 must be positive, got {self.gamma0}")
        if not 0.0 <= self.s <= 1.0:
            raise DomainError(f"s must lie in [0, 1], got {self.s}")
        if not self.series_tol > 0:
            raise DomainError("series_tol must be positive")
        if int(self.series_max_terms) < 16:
            raise DomainError("series_max_terms must be at least 16")

    def with_(self, **kw) -> "ModelParams":
        return replace(self, **kw)

    @property
    def alpha(self) -> float:
        """Stable index of the limiting flight process."""
        return stable_index(self.theta)


def require_theta_above_two(params: ModelParams) -> None:
    if params.theta <= 2.0:
        raise UnsupportedTheta(
            f"theta > 2 is required for this operation (got theta={params.theta})"
        )


def stable_index(theta: float) -> float:
    if theta <= 2.0:
        raise UnsupportedTheta(f"theta > 2 is required (got theta={theta})")
    return 6.0 / (7.0 - theta) if theta <= 3.0 else 1.5


def reduce_k(k):
    """Map wavenumbers into [-1/2, 1/2)."""
    k = np.asarray(k, dtype=float)
    r = k - np.floor(k + 0.5)
    return r if r.ndim else float(r)
