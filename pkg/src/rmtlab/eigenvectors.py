"""Eigenvector component statistics, Porter-Thomas limits, IPR and Stiefel volumes."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .sampling import sample_matrices

__all__ = [
    "ComponentSample",
    "p_component",
    "p_component_cdf",
    "porter_thomas",
    "porter_thomas_cdf",
    "ipr",
    "log_multivariate_gamma",
    "stiefel_volume",
    "fix_phase",
    "sample_eigvecs",
    "component_samples",
    "average_ipr",
]


@dataclass(frozen=True)
class ComponentSample:
    """Squared component magnitudes ``|c_k|^2`` of sampled eigenvectors."""

    y: np.ndarray
    ensemble: str
    n: int
    component: int = 0

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        if np.any(y < -1e-15) or np.any(y > 1 + 1e-12):
            raise ValueError("squared components must lie in [0, 1]")
        object.__setattr__(self, "y", np.clip(y, 0.0, 1.0))

    @property
    def eta(self) -> np.ndarray:
        """Rescaled components ``N y``."""
        return self.n * self.y


def _check_beta(beta: int) -> None:
    if beta == 4:
        raise NotImplementedError("beta=4 component marginal is not provided")
    if beta not in (1, 2):
        raise ValueError(f"beta must be 1 or 2, got {beta}")


def p_component(y, n: int, beta: int):
    """Density of ``y = |c_1|^2`` for an N x N GOE (beta=1) or GUE (beta=2) eigenvector.

    GUE: ``(N-1)(1-y)^(N-2)``. GOE: ``Gamma(N/2)/(sqrt(pi) Gamma((N-1)/2))
    (1-y)^((N-3)/2) / sqrt(y)``, with the Gamma ratio taken in log space.
    """
    _check_beta(beta)
    if n < 2:
        raise ValueError("n must be at least 2")
    y = np.asarray(y, dtype=float)
    if np.any((y < 0) | (y > 1)):
        raise ValueError("y must lie in [0, 1]")
    with np.errstate(divide="ignore", invalid="ignore"):
        if beta == 2:
            return (n - 1) * (1 - y) ** (n - 2)
        logc = math.lgamma(n / 2) - 0.5 * math.log(math.pi) - math.lgamma((n - 1) / 2)
        return np.exp(logc + (n - 3) / 2 * np.log1p(-y) - 0.5 * np.log(y))


def p_component_cdf(y, n: int, beta: int):
    _check_beta(beta)
    y = np.clip(np.asarray(y, dtype=float), 0.0, 1.0)
    if beta == 2:
        return 1 - (1 - y) ** (n - 1)
    # y ~ Beta(1/2, (N-1)/2)
    return special.betainc(0.5, (n - 1) / 2, y)


def porter_thomas(eta, beta: int):
    """Limit laws ``exp(-eta/2)/sqrt(2 pi eta)`` (beta=1) and ``exp(-eta)`` (beta=2)."""
    _check_beta(beta)
    eta = np.asarray(eta, dtype=float)
    if beta == 1:
        if np.any(eta <= 0):
            raise ValueError("beta=1 Porter-Thomas density is defined for eta > 0 only")
        return np.exp(-eta / 2) / np.sqrt(2 * np.pi * eta)
    if np.any(eta < 0):
        raise ValueError("eta must be nonnegative")
    return np.exp(-eta)


def porter_thomas_cdf(eta, beta: int):
    _check_beta(beta)
    eta = np.maximum(np.asarray(eta, dtype=float), 0.0)
    if beta == 1:
        return special.erf(np.sqrt(eta / 2))
    return -np.expm1(-eta)


def ipr(vector, tol: float = 1e-8) -> float:
    """Inverse participation ratio ``sum |c_i|^4`` of a unit vector."""
    v = np.asarray(vector).ravel()
    p = np.abs(v) ** 2
    if abs(p.sum() - 1) > tol:
        raise ValueError("vector is not normalized")
    return float(np.sum(p**2))


def log_multivariate_gamma(m: int, a: float) -> float:
    """``ln Gamma_m(a) = m(m-1)/4 ln pi + sum_{i=1}^m ln Gamma(a - (i-1)/2)``."""
    return m * (m - 1) / 4 * math.log(math.pi) + sum(math.lgamma(a - (i - 1) / 2) for i in range(1, m + 1))


def stiefel_volume(n: int, log: bool = False) -> float:
    """Volume ``2^N pi^(N^2/2) / Gamma_N(N/2)`` of the orthogonal group O(N)."""
    if n < 1:
        raise ValueError("n must be positive")
    lv = n * math.log(2) + n * n / 2 * math.log(math.pi) - log_multivariate_gamma(n, n / 2)
    return lv if log else math.exp(lv)


def fix_phase(vectors: np.ndarray, tol: float = 1e-14) -> np.ndarray:
    """Rotate each column so that its first nonzero component is real and positive."""
    v = np.array(vectors, copy=True)
    idx = np.argmax(np.abs(v) > tol, axis=0)
    lead = v[idx, np.arange(v.shape[1])]
    return v * (np.abs(lead) / lead)[None, :]


def sample_eigvecs(ensemble: str, n: int, count: int, seed: int):
    """Phase-fixed eigenvectors of ``count`` draws, shape ``(count, n, n)`` (columns)."""
    if ensemble not in ("goe", "gue"):
        raise ValueError("eigenvector statistics are available for goe and gue")
    mats = sample_matrices(ensemble, n, count, seed)
    _, vecs = np.linalg.eigh(mats)
    return np.stack([fix_phase(v) for v in vecs])


def component_samples(ensemble: str, n: int, count: int, seed: int, component: int = 0) -> ComponentSample:
    """``|c_k|^2`` over all eigenvectors of ``count`` draws (``count * n`` values)."""
    if not 0 <= component < n:
        raise ValueError("component index out of range")
    vecs = sample_eigvecs(ensemble, n, count, seed)
    norms = np.sum(np.abs(vecs) ** 2, axis=1)
    if np.max(np.abs(norms - 1)) > 1e-12:
        raise RuntimeError("eigenvectors lost normalization")
    y = np.abs(vecs[:, component, :]) ** 2
    return ComponentSample(y.ravel(), ensemble, n, component)


def average_ipr(ensemble: str, n: int, count: int, seed: int) -> float:
    """Ensemble average of the IPR over all eigenvectors of ``count`` draws."""
    vecs = sample_eigvecs(ensemble, n, count, seed)
    return float(np.mean(np.sum(np.abs(vecs) ** 4, axis=1)))
