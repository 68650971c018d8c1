"""Gaussian and Wishart ensemble samplers, eigen-decomposition and i.i.d. gaps."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate, stats

from .core import Spectrum, draw_rng

__all__ = [
    "GaussianDraw",
    "WishartDraw",
    "sample_goe",
    "sample_gue",
    "sample_gse",
    "sample_wishart",
    "sample_matrices",
    "sample_eigenvalues",
    "eigenvalues",
    "eigenvectors",
    "nearest_spacings",
    "iid_gap_samples",
    "iid_spacing_pdf",
    "PARENTS",
]

HERMITIAN_TOL = 1e-10


@dataclass(frozen=True)
class GaussianDraw:
    beta: int
    dim: int
    matrix: np.ndarray


@dataclass(frozen=True)
class WishartDraw:
    n: int
    m: int
    beta: int
    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return self.n


def _check_size(n: int, name: str = "n") -> None:
    if int(n) != n or n < 1:
        raise ValueError(f"{name} must be a positive integer, got {n}")


def _goe(rng, n):
    h = rng.standard_normal((n, n))
    return (h + h.T) / 2


def _gue(rng, n):
    h = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    h = (h + h.conj().T) / 2
    # diagonal of (h + h^H)/2 is Re h_ii ~ N(0, 1); off-diagonal parts ~ N(0, 1/2)
    return h


def _quaternion_block(x, y):
    return np.block([[x, y], [-y.conj(), x.conj()]])


def _gse(rng, n):
    x = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    y = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    a = _quaternion_block(x, y)
    return (a + a.conj().T) / 2


def _gaussian_rect(rng, n, m, beta):
    if beta == 1:
        return rng.standard_normal((n, m))
    if beta == 2:
        return rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))
    if beta == 4:
        x = rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))
        y = rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))
        return _quaternion_block(x, y)
    raise ValueError(f"beta must be 1, 2 or 4, got {beta}")


def _wishart(rng, n, m, beta):
    h = _gaussian_rect(rng, n, m, beta)
    w = h @ h.conj().T
    return (w + w.conj().T) / 2


_GAUSSIAN = {1: _goe, 2: _gue, 4: _gse}
_ENSEMBLE_BETA = {"goe": 1, "gue": 2, "gse": 4}


def sample_goe(n: int, seed: int, index: int = 0) -> GaussianDraw:
    """GOE draw ``(H + H^T)/2`` with ``H`` filled by i.i.d. N(0, 1)."""
    _check_size(n)
    return GaussianDraw(1, n, _goe(draw_rng(seed, index), n))


def sample_gue(n: int, seed: int, index: int = 0) -> GaussianDraw:
    """GUE draw; real diagonal N(0, 1), off-diagonal real and imaginary parts N(0, 1/2)."""
    _check_size(n)
    return GaussianDraw(2, n, _gue(draw_rng(seed, index), n))


def sample_gse(n: int, seed: int, index: int = 0) -> GaussianDraw:
    """GSE draw as a ``2n x 2n`` self-dual complex hermitian matrix.

    Built from complex Gaussian blocks ``A = [[X, Y], [-conj(Y), conj(X)]]``
    and symmetrized as ``(A + A^H)/2``. Every eigenvalue is doubly degenerate.
    """
    _check_size(n)
    return GaussianDraw(4, n, _gse(draw_rng(seed, index), n))


def sample_wishart(n: int, m: int, beta: int, seed: int, index: int = 0) -> WishartDraw:
    """Wishart draw ``W = H H^H`` with ``H`` an ``n x m`` Gaussian matrix.

    Every real component of ``H`` is N(0, 1). For ``beta=4`` the quaternion
    entries are stored as 2x2 complex blocks, so ``W`` is ``2n x 2n``.
    """
    _check_size(n)
    _check_size(m, "m")
    return WishartDraw(n, m, beta, _wishart(draw_rng(seed, index), n, m, beta))


def sample_matrices(ensemble: str, n: int, count: int, seed: int, m: int | None = None,
                    beta: int | None = None, start: int = 0) -> np.ndarray:
    """Stack of ``count`` matrices, draw ``k`` using the stream ``(seed, start + k)``."""
    _check_size(n)
    _check_size(count, "count")
    if ensemble == "wishart":
        if m is None or beta is None:
            raise ValueError("wishart sampling needs m and beta")
        _check_size(m, "m")
        make = lambda rng: _wishart(rng, n, m, beta)  # noqa: E731
    elif ensemble in _ENSEMBLE_BETA:
        fn = _GAUSSIAN[_ENSEMBLE_BETA[ensemble]]
        make = lambda rng: fn(rng, n)  # noqa: E731
    else:
        raise ValueError(f"unknown ensemble {ensemble!r}")
    return np.stack([make(draw_rng(seed, start + k)) for k in range(count)])


def _dedup_pairs(vals: np.ndarray) -> np.ndarray:
    # adjacent degenerate pairs are averaged
    return vals.reshape(*vals.shape[:-1], -1, 2).mean(axis=-1)


def sample_eigenvalues(ensemble: str, n: int, count: int, seed: int, m: int | None = None,
                       beta: int | None = None, chunk: int = 2000) -> np.ndarray:
    """Eigenvalues of ``count`` draws as a ``(count, n)`` array.

    Quaternion spectra are deduplicated to ``n`` values per draw.
    """
    b = beta if ensemble == "wishart" else _ENSEMBLE_BETA.get(ensemble)
    out = []
    for start in range(0, count, chunk):
        k = min(chunk, count - start)
        mats = sample_matrices(ensemble, n, k, seed, m=m, beta=beta, start=start)
        vals = np.linalg.eigvalsh(mats)
        if b == 4:
            vals = _dedup_pairs(vals)
        out.append(vals)
    return np.concatenate(out, axis=0)


def _matrix_of(draw):
    return np.asarray(draw.matrix if hasattr(draw, "matrix") else draw)


def _check_hermitian(a: np.ndarray) -> None:
    scale = max(1.0, float(np.max(np.abs(a))))
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    if np.max(np.abs(a - a.conj().T)) > HERMITIAN_TOL * scale:
        raise ValueError("matrix is not hermitian")


def eigenvalues(draw) -> Spectrum:
    """Ascending spectrum of a draw; quaternion draws are deduplicated."""
    a = _matrix_of(draw)
    _check_hermitian(a)
    vals = np.linalg.eigvalsh(a)
    beta = getattr(draw, "beta", 1 if np.isrealobj(a) else 2)
    if beta == 4:
        return Spectrum(_dedup_pairs(vals), 4, a.shape[0] // 2, degeneracy=2)
    return Spectrum(vals, beta, a.shape[0])


def eigenvectors(draw) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and orthonormal eigenvector columns."""
    a = _matrix_of(draw)
    _check_hermitian(a)
    return np.linalg.eigh(a)


def nearest_spacings(vals: np.ndarray) -> np.ndarray:
    """Adjacent gaps of each row of sorted eigenvalues."""
    return np.diff(np.asarray(vals), axis=-1)


# parent distributions for the i.i.d. baseline: (sampler, pdf, cdf)
PARENTS = {
    "uniform": (lambda rng, size: rng.random(size), stats.uniform.pdf, stats.uniform.cdf),
    "normal": (lambda rng, size: rng.standard_normal(size), stats.norm.pdf, stats.norm.cdf),
    "exponential": (lambda rng, size: rng.standard_exponential(size), stats.expon.pdf, stats.expon.cdf),
}


def iid_gap_samples(n: int, count: int, parent: str, seed: int) -> np.ndarray:
    """Locally unfolded gaps of ``n`` i.i.d. variables, over ``count`` trials.

    Each gap ``s`` starting at ``x`` is rescaled to ``s * n * p(x)``.
    """
    if n < 2:
        raise ValueError("need n >= 2 for gaps")
    if parent not in PARENTS:
        raise ValueError(f"unsupported parent {parent!r}")
    draw, pdf, _ = PARENTS[parent]
    out = []
    for k in range(count):
        x = np.sort(draw(draw_rng(seed, k), n))
        out.append(np.diff(x) * n * pdf(x[:-1]))
    return np.concatenate(out)


def iid_spacing_pdf(s: float, n: int, parent: str) -> float:
    """Finite-n spacing density ``n int p(x) p(x+s) [1 + F(x) - F(x+s)]^(n-2) dx``."""
    _, pdf, cdf = PARENTS[parent]
    if s < 0:
        return 0.0
    lo, hi = {"uniform": (0.0, 1.0), "normal": (-np.inf, np.inf), "exponential": (0.0, np.inf)}[parent]

    def integrand(x):
        return pdf(x) * pdf(x + s) * (1.0 + cdf(x) - cdf(x + s)) ** (n - 2)

    if parent == "uniform":
        hi = max(lo, 1.0 - s)
        if hi <= lo:
            return 0.0
    val, _ = integrate.quad(integrand, lo, hi, limit=200)
    return n * val
