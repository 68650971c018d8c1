"""Shared types, histogramming, rescaling, quadrature and distances."""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Sequence

import numpy as np

__all__ = [
    "Spectrum",
    "GridFunction",
    "HistogramSpec",
    "freedman_diaconis_bins",
    "build_histogram",
    "rescale_spectrum",
    "trapezoid_integral",
    "ks_distance",
    "sup_distance",
    "bin_average",
    "chebyshev_grid",
    "draw_rng",
    "write_csv",
    "write_json",
    "format_float",
]


@dataclass(frozen=True)
class Spectrum:
    """Ordered eigenvalues of a single draw.

    ``degeneracy`` records how many copies of each eigenvalue the parent
    matrix carried (2 for the self-dual quaternion ensemble).
    """

    values: np.ndarray
    beta: int
    dim: int
    rescaled: bool = False
    degeneracy: int = 1

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if self.beta not in (1, 2, 4):
            raise ValueError(f"beta must be 1, 2 or 4, got {self.beta}")
        if vals.ndim != 1 or len(vals) != self.dim:
            raise ValueError("length of values must equal dim")
        if np.any(np.diff(vals) < 0):
            raise ValueError("eigenvalues must be sorted ascending")
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True)
class GridFunction:
    """Real function tabulated on a strictly increasing grid.

    If ``density_tol`` is given the function is treated as a probability
    density: values must be nonnegative and the trapezoid integral must be
    within ``density_tol`` of one.
    """

    xs: np.ndarray
    ys: np.ndarray
    density_tol: float | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        ys = np.asarray(self.ys, dtype=float)
        if xs.ndim != 1 or xs.shape != ys.shape:
            raise ValueError("xs and ys must be 1-d arrays of equal length")
        if len(xs) < 2 or np.any(np.diff(xs) <= 0):
            raise ValueError("xs must be strictly increasing with at least 2 points")
        if self.density_tol is not None:
            if np.any(ys < 0):
                raise ValueError("density has negative values")
            total = np.trapezoid(ys, xs)
            if abs(total - 1.0) > self.density_tol:
                raise ValueError(f"density integrates to {total!r}, not 1")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    def __call__(self, x):
        return np.interp(x, self.xs, self.ys, left=0.0, right=0.0)


@dataclass(frozen=True)
class HistogramSpec:
    lo: float
    hi: float
    bins: int | None = None
    normalized: bool = True

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError("histogram requires lo < hi")
        if self.bins is not None and self.bins < 1:
            raise ValueError("bins must be positive")


def freedman_diaconis_bins(samples, lo: float, hi: float) -> int:
    """Bin count from the Freedman-Diaconis width ``2 IQR n^(-1/3)``."""
    x = np.asarray(samples, dtype=float)
    q75, q25 = np.percentile(x, [75, 25])
    width = 2.0 * (q75 - q25) * len(x) ** (-1.0 / 3.0)
    if width <= 0:
        return 1
    return max(1, int(np.ceil((hi - lo) / width)))


def build_histogram(samples, spec: HistogramSpec) -> GridFunction:
    """Histogram on bin centers.

    With ``spec.normalized`` the heights are divided by the number of
    in-range samples times the bin width, so ``sum(ys) * width == 1``.
    """
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("no data")
    bins = spec.bins or freedman_diaconis_bins(x, spec.lo, spec.hi)
    counts, edges = np.histogram(x, bins=bins, range=(spec.lo, spec.hi))
    total = counts.sum()
    if total == 0:
        raise ValueError("empty histogram")
    centers = 0.5 * (edges[1:] + edges[:-1])
    width = (spec.hi - spec.lo) / bins
    if spec.normalized:
        ys = counts / (total * width)
    else:
        ys = counts.astype(float)
    if bins == 1:
        # a single bin still needs a two-point grid
        centers = np.array([spec.lo, spec.hi])
        ys = np.array([ys[0], ys[0]])
    meta = {"width": width, "count": int(total), "bins": bins, "normalized": spec.normalized}
    return GridFunction(centers, ys, meta=meta)


def rescale_spectrum(s: Spectrum) -> Spectrum:
    """Divide every eigenvalue by ``sqrt(beta * N)``."""
    scale = np.sqrt(s.beta * s.dim)
    return replace(s, values=s.values / scale, rescaled=True)


def trapezoid_integral(f: GridFunction, lo: float, hi: float) -> float:
    """Composite trapezoid rule of ``f`` restricted to ``[lo, hi]``."""
    if lo >= hi:
        raise ValueError("trapezoid_integral requires lo < hi")
    xs, ys = f.xs, f.ys
    if lo < xs[0] - 1e-12 or hi > xs[-1] + 1e-12:
        raise ValueError("integration range exceeds the grid")
    inner = (xs > lo) & (xs < hi)
    gx = np.concatenate([[lo], xs[inner], [hi]])
    gy = np.concatenate([[np.interp(lo, xs, ys)], ys[inner], [np.interp(hi, xs, ys)]])
    return float(np.trapezoid(gy, gx))


def ks_distance(empirical, cdf: Callable) -> float:
    """Kolmogorov-Smirnov distance between a sample and a cdf.

    Both one-sided limits of the empirical cdf are compared at every sample
    point, the left one against ``cdf`` just below the point so that step
    cdfs are handled exactly.
    """
    x = np.asarray(empirical, dtype=float)
    if x.size == 0:
        raise ValueError("empty sample")
    x = np.sort(x)
    n = x.size
    right = np.searchsorted(x, x, side="right") / n
    left = np.searchsorted(x, x, side="left") / n
    c = np.asarray(cdf(x), dtype=float)
    c_left = np.asarray(cdf(np.nextafter(x, -np.inf)), dtype=float)
    return float(max(np.max(np.abs(right - c)), np.max(np.abs(left - c_left))))


def sup_distance(a: GridFunction, b, lo: float | None = None, hi: float | None = None) -> float:
    """Maximum of ``|a - b|`` on the grid of ``a``, optionally within ``[lo, hi]``."""
    mask = np.ones_like(a.xs, dtype=bool)
    if lo is not None:
        mask &= a.xs >= lo
    if hi is not None:
        mask &= a.xs <= hi
    xs = a.xs[mask]
    other = b(xs) if callable(b) else np.asarray(b, dtype=float)[mask]
    return float(np.max(np.abs(a.ys[mask] - np.asarray(other, dtype=float))))


def bin_average(f: Callable, hist: GridFunction, nodes: int = 16) -> np.ndarray:
    """Average of ``f`` over each bin of ``hist`` (Gauss-Legendre per bin).

    This is the expected height of a normalized histogram and removes the
    bias of comparing bin heights against point values near steep edges.
    """
    width = hist.meta.get("width")
    if width is None:
        raise ValueError("grid function carries no bin width")
    u, w = np.polynomial.legendre.leggauss(nodes)
    pts = hist.xs[:, None] + 0.5 * width * u[None, :]
    vals = np.asarray(f(pts.ravel()), dtype=float).reshape(pts.shape)
    return 0.5 * vals @ w


def chebyshev_grid(lo: float, hi: float, n: int) -> np.ndarray:
    """Endpoint-clustered grid ``(lo+hi)/2 - (hi-lo)/2 cos(theta)``."""
    theta = np.linspace(0.0, np.pi, n)
    return 0.5 * (lo + hi) - 0.5 * (hi - lo) * np.cos(theta)


def draw_rng(seed: int, index: int = 0) -> np.random.Generator:
    """Independent generator for draw ``index`` under a 64-bit ``seed``."""
    if seed < 0 or seed >= 2**64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(index),))
    return np.random.Generator(np.random.PCG64(ss))


def format_float(v) -> str:
    # repr of a Python float round-trips exactly
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_csv(path, columns: Mapping[str, Sequence]) -> None:
    names = list(columns)
    cols = [np.asarray(columns[k]) for k in names]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for row in zip(*cols):
            w.writerow([format_float(v) for v in row])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    return obj


def write_json(path, payload: Mapping) -> None:
    with open(path, "w") as fh:
        json.dump(_jsonable(dict(payload)), fh, indent=2, sort_keys=True)
        fh.write("\n")
