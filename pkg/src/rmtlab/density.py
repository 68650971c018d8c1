"""Closed-form spectral densities, polynomial families and spacing laws."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import hermite as npherm
from numpy.polynomial import polynomial as npoly
from scipy import integrate, optimize, special

__all__ = [
    "PolyFamily",
    "SkewFamily",
    "hermite",
    "hermite_functions",
    "gue_density_finite",
    "kernel",
    "reproducing_residual",
    "goe_density_finite",
    "gse_density_finite",
    "gse_density_sampled",
    "fit_gse_scale",
    "GSE_SAMPLING_SCALE",
    "semicircle",
    "semicircle_cdf",
    "mp_edges",
    "marchenko_pastur",
    "mp_shape",
    "fit_mp_edges",
    "catalan_moment",
    "wigner_surmise",
    "wigner_surmise_cdf",
    "wigner_surmise_rescaled",
    "rescaled_density_cd",
    "hermite_bulk_asymptotic",
    "log_abs_hermite",
]

SQRT2 = math.sqrt(2.0)
PI14 = math.pi ** 0.25

# The Q-family density is written for the weight exp(-2x^2); the sampled
# quaternion spectrum is wider by exactly this factor (fit once, pinned in tests).
GSE_SAMPLING_SCALE = 2.0


def hermite(n: int, x):
    """Physicists' Hermite polynomial ``H_n(x)`` by the three-term recurrence."""
    if n < 0:
        raise ValueError("degree must be nonnegative")
    x = np.asarray(x, dtype=float)
    h_prev, h = np.ones_like(x), 2 * x
    if n == 0:
        return h_prev
    for j in range(1, n):
        h_prev, h = h, 2 * x * h - 2 * j * h_prev
    return h


def hermite_functions(n: int, x) -> np.ndarray:
    """Rows ``psi_j(x) = pi_j(x) exp(-x^2/4)`` for ``j < n``.

    ``pi_j`` are the polynomials orthonormal for the weight ``exp(-x^2/2)``.
    The recurrence carries the normalization, so no factorials appear.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty((n,) + x.shape)
    out[0] = np.exp(-x**2 / 4) / (2 * np.pi) ** 0.25
    if n > 1:
        out[1] = x * out[0]
    for j in range(1, n - 1):
        out[j + 1] = (x * out[j] - math.sqrt(j) * out[j - 1]) / math.sqrt(j + 1)
    return out


def _orthonormal_polys(n: int, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    out = np.empty((n,) + x.shape)
    out[0] = 1.0 / (2 * np.pi) ** 0.25
    if n > 1:
        out[1] = x * out[0]
    for j in range(1, n - 1):
        out[j + 1] = (x * out[j] - math.sqrt(j) * out[j - 1]) / math.sqrt(j + 1)
    return out


@dataclass(frozen=True)
class PolyFamily:
    """Orthogonal polynomial family evaluated by recurrence.

    kinds: ``hermite-physicists``, ``hermite-probabilists``,
    ``hermite-orthonormal`` (weight ``exp(-x^2/2)``) and
    ``laguerre-associated`` with parameter ``alpha``.
    """

    kind: str
    alpha: float = 0.0

    KINDS = ("hermite-physicists", "hermite-probabilists", "hermite-orthonormal", "laguerre-associated")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown polynomial family {self.kind!r}")

    def values(self, n: int, x) -> np.ndarray:
        """Array of shape ``(n,) + x.shape`` holding degrees ``0..n-1``."""
        x = np.asarray(x, dtype=float)
        out = np.empty((n,) + x.shape)
        if self.kind == "hermite-orthonormal":
            return _orthonormal_polys(n, x)
        out[0] = 1.0
        if n == 1:
            return out
        if self.kind == "hermite-physicists":
            out[1] = 2 * x
            for j in range(1, n - 1):
                out[j + 1] = 2 * x * out[j] - 2 * j * out[j - 1]
        elif self.kind == "hermite-probabilists":
            out[1] = x
            for j in range(1, n - 1):
                out[j + 1] = x * out[j] - j * out[j - 1]
        else:
            a = self.alpha
            out[1] = 1 + a - x
            for j in range(1, n - 1):
                out[j + 1] = ((2 * j + 1 + a - x) * out[j] - (j + a) * out[j - 1]) / (j + 1)
        return out

    def leading(self, j: int) -> float:
        if self.kind == "hermite-physicists":
            return 2.0**j
        if self.kind == "hermite-probabilists":
            return 1.0
        if self.kind == "hermite-orthonormal":
            return 1.0 / math.sqrt(math.sqrt(2 * math.pi) * math.factorial(j))
        return (-1.0) ** j / math.factorial(j)

    def weight(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "hermite-physicists":
            return np.exp(-x**2)
        if self.kind in ("hermite-probabilists", "hermite-orthonormal"):
            return np.exp(-x**2 / 2)
        return np.where(x > 0, np.abs(x) ** self.alpha * np.exp(-x), 0.0)

    def norm_sq(self, j: int) -> float:
        if self.kind == "hermite-physicists":
            return math.sqrt(math.pi) * 2.0**j * math.factorial(j)
        if self.kind == "hermite-probabilists":
            return math.sqrt(2 * math.pi) * math.factorial(j)
        if self.kind == "hermite-orthonormal":
            return 1.0
        return math.exp(math.lgamma(j + self.alpha + 1) - math.lgamma(j + 1))

    def orthogonality_residual(self, nmax: int = 12, nodes: int = 200) -> float:
        """Max of ``|<p_i, p_j>/sqrt(h_i h_j) - delta_ij|`` for ``i, j <= nmax``."""
        if self.kind == "laguerre-associated":
            x, w = special.roots_genlaguerre(nodes, self.alpha)
        elif self.kind == "hermite-physicists":
            x, w = special.roots_hermite(nodes)
        else:
            x, w = special.roots_hermitenorm(nodes)
        p = self.values(nmax + 1, x)
        gram = (p * w) @ p.T
        h = np.array([self.norm_sq(j) for j in range(nmax + 1)])
        gram /= np.sqrt(np.outer(h, h))
        return float(np.max(np.abs(gram - np.eye(nmax + 1))))


def gue_density_finite(n: int, x):
    """Finite-N GUE density ``(1/N) sum_{j<N} psi_j(x)^2``."""
    if n < 1:
        raise ValueError("n must be positive")
    psi = hermite_functions(n, x)
    return np.sum(psi**2, axis=0) / n


def kernel(n: int, x, xp):
    """Kernel ``K_N(x, x') = exp(-(x^2 + x'^2)/4) sum_{j<N} pi_j(x) pi_j(x')``."""
    return np.sum(hermite_functions(n, x) * hermite_functions(n, xp), axis=0)


def reproducing_residual(n: int, nodes: int = 400, grid=None) -> float:
    """Sup of ``|int K(x,y) K(y,x') dy - K(x,x')|`` over a test grid."""
    if grid is None:
        grid = np.linspace(-4.0, 4.0, 17)
    y, w = special.roots_hermitenorm(nodes)
    py = _orthonormal_polys(n, y)  # weight exp(-y^2/2) is absorbed by the rule
    px = hermite_functions(n, grid)
    inner = (py * w) @ py.T
    lhs = px.T @ inner @ px
    rhs = px.T @ px
    return float(np.max(np.abs(lhs - rhs)))


# ---- skew-orthogonal families -------------------------------------------------

def _double_factorial(k: int) -> int:
    return math.prod(range(k, 0, -2)) if k > 0 else 1


def _goe_r_coeffs(k: int) -> np.ndarray:
    """Monomial coefficients of the GOE skew-orthogonal ``R_k``."""
    if k % 2 == 0:
        j = k // 2
        c = npherm.herm2poly([0] * k + [1])
        return SQRT2 / (PI14 * 2**j * _double_factorial(2 * j)) * c
    j = (k - 1) // 2
    c = -npherm.herm2poly([0] * k + [1])
    if j > 0:
        c = npoly.polyadd(c, 4 * j * npherm.herm2poly([0] * (k - 2) + [1]))
    return SQRT2 / (PI14 * 2 ** (j + 2) * _double_factorial(2 * j - 1)) * c


def _gauss_moment_cdf(mmax: int, x) -> tuple[np.ndarray, np.ndarray]:
    """``J_m(x) = int_{-inf}^x y^m e^{-y^2/2} dy`` and the full-line totals."""
    x = np.asarray(x, dtype=float)
    e = np.exp(-x**2 / 2)
    J = np.empty((mmax + 1,) + x.shape)
    T = np.zeros(mmax + 1)
    J[0] = math.sqrt(2 * math.pi) * special.ndtr(x)
    T[0] = math.sqrt(2 * math.pi)
    if mmax >= 1:
        J[1] = -e
    for m in range(2, mmax + 1):
        J[m] = -(x ** (m - 1)) * e + (m - 1) * J[m - 2]
        T[m] = (m - 1) * T[m - 2]
    return J, T


@dataclass(frozen=True)
class SkewFamily:
    """Skew-orthogonal polynomials for the Gaussian ``beta=1`` (``goe-R``) and
    ``beta=4`` (``gse-Q``) ensembles."""

    kind: str

    def __post_init__(self):
        if self.kind not in ("goe-R", "gse-Q"):
            raise ValueError(f"unknown skew family {self.kind!r}")

    def weight(self, x):
        x = np.asarray(x, dtype=float)
        return np.exp(-x**2 / 2) if self.kind == "goe-R" else np.exp(-2 * x**2)

    def coeffs(self, k: int) -> np.ndarray:
        if self.kind == "goe-R":
            return _goe_r_coeffs(k)
        return _gse_q_coeffs(k)

    def __call__(self, k: int, x):
        return npoly.polyval(np.asarray(x, dtype=float), self.coeffs(k))

    def skew_gram(self, kmax: int, npts: int = 20001, span: float = 14.0) -> np.ndarray:
        """Matrix of skew products ``<p_i, p_j>`` for ``i, j < kmax``.

        ``goe-R`` uses ``1/2 int int f(y) g(x) w(x) w(y) sign(x-y)`` and
        ``gse-Q`` uses ``1/2 int (f g' - f' g) w``.
        """
        x = np.linspace(-span, span, npts)
        w = self.weight(x)
        vals = np.array([self(k, x) for k in range(kmax)])
        g = np.zeros((kmax, kmax))
        if self.kind == "goe-R":
            phi = np.array([goe_phi(k, x) for k in range(kmax)])
            for i in range(kmax):
                for j in range(kmax):
                    # <f, g> = 1/2 int g(x) w(x) Phi_f(x) dx
                    g[i, j] = 0.5 * np.trapezoid(vals[j] * w * phi[i], x)
        else:
            der = np.array([npoly.polyval(x, npoly.polyder(self.coeffs(k))) for k in range(kmax)])
            for i in range(kmax):
                for j in range(kmax):
                    g[i, j] = 0.5 * np.trapezoid((vals[i] * der[j] - der[i] * vals[j]) * w, x)
        return g


def goe_phi(k: int, x, method: str = "closed"):
    """``Phi_k(x) = int R_k(y) e^{-y^2/2} sign(x-y) dy``.

    ``method='closed'`` integrates the monomials exactly through the normal cdf;
    ``method='quad'`` uses adaptive quadrature split at ``y = x``.
    """
    c = _goe_r_coeffs(k)
    x = np.asarray(x, dtype=float)
    if method == "closed":
        J, T = _gauss_moment_cdf(len(c) - 1, x)
        lower = np.tensordot(c, J, axes=(0, 0))
        total = float(np.dot(c, T))
        return 2 * lower - total
    if method != "quad":
        raise ValueError("method must be 'closed' or 'quad'")
    f = lambda y: npoly.polyval(y, c) * math.exp(-y * y / 2)  # noqa: E731
    out = np.empty(x.shape)
    for idx, xv in np.ndenumerate(x):
        a, _ = integrate.quad(f, -np.inf, xv, limit=200, epsabs=1e-13)
        b, _ = integrate.quad(f, xv, np.inf, limit=200, epsabs=1e-13)
        out[idx] = a - b
    return out


def goe_density_finite(n: int, x, method: str = "closed"):
    """Finite-N GOE density from the skew-orthogonal ``R`` family (``n`` even)."""
    if n < 2 or n % 2:
        raise ValueError("N even assumed")
    x = np.asarray(x, dtype=float)
    w = np.exp(-x**2 / 2)
    total = np.zeros_like(x)
    for k in range(n // 2):
        r0 = npoly.polyval(x, _goe_r_coeffs(2 * k))
        r1 = npoly.polyval(x, _goe_r_coeffs(2 * k + 1))
        total += r0 * goe_phi(2 * k + 1, x, method) - r1 * goe_phi(2 * k, x, method)
    return w * total / (2 * n)


def _hermite_scaled_table(nmax: int, x) -> tuple[np.ndarray, np.ndarray]:
    """``H_j(x sqrt 2)`` and its x-derivative ``2 sqrt2 j H_{j-1}(x sqrt 2)``."""
    t = SQRT2 * np.asarray(x, dtype=float)
    h = np.empty((nmax + 1,) + t.shape)
    h[0] = 1.0
    if nmax >= 1:
        h[1] = 2 * t
    for j in range(1, nmax):
        h[j + 1] = 2 * t * h[j] - 2 * j * h[j - 1]
    dh = np.zeros_like(h)
    for j in range(1, nmax + 1):
        dh[j] = 2 * SQRT2 * j * h[j - 1]
    return h, dh


def _gse_q_table(n: int, x):
    """Values and derivatives of ``Q_0..Q_{2n-1}`` at ``x``.

    Even members follow ``B_{2k} = H_{2k}(x sqrt2) + 4k B_{2k-2}`` on the
    unnormalized polynomials; normalization is applied afterwards.
    """
    h, dh = _hermite_scaled_table(2 * n - 1, x)
    q = np.empty_like(h)
    dq = np.empty_like(h)
    b, db = np.zeros_like(h[0]), np.zeros_like(h[0])
    for k in range(n):
        b = h[2 * k] + 4 * k * b
        db = dh[2 * k] + 4 * k * db
        ce = SQRT2 / (PI14 * 2**k * _double_factorial(2 * k))
        co = SQRT2 / (PI14 * 2 ** (k + 1) * _double_factorial(2 * k + 1))
        q[2 * k], dq[2 * k] = ce * b, ce * db
        q[2 * k + 1], dq[2 * k + 1] = co * h[2 * k + 1], co * dh[2 * k + 1]
    return q, dq


def _gse_q_coeffs(k: int) -> np.ndarray:
    def hs2(j):
        return npherm.herm2poly([0] * j + [1]) * SQRT2 ** np.arange(j + 1)

    if k % 2:
        j = (k - 1) // 2
        return SQRT2 / (PI14 * 2 ** (j + 1) * _double_factorial(2 * j + 1)) * hs2(k)
    j = k // 2
    b = np.array([1.0])
    for i in range(1, j + 1):
        b = npoly.polyadd(hs2(2 * i), 4 * i * b)
    return SQRT2 / (PI14 * 2**j * _double_factorial(2 * j)) * b


def gse_density_finite(n: int, x):
    """Finite-N density from the ``Q`` family, weight ``exp(-2x^2)``."""
    if n < 1:
        raise ValueError("n must be positive")
    x = np.asarray(x, dtype=float)
    q, dq = _gse_q_table(n, x)
    total = sum(q[2 * k] * dq[2 * k + 1] - q[2 * k + 1] * dq[2 * k] for k in range(n))
    return np.exp(-2 * x**2) * total / (2 * n)


def gse_density_sampled(n: int, x, scale: float = GSE_SAMPLING_SCALE):
    """Q-family density mapped to the units of the quaternion sampler."""
    x = np.asarray(x, dtype=float)
    return gse_density_finite(n, x / scale) / scale


def fit_gse_scale(samples, n: int) -> float:
    """Least-squares scale ``s`` so that ``rho_Q(x/s)/s`` fits the sample histogram."""
    from scipy import optimize

    x = np.asarray(samples, dtype=float).ravel()
    lo, hi = np.percentile(x, [0.1, 99.9])
    counts, edges = np.histogram(x, bins=80, range=(lo, hi), density=True)
    centers = 0.5 * (edges[1:] + edges[:-1])

    def loss(s):
        return np.sum((gse_density_finite(n, centers / s) / s - counts) ** 2)

    res = optimize.minimize_scalar(loss, bounds=(0.25, 8.0), method="bounded",
                                   options={"xatol": 1e-6})
    return float(res.x)


# ---- limiting laws ----------------------------------------------------------------

def semicircle(x):
    """Wigner semicircle ``sqrt(2 - x^2)/pi`` on ``|x| <= sqrt 2``."""
    x = np.asarray(x, dtype=float)
    return np.sqrt(np.clip(2 - x**2, 0, None)) / np.pi


def semicircle_cdf(x):
    x = np.clip(np.asarray(x, dtype=float), -SQRT2, SQRT2)
    u = x / SQRT2
    return 0.5 + (u * np.sqrt(1 - u**2) + np.arcsin(u)) / np.pi


def mp_edges(c: float) -> tuple[float, float]:
    if not 0 < c <= 1:
        raise ValueError("c must lie in (0, 1]")
    r = c ** -0.5
    return (1 - r) ** 2, (1 + r) ** 2


def marchenko_pastur(y, c: float):
    """Marcenko-Pastur density ``sqrt((y - z-)(z+ - y)) / (2 pi y)``, ``c = N/M``."""
    zm, zp = mp_edges(c)
    y = np.asarray(y, dtype=float)
    inside = (y > zm) & (y < zp) & (y > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = np.sqrt(np.clip((y - zm) * (zp - y), 0, None)) / (2 * np.pi * y)
    return np.where(inside, val, 0.0)


def mp_shape(y, a: float, b: float):
    """Normalized ``sqrt((y-a)(b-y)) / y`` on ``[a, b]`` with ``0 < a < b``."""
    y = np.asarray(y, dtype=float)
    norm = np.pi * ((a + b) / 2 - np.sqrt(a * b))
    with np.errstate(divide="ignore", invalid="ignore"):
        val = np.sqrt(np.clip((y - a) * (b - y), 0, None)) / (y * norm)
    return np.where((y > a) & (y < b), val, 0.0)


def fit_mp_edges(samples, bins: int = 120) -> tuple[float, float]:
    """Support edges of a Marcenko-Pastur-shaped sample.

    The normalized square-root-edged shape is fitted to the histogram with
    both edges free, so the estimate is driven by the bulk rather than by the
    extreme eigenvalues, whose finite-N fluctuations overshoot the support.
    """
    x = np.asarray(samples, dtype=float).ravel()
    lo, hi = np.quantile(x, [0.001, 0.999])
    counts, edges = np.histogram(x, bins=bins, range=(x.min(), x.max()))
    width = edges[1] - edges[0]
    ys = counts / (x.size * width)
    centers = 0.5 * (edges[1:] + edges[:-1])

    def resid(p):
        return mp_shape(centers, p[0], p[1]) - ys

    res = optimize.least_squares(resid, [max(lo, 1e-6), hi], bounds=([1e-9, lo], [lo * 2 + 1e-3, np.inf]))
    return float(res.x[0]), float(res.x[1])


def catalan_moment(n: int) -> float:
    """Even semicircle moment ``C_n / 2^n``."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    return math.comb(2 * n, n) / (n + 1) / 2.0**n


def wigner_surmise(s):
    """Spacing density of the 2x2 GOE, ``(s/2) exp(-s^2/4)``."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise ValueError("spacing must be nonnegative")
    return s / 2 * np.exp(-(s**2) / 4)


def wigner_surmise_cdf(s):
    s = np.clip(np.asarray(s, dtype=float), 0, None)
    return 1 - np.exp(-(s**2) / 4)


def wigner_surmise_rescaled(s):
    """Unit-mean surmise ``(pi s/2) exp(-pi s^2/4)``."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise ValueError("spacing must be nonnegative")
    return np.pi * s / 2 * np.exp(-np.pi * s**2 / 4)


# ---- Christoffel-Darboux form and bulk asymptotics -----------------------------

def _hermite_normalized(nmax: int, t) -> np.ndarray:
    """``h_j(t) = H_j(t) e^{-t^2/2} / sqrt(2^j j! sqrt(pi))`` for ``j <= nmax``."""
    t = np.asarray(t, dtype=float)
    h = np.empty((nmax + 1,) + t.shape)
    h[0] = np.exp(-t**2 / 2) / PI14
    if nmax >= 1:
        h[1] = SQRT2 * t * h[0]
    for j in range(1, nmax):
        h[j + 1] = math.sqrt(2.0 / (j + 1)) * t * h[j] - math.sqrt(j / (j + 1)) * h[j - 1]
    return h


def rescaled_density_cd(n: int, z):
    """``sqrt(2N) rho(z sqrt(2N))`` through the Christoffel-Darboux formula.

    The prefactor ``2 e^{-N z^2} / (sqrt(pi N) 2^N Gamma(N))`` is absorbed into
    normalized Hermite functions, leaving
    ``sqrt(N) h_{N-1}^2 - sqrt(N-1) h_N h_{N-2}`` at ``t = z sqrt N``.
    """
    if n < 1:
        raise ValueError("n must be positive")
    t = math.sqrt(n) * np.asarray(z, dtype=float)
    h = _hermite_normalized(n, t)
    val = math.sqrt(n) * h[n - 1] ** 2
    if n >= 2:
        val = val - math.sqrt(n - 1) * h[n] * h[n - 2]
    return val


def log_abs_hermite(n: int, t) -> tuple[np.ndarray, np.ndarray]:
    """``(log|H_n(t)|, sign H_n(t))`` computed without overflow."""
    t = np.asarray(t, dtype=float)
    h = _hermite_normalized(n, t)[n]
    log_norm = 0.5 * (n * math.log(2) + math.lgamma(n + 1) + 0.5 * math.log(math.pi))
    with np.errstate(divide="ignore"):
        return np.log(np.abs(h)) + log_norm + t**2 / 2, np.sign(h)


def hermite_bulk_asymptotic(n: int, m: int, X, log: bool = False):
    """Leading bulk approximation of ``H_{N+m}(X sqrt(2N))`` for ``|X| < 1``.

    With ``log=True`` returns ``(log|value|, sign)``.
    """
    X = np.asarray(X, dtype=float)
    if np.any(np.abs(X) >= 1):
        raise ValueError("bulk formula only")
    g = np.cos(n * X * np.sqrt(1 - X**2) + (n + 0.5) * np.arcsin(X)
               - n * np.pi / 2 - m * np.arccos(X))
    logpre = (0.25 * math.log(2 / math.pi) + (m / 2 + n / 2) * math.log(2)
              + (m / 2 - 0.25) * math.log(n) + 0.5 * math.lgamma(n + 1)
              + n * X**2 - 0.25 * np.log(1 - X**2))
    if log:
        with np.errstate(divide="ignore"):
            return logpre + np.log(np.abs(g)), np.sign(g)
    return np.exp(logpre) * g
