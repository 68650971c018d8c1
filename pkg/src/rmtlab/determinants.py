"""Vandermonde forms, Pfaffians, Andreief and de Bruijn identities, Hankel
determinants, sign-count probabilities, Toda and Dyson-Gaudin checks."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import mpmath
import numpy as np
from scipy import integrate, special

from .density import PolyFamily, kernel

__all__ = [
    "SkewMatrix",
    "MomentSequence",
    "Measure",
    "GAUSSIAN_MEASURE",
    "vandermonde",
    "vandermonde_poly_form",
    "pfaffian",
    "pfaffian_pairing",
    "pfaffian_elimination",
    "andreief",
    "andreief_bruteforce",
    "gaussian_moment",
    "gue_moments",
    "partition_gue_hankel",
    "partition_goe_debruijn",
    "de_bruijn_check_1",
    "de_bruijn_check_2",
    "sign_count_moments",
    "sign_count_gf",
    "sign_count_probs",
    "sign_count_prob",
    "ExpMixture",
    "toda_tau",
    "toda_check",
    "dyson_gaudin_check",
    "two_point_marginal",
]

PAIRING_MAX_DIM = 8
HANKEL_DPS = 40


# ---- types -----------------------------------------------------------------------

@dataclass(frozen=True)
class SkewMatrix:
    """Even-dimensional antisymmetric matrix; the diagonal is zero."""

    entries: np.ndarray
    tol: float = 1e-12

    def __post_init__(self):
        a = np.asarray(self.entries)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("skew matrix must be square")
        if a.shape[0] % 2:
            raise ValueError("Pfaffian needs an even dimension")
        scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
        if a.size and np.max(np.abs(a + a.T)) > self.tol * scale:
            raise ValueError("matrix is not antisymmetric")
        object.__setattr__(self, "entries", a)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class MomentSequence:
    """Moments ``c_k`` exposed through ``c(k)``; Hankel matrices use ``c_{i+j+offset}``."""

    c: Callable[[int], object]
    offset: int = 0

    def hankel(self, n: int, twist: Callable[[int, int], object] | None = None) -> mpmath.matrix:
        m = mpmath.matrix(n, n)
        for i in range(1, n + 1):
            for j in range(1, n + 1):
                v = self.c(i + j + self.offset)
                m[i - 1, j - 1] = v * twist(i, j) if twist else v
        return m


@dataclass(frozen=True)
class Measure:
    """Weight on ``(lo, hi)``; ``window`` is the finite box used by tensor rules."""

    weight: Callable
    lo: float
    hi: float
    window: tuple[float, float]


GAUSSIAN_MEASURE = Measure(lambda x: np.exp(-np.asarray(x) ** 2 / 2), -np.inf, np.inf, (-12.0, 12.0))


# ---- Vandermonde -----------------------------------------------------------------

def vandermonde(xs) -> float:
    """``prod_{i<j} (x_j - x_i)``."""
    x = np.asarray(xs, dtype=float).ravel()
    if x.size < 1:
        raise ValueError("need at least one point")
    out = 1.0
    for j in range(x.size):
        for i in range(j):
            out *= x[j] - x[i]
    return float(out)


def vandermonde_poly_form(xs, family: PolyFamily | str = "hermite-probabilists", raw: bool = False) -> float:
    """``det(p_{i-1}(x_j))`` divided by the product of leading coefficients.

    With ``raw=True`` the undivided determinant is returned; for the associated
    Laguerre family on three points this is ``-Delta_3 / 2``.
    """
    fam = PolyFamily(family) if isinstance(family, str) else family
    x = np.asarray(xs, dtype=float).ravel()
    n = x.size
    if n < 1:
        raise ValueError("need at least one point")
    d = float(np.linalg.det(fam.values(n, x)))
    if raw:
        return d
    return d / math.prod(fam.leading(j) for j in range(n))


# ---- Pfaffians -------------------------------------------------------------------

def _as_skew(a) -> np.ndarray:
    return a.entries if isinstance(a, SkewMatrix) else SkewMatrix(np.asarray(a)).entries


def pfaffian_pairing(a) -> float:
    """Sum over perfect matchings, expanding along the first row."""
    a = _as_skew(a)

    def rec(idx):
        if not idx:
            return 1.0
        first, rest = idx[0], idx[1:]
        total = 0.0
        for k, j in enumerate(rest):
            if a[first, j] != 0:
                total += (-1) ** k * a[first, j] * rec(rest[:k] + rest[k + 1:])
        return total

    return rec(tuple(range(a.shape[0])))


def pfaffian_elimination(a):
    """Skew Gaussian elimination with partial pivoting (Parlett-Reid style)."""
    a = np.array(_as_skew(a), dtype=np.result_type(_as_skew(a), float))
    n = a.shape[0]
    pf = 1.0
    for k in range(0, n - 1, 2):
        kp = k + 1 + int(np.argmax(np.abs(a[k + 1:, k])))
        if kp != k + 1:
            # simultaneous row/column swap flips the sign
            a[[k + 1, kp], :] = a[[kp, k + 1], :]
            a[:, [k + 1, kp]] = a[:, [kp, k + 1]]
            pf = -pf
        if a[k + 1, k] == 0:
            return 0.0 * pf
        pf *= a[k, k + 1]
        if k + 2 < n:
            tau = a[k, k + 2:] / a[k, k + 1]
            col = a[k + 2:, k + 1].copy()
            a[k + 2:, k + 2:] += np.outer(tau, col) - np.outer(col, tau)
    return pf


def pfaffian(a):
    """Pfaffian of an even-dimensional antisymmetric matrix.

    Dimensions up to 8 use the pairing sum; larger ones use elimination.

    >>> pfaffian([[0, 3.0], [-3.0, 0]])
    3.0
    """
    m = _as_skew(a)
    if m.shape[0] == 0:
        return 1.0
    if m.shape[0] <= PAIRING_MAX_DIM:
        return pfaffian_pairing(m)
    return pfaffian_elimination(m)


# ---- Andreief --------------------------------------------------------------------

def _quad(f, lo, hi):
    # quad's roundoff warning is superseded by the explicit error check below
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(f, lo, hi, limit=400, epsabs=1e-13, epsrel=1e-12)
    if not np.isfinite(val) or err > 1e-6 * max(1.0, abs(val)):
        raise RuntimeError(f"quadrature did not converge (estimate {val}, error {err})")
    return val


def andreief(fs: Sequence[Callable], gs: Sequence[Callable], measure: Measure = GAUSSIAN_MEASURE,
             n: int | None = None) -> float:
    """``N! det[int f_j g_k dmu]`` with single integrals by adaptive quadrature."""
    n = len(fs) if n is None else n
    if len(fs) < n or len(gs) < n:
        raise ValueError("need n functions on each side")
    gram = np.empty((n, n))
    for j in range(n):
        for k in range(n):
            gram[j, k] = _quad(lambda x: fs[j](x) * gs[k](x) * measure.weight(x), measure.lo, measure.hi)
    return math.factorial(n) * float(np.linalg.det(gram))


def _legendre_box(lo, hi, m):
    u, w = np.polynomial.legendre.leggauss(m)
    return 0.5 * (hi - lo) * u + 0.5 * (hi + lo), 0.5 * (hi - lo) * w


def andreief_bruteforce(fs: Sequence[Callable], gs: Sequence[Callable], measure: Measure = GAUSSIAN_MEASURE,
                        n: int | None = None, nodes: int = 120) -> float:
    """N-fold integral of ``det[f_j(x_k)] det[g_j(x_k)]`` by a tensor Gauss-Legendre rule (n <= 3)."""
    n = len(fs) if n is None else n
    if n > 3:
        raise ValueError("brute force only for n <= 3")
    x, w = _legendre_box(*measure.window, nodes)
    grids = np.meshgrid(*([x] * n), indexing="ij")
    weights = math.prod(np.meshgrid(*([w * measure.weight(x)] * n), indexing="ij"))
    F = np.stack([np.stack([fs[j](g) * np.ones_like(g) for g in grids], -1) for j in range(n)], -2)
    G = np.stack([np.stack([gs[j](g) * np.ones_like(g) for g in grids], -1) for j in range(n)], -2)
    return float(np.sum(np.linalg.det(F) * np.linalg.det(G) * weights))


def gaussian_moment(m: int):
    """``int x^m exp(-x^2/2) dx`` in extended precision."""
    if m % 2:
        return mpmath.mpf(0)
    return mpmath.power(2, mpmath.mpf(m - 1) / 2) * 2 * mpmath.gamma(mpmath.mpf(m + 1) / 2)


def gue_moments() -> MomentSequence:
    """Entries ``2^{(k-3)/2} ((-1)^k + 1) Gamma((k-1)/2)`` at index ``k = i + j``."""
    return MomentSequence(lambda k: gaussian_moment(k - 2))


def partition_gue_hankel(n: int, dps: int | None = None) -> float:
    """``Z_{N,2} = N! det[c_{i+j}]``; extended precision from ``n >= 8``."""
    if n < 1:
        raise ValueError("n must be positive")
    if dps is None and n < 8:
        c = gue_moments()
        h = np.array([[float(c.c(i + j)) for j in range(1, n + 1)] for i in range(1, n + 1)])
        return math.factorial(n) * float(np.linalg.det(h))
    with mpmath.workdps(dps or HANKEL_DPS):
        return float(mpmath.factorial(n) * mpmath.det(gue_moments().hankel(n)))


# ---- de Bruijn -------------------------------------------------------------------

def _sign_entry(phi_a, phi_b, measure):
    """``int int sign(y - x) phi_a(x) phi_b(y) dmu(x) dmu(y)``."""
    w = measure.weight
    lo, hi = measure.window

    def inner_after(x):  # int_x^hi phi_b w
        return _quad(lambda y: phi_b(y) * w(y), x, hi)

    def inner_before(x):  # int_lo^x phi_b w
        return _quad(lambda y: phi_b(y) * w(y), lo, x)

    return _quad(lambda x: phi_a(x) * w(x) * (inner_after(x) - inner_before(x)), lo, hi)


def _de_bruijn_pfaffian_1(phis, measure):
    n = len(phis)
    size = n + (n % 2)
    a = np.zeros((size, size))
    for j in range(n):
        for k in range(j + 1, n):
            a[j, k] = _sign_entry(phis[j], phis[k], measure)
            a[k, j] = -a[j, k]
    if n % 2:
        # odd N: border with the single integrals
        for j in range(n):
            a[j, n] = _quad(lambda x: phis[j](x) * measure.weight(x), *measure.window)
            a[n, j] = -a[j, n]
    return pfaffian(a)


def _ordered_integral(f, n, lo, hi, nodes):
    """``int_{lo < x_1 < ... < x_n < hi} f(x_1..x_n)`` by nested Gauss-Legendre rules."""
    u, w = np.polynomial.legendre.leggauss(nodes)
    wts = np.array([1.0])
    cols = []
    lower = np.full(1, lo)
    for _ in range(n):
        span = hi - lower
        x = lower[:, None] + 0.5 * span[:, None] * (u[None, :] + 1)
        wts = (wts[:, None] * 0.5 * span[:, None] * w[None, :]).ravel()
        cols = [np.repeat(c, nodes) for c in cols] + [x.ravel()]
        lower = x.ravel()
    return float(np.sum(f(*cols) * wts))


def de_bruijn_check_1(n: int = 2, phis: Sequence[Callable] | None = None, measure: Measure = GAUSSIAN_MEASURE,
                      nodes: int = 64) -> float:
    """Ordered-domain identity: ``int_{x_1<..<x_N} det[phi_j(x_k)] = Pf[sign-kernel entries]``."""
    if not 1 <= n <= 3:
        raise ValueError("n must be 1, 2 or 3")
    if phis is None:
        phis = [lambda x, j=j: (x + 0.3) ** j for j in range(n)]

    def integrand(*xs):
        m = np.stack([np.stack([phis[j](x) * np.ones_like(x) for x in xs], -1) for j in range(n)], -2)
        return np.linalg.det(m) * math.prod(measure.weight(x) for x in xs)

    lhs = _ordered_integral(integrand, n, *measure.window, nodes)
    rhs = _de_bruijn_pfaffian_1(phis, measure)
    return abs(lhs - rhs) / max(1.0, abs(rhs))


def de_bruijn_check_2(n: int = 1, phis: Sequence[Callable] | None = None, psis: Sequence[Callable] | None = None,
                      measure: Measure = GAUSSIAN_MEASURE, nodes: int = 120) -> float:
    """Full-domain identity: ``int det[phi_j(x_k), psi_j(x_k)] = N! Pf[int (phi_j psi_k - phi_k psi_j)]``."""
    if n not in (1, 2):
        raise ValueError("n must be 1 or 2")
    size = 2 * n
    if phis is None:
        phis = [lambda x, j=j: (x + 0.2) ** j for j in range(size)]
    if psis is None:
        psis = [lambda x, j=j: (x - 0.5) ** (j + 1) for j in range(size)]
    a = np.zeros((size, size))
    for j in range(size):
        for k in range(j + 1, size):
            a[j, k] = _quad(lambda x: (phis[j](x) * psis[k](x) - phis[k](x) * psis[j](x)) * measure.weight(x),
                            measure.lo, measure.hi)
            a[k, j] = -a[j, k]
    rhs = math.factorial(n) * pfaffian(a)
    x, w = _legendre_box(*measure.window, nodes)
    grids = np.meshgrid(*([x] * n), indexing="ij")
    weights = math.prod(np.meshgrid(*([w * measure.weight(x)] * n), indexing="ij"))
    cols = []
    for g in grids:
        cols.append(np.stack([phis[j](g) * np.ones_like(g) for j in range(size)], -1))
        cols.append(np.stack([psis[j](g) * np.ones_like(g) for j in range(size)], -1))
    lhs = float(np.sum(np.linalg.det(np.stack(cols, -1)) * weights))
    return abs(lhs - rhs) / max(1.0, abs(rhs))


def partition_goe_debruijn(n: int) -> float:
    """``Z_{N,1} = N! Pf[...]`` from the ordered-domain identity with monomials."""
    if not 1 <= n <= 6:
        raise ValueError("n must be between 1 and 6")
    phis = [lambda x, j=j: x**j for j in range(n)]
    return math.factorial(n) * _de_bruijn_pfaffian_1(phis, GAUSSIAN_MEASURE)


# ---- sign-count probabilities --------------------------------------------------

def sign_count_moments() -> MomentSequence:
    """``c_k = 2^{(k-3)/2} Gamma((k-1)/2)``, indexed by ``k = i + j``."""
    return MomentSequence(lambda k: mpmath.power(2, mpmath.mpf(k - 3) / 2) * mpmath.gamma(mpmath.mpf(k - 1) / 2))


def _twist(z):
    return lambda i, j: (-1) ** (i + j) + z


def sign_count_gf(n: int, z, dps: int = HANKEL_DPS):
    """Generating function ``phi_N(z) = sum_k P(N_+ = k) z^k`` as a ratio of Hankel determinants."""
    if not 1 <= n <= 12:
        raise ValueError("n must be between 1 and 12")
    c = sign_count_moments()
    with mpmath.workdps(dps):
        num = mpmath.det(c.hankel(n, _twist(mpmath.mpf(z))))
        den = mpmath.det(c.hankel(n, _twist(1)))
        return +(num / den)


def _exact_probs(n: int) -> list:
    """Exact coefficients in terms of ``pi``.

    The factors ``2^{(i+j)/2}`` cancel between numerator and denominator, so
    the entries reduce to ``Gamma((k-1)/2)``: rationals for odd ``k`` and
    rational multiples of ``s = sqrt(pi)`` for even ``k``. The determinants
    are then exact polynomials in ``(z, s)``.
    """
    import sympy
    from sympy.polys.matrices import DomainMatrix

    z, s = sympy.symbols("z s")
    ring = sympy.QQ[z, s]

    def gamma_half(k):  # Gamma((k-1)/2) with sqrt(pi) replaced by s
        g = sympy.gamma(sympy.Rational(k - 1, 2))
        return sympy.expand(g.subs(sympy.sqrt(sympy.pi), s))

    def det(t):
        rows = [[ring.from_sympy(sympy.expand(((-1) ** (i + j) + t) * gamma_half(i + j)))
                 for j in range(1, n + 1)] for i in range(1, n + 1)]
        return ring.to_sympy(DomainMatrix(rows, (n, n), ring).det())

    num = sympy.Poly(det(z), z)
    den = det(1)
    out = []
    for k in range(n + 1):
        ratio = sympy.cancel(num.coeff_monomial(z**k) / den)
        out.append(sympy.simplify(ratio.subs(s, sympy.sqrt(sympy.pi))))
    return out


def sign_count_probs(n: int, dps: int = 60, exact: bool = False, max_cond_digits: float | None = None) -> list:
    """``[P(N_+ = k) for k = 0..n]``.

    The polynomial ``phi_N`` is sampled at the integer nodes ``0..n`` and its
    coefficients recovered from the Vandermonde system in extended precision.
    If the system loses more digits than allowed a RuntimeError is raised and
    ``exact=True`` (symbolic arithmetic) should be used instead.
    """
    if not 1 <= n <= 12:
        raise ValueError("n must be between 1 and 12")
    if exact:
        return _exact_probs(n)
    with mpmath.workdps(dps):
        nodes = [mpmath.mpf(k) for k in range(n + 1)]
        v = mpmath.matrix([[t**j for j in range(n + 1)] for t in nodes])
        lost = float(mpmath.log10(mpmath.cond(v)))
        limit = dps - 20 if max_cond_digits is None else max_cond_digits
        if lost > limit:
            raise RuntimeError(f"interpolation loses {lost:.1f} digits; use the exact-arithmetic path")
        rhs = mpmath.matrix([sign_count_gf(n, t, dps) for t in nodes])
        coef = mpmath.lu_solve(v, rhs)
        return [coef[k] for k in range(n + 1)]


def sign_count_prob(n: int, k: int, exact: bool = False) -> float:
    """``P(N_+ = k)`` for an N x N GUE matrix."""
    if not 0 <= k <= n:
        raise ValueError("k must lie in 0..n")
    return float(sign_count_probs(n, exact=exact)[k])


# ---- Toda ------------------------------------------------------------------------

@dataclass(frozen=True)
class ExpMixture:
    """``a_0(x) = sum_i w_i exp(r_i x)`` with closed-form derivatives."""

    weights: tuple
    rates: tuple

    def derivative(self, k: int, x: float) -> float:
        return float(sum(w * r**k * math.exp(r * x) for w, r in zip(self.weights, self.rates)))


def toda_tau(family: ExpMixture, n: int, x: float) -> float:
    """``tau_n = det[a_{i+j-2}]`` with ``tau_0 = 1`` and ``tau_{-1} = 0``."""
    if n == -1:
        return 0.0
    if n == 0:
        return 1.0
    if n < -1:
        raise ValueError("n must be >= -1")
    m = np.array([[family.derivative(i + j, x) for j in range(n)] for i in range(n)])
    return float(np.linalg.det(m))


def toda_check(family: ExpMixture, n: int, x: float, h: float = 2e-3) -> float:
    """Scaled residual of ``tau'' tau - tau'^2 = tau_{n+1} tau_{n-1}``; derivatives by 5-point stencils."""
    if not 0 <= n <= 4:
        raise ValueError("n must lie in 0..4")
    t = [toda_tau(family, n, x + s * h) for s in (-2, -1, 0, 1, 2)]
    d1 = (t[0] - 8 * t[1] + 8 * t[3] - t[4]) / (12 * h)
    d2 = (-t[0] + 16 * t[1] - 30 * t[2] + 16 * t[3] - t[4]) / (12 * h * h)
    lhs = d2 * t[2] - d1 * d1
    rhs = toda_tau(family, n + 1, x) * toda_tau(family, n - 1, x)
    return abs(lhs - rhs) / max(1.0, abs(d2 * t[2]), d1 * d1, abs(rhs))


# ---- Dyson-Gaudin ----------------------------------------------------------------

def _kernel_det(N, pts):
    pts = np.asarray(pts, dtype=float)
    if pts.size == 0:
        return 1.0
    k = kernel(N, pts[:, None], pts[None, :])
    return float(np.linalg.det(k))


def dyson_gaudin_check(n: int, N: int | None = None, seed: int = 0, nodes: int = 80) -> float:
    """Residual of ``int det[K(x_i, x_j)]_n dx_n = (N - n + 1) det[K(x_i, x_j)]_{n-1}``.

    ``K`` is the size-``N`` GUE kernel and ``x_1..x_{n-1}`` are random points.
    The last integral is done with a Gauss rule for the weight ``exp(-x^2/2)``,
    which the kernel entries carry exactly.
    """
    if not 1 <= n <= 4:
        raise ValueError("n must lie in 1..4")
    N = n + 2 if N is None else N
    fixed = np.random.default_rng(seed).standard_normal(n - 1)
    y, w = special.roots_hermitenorm(nodes)
    vals = np.array([_kernel_det(N, np.append(fixed, t)) for t in y])
    lhs = float(np.sum(vals * np.exp(y**2 / 2) * w))
    rhs = (N - n + 1) * _kernel_det(N, fixed)
    return abs(lhs - rhs) / max(1.0, abs(rhs))


def two_point_marginal(N: int, x, y):
    """``rho_2(x, y) = det[[K(x,x), K(x,y)], [K(y,x), K(y,y)]] / (N (N-1))``."""
    if N < 2:
        raise ValueError("N must be at least 2")
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    kxx, kyy, kxy = kernel(N, x, x), kernel(N, y, y), kernel(N, x, y)
    return (kxx * kyy - kxy**2) / (N * (N - 1))
