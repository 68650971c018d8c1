"""Stieltjes-transform calculus, Blue functions and free addition."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .core import GridFunction

__all__ = [
    "pq_sqrt",
    "RTransformModel",
    "stieltjes_of_density",
    "stieltjes_transform",
    "moments_from_resolvent",
    "density_from_resolvent",
    "gaussian_resolvent",
    "wishart_resolvent",
    "wishart_edges",
    "blue",
    "r_transform",
    "r_wishart_closed",
    "solve_cubic",
    "free_add_coefficients",
    "free_add_goe_wishart",
    "free_add_density",
    "sample_free_sum",
    "avg_ipr_from_resolvent",
    "sokhotski_integral",
    "fresnel_integral",
    "fresnel_identity_check",
    "EPS_SCHEDULE",
]

EPS_SCHEDULE = (1e-2, 1e-3, 1e-4)


def pq_sqrt(z: complex) -> complex:
    """Square root with nonnegative real part through ``p + i q``.

    ``p = sqrt((|z| + a)/2)``, ``q = sign(b) sqrt((|z| - a)/2)`` for ``z = a + i b``.
    """
    a, b = float(np.real(z)), float(np.imag(z))
    r = math.hypot(a, b)
    # take the non-cancelling root first and recover the other from p q = b/2
    if a >= 0:
        p = math.sqrt((r + a) / 2)
        q = b / (2 * p) if p > 0 else 0.0
    else:
        q = math.copysign(math.sqrt((r - a) / 2), b)
        p = abs(b) / (2 * abs(q))
    return complex(p, q)


@dataclass(frozen=True)
class RTransformModel:
    name: str
    R: Callable[[complex], complex]
    note: str = ""

    def cauchy_riemann_residual(self, radius: float = 0.2, npts: int = 12, h: float = 1e-5) -> float:
        """Max ``|dR/dx - (-i) dR/dy|`` on a circle; zero for analytic ``R``."""
        res = 0.0
        for t in np.linspace(0, 2 * np.pi, npts, endpoint=False):
            z = radius * cmath.exp(1j * t)
            dx = (self.R(z + h) - self.R(z - h)) / (2 * h)
            dy = (self.R(z + 1j * h) - self.R(z - 1j * h)) / (2 * h)
            res = max(res, abs(dx + 1j * dy))
        return res


# ---- transforms of densities ---------------------------------------------------

def stieltjes_of_density(density: GridFunction, z: complex) -> complex:
    """``int rho(x) / (z - x) dx`` by the trapezoid rule on the density grid."""
    z = complex(z)
    xs = density.xs
    if z.imag == 0 and xs[0] <= z.real <= xs[-1] and np.interp(z.real, xs, density.ys) > 0:
        raise ValueError("z lies on the support with zero imaginary part")
    return complex(np.trapezoid(density.ys / (z - xs), xs))


def stieltjes_transform(rho: Callable, a: float, b: float, z: complex, nodes: int = 4000,
                        edge: str = "sqrt") -> complex:
    """``int_a^b rho(x)/(z - x) dx`` for densities with square-root edges.

    Uses Chebyshev-Gauss nodes of the second kind after dividing out
    ``sqrt((x-a)(b-x))``, which is exact for the semicircle.
    """
    z = complex(z)
    mid, r = (a + b) / 2, (b - a) / 2
    k = np.arange(1, nodes + 1)
    u = np.cos(k * np.pi / (nodes + 1))
    w = np.pi / (nodes + 1) * np.sin(k * np.pi / (nodes + 1)) ** 2
    x = mid + r * u
    sq = np.sqrt(1 - u**2)
    with np.errstate(divide="ignore", invalid="ignore"):
        f = np.where(sq > 0, rho(x) / sq, 0.0)
    # dx = r du and sqrt(1-u^2) is the weight of the rule
    return complex(np.sum(w * f * r / (z - x)))


def moments_from_resolvent(G: Callable, kmax: int, radius: float = 4.0, npts: int = 512) -> np.ndarray:
    """Moments ``mu_k`` from ``G(z) = sum_k mu_k / z^(k+1)`` by a contour trapezoid rule."""
    t = 2 * np.pi * np.arange(npts) / npts
    z = radius * np.exp(1j * t)
    g = np.array([G(zz) for zz in z])
    return np.array([np.mean(z ** (k + 1) * g).real for k in range(kmax + 1)])


def _neville_zero(t, v):
    """Diagonal of the Neville table extrapolating ``v(t)`` to ``t = 0``."""
    table = list(v)
    diag = [table[-1]]
    for level in range(1, len(t)):
        for i in range(len(t) - 1, level - 1, -1):
            ta, tb = t[i - level], t[i]
            table[i] = (ta * table[i] - tb * table[i - 1]) / (ta - tb)
        diag.append(table[-1])
    return diag


def density_from_resolvent(G: Callable, x: float, eps_schedule: Sequence[float] = EPS_SCHEDULE,
                           tol: float = 1e-9, min_eps: float = 1e-12) -> float:
    """``(1/pi) lim Im G(x - i eps)`` by Richardson extrapolation in eps.

    A three-point Neville table in ``eps`` is tried first; at a square-root
    edge the values behave like ``sqrt(eps)``, so the same points are also
    extrapolated in the variable ``sqrt(eps)``. If neither estimate settles
    within ``tol`` (relative to the larger of the estimate and one), the
    schedule is extended by decades down to ``min_eps``; failing that a
    RuntimeError lists the residuals.
    """
    eps = [float(e) for e in eps_schedule]
    if len(eps) < 2 or any(e <= 0 for e in eps) or any(b >= a for a, b in zip(eps, eps[1:])):
        raise ValueError("eps schedule must be positive and decreasing")
    vals = [G(complex(x, -e)).imag / np.pi for e in eps]
    while True:
        if not np.all(np.isfinite(vals)):
            raise RuntimeError(f"non-finite resolvent values {vals}")
        e3, v3 = eps[-3:], vals[-3:]
        spreads = []
        for t in (e3, [math.sqrt(e) for e in e3]):
            diag = _neville_zero(t, v3)
            spread = abs(diag[-1] - diag[-2])
            if spread <= tol * max(1.0, abs(diag[-1])):
                return float(diag[-1])
            spreads.append(spread)
        if eps[-1] / 10 < min_eps:
            raise RuntimeError(f"extrapolation did not converge: eps {eps}, values {vals}, spreads {spreads}")
        eps.append(eps[-1] / 10)
        vals.append(G(complex(x, -eps[-1])).imag / np.pi)


def gaussian_resolvent(z: complex) -> complex:
    """Semicircle resolvent ``z - sqrt(z^2 - 2)`` on the branch with ``G ~ 1/z``.

    Written as ``z (1 - sqrt(1 - 2/z^2))`` with the principal root, which picks
    the minus sign for ``0 < x < sqrt 2`` and the plus sign for ``-sqrt 2 < x < 0``
    when ``z = x - i eps``.
    """
    z = complex(z)
    if z == 0:
        return complex(0.0, math.sqrt(2.0))
    return z * (1 - pq_sqrt(1 - 2 / z**2))


def wishart_edges(c: float) -> tuple[float, float]:
    """``x_pm = gamma (2K + 1 -/+ 2 sqrt(K^2 + K))`` with ``K = 1/gamma``."""
    if not 0 < c < 1:
        raise ValueError("c must lie in (0, 1)")
    g = (1 - c) / c
    K = 1 / g
    s = 2 * math.sqrt(K * K + K)
    return g * (2 * K + 1 - s), g * (2 * K + 1 + s)


def wishart_resolvent(z: complex, c: float) -> complex:
    """Marcenko-Pastur resolvent ``(1 - gamma/z - sqrt((z - x_-)(z - x_+))/z)/2``.

    ``gamma = (1-c)/c``; the square root is taken as ``z sqrt(1 - x_-/z) sqrt(1 - x_+/z)``
    so the branch behaves like ``z`` at infinity and the only cut is the support.
    """
    lo, hi = wishart_edges(c)
    g = (1 - c) / c
    z = complex(z)
    s = z * pq_sqrt(1 - lo / z) * pq_sqrt(1 - hi / z)
    return 0.5 * (1 - g / z - s / z)


# ---- Blue function and R-transform ------------------------------------------------

def blue(G: Callable, z: complex, mean: float = 0.0, tol: float = 1e-14, maxiter: int = 100) -> complex:
    """Functional inverse ``B`` of ``G`` (``G(B(z)) = z``) by damped Newton.

    Seeded at ``1/z + mean``; raises RuntimeError with the iterate trace on failure.
    """
    z = complex(z)
    w = 1 / z + mean
    trace = [w]
    f = G(w) - z
    for _ in range(maxiter):
        h = 1e-7 * max(1.0, abs(w))
        dG = (G(w + h) - G(w - h)) / (2 * h)
        step = f / dG
        lam = 1.0
        while True:
            w_new = w - lam * step
            f_new = G(w_new) - z
            if abs(f_new) < abs(f) or lam < 1e-6:
                break
            lam /= 2
        w, f = w_new, f_new
        trace.append(w)
        if abs(f) <= tol * max(1.0, abs(z)):
            return w
    raise RuntimeError(f"Newton inversion diverged; last iterates {trace[-5:]}")


def r_transform(G: Callable, z: complex, mean: float = 0.0) -> complex:
    """``R(z) = B(z) - 1/z``."""
    return blue(G, z, mean) - 1 / complex(z)


def r_wishart_closed(z: complex, c: float) -> complex:
    """Closed form ``(gamma + 1)/(1 - z)``, used only as a cross-check."""
    g = (1 - c) / c
    return (g + 1) / (1 - complex(z))


# ---- free addition of GOE and Wishart ---------------------------------------------

def solve_cubic(a3: complex, a2: complex, a1: complex, a0: complex) -> np.ndarray:
    """Roots of ``a3 G^3 + a2 G^2 + a1 G + a0`` in closed form.

    Real coefficients are classified by the discriminant (trigonometric form for
    three real roots, Cardano otherwise); complex coefficients use Cardano with
    complex cube roots. Degenerate leading terms fall back to the quadratic
    formula. Every root gets two Newton polishing steps.
    """
    coeffs = [complex(a3), complex(a2), complex(a1), complex(a0)]
    scale = max(abs(c) for c in coeffs)
    if abs(coeffs[0]) <= 1e-14 * scale:
        _, b, c, d = coeffs
        if abs(b) <= 1e-14 * scale:
            return np.array([-d / c])
        disc = cmath.sqrt(c * c - 4 * b * d)
        roots = np.array([(-c + disc) / (2 * b), (-c - disc) / (2 * b)])
        return roots
    a, b, c, d = (x / coeffs[0] for x in coeffs)
    shift = b / 3
    P = c - b * b / 3
    Q = 2 * b**3 / 27 - b * c / 3 + d
    real = all(abs(x.imag) == 0 for x in (b, c, d))
    if real:
        P, Q, sh = P.real, Q.real, shift.real
        disc = (Q / 2) ** 2 + (P / 3) ** 3
        if disc < 0:
            m = 2 * math.sqrt(-P / 3)
            th = math.acos(max(-1.0, min(1.0, 3 * Q / (P * m)))) / 3
            t = np.array([m * math.cos(th - 2 * math.pi * k / 3) for k in range(3)], dtype=complex)
        else:
            sd = math.sqrt(disc)
            u = np.cbrt(-Q / 2 + sd)
            v = np.cbrt(-Q / 2 - sd)
            w = complex(-0.5, math.sqrt(3) / 2)
            t = np.array([u + v, u * w + v * w.conjugate(), u * w.conjugate() + v * w])
        roots = t - sh
    else:
        disc = cmath.sqrt((Q / 2) ** 2 + (P / 3) ** 3)
        base = -Q / 2 + disc
        if abs(base) < abs(-Q / 2 - disc):
            base = -Q / 2 - disc
        u0 = base ** (1 / 3) if base != 0 else 0
        w = complex(-0.5, math.sqrt(3) / 2)
        roots = []
        for k in range(3):
            u = u0 * w**k
            t = u - P / (3 * u) if u != 0 else 0
            roots.append(t - shift)
        roots = np.array(roots)
    poly = np.array(coeffs)
    dpoly = np.polyder(poly)
    for _ in range(2):
        val = np.polyval(poly, roots)
        dv = np.polyval(dpoly, roots)
        ok = np.abs(dv) > 1e-300
        trial = np.where(ok, roots - val / np.where(ok, dv, 1), roots)
        # near a double root Newton can overshoot; keep a step only if it helps
        roots = np.where(np.abs(np.polyval(poly, trial)) < np.abs(val), trial, roots)
    return roots


def free_add_coefficients(p: float, c: float, z: complex) -> tuple:
    """Coefficients of the cubic for ``G_S`` of ``S = p H + (1-p) W``.

    From ``z = (p^2/2) G + kappa/(1 - q G) + 1/G`` with ``q = 1 - p`` and
    ``kappa = q R_W(0) = q (1 + gamma) = q/c``.
    """
    q = 1 - p
    kappa = q / c
    return (p * p * q / 2, -z * q - p * p / 2, z - kappa + q, -1.0)


def _check_pc(p, c):
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    if not 0 < c < 1:
        raise ValueError("c must lie in (0, 1)")


def free_add_goe_wishart(p: float, c: float, z: complex) -> complex:
    """Resolvent of ``p H + (1-p) W`` from the closed-form cubic roots.

    For real ``z`` the root with positive imaginary part is returned; when all
    roots are real (outside the support) the real root closest to
    ``1/(z - mean)`` is returned. For complex ``z`` the root whose imaginary
    part has the sign opposite to ``Im z`` is returned; two such roots raise.
    """
    _check_pc(p, c)
    roots = solve_cubic(*free_add_coefficients(p, c, z))
    z = complex(z)
    scale = max(1.0, np.max(np.abs(roots)))
    if z.imag == 0:
        pos = roots[roots.imag > 1e-12 * scale]
        if len(pos) == 1:
            return complex(pos[0])
        if len(pos) > 1:
            raise RuntimeError(f"ambiguous roots {roots}")
        mean = (1 - p) / c
        guess = 1 / (z.real - mean) if z.real != mean else 0.0
        return complex(roots[np.argmin(np.abs(roots - guess))].real)
    want = -np.sign(z.imag)
    cand = roots[np.sign(roots.imag) == want]
    if len(cand) != 1:
        # Herglotz branch is the one closest to the ordinary 1/z decay far away
        if len(cand) == 0:
            raise RuntimeError(f"no root in the correct half-plane: {roots}")
        mean = (1 - p) / c
        cand = cand[np.argsort(np.abs(cand - 1 / (z - mean)))][:1]
    return complex(cand[0])


def free_add_density(p: float, c: float, x) -> np.ndarray:
    """Density ``Im G_S(x)/pi`` on real ``x`` (zero where all roots are real)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty_like(x)
    for i, xv in enumerate(x):
        out[i] = max(free_add_goe_wishart(p, c, xv).imag, 0.0) / np.pi
    return out


def sample_free_sum(p: float, c: float, n: int, count: int, seed: int) -> np.ndarray:
    """Eigenvalues of ``p H/sqrt(N) + (1-p) W/N`` with ``H`` GOE and ``W`` real Wishart."""
    from .core import draw_rng

    m = int(round(n / c))
    out = []
    for k in range(count):
        rng = draw_rng(seed, k)
        h = rng.standard_normal((n, n))
        h = (h + h.T) / 2
        x = rng.standard_normal((n, m))
        s = p * h / math.sqrt(n) + (1 - p) * (x @ x.T) / n
        out.append(np.linalg.eigvalsh((s + s.T) / 2))
    return np.concatenate(out)


# ---- IPR and the Fresnel identity -----------------------------------------------

def avg_ipr_from_resolvent(x: float, eps: float, G: Callable, rho: float | None = None) -> float:
    """``P(x) = eps |G(x - i eps)|^2 / (pi rho(x))``."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    if rho is None:
        rho = density_from_resolvent(G, x)
    if rho < 1e-12:
        raise ValueError("density vanishes")
    g = G(complex(x, -eps))
    return eps * abs(g) ** 2 / (np.pi * rho)


def sokhotski_integral(eps: float) -> complex:
    """``int e^{-y^2} / (y - i eps) dy`` by quadrature; tends to ``i pi``."""
    re, _ = integrate.quad(lambda y: y * math.exp(-y * y) / (y * y + eps * eps), -np.inf, np.inf)
    # y = eps t turns the imaginary part into a smooth integrand
    im, _ = integrate.quad(lambda t: 2 * math.exp(-(eps * t) ** 2) / (1 + t * t), 0, np.inf)
    return complex(re, im)


def fresnel_integral(H: np.ndarray, x: float, eps: float, npts: int | None = None,
                     half_width: float | None = None) -> complex:
    """``Z(x) = int exp[-(i/2) y^T ((x - i eps) 1 - H) y] dy`` on a tensor grid (dim <= 2)."""
    H = np.atleast_2d(np.asarray(H, dtype=float))
    n = H.shape[0]
    if n > 2:
        raise ValueError("direct quadrature only for n <= 2")
    L = half_width or math.sqrt(2 * 45 / eps)
    lam = float(np.max(np.abs(x - np.linalg.eigvalsh(H)))) + eps
    h_max = 0.25 / (lam * L)  # resolve the fastest oscillation at the boundary
    npts = npts or int(min(max(2 * L / h_max, 2001), 6001)) | 1
    y = np.linspace(-L, L, npts)
    dy = y[1] - y[0]
    A = (complex(x, -eps)) * np.eye(n) - H
    if n == 1:
        return complex(np.sum(np.exp(-0.5j * A[0, 0] * y**2)) * dy)
    total = 0j
    for y1 in y:
        q = A[0, 0] * y1**2 + 2 * A[0, 1] * y1 * y + A[1, 1] * y**2
        total += np.sum(np.exp(-0.5j * q))
    return complex(total * dy * dy)


def fresnel_identity_check(n: int, x: float, eps: float, seed: int = 0, H=None) -> float:
    """Relative residual of ``Z(x) = (2 pi)^(N/2) exp[-1/2 sum Log(x_i + i eps - x) + i N pi/4]``."""
    if n not in (1, 2):
        raise ValueError("n must be 1 or 2")
    if H is None:
        rng = np.random.default_rng(seed)
        a = rng.standard_normal((n, n))
        H = (a + a.T) / 2
    H = np.atleast_2d(np.asarray(H, dtype=float))
    lam = np.linalg.eigvalsh(H)
    rhs = (2 * np.pi) ** (n / 2) * np.exp(-0.5 * np.sum(np.log(lam + 1j * eps - x)) + 1j * n * np.pi / 4)
    lhs = fresnel_integral(H, x, eps)
    return float(abs(lhs - rhs) / abs(rhs))
