"""Coulomb-gas picture: Metropolis sampling, energy functionals, Tricomi solver,
edge optimization and Gaussian partition functions."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate, optimize, special

from .core import GridFunction, draw_rng

__all__ = [
    "PotentialSpec",
    "gaussian_potential",
    "wishart_potential",
    "PRESETS",
    "GasState",
    "gas_energy",
    "metropolis_run",
    "log_potential_matrix",
    "functional_F0",
    "functional_F1",
    "principal_value",
    "tricomi_solve",
    "tricomi_residual",
    "solve_support",
    "gaussian_equilibrium_density",
    "free_energy_ab",
    "free_energy_ab_quadrature",
    "edge_numerators",
    "optimize_edges",
    "log_partition_gaussian",
    "partition_gaussian",
    "log_barnes_g",
    "partition_barnes_check",
    "log_C",
    "log_C_asymptotic",
    "a_beta",
    "b_beta",
    "log_partition_asymptotic",
    "F0_SEMICIRCLE",
    "F1_SEMICIRCLE",
]

F0_SEMICIRCLE = 3 / 8 + math.log(2) / 4
F1_SEMICIRCLE = (1 - math.log(2) - 2 * math.log(math.pi)) / 2


@dataclass(frozen=True)
class PotentialSpec:
    """Confining potential with its derivative and support hint."""

    name: str
    V: Callable
    Vprime: Callable
    support: str = "full-line"
    params: dict = field(default_factory=dict)

    def derivative_residual(self, pts=None, h: float = 1e-5) -> float:
        """Max relative mismatch between ``Vprime`` and a centered difference."""
        if pts is None:
            lo = 0.2 if self.support == "positive-axis" else -3.0
            pts = np.linspace(lo, 3.0, 64)
        fd = (self.V(pts + h) - self.V(pts - h)) / (2 * h)
        ref = self.Vprime(pts)
        return float(np.max(np.abs(fd - ref) / np.maximum(1.0, np.abs(ref))))


def gaussian_potential() -> PotentialSpec:
    return PotentialSpec("gaussian", lambda x: np.asarray(x) ** 2 / 2, lambda x: np.asarray(x, dtype=float))


def wishart_potential(c: float) -> PotentialSpec:
    """``v(x) = x/2 - ((1/c - 1)/2) ln x`` on the positive axis."""
    if not 0 < c <= 1:
        raise ValueError("c must lie in (0, 1]")
    a = 1 / c - 1
    return PotentialSpec(
        "wishart",
        lambda x: np.asarray(x) / 2 - a / 2 * np.log(x),
        lambda x: 0.5 - a / 2 / np.asarray(x, dtype=float),
        support="positive-axis",
        params={"c": c},
    )


PRESETS = {"gaussian": gaussian_potential, "wishart": wishart_potential}


@dataclass
class GasState:
    positions: np.ndarray
    beta: float
    step_width: float
    accepted: int = 0
    proposed: int = 0
    samples: np.ndarray | None = None
    energy_trace: np.ndarray | None = None

    @property
    def acceptance(self) -> float:
        return self.accepted / self.proposed if self.proposed else 0.0


def gas_energy(positions, potential: PotentialSpec | None = None) -> float:
    """``(1/N) sum V(x_i) - (1/2N^2) sum_{i != j} ln|x_i - x_j|``."""
    x = np.asarray(positions, dtype=float)
    potential = potential or gaussian_potential()
    n = x.size
    d = np.abs(x[:, None] - x[None, :])
    iu = np.triu_indices(n, 1)
    if n > 1 and np.min(d[iu]) < 1e-12:
        raise ValueError("log singularity: coincident positions")
    return float(np.sum(potential.V(x)) / n - np.sum(np.log(d[iu])) / n**2)


def metropolis_run(potential: PotentialSpec, n: int, beta: float, steps: int, seed: int,
                   init: np.ndarray | None = None, thin: int | None = None,
                   target: float = 0.35, burn_fraction: float = 0.2) -> GasState:
    """Single-particle Metropolis chain for the Gibbs weight ``exp(-beta N^2 E)``.

    The proposal width is tuned during burn-in towards ``target`` acceptance and
    frozen afterwards. After burn-in a snapshot of all positions is stored every
    ``thin`` proposals (default ``n``). Positive-axis potentials reject any move
    to ``x <= 0``.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    rng = draw_rng(seed, 0)
    if init is None:
        if potential.support == "positive-axis":
            x = np.linspace(0.5, 3.0, n)
        else:
            x = np.linspace(-1.0, 1.0, n)
        x = x + 1e-3 * rng.standard_normal(n)
    else:
        x = np.array(init, dtype=float)
    if potential.support == "positive-axis" and np.any(x <= 0):
        raise ValueError("initial positions must be positive")
    thin = thin or n
    burn = int(burn_fraction * steps)
    width = 1.0 / math.sqrt(n)
    acc_win = 0
    state = GasState(x, beta, width)
    snaps = []
    energies = []
    V = potential.V
    positive = potential.support == "positive-axis"
    idx = rng.integers(0, n, size=steps)
    kicks = rng.standard_normal(steps)
    logu = np.log(rng.random(steps))
    vx = np.asarray(V(x), dtype=float)
    for t in range(steps):
        i = idx[t]
        old = x[i]
        new = old + width * kicks[t]
        state.proposed += 1
        if positive and new <= 0:
            accept = False
        else:
            vnew = float(V(new))
            dn = np.abs(new - x)
            do = np.abs(old - x)
            dn[i] = 1.0
            do[i] = 1.0
            if np.min(dn) == 0:
                accept = False
            else:
                dE = beta * n * (vnew - vx[i]) - beta * float(np.sum(np.log(dn) - np.log(do)))
                if not np.isfinite(dE):
                    raise FloatingPointError(f"energy diverged at step {t}: dE={dE}")
                accept = dE <= 0 or logu[t] < -dE
        if accept:
            x[i] = new
            vx[i] = vnew
            state.accepted += 1
            acc_win += 1
        if t < burn and (t + 1) % 500 == 0:
            rate = acc_win / 500
            width *= math.exp(rate - target)
            acc_win = 0
            if t + 1 == (burn // 500) * 500:
                # count acceptance only after the width is frozen
                state.accepted = 0
                state.proposed = 0
        if t >= burn and (t - burn) % thin == 0:
            snaps.append(x.copy())
            if len(snaps) % 50 == 1:
                energies.append(gas_energy(x, potential))
    state.positions = np.sort(x)
    state.step_width = width
    state.samples = np.concatenate(snaps) if snaps else np.sort(x)
    state.energy_trace = np.array(energies)
    return state


# ---- energy and entropy functionals -----------------------------------------------

def log_potential_matrix(xs: np.ndarray) -> np.ndarray:
    """Weights ``W`` with ``(W n)_i = int n(t) ln|x_i - t| dt`` for piecewise-linear ``n``.

    Each panel integral is done exactly, so the logarithmic singularity at
    ``t = x_i`` costs nothing.
    """
    xs = np.asarray(xs, dtype=float)
    t0, t1 = xs[:-1], xs[1:]
    h = t1 - t0
    x = xs[:, None]

    def prim0(u):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(u == 0, 0.0, u * np.log(np.abs(u)) - u)

    def prim1(u):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(u == 0, 0.0, u**2 / 2 * np.log(np.abs(u)) - u**2 / 4)

    a, b = t0[None, :] - x, t1[None, :] - x
    I0 = prim0(b) - prim0(a)
    I1 = prim1(b) - prim1(a)
    left = ((t1[None, :] - x) * I0 - I1) / h
    right = (I1 + (x - t0[None, :]) * I0) / h
    W = np.zeros((len(xs), len(xs)))
    W[:, :-1] += left
    W[:, 1:] += right
    return W


def _check_normalized(density: GridFunction, tol: float) -> None:
    total = np.trapezoid(density.ys, density.xs)
    if abs(total - 1) > tol:
        raise ValueError(f"density not normalized (integral {total!r})")


def functional_F0(density: GridFunction, potential: PotentialSpec | None = None,
                  tol: float = 1e-3) -> float:
    """``int V n - 1/2 int int n n' ln|x - x'|`` (``V = x^2/2`` by default)."""
    _check_normalized(density, tol)
    xs, n = density.xs, density.ys
    V = (potential or gaussian_potential()).V
    U = log_potential_matrix(xs) @ n
    return float(np.trapezoid(V(xs) * n, xs) - 0.5 * np.trapezoid(n * U, xs))


def functional_F1(density: GridFunction, tol: float = 1e-3) -> float:
    """Entropy-like ``int n ln n`` with ``0 ln 0 = 0``."""
    _check_normalized(density, tol)
    n = density.ys
    with np.errstate(divide="ignore", invalid="ignore"):
        v = np.where(n > 0, n * np.log(np.where(n > 0, n, 1.0)), 0.0)
    return float(np.trapezoid(v, density.xs))


# ---- Tricomi solver ---------------------------------------------------------------

def _cheb2_rule(m: int):
    k = np.arange(1, m + 1)
    u = np.cos(k * np.pi / (m + 1))
    w = np.pi / (m + 1) * np.sin(k * np.pi / (m + 1)) ** 2
    return u, w


def principal_value(gfun: Callable, a: float, b: float, x, m: int = 400, h: float = 1e-6):
    """``Pr int_a^b sqrt((t-a)(b-t)) g(t) / (x - t) dt`` for interior ``x``.

    The singular part is subtracted analytically,
    ``Pr int sqrt(1-u^2)/(xi-u) du = pi xi``, and the smooth remainder is
    integrated with Chebyshev-Gauss nodes of the second kind. A node hitting
    ``x`` exactly uses the derivative limit of the divided difference.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    mid, r = (a + b) / 2, (b - a) / 2
    u, w = _cheb2_rule(m)
    t = mid + r * u
    gt = np.asarray(gfun(t), dtype=float)
    xi = (x - mid) / r
    gx = np.asarray(gfun(x), dtype=float)
    diff = xi[:, None] - u[None, :]
    close = np.abs(diff) < 1e-12
    with np.errstate(divide="ignore", invalid="ignore"):
        dd = (gt[None, :] - gx[:, None]) / np.where(close, 1.0, diff)
    if np.any(close):
        gp = (np.asarray(gfun(x + h)) - np.asarray(gfun(x - h))) / (2 * h)
        dd = np.where(close, -np.broadcast_to(gp[:, None], dd.shape) * r, dd)
    # dd holds (g(t)-g(x))/(xi-u); the remainder integral is -int sqrt(1-u^2) (g(t)-g(x))/(u-xi)
    smooth = dd @ w
    return r * (smooth + gx * np.pi * xi)


def tricomi_solve(gfun: Callable, a: float, b: float, norm: float = 1.0,
                  npts: int = 200, m: int = 400, check: bool = True) -> GridFunction:
    """Single-interval solution of ``Pr int f(t)/(x-t) dt = g(x)`` on ``[a, b]``.

    ``f(x) = [C - (1/pi) Pr int sqrt((t-a)(b-t)) g(t)/(x-t) dt] / (pi sqrt((x-a)(b-x)))``
    with ``C = norm`` so that ``int f = norm``. The grid is made of Chebyshev
    nodes of the first kind. Negative values below ``-1e-6`` raise.
    """
    if not a < b:
        raise ValueError("tricomi_solve requires a < b")
    k = np.arange(npts)[::-1]
    xs = (a + b) / 2 + (b - a) / 2 * np.cos((2 * k + 1) * np.pi / (2 * npts))
    pv = principal_value(gfun, a, b, xs, m=m)
    f = (norm - pv / np.pi) / (np.pi * np.sqrt((xs - a) * (b - xs)))
    if check and np.min(f) < -1e-6:
        raise ValueError("unphysical solution: negative density on the chosen support")
    return GridFunction(xs, f, meta={"a": a, "b": b, "norm": norm})


def tricomi_residual(sol: GridFunction, gfun: Callable, m: int = 2000) -> float:
    """Max residual of the singular equation at interior Chebyshev nodes.

    The solution is written as ``f = q(x)/sqrt((x-a)(b-x))`` and ``q`` is
    interpolated by a Chebyshev series, so the principal value reduces to
    closed forms of Chebyshev principal values.
    """
    a, b = sol.meta["a"], sol.meta["b"]
    mid, r = (a + b) / 2, (b - a) / 2
    u = (sol.xs - mid) / r
    q = sol.ys * np.sqrt((sol.xs - a) * (b - sol.xs))
    coef = np.polynomial.chebyshev.chebfit(u, q, deg=min(len(u) - 1, 60))
    xi = u[5:-5]
    # Pr int T_k(u) / ((u - xi) sqrt(1-u^2)) du = pi U_{k-1}(xi) for k >= 1, zero for k = 0
    total = np.zeros_like(xi)
    for kk, ck in enumerate(coef[1:], start=1):
        total += ck * np.pi * special.eval_chebyu(kk - 1, xi)
    lhs = -total / r
    return float(np.max(np.abs(lhs - gfun(mid + r * xi))))


def solve_support(gfun: Callable, norm: float = 1.0, guess=(-1.0, 1.0), m: int = 400):
    """Edges ``(a, b)`` giving a soft-edge single-interval solution.

    Conditions: ``int g / sqrt((t-a)(b-t)) = 0`` and
    ``(1/pi) int t g / sqrt((t-a)(b-t)) = norm``.
    """
    k = np.arange(m)
    u = np.cos((2 * k + 1) * np.pi / (2 * m))

    def eqs(p):
        a, b = p
        if b <= a:
            return [1e3, 1e3]
        t = (a + b) / 2 + (b - a) / 2 * u
        g = gfun(t)
        return [np.mean(g), np.mean(t * g) - norm]

    sol, info, ier, msg = optimize.fsolve(eqs, guess, full_output=True, xtol=1e-13)
    if ier != 1:
        raise RuntimeError(f"support solver failed: {msg}")
    return float(sol[0]), float(sol[1])


def gaussian_equilibrium_density(a: float, b: float, x):
    """Normalized solution of ``Pr int n/(x - x') = x`` on ``[a, b]``."""
    x = np.asarray(x, dtype=float)
    if np.any((x <= a) | (x >= b)):
        raise ValueError("x must lie inside (a, b)")
    num = 1 - x**2 + 0.5 * (a + b) * x + (b - a) ** 2 / 8
    return num / (np.pi * np.sqrt((x - a) * (b - x)))


def free_energy_ab(a: float, b: float) -> float:
    """Closed-form free energy of the Gaussian gas confined to ``[a, b]``."""
    if not a < b:
        raise ValueError("free_energy_ab requires a < b")
    return (-9 * a**4 + 4 * a**3 * b + 2 * a**2 * (5 * b**2 + 48) + 4 * a * b * (b**2 + 16)
            - 256 * math.log(b - a) - 9 * b**4 + 96 * b**2 + 512 * math.log(2)) / 512


def free_energy_ab_quadrature(a: float, b: float) -> float:
    """``1/4 int n* x^2 + a^2/4 - 1/2 int n* ln(x - a)`` by weighted quadrature."""

    def num(x):
        return 1 - x**2 + 0.5 * (a + b) * x + (b - a) ** 2 / 8

    wv = (-0.5, -0.5)
    m2, _ = integrate.quad(lambda x: num(x) * x**2 / np.pi, a, b, weight="alg", wvar=wv)
    lg, _ = integrate.quad(lambda x: num(x) / np.pi, a, b, weight="alg-loga", wvar=wv)
    return 0.25 * m2 + a**2 / 4 - 0.5 * lg


def edge_numerators(a: float, b: float) -> tuple[float, float]:
    """Numerator of ``n*(x; a, b)`` at both edges; both must be >= 0 for a physical density."""
    def num(x):
        return 1 - x**2 + 0.5 * (a + b) * x + (b - a) ** 2 / 8
    return num(a), num(b)


def optimize_edges(budget: int = 400) -> tuple[float, float]:
    """Minimize ``free_energy_ab`` over edges giving a nonnegative ``n*``.

    The closed form is unbounded below once ``n*`` turns negative, so the
    search is restricted to the admissible set: coarse grid first, then SLSQP
    with the two edge constraints.
    """
    best = None
    for a in np.linspace(-2.5, -0.1, 49):
        for b in np.linspace(0.1, 2.5, 49):
            if min(edge_numerators(a, b)) >= 0:
                v = free_energy_ab(a, b)
                if best is None or v < best[0]:
                    best = (v, a, b)
    if best is None:
        raise RuntimeError("no admissible starting point found")
    cons = [{"type": "ineq", "fun": lambda p, k=k: edge_numerators(p[0], p[1])[k]} for k in (0, 1)]
    res = optimize.minimize(lambda p: free_energy_ab(p[0], p[1]), best[1:], method="SLSQP",
                            constraints=cons, options={"ftol": 1e-15, "maxiter": budget})
    if not res.success:
        raise RuntimeError(f"edge optimization did not converge: {res.message}; last {res.x}")
    a, b = res.x
    if max(np.abs(edge_numerators(a, b))) < 1e-3:
        # both constraints active: polish the vertex exactly
        a, b = optimize.fsolve(lambda p: edge_numerators(p[0], p[1]), res.x, xtol=1e-14)
    return float(a), float(b)


# ---- partition functions -----------------------------------------------------------

def log_partition_gaussian(n: int, beta: float) -> float:
    """``ln Z = (N/2) ln 2pi + sum_j [lnGamma(1 + j beta/2) - lnGamma(1 + beta/2)]``."""
    if n < 1:
        raise ValueError("n must be positive")
    j = np.arange(1, n + 1)
    return float(n / 2 * math.log(2 * math.pi)
                 + np.sum(special.gammaln(1 + j * beta / 2) - special.gammaln(1 + beta / 2)))


def partition_gaussian(n: int, beta: float) -> float:
    return math.exp(log_partition_gaussian(n, beta))


def log_barnes_g(k: int) -> float:
    """``ln G(k)`` for integer ``k >= 1`` from ``G(z+1) = Gamma(z) G(z)``, ``G(1) = 1``."""
    out = 0.0
    for z in range(1, k):
        out += math.lgamma(z)
    return out


def partition_barnes_check(n: int) -> float:
    """Relative mismatch between the Gamma product and ``(2 pi)^(N/2) G(N+2)`` at beta=2."""
    lhs = log_partition_gaussian(n, 2)
    rhs = n / 2 * math.log(2 * math.pi) + log_barnes_g(n + 2)
    return abs(math.expm1(lhs - rhs))


def log_C(n: int, beta: float) -> float:
    """Exact ``ln C_{N,beta}`` with ``C = sqrt(beta N)^(N + beta N(N-1)/2)``."""
    return (n + beta * n * (n - 1) / 2) * 0.5 * math.log(beta * n)


def log_C_asymptotic(n: int, beta: float) -> float:
    ln = math.log(n)
    return (beta / 4 * n**2 * ln + beta / 4 * math.log(beta) * n**2
            + (1 - beta / 2) / 2 * n * ln + (1 - beta / 2) * math.log(beta) / 2 * n)


def a_beta(beta: float, F0: float = F0_SEMICIRCLE) -> float:
    return beta / 4 * math.log(beta) - beta * F0


def b_beta(beta: float, c: float = 1.0, F1: float = F1_SEMICIRCLE) -> float:
    """Linear coefficient; depends on the undetermined self-energy constant ``c``."""
    return (beta / 2 - 1) * F1 + (1 - beta / 2) / 2 * math.log(beta) - beta / 2 * math.log(c)


def log_partition_asymptotic(n: int, beta: float, c: float = 1.0) -> float:
    """Large-N form ``(beta/4) N^2 ln N + a N^2 + (1 + beta/2)/2 N ln N + b N``."""
    ln = math.log(n)
    return (beta / 4 * n**2 * ln + a_beta(beta) * n**2
            + 0.5 * (1 + beta / 2) * n * ln + b_beta(beta, c) * n)
