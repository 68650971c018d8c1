"""Invariant and acceptance suites shared by the test-suite and ``rmt check``.

Every check returns a :class:`CheckResult` holding the measured value, the
tolerance it is compared against and the pass flag. Acceptance criteria are
registered as ``A1`` .. ``A13``; module invariants are grouped by module.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate, stats

from . import coulomb, core, density, determinants, eigenvectors, resolvent, sampling

__all__ = ["CheckResult", "ACCEPTANCE", "INVARIANTS", "run_checks", "format_table"]

SQRT2 = math.sqrt(2)


@dataclass
class CheckResult:
    name: str
    value: float
    tol: float
    passed: bool
    seconds: float = 0.0
    detail: dict = field(default_factory=dict)

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"{flag} {self.name}: value={self.value:.3e} tol={self.tol:.1e} ({self.seconds:.1f}s)"


def _result(name, value, tol, **detail) -> CheckResult:
    value = float(value)
    return CheckResult(name, value, tol, bool(np.isfinite(value) and value <= tol), detail=detail)


def _combine(name, parts: list[CheckResult]) -> CheckResult:
    """One result whose value is the worst ratio value/tol over the parts."""
    worst = max(parts, key=lambda r: r.value / r.tol if r.tol else math.inf)
    ok = all(r.passed for r in parts)
    detail = {r.name: {"value": r.value, "tol": r.tol, "pass": r.passed, **r.detail} for r in parts}
    return CheckResult(name, worst.value, worst.tol, ok, detail=detail)


# ---- acceptance criteria -----------------------------------------------------------

def acceptance_a1(seed: int = 7) -> CheckResult:
    vals = sampling.sample_eigenvalues("goe", 2, 100_000, seed)
    s = np.diff(vals, axis=1).ravel()
    return _result("A1 surmise KS", core.ks_distance(s, density.wigner_surmise_cdf), 0.01, count=s.size)


def overlay_gaussian(beta: int, n: int = 8, count: int = 50_000, seed: int = 7, bins: int = 60):
    """Histogram over +-5 sigma of the data and the matching finite-N density."""
    ens = {1: "goe", 2: "gue", 4: "gse"}[beta]
    vals = sampling.sample_eigenvalues(ens, n, count, seed).ravel()
    sd = float(np.std(vals))
    hist = core.build_histogram(vals, core.HistogramSpec(-5 * sd, 5 * sd, bins))
    curve = {1: density.goe_density_finite, 2: density.gue_density_finite, 4: density.gse_density_sampled}[beta]
    return hist, (lambda x: curve(n, x))


def acceptance_a2(seed: int = 7) -> CheckResult:
    parts = []
    for beta in (1, 2, 4):
        hist, curve = overlay_gaussian(beta, seed=seed)
        parts.append(_result(f"beta={beta}", core.sup_distance(hist, curve), 0.01))
    return _combine("A2 finite-N densities", parts)


def acceptance_a3(seed: int = 7) -> CheckResult:
    n = 200
    vals = sampling.sample_eigenvalues("goe", n, 500, seed).ravel() / math.sqrt(n)
    hist = core.build_histogram(vals, core.HistogramSpec(-1.6, 1.6))
    return _result("A3 semicircle", core.sup_distance(hist, density.semicircle, -1.3, 1.3), 0.02,
                   bins=hist.meta["bins"])


def mp_bulk(c: float) -> tuple[float, float]:
    lo, hi = density.mp_edges(c)
    pad = 0.05 * (hi - lo)
    return lo + pad, hi - pad


def acceptance_a4(seed: int = 7, count: int = 5000) -> CheckResult:
    n, m = 100, 200
    c = n / m
    lo, hi = density.mp_edges(c)
    blo, bhi = mp_bulk(c)
    parts = []
    for beta in (1, 2, 4):
        vals = sampling.sample_eigenvalues("wishart", n, count, seed, m=m, beta=beta) / (beta * n)
        hist = core.build_histogram(vals.ravel(), core.HistogramSpec(0.0, hi + 0.5))
        parts.append(_result(f"beta={beta} bulk", core.sup_distance(hist, lambda y: density.marchenko_pastur(y, c),
                                                                     blo, bhi), 0.02))
        a, b = density.fit_mp_edges(vals)
        parts.append(_result(f"beta={beta} lower edge", abs(a - lo), 0.1,
                             mean_min=float(np.mean(vals[:, 0]))))
        parts.append(_result(f"beta={beta} upper edge", abs(b - hi), 0.1,
                             mean_max=float(np.mean(vals[:, -1]))))
    return _combine("A4 Marcenko-Pastur", parts)


def semicircle_grid(npts: int = 4001) -> core.GridFunction:
    xs = core.chebyshev_grid(-SQRT2, SQRT2, npts)
    return core.GridFunction(xs, density.semicircle(xs))


def acceptance_a5(seed: int = 7) -> CheckResult:
    g = semicircle_grid()
    return _combine("A5 functionals", [
        _result("F0", abs(coulomb.functional_F0(g) - coulomb.F0_SEMICIRCLE), 1e-5),
        _result("F1", abs(coulomb.functional_F1(g) - coulomb.F1_SEMICIRCLE), 1e-6),
    ])


def acceptance_a6(seed: int = 7) -> CheckResult:
    barnes = max(coulomb.partition_barnes_check(n) for n in range(1, 13))
    hankel = max(abs(determinants.partition_gue_hankel(n) / coulomb.partition_gaussian(n, 2) - 1)
                 for n in range(1, 9))
    return _combine("A6 partition functions", [_result("Barnes", barnes, 1e-10), _result("Hankel", hankel, 1e-8)])


def acceptance_a7(seed: int = 7) -> CheckResult:
    sol = coulomb.tricomi_solve(lambda t: t, -SQRT2, SQRT2)
    err = float(np.max(np.abs(sol.ys - density.semicircle(sol.xs))))
    a, b = coulomb.optimize_edges()
    return _combine("A7 Tricomi and edges", [
        _result("tricomi", err, 1e-6),
        _result("edges", max(abs(a + SQRT2), abs(b - SQRT2)), 1e-4),
    ])


def acceptance_a8(seed: int = 7) -> CheckResult:
    xs = np.linspace(-2, 2, 201)
    rho = np.array([resolvent.density_from_resolvent(resolvent.gaussian_resolvent, x) for x in xs])
    outside = np.abs(xs) > SQRT2
    return _combine("A8 resolvent branch", [
        _result("inside", np.max(np.abs(rho - density.semicircle(xs))), 1e-6),
        _result("outside", np.max(np.abs(rho[outside])), 1e-8),
    ])


def free_add_overlay(p: float, c: float = 0.5, n: int = 500, count: int = 200, seed: int = 7, bins: int = 60):
    ev = resolvent.sample_free_sum(p, c, n, count, seed)
    hist = core.build_histogram(ev, core.HistogramSpec(ev.min() - 0.05, ev.max() + 0.05, bins))
    theory = core.bin_average(lambda x: resolvent.free_add_density(p, c, x), hist)
    return hist, theory


def acceptance_a9(seed: int = 7) -> CheckResult:
    c = 0.5
    parts = []
    for p in (0.2, 0.5, 0.8):
        hist, theory = free_add_overlay(p, c, seed=seed)
        parts.append(_result(f"p={p}", float(np.max(np.abs(hist.ys - theory))), 0.03))
    xs = np.linspace(-2.0, 6.5, 341)
    parts.append(_result("p=0", np.max(np.abs(resolvent.free_add_density(0.0, c, xs)
                                              - density.marchenko_pastur(xs, c))), 1e-6))
    parts.append(_result("p=1", np.max(np.abs(resolvent.free_add_density(1.0, c, xs)
                                              - density.semicircle(xs))), 1e-6))
    return _combine("A9 free addition", parts)


def acceptance_a10(seed: int = 7) -> CheckResult:
    p = determinants.sign_count_prob(9, 7)
    norm = max(abs(float(determinants.sign_count_gf(n, 1)) - 1) for n in range(1, 11))
    return _combine("A10 sign count", [
        _result("P9(7)", abs(p / 5.67686e-6 - 1), 1e-4),
        _result("phi(1)", norm, 1e-10),
    ])


def acceptance_a11(seed: int = 7) -> CheckResult:
    rng = np.random.default_rng(seed)
    pf = 0.0
    for dim in range(2, 13, 2):
        for _ in range(5):
            a = rng.standard_normal((dim, dim))
            a = a - a.T
            pf = max(pf, abs(determinants.pfaffian(a) ** 2 / np.linalg.det(a) - 1))
    families = [determinants.ExpMixture((1.0, 1.0), (1.0, 2.0)),
                determinants.ExpMixture((1.0, 0.5, 2.0, 0.3, 1.2), (1.0, 2.0, -0.5, 0.7, -1.3))]
    toda = max(determinants.toda_check(f, 3, x) for f in families for x in (0.0, 0.5, 1.0))
    dg = max(determinants.dyson_gaudin_check(n, seed=seed) for n in (1, 2, 3))
    rep = max(density.reproducing_residual(n) for n in range(1, 11))
    return _combine("A11 Pfaffian/Toda/Dyson-Gaudin", [
        _result("pf^2=det", pf, 1e-10), _result("Toda", toda, 1e-6),
        _result("Dyson-Gaudin", dg, 1e-6), _result("reproducing", rep, 1e-8),
    ])


def acceptance_a12(seed: int = 7) -> CheckResult:
    s = eigenvectors.component_samples("gue", 16, 625, seed)
    parts = [_result("GUE |c1|^2", core.ks_distance(s.y, lambda y: eigenvectors.p_component_cdf(y, 16, 2)), 0.02)]
    for beta, ens in ((1, "goe"), (2, "gue")):
        s = eigenvectors.component_samples(ens, 512, 20, seed)
        parts.append(_result(f"Porter-Thomas {ens}",
                             core.ks_distance(s.eta, lambda e, b=beta: eigenvectors.porter_thomas_cdf(e, b)), 0.03))
    avg = eigenvectors.average_ipr("goe", 512, 20, seed)
    parts.append(_result("GOE IPR", abs(avg * 512 / 3 - 1), 0.05))
    return _combine("A12 eigenvectors", parts)


def acceptance_a13(seed: int = 7) -> CheckResult:
    gaps = sampling.iid_gap_samples(1000, 100, "uniform", seed)
    return _result("A13 i.i.d. gaps", core.ks_distance(gaps, stats.expon.cdf), 0.02, count=gaps.size)


ACCEPTANCE: dict[str, Callable[[int], CheckResult]] = {
    "A1": acceptance_a1, "A2": acceptance_a2, "A3": acceptance_a3, "A4": acceptance_a4,
    "A5": acceptance_a5, "A6": acceptance_a6, "A7": acceptance_a7, "A8": acceptance_a8,
    "A9": acceptance_a9, "A10": acceptance_a10, "A11": acceptance_a11, "A12": acceptance_a12,
    "A13": acceptance_a13,
}


# ---- module invariants ---------------------------------------------------------------

def inv_core(seed: int = 7) -> CheckResult:
    rng = core.draw_rng(seed, 0)
    x = rng.standard_normal(10_000)
    h = core.build_histogram(x, core.HistogramSpec(-5, 5))
    norm = abs(np.sum(h.ys) * h.meta["width"] - 1)
    sp = core.Spectrum(np.sort(x[:50]), 1, 50)
    r = core.rescale_spectrum(sp)
    order = float(np.any(np.diff(r.values) < 0) or np.any(np.sign(r.values) != np.sign(sp.values)))
    xs = np.linspace(-1, 1, 2001)
    try:
        core.GridFunction(xs, np.full_like(xs, 0.6), density_tol=1e-3)
        rejected = 0.0
    except ValueError:
        rejected = 1.0
    return _combine("core", [_result("histogram normalization", norm, 1e-12),
                             _result("rescale order/sign", order, 0.0),
                             _result("density assertion fires", 1 - rejected, 0.0)])


def inv_sampling(seed: int = 7) -> CheckResult:
    parts = []
    herm = 0.0
    for ens in ("goe", "gue", "gse"):
        mats = sampling.sample_matrices(ens, 5, 20, seed)
        herm = max(herm, float(np.max(np.abs(mats - np.conj(np.swapaxes(mats, 1, 2))))))
    parts.append(_result("self-adjoint", herm, 0.0))
    mats = sampling.sample_matrices("goe", 3, 100_000, seed)
    diag, off = mats[:, 0, 0], mats[:, 0, 1]
    k = diag.size
    # 3 sigma bands on sample variances of Gaussians: sd(var) = var sqrt(2/k)
    parts.append(_result("Var(diag)=1", abs(diag.var() - 1) / (1 * math.sqrt(2 / k)), 3.0))
    parts.append(_result("Var(off)=1/2", abs(off.var() - 0.5) / (0.5 * math.sqrt(2 / k)), 3.0))
    worst_neg, zero_err = 0.0, 0
    for beta in (1, 2, 4):
        for n, m in ((4, 7), (5, 3)):
            for idx in range(10):
                w = sampling.sample_wishart(n, m, beta, seed, idx).matrix
                ev = np.linalg.eigvalsh(w)
                norm = np.linalg.norm(w, 2)
                worst_neg = max(worst_neg, -ev.min() / norm)
                if m < n:
                    zeros = int(np.sum(np.abs(ev) < 1e-8 * max(1.0, norm)))
                    zero_err += abs(zeros - (n - m) * (2 if beta == 4 else 1))
    parts.append(_result("Wishart min eigenvalue", worst_neg, 1e-10))
    parts.append(_result("anti-Wishart zero count", zero_err, 0))
    a = sampling.sample_eigenvalues("gue", 6, 30, seed)
    b = sampling.sample_eigenvalues("gue", 6, 30, seed)
    parts.append(_result("determinism", float(np.max(np.abs(a - b))), 0.0))
    return _combine("sampling", parts)


def inv_density(seed: int = 7) -> CheckResult:
    parts = []
    xs = np.linspace(-12, 12, 6001)
    funcs = {"goe": density.goe_density_finite, "gue": density.gue_density_finite, "gse": density.gse_density_finite}
    for name, f in funcs.items():
        for n in (2, 4, 8):
            y = f(n, xs)
            parts.append(_result(f"{name} N={n} nonnegative", max(0.0, -float(y.min())), 1e-12))
            parts.append(_result(f"{name} N={n} normalization", abs(np.trapezoid(y, xs) - 1), 1e-6))
            parts.append(_result(f"{name} N={n} even", float(np.max(np.abs(y - f(n, -xs)))), 1e-10))
    # sqrt(beta N) rescaled GUE densities approach the semicircle
    grid = np.linspace(-1.3, 1.3, 261)

    def dist(n):
        return float(np.max(np.abs(math.sqrt(2 * n) * density.gue_density_finite(n, grid * math.sqrt(2 * n))
                                   - density.semicircle(grid))))

    parts.append(_result("N=32 closer than N=8", dist(32) - dist(8), 0.0))
    parts.append(_result("reproducing N<=10", max(density.reproducing_residual(n) for n in range(1, 11)), 1e-8))
    return _combine("exact-density", parts)


def inv_coulomb(seed: int = 7) -> CheckResult:
    parts = []
    sol = coulomb.tricomi_solve(lambda t: t, -SQRT2, SQRT2)
    parts.append(_result("Tricomi residual (gaussian)", coulomb.tricomi_residual(sol, lambda t: t), 1e-5))
    quartic = lambda t: t + t**3  # noqa: E731
    a, b = coulomb.solve_support(quartic, guess=(-1.0, 1.0))
    sol4 = coulomb.tricomi_solve(quartic, a, b)
    parts.append(_result("Tricomi residual (quartic)", coulomb.tricomi_residual(sol4, quartic), 1e-5))
    pot = coulomb.gaussian_potential()
    hs = []
    for s in (seed, seed + 1):
        st = coulomb.metropolis_run(pot, 50, 2.0, 150_000, s)
        hs.append(core.build_histogram(st.samples, core.HistogramSpec(-2.0, 2.0, 25)))
    parts.append(_result("Metropolis seed independence", float(np.max(np.abs(hs[0].ys - hs[1].ys))), 0.02))
    g = semicircle_grid(2001)
    f0 = coulomb.functional_F0(g)
    rng = np.random.default_rng(seed)
    gap = math.inf
    for _ in range(10):
        k = rng.integers(1, 5)
        bump = (1 + 0.2 * rng.uniform(-1, 1) * np.cos(k * np.arccos(g.xs / SQRT2)))
        y = g.ys * bump
        y /= np.trapezoid(y, g.xs)
        gap = min(gap, coulomb.functional_F0(core.GridFunction(g.xs, y)) - f0)
    parts.append(_result("F0 minimality", max(0.0, -gap), 0.0))
    parts.append(_result("Andreief cross-check", max(abs(determinants.partition_gue_hankel(n)
                                                        / coulomb.partition_gaussian(n, 2) - 1)
                                                    for n in range(1, 9)), 1e-8))
    return _combine("coulomb-gas", parts)


def inv_resolvent(seed: int = 7) -> CheckResult:
    parts = []
    rng = np.random.default_rng(seed)
    zs = rng.normal(0, 2, 40) + 1j * rng.normal(0, 2, 40)
    c = 0.5
    g_res = max(abs(g * g - 2 * z * g + 2) for z in zs for g in [resolvent.gaussian_resolvent(z)])
    w_res = 0.0
    for z in zs:
        g = resolvent.wishart_resolvent(z, c)
        # c z G^2 - (z + c - 1) G + 1 = 0 in the W/M-normalized variable is equivalent to
        # z G^2 - (z - gamma) G + 1 = 0 with gamma = 1/c - 1
        gam = 1 / c - 1
        w_res = max(w_res, abs(z * g * g - (z - gam) * g + 1))
    f_res = 0.0
    for p in (0.2, 0.5, 0.8):
        for z in zs:
            g = resolvent.free_add_goe_wishart(p, c, z)
            a3, a2, a1, a0 = resolvent.free_add_coefficients(p, c, z)
            f_res = max(f_res, abs(((a3 * g + a2) * g + a1) * g + a0))
    parts += [_result("gaussian equation", g_res, 1e-12), _result("wishart equation", w_res, 1e-12),
              _result("free-add cubic", f_res, 1e-12)]
    herg = 0.0
    for x in np.linspace(-4, 7, 89):
        for eps in (1e-3, 1e-1, 1.0):
            z = complex(x, -eps)
            for g in (resolvent.gaussian_resolvent(z), resolvent.wishart_resolvent(z, c),
                      resolvent.free_add_goe_wishart(0.5, c, z)):
                herg = max(herg, -g.imag)
    parts.append(_result("Herglotz", herg, 0.0))
    xs = core.chebyshev_grid(-SQRT2, SQRT2, 801)
    rho = [resolvent.density_from_resolvent(resolvent.gaussian_resolvent, x) for x in xs]
    parts.append(_result("resolvent density normalization", abs(np.trapezoid(rho, xs) - 1), 1e-4))
    support_ok = 0.0
    grid = np.linspace(-3, 7, 1001)
    for p in (0.2, 0.5, 0.8):
        d = resolvent.free_add_density(p, c, grid)
        pos = d > 1e-10
        runs = int(np.sum(np.diff(pos.astype(int)) == 1) + pos[0])
        support_ok = max(support_ok, float(runs != 1), max(0.0, -float(d.min())))
    parts.append(_result("free-add single interval, nonnegative", support_ok, 0.0))
    return _combine("resolvent-free", parts)


def inv_determinants(seed: int = 7) -> CheckResult:
    rng = np.random.default_rng(seed)
    pf = 0.0
    for dim in range(2, 13, 2):
        a = rng.standard_normal((dim, dim))
        a = a - a.T
        pf = max(pf, abs(determinants.pfaffian(a) ** 2 / np.linalg.det(a) - 1))
    vdm = 0.0
    fams = [density.PolyFamily(k) for k in density.PolyFamily.KINDS] + [density.PolyFamily("laguerre-associated", 1.5)]
    for fam in fams:
        for n in range(1, 9):
            x = rng.uniform(-1.5, 1.5, n) + (2.0 if fam.kind.startswith("laguerre") else 0.0)
            ref = determinants.vandermonde(x)
            vdm = max(vdm, abs(determinants.vandermonde_poly_form(x, fam) - ref) / max(1.0, abs(ref)))
    sym, tot = 0.0, 0.0
    for n in range(1, 11):
        ps = [float(v) for v in determinants.sign_count_probs(n)]
        sym = max(sym, max(abs(ps[k] - ps[n - k]) for k in range(n + 1)))
        tot = max(tot, abs(sum(ps) - 1))
    return _combine("determinants", [_result("pf^2=det", pf, 1e-10), _result("Vandermonde forms", vdm, 1e-10),
                                     _result("sign-count symmetry", sym, 1e-8), _result("sign-count sum", tot, 1e-8)])


def inv_eigenvectors(seed: int = 7) -> CheckResult:
    norm = 0.0
    for n in (2, 3, 8, 16, 64):
        for beta in (1, 2):
            val, _ = integrate.quad(lambda y: eigenvectors.p_component(y, n, beta), 0, 1, limit=200)
            norm = max(norm, abs(val - 1))
    s1 = eigenvectors.component_samples("gue", 16, 625, seed, component=0)
    s5 = eigenvectors.component_samples("gue", 16, 625, seed + 1, component=5)
    ks = stats.ks_2samp(s1.y, s5.y).statistic
    vecs = eigenvectors.sample_eigvecs("goe", 32, 10, seed)
    iprs = np.sum(np.abs(vecs) ** 4, axis=1)
    bad = float(np.sum((iprs < 1 / 32 - 1e-12) | (iprs > 1 + 1e-12)))
    return _combine("eigenvectors", [_result("p_component normalization", norm, 1e-8),
                                     _result("rotational invariance KS", ks, 0.02),
                                     _result("IPR range", bad, 0.0)])


INVARIANTS: dict[str, Callable[[int], CheckResult]] = {
    "core": inv_core, "sampling": inv_sampling, "exact-density": inv_density,
    "coulomb-gas": inv_coulomb, "resolvent-free": inv_resolvent, "determinants": inv_determinants,
    "eigenvectors": inv_eigenvectors,
}


def run_checks(names, seed: int = 7) -> list[CheckResult]:
    """Run the named checks; ``all``, ``invariants`` and ``acceptance`` expand to groups."""
    table = {**INVARIANTS, **ACCEPTANCE}
    expanded = []
    for name in names:
        if name == "all":
            expanded += list(INVARIANTS) + list(ACCEPTANCE)
        elif name == "invariants":
            expanded += list(INVARIANTS)
        elif name == "acceptance":
            expanded += list(ACCEPTANCE)
        elif name in table:
            expanded.append(name)
        else:
            raise KeyError(name)
    out = []
    for name in expanded:
        t0 = time.perf_counter()
        res = table[name](seed)
        res.seconds = time.perf_counter() - t0
        out.append(res)
    return out


def format_table(results: list[CheckResult]) -> str:
    return "\n".join(r.line() for r in results)
