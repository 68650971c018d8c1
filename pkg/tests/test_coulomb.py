import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from rmtlab import checks, coulomb, core, density

SQRT2 = math.sqrt(2)


@pytest.mark.parametrize("pot", [coulomb.gaussian_potential(), coulomb.wishart_potential(0.4)])
def test_potential_derivatives(pot):
    assert pot.derivative_residual() < 1e-8


@pytest.mark.parametrize("c", [0.0, -0.2, 1.5])
def test_wishart_potential_rejects_c(c):
    with pytest.raises(ValueError):
        coulomb.wishart_potential(c)


def test_gas_energy_two_particles():
    assert coulomb.gas_energy([-1.0, 1.0]) == pytest.approx(0.5 - math.log(2) / 4)
    with pytest.raises(ValueError):
        coulomb.gas_energy([0.3, 0.3])


@given(st.lists(st.floats(-3, 3), min_size=2, max_size=8, unique=True), st.floats(-2, 2))
@settings(max_examples=50, deadline=None)
def test_gas_energy_permutation_invariant(xs, shift):
    x = np.array(xs)
    if np.min(np.diff(np.sort(x))) < 1e-6:
        return
    assert coulomb.gas_energy(x[::-1]) == pytest.approx(coulomb.gas_energy(x), rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("beta", [1, 2, 4])
def test_partition_n2_against_quadrature(beta):
    z, _ = integrate.dblquad(lambda y, x: abs(x - y) ** beta * math.exp(-(x * x + y * y) / 2),
                             -12, 12, -12, 12, epsabs=1e-11)
    assert coulomb.partition_gaussian(2, beta) == pytest.approx(z, rel=1e-7)


def test_partition_n1():
    for beta in (1, 2, 4):
        assert coulomb.partition_gaussian(1, beta) == pytest.approx(math.sqrt(2 * math.pi))


@pytest.mark.parametrize("n", [1, 3, 10, 40])
def test_barnes(n):
    assert coulomb.partition_barnes_check(n) < 1e-12


@pytest.mark.parametrize("beta", [1, 2, 4])
def test_log_C_expansion_exact(beta):
    for n in (10, 100, 1000):
        assert coulomb.log_C(n, beta) == pytest.approx(coulomb.log_C_asymptotic(n, beta), rel=1e-12)


@pytest.mark.parametrize("beta", [1, 2, 4])
def test_asymptotic_remainder_is_linear(beta):
    # leading N^2 and N ln N terms match; the remainder grows like kappa N + O(ln N)
    def r(n):
        return (coulomb.log_partition_gaussian(n, beta) - coulomb.log_partition_asymptotic(n, beta)) / n

    d1 = abs(r(1600) - r(400))
    d2 = abs(r(6400) - r(1600))
    assert d2 < d1 and d2 < 5e-3


def test_equilibrium_density_is_semicircle():
    x = np.linspace(-1.4, 1.4, 15)
    np.testing.assert_allclose(coulomb.gaussian_equilibrium_density(-SQRT2, SQRT2, x), density.semicircle(x),
                               rtol=1e-12)
    with pytest.raises(ValueError):
        coulomb.gaussian_equilibrium_density(-1, 1, 1.0)


@pytest.mark.parametrize("a,b", [(-SQRT2, SQRT2), (-1.3, 1.0), (-1.0, 1.2), (-0.9, 0.9)])
def test_free_energy_closed_form_vs_quadrature(a, b):
    assert coulomb.free_energy_ab(a, b) == pytest.approx(coulomb.free_energy_ab_quadrature(a, b), abs=1e-9)


def test_free_energy_minimum_at_semicircle():
    a, b = coulomb.optimize_edges()
    assert a == pytest.approx(-SQRT2, abs=1e-8) and b == pytest.approx(SQRT2, abs=1e-8)
    assert coulomb.free_energy_ab(a, b) == pytest.approx(coulomb.F0_SEMICIRCLE, abs=1e-10)


def test_free_energy_rejects_inverted():
    with pytest.raises(ValueError):
        coulomb.free_energy_ab(1.0, 0.0)


@pytest.mark.parametrize("x", [0.0, 0.3, -0.77])
def test_principal_value_constant(x):
    # Pr int_{-1}^{1} sqrt(1-t^2)/(x-t) dt = pi x
    pv = coulomb.principal_value(lambda t: np.ones_like(t), -1.0, 1.0, x)
    assert pv[0] == pytest.approx(math.pi * x, abs=1e-12)


def test_principal_value_against_quad():
    g = lambda t: np.cos(t)  # noqa: E731
    x = 0.41
    ref, _ = integrate.quad(lambda t: math.sqrt((t + 1) * (2 - t)) * math.cos(t), -1, 2, weight="cauchy", wvar=x)
    assert coulomb.principal_value(g, -1.0, 2.0, x)[0] == pytest.approx(-ref, abs=1e-10)


def test_tricomi_gaussian_is_semicircle():
    sol = coulomb.tricomi_solve(lambda t: t, -SQRT2, SQRT2)
    np.testing.assert_allclose(sol.ys, density.semicircle(sol.xs), atol=1e-10)
    assert coulomb.tricomi_residual(sol, lambda t: t) < 1e-8


def test_tricomi_wrong_support_is_unphysical():
    with pytest.raises(ValueError):
        coulomb.tricomi_solve(lambda t: t, -2.0, 0.5)
    with pytest.raises(ValueError):
        coulomb.tricomi_solve(lambda t: t, 1.0, 1.0)


@pytest.mark.parametrize("g", [0.0, 0.5, 2.0])
def test_quartic_support(g):
    f = lambda t: t + g * t**3  # noqa: E731
    a, b = coulomb.solve_support(f)
    assert a == pytest.approx(-b, abs=1e-10)
    sol = coulomb.tricomi_solve(f, a, b)
    assert np.trapezoid(sol.ys, sol.xs) == pytest.approx(1.0, abs=2e-3)
    assert coulomb.tricomi_residual(sol, f) < 1e-6
    # soft edges: the solution vanishes at both ends
    assert sol.ys[0] < 0.05 and sol.ys[-1] < 0.05
    if g == 0.0:
        assert b == pytest.approx(SQRT2, abs=1e-10)


def test_functionals_of_semicircle():
    g = checks.semicircle_grid(4001)
    assert coulomb.functional_F0(g) == pytest.approx(coulomb.F0_SEMICIRCLE, abs=1e-6)
    assert coulomb.functional_F1(g) == pytest.approx(coulomb.F1_SEMICIRCLE, abs=1e-6)
    bad = core.GridFunction(g.xs, 2 * g.ys)
    with pytest.raises(ValueError):
        coulomb.functional_F0(bad)


def test_metropolis_deterministic_and_tuned():
    pot = coulomb.gaussian_potential()
    a = coulomb.metropolis_run(pot, 10, 2.0, 4000, seed=1)
    b = coulomb.metropolis_run(pot, 10, 2.0, 4000, seed=1)
    np.testing.assert_array_equal(a.samples, b.samples)
    assert 0.2 < a.acceptance < 0.5
    with pytest.raises(ValueError):
        coulomb.metropolis_run(pot, 10, 2.0, 0, seed=1)


def test_metropolis_wishart_positive():
    st_ = coulomb.metropolis_run(coulomb.wishart_potential(0.5), 20, 2.0, 20000, seed=2)
    assert np.min(st_.samples) > 0
    with pytest.raises(ValueError):
        coulomb.metropolis_run(coulomb.wishart_potential(0.5), 3, 2.0, 100, seed=2, init=np.array([-1.0, 1, 2]))


def test_metropolis_matches_semicircle():
    st_ = coulomb.metropolis_run(coulomb.gaussian_potential(), 40, 2.0, 100_000, seed=3)
    h = core.build_histogram(st_.samples, core.HistogramSpec(-1.8, 1.8, 18))
    assert core.sup_distance(h, core.bin_average(density.semicircle, h)) < 0.06
