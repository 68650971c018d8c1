import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from rmtlab import density, resolvent as rv

SQRT2 = math.sqrt(2)


def wishart_closed_density(x, c):
    lo, hi = rv.wishart_edges(c)
    return math.sqrt(max((x - lo) * (hi - x), 0.0)) / (2 * math.pi * x)


@given(st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False))
@settings(max_examples=100)
def test_pq_sqrt(z):
    w = rv.pq_sqrt(z)
    assert w.real >= 0
    assert abs(w * w - z) <= 1e-9 * max(1.0, abs(z))


@pytest.mark.parametrize("z", [0.3 - 0.2j, 2.0 - 1e-3j, -1.1 - 0.5j, 5 + 0.1j])
def test_gaussian_resolvent_matches_stieltjes(z):
    ref = rv.stieltjes_transform(density.semicircle, -SQRT2, SQRT2, z)
    assert abs(rv.gaussian_resolvent(z) - ref) < 1e-9


@given(st.floats(-5, 5), st.floats(0.01, 5))
@settings(max_examples=80)
def test_gaussian_resolvent_solves_quadratic(x, y):
    z = complex(x, -y)
    g = rv.gaussian_resolvent(z)
    assert abs(g * g - 2 * z * g + 2) < 1e-9 * max(1, abs(z)) ** 2
    # Herglotz: Im G > 0 for Im z < 0
    assert g.imag > 0


def test_resolvent_moments_are_catalan():
    m = rv.moments_from_resolvent(rv.gaussian_resolvent, 8)
    for k in range(5):
        assert m[2 * k] == pytest.approx(density.catalan_moment(k), abs=1e-10)
        assert abs(m[2 * k - 1]) < 1e-10 if k else True


@pytest.mark.parametrize("x", [-1.3, -0.5, 0.0, 0.7, SQRT2, 1.6])
def test_density_from_gaussian_resolvent(x):
    assert rv.density_from_resolvent(rv.gaussian_resolvent, x) == pytest.approx(float(density.semicircle(x)),
                                                                                abs=1e-8)


@pytest.mark.parametrize("c", [0.2, 0.5, 0.8])
def test_wishart_density_and_normalization(c):
    lo, hi = rv.wishart_edges(c)
    G = lambda z: rv.wishart_resolvent(z, c)  # noqa: E731
    for x in np.linspace(lo, hi, 7)[1:-1]:
        assert rv.density_from_resolvent(G, x) == pytest.approx(wishart_closed_density(x, c), abs=1e-8)
    total, _ = integrate.quad(lambda x: wishart_closed_density(x, c), lo, hi)
    assert total == pytest.approx(1.0, abs=1e-8)


def test_wishart_edges_validation():
    with pytest.raises(ValueError):
        rv.wishart_edges(1.0)


def test_density_from_resolvent_reports_failure():
    # a resolvent with a jump that never settles
    with pytest.raises(RuntimeError):
        rv.density_from_resolvent(lambda z: cmath.exp(1j / z.imag), 0.0, min_eps=1e-6)


@pytest.mark.parametrize("z", [0.1, 0.3 + 0.1j, -0.25])
def test_gaussian_r_transform_linear(z):
    assert abs(rv.r_transform(rv.gaussian_resolvent, z) - z / 2) < 1e-10


@pytest.mark.parametrize("c", [0.3, 0.5])
@pytest.mark.parametrize("z", [0.1, 0.2 - 0.05j])
def test_wishart_r_transform_closed(c, z):
    G = lambda w: rv.wishart_resolvent(w, c)  # noqa: E731
    assert abs(rv.r_transform(G, z, mean=1 / c) - rv.r_wishart_closed(z, c)) < 1e-9


def test_r_models_analytic():
    m = rv.RTransformModel("semicircle", lambda z: z / 2)
    assert m.cauchy_riemann_residual() < 1e-9
    bad = rv.RTransformModel("conj", lambda z: np.conj(z))
    assert bad.cauchy_riemann_residual() > 1


@given(st.lists(st.floats(-3, 3), min_size=3, max_size=3))
@settings(max_examples=80, deadline=None)
def test_solve_cubic_real_roots(roots):
    r1, r2, r3 = roots
    coeffs = (1.0, -(r1 + r2 + r3), r1 * r2 + r1 * r3 + r2 * r3, -r1 * r2 * r3)
    found = np.sort_complex(rv.solve_cubic(*coeffs))
    vals = np.polyval(coeffs, found)
    assert np.max(np.abs(vals)) < 1e-8


def test_solve_cubic_complex_coefficients():
    c = (1 + 1j, -2, 0.5j, 3 - 1j)
    for r in rv.solve_cubic(*c):
        assert abs(np.polyval(c, r)) < 1e-10


@pytest.mark.parametrize("p", [0.2, 0.5, 0.8])
def test_free_add_density_normalized_and_mean(p):
    c = 0.5
    total, _ = integrate.quad(lambda x: rv.free_add_density(p, c, x)[0], -3, 8, limit=400)
    mean, _ = integrate.quad(lambda x: x * rv.free_add_density(p, c, x)[0], -3, 8, limit=400)
    assert total == pytest.approx(1.0, abs=1e-4)
    assert mean == pytest.approx((1 - p) / c, abs=1e-3)


def test_free_add_variance_additive():
    # second free cumulants add: Var(S) = p^2 Var(H) + (1-p)^2 Var(W)
    p, c = 0.4, 0.5
    lo, hi = rv.wishart_edges(c)
    m1, _ = integrate.quad(lambda x: x * wishart_closed_density(x, c), lo, hi)
    m2, _ = integrate.quad(lambda x: x * x * wishart_closed_density(x, c), lo, hi)
    var_w = m2 - m1**2
    s1, _ = integrate.quad(lambda x: x * rv.free_add_density(p, c, x)[0], -3, 8, limit=400)
    s2, _ = integrate.quad(lambda x: x * x * rv.free_add_density(p, c, x)[0], -3, 8, limit=400)
    assert s2 - s1**2 == pytest.approx(p**2 * 0.5 + (1 - p) ** 2 * var_w, abs=2e-3)


@pytest.mark.parametrize("p,c", [(-0.1, 0.5), (1.2, 0.5), (0.5, 0.0), (0.5, 1.2)])
def test_free_add_rejects_parameters(p, c):
    with pytest.raises(ValueError):
        rv.free_add_goe_wishart(p, c, 1.0 - 0.1j)


@pytest.mark.parametrize("x", [0.5, 1.0, 3.0])
def test_free_add_wishart_limit(x):
    assert rv.free_add_density(0.0, 0.5, x)[0] == pytest.approx(wishart_closed_density(x, 0.5), abs=1e-6)


@pytest.mark.parametrize("x", [-1.2, 0.0, 0.6])
def test_free_add_semicircle_limit(x):
    assert rv.free_add_density(1.0, 0.5, x)[0] == pytest.approx(float(density.semicircle(x)), abs=1e-6)


def test_free_sum_sampler_moments():
    p, c = 0.5, 0.5
    vals = rv.sample_free_sum(p, c, 100, 20, seed=1)
    assert np.mean(vals) == pytest.approx((1 - p) / c, abs=0.02)


@pytest.mark.parametrize("x", [-0.9, 0.3, 1.1])
def test_avg_ipr_linear_in_eps(x):
    rho = float(density.semicircle(x))
    for eps in (1e-3, 1e-4):
        val = rv.avg_ipr_from_resolvent(x, eps, rv.gaussian_resolvent)
        # on the cut |G|^2 = 2 for the semicircle
        assert val / eps == pytest.approx(2 / (math.pi * rho), rel=1e-2)


@pytest.mark.parametrize("eps", [1e-1, 1e-2, 1e-3])
def test_sokhotski_limit(eps):
    val = rv.sokhotski_integral(eps)
    assert abs(val.real) < 1e-10
    assert val.imag == pytest.approx(math.pi, abs=5 * eps)


@pytest.mark.parametrize("n", [1, 2])
@pytest.mark.parametrize("x", [-0.4, 0.9])
def test_fresnel_identity(n, x):
    assert rv.fresnel_identity_check(n, x, 0.5, seed=3) < 1e-6
