import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.polynomial import hermite as H
from scipy import integrate

from rmtlab import density, sampling


@pytest.mark.parametrize("n", [0, 1, 2, 5, 9])
def test_hermite_matches_numpy(n):
    x = np.linspace(-3, 3, 13)
    coef = np.zeros(n + 1)
    coef[n] = 1
    np.testing.assert_allclose(density.hermite(n, x), H.hermval(x, coef), rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("kind", density.PolyFamily.KINDS)
def test_poly_family_orthogonal(kind):
    fam = density.PolyFamily(kind, alpha=1.5)
    assert fam.orthogonality_residual(8) < 1e-8


def test_poly_family_unknown():
    with pytest.raises(ValueError):
        density.PolyFamily("chebyshev")


def test_gue_n1_is_standard_normal():
    x = np.linspace(-3, 3, 7)
    np.testing.assert_allclose(density.gue_density_finite(1, x), np.exp(-x**2 / 2) / np.sqrt(2 * np.pi))


def _goe2_oracle(x):
    # one-point marginal of exp(-(x^2+y^2)/2)|x-y| by direct quadrature
    z, _ = integrate.dblquad(lambda y, u: abs(u - y) * np.exp(-(u**2 + y**2) / 2), -12, 12, -12, 12)
    val, _ = integrate.quad(lambda y: abs(x - y) * np.exp(-(x**2 + y**2) / 2), -12, 12, points=[x])
    return val / z


@pytest.mark.parametrize("x", [0.0, 0.8, -1.7, 2.5])
def test_goe_n2_against_quadrature(x):
    assert density.goe_density_finite(2, x) == pytest.approx(_goe2_oracle(x), rel=1e-7)


def test_goe_odd_n_rejected():
    with pytest.raises(ValueError):
        density.goe_density_finite(3, 0.0)


@pytest.mark.parametrize("k", [0, 1, 2, 5])
@pytest.mark.parametrize("x", [-1.2, 0.4, 2.0])
def test_goe_phi_closed_matches_quad(k, x):
    assert density.goe_phi(k, x) == pytest.approx(density.goe_phi(k, x, method="quad"), abs=1e-9)


def test_gse_sampled_n1_is_standard_normal():
    x = np.linspace(-3, 3, 7)
    np.testing.assert_allclose(density.gse_density_sampled(1, x), np.exp(-x**2 / 2) / np.sqrt(2 * np.pi))


@pytest.mark.parametrize("fn,n", [(density.gue_density_finite, 5), (density.goe_density_finite, 6),
                                  (density.gse_density_finite, 4)])
def test_finite_densities_normalized_and_even(fn, n):
    total, _ = integrate.quad(lambda t: float(fn(n, t)), -15, 15, limit=200)
    assert total == pytest.approx(1.0, abs=1e-8)
    x = np.linspace(0.1, 4, 9)
    np.testing.assert_allclose(fn(n, x), fn(n, -x), rtol=1e-10)
    assert np.all(fn(n, x) >= 0)


def test_skew_gram_structure():
    g = density.SkewFamily("goe-R").skew_gram(6)
    np.testing.assert_allclose(g, -g.T, atol=1e-12)
    # only the (2k, 2k+1) pairs survive
    mask = np.zeros_like(g, dtype=bool)
    for k in range(3):
        mask[2 * k, 2 * k + 1] = mask[2 * k + 1, 2 * k] = True
    assert np.max(np.abs(g[~mask])) < 1e-10
    assert np.min(np.abs(g[mask])) > 0.5


def test_kernel_symmetric_and_reproducing():
    assert density.kernel(4, 0.3, -1.1) == pytest.approx(density.kernel(4, -1.1, 0.3))
    assert density.reproducing_residual(6) < 1e-10


@pytest.mark.parametrize("n", [3, 10, 25])
def test_cd_rescaled_matches_direct(n):
    z = np.array([-0.6, 0.0, 0.45])
    s = np.sqrt(2 * n)
    np.testing.assert_allclose(density.rescaled_density_cd(n, z), s * density.gue_density_finite(n, z * s),
                               rtol=1e-9)


def test_semicircle_moments():
    for k in range(5):
        m, _ = integrate.quad(lambda x: x ** (2 * k) * density.semicircle(x), -np.sqrt(2), np.sqrt(2))
        assert m == pytest.approx(density.catalan_moment(k), rel=1e-9)
    with pytest.raises(ValueError):
        density.catalan_moment(-1)


@given(st.floats(-1.4, 1.4))
@settings(max_examples=40, deadline=None)
def test_semicircle_cdf_derivative(x):
    h = 1e-6
    fd = (density.semicircle_cdf(x + h) - density.semicircle_cdf(x - h)) / (2 * h)
    assert fd == pytest.approx(density.semicircle(x), abs=1e-6)


@pytest.mark.parametrize("c", [0.1, 0.5, 0.9, 1.0])
def test_mp_normalized(c):
    lo, hi = density.mp_edges(c)
    total, _ = integrate.quad(lambda y: density.marchenko_pastur(y, c), lo, hi, limit=200)
    assert total == pytest.approx(1.0, abs=1e-6)


def test_mp_edges_validation():
    with pytest.raises(ValueError):
        density.mp_edges(0.0)
    with pytest.raises(ValueError):
        density.mp_edges(1.5)


def test_mp_shape_normalized():
    total, _ = integrate.quad(lambda y: density.mp_shape(y, 0.3, 2.2), 0.3, 2.2)
    assert total == pytest.approx(1.0, abs=1e-8)


def test_fit_mp_edges_recovers_support():
    n, m = 80, 160
    vals = sampling.sample_eigenvalues("wishart", n, 400, seed=3, m=m, beta=2) / (2 * n)
    lo, hi = density.mp_edges(n / m)
    a, b = density.fit_mp_edges(vals)
    assert abs(a - lo) < 0.1 and abs(b - hi) < 0.1


@pytest.mark.parametrize("fn", [density.wigner_surmise, density.wigner_surmise_rescaled])
def test_surmise_normalized(fn):
    total, _ = integrate.quad(fn, 0, np.inf)
    assert total == pytest.approx(1.0, abs=1e-10)
    with pytest.raises(ValueError):
        fn(-1.0)


def test_rescaled_surmise_unit_mean():
    mean, _ = integrate.quad(lambda s: s * density.wigner_surmise_rescaled(s), 0, np.inf)
    assert mean == pytest.approx(1.0, abs=1e-10)


def test_surmise_cdf():
    s = np.linspace(0, 6, 7)
    for v in s:
        val, _ = integrate.quad(density.wigner_surmise, 0, v)
        assert val == pytest.approx(density.wigner_surmise_cdf(v), abs=1e-10)


@pytest.mark.parametrize("n", [5, 40, 150])
def test_log_abs_hermite(n):
    t = np.array([0.3, 1.1, 2.7])
    la, sg = density.log_abs_hermite(n, t)
    direct = density.hermite(n, t)
    np.testing.assert_allclose(sg * np.exp(la), direct, rtol=1e-9)


def test_bulk_asymptotic_accuracy():
    n = 400
    X = np.array([0.1, 0.37, 0.6])
    la, sg = density.hermite_bulk_asymptotic(n, 0, X, log=True)
    lb, sb = density.log_abs_hermite(n, X * np.sqrt(2 * n))
    # compare away from zeros: values agree in size and sign at the tested points
    assert np.all(sg == sb)
    assert np.max(np.abs(la - lb)) < 0.05
    with pytest.raises(ValueError):
        density.hermite_bulk_asymptotic(n, 0, 1.2)
