import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra import numpy as hnp
from scipy import integrate, special

from rmtlab import core, eigenvectors as ev


@pytest.mark.parametrize("beta", [1, 2])
@pytest.mark.parametrize("n", [2, 3, 7, 30])
def test_component_density_normalized(beta, n):
    total, _ = integrate.quad(lambda y: float(ev.p_component(y, n, beta)), 0, 1, limit=200)
    assert total == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("beta", [1, 2])
@pytest.mark.parametrize("y", [0.01, 0.2, 0.7])
def test_component_cdf_integrates_density(beta, y):
    n = 6
    val, _ = integrate.quad(lambda t: float(ev.p_component(t, n, beta)), 0, y)
    assert ev.p_component_cdf(y, n, beta) == pytest.approx(val, abs=1e-9)


def test_gue_two_by_two_uniform():
    np.testing.assert_allclose(ev.p_component(np.linspace(0, 1, 5), 2, 2), 1.0)


def test_component_density_large_n_stable():
    # the Gamma ratio is taken in log space, so n in the thousands is fine
    v = ev.p_component(1e-3, 5000, 1)
    assert np.isfinite(v) and v > 0


@pytest.mark.parametrize("beta", [1, 2])
def test_rescaled_component_tends_to_porter_thomas(beta):
    n = 4000
    eta = np.array([0.3, 1.0, 2.5])
    # density of eta = N y is p(eta/N)/N
    finite = np.asarray(ev.p_component(eta / n, n, beta)) / n
    np.testing.assert_allclose(finite, ev.porter_thomas(eta, beta), rtol=2e-3)


@pytest.mark.parametrize("beta", [1, 2])
def test_porter_thomas_normalized(beta):
    total, _ = integrate.quad(lambda e: float(ev.porter_thomas(e, beta)), 0, np.inf)
    assert total == pytest.approx(1.0, abs=1e-8)
    for e in (0.5, 2.0):
        val, _ = integrate.quad(lambda t: float(ev.porter_thomas(t, beta)), 0, e)
        assert ev.porter_thomas_cdf(e, beta) == pytest.approx(val, abs=1e-8)


def test_beta_checks():
    with pytest.raises(NotImplementedError):
        ev.p_component(0.1, 4, 4)
    with pytest.raises(ValueError):
        ev.p_component(0.1, 4, 3)
    with pytest.raises(ValueError):
        ev.p_component(1.5, 4, 2)
    with pytest.raises(ValueError):
        ev.p_component(0.1, 1, 2)
    with pytest.raises(ValueError):
        ev.porter_thomas(0.0, 1)
    with pytest.raises(ValueError):
        ev.porter_thomas(-1.0, 2)


@given(hnp.arrays(float, st.integers(1, 20), elements=st.floats(-1, 1)))
@settings(max_examples=80)
def test_ipr_bounds(v):
    norm = np.linalg.norm(v)
    if norm < 1e-6:
        return
    val = ev.ipr(v / norm)
    assert 1 / v.size - 1e-12 <= val <= 1 + 1e-12


def test_ipr_extremes():
    n = 9
    assert ev.ipr(np.eye(n)[0]) == 1.0
    assert ev.ipr(np.ones(n) / 3) == pytest.approx(1 / n)
    with pytest.raises(ValueError):
        ev.ipr(np.ones(n))


@pytest.mark.parametrize("m", [1, 2, 3, 6])
@pytest.mark.parametrize("a", [3.5, 5.0, 10.25])
def test_log_multivariate_gamma(m, a):
    assert ev.log_multivariate_gamma(m, a) == pytest.approx(special.multigammaln(a, m), rel=1e-12)


@pytest.mark.parametrize("n,vol", [(1, 2.0), (2, 4 * math.pi), (3, 16 * math.pi**2)])
def test_orthogonal_group_volume(n, vol):
    assert ev.stiefel_volume(n) == pytest.approx(vol, rel=1e-12)
    assert ev.stiefel_volume(n, log=True) == pytest.approx(math.log(vol), rel=1e-12)
    with pytest.raises(ValueError):
        ev.stiefel_volume(0)


def test_fix_phase():
    rng = np.random.default_rng(0)
    v = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    v[0, 2] = 0
    f = ev.fix_phase(v)
    np.testing.assert_allclose(np.abs(f), np.abs(v))
    assert np.all(f[0, [0, 1, 3, 4]].real > 0) and np.allclose(f[0, [0, 1, 3, 4]].imag, 0)
    assert f[1, 2].real > 0 and abs(f[1, 2].imag) < 1e-14
    np.testing.assert_allclose(ev.fix_phase(f), f)


@pytest.mark.parametrize("ens,beta", [("goe", 1), ("gue", 2)])
def test_component_samples(ens, beta):
    n = 8
    s = ev.component_samples(ens, n, 1500, seed=4)
    assert s.y.size == 1500 * n
    # rows of a unitary matrix have unit norm
    assert np.mean(s.y) == pytest.approx(1 / n, abs=1e-12)
    assert core.ks_distance(s.y, lambda y: ev.p_component_cdf(y, n, beta)) < 0.02


def test_components_basis_independent():
    a = ev.component_samples("gue", 6, 2000, seed=5, component=0)
    b = ev.component_samples("gue", 6, 2000, seed=5, component=4)
    assert core.ks_distance(a.y, lambda y: np.searchsorted(np.sort(b.y), y, side="right") / b.y.size) < 0.03


@pytest.mark.parametrize("ens,expect", [("goe", lambda n: 3 / (n + 2)), ("gue", lambda n: 2 / (n + 1))])
def test_average_ipr(ens, expect):
    n = 10
    assert ev.average_ipr(ens, n, 800, seed=6) == pytest.approx(expect(n), rel=0.03)


def test_sampling_argument_checks():
    with pytest.raises(ValueError):
        ev.sample_eigvecs("gse", 3, 2, seed=0)
    with pytest.raises(ValueError):
        ev.component_samples("goe", 3, 2, seed=0, component=3)
    with pytest.raises(ValueError):
        ev.ComponentSample(np.array([1.5]), "goe", 2)
    assert np.allclose(ev.ComponentSample(np.array([0.25]), "goe", 4).eta, 1.0)
