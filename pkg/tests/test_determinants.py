import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra import numpy as hnp
from scipy import integrate

from rmtlab import coulomb, determinants as dt, sampling

finite = st.floats(-3, 3, allow_nan=False)


@given(st.lists(finite, min_size=1, max_size=7))
@settings(max_examples=80)
def test_vandermonde_product(xs):
    ref = math.prod(xs[j] - xs[i] for i, j in itertools.combinations(range(len(xs)), 2))
    assert dt.vandermonde(xs) == pytest.approx(ref, rel=1e-9, abs=1e-9)


@pytest.mark.parametrize("family", ["hermite-probabilists", "hermite-physicists", "hermite-orthonormal"])
def test_vandermonde_polynomial_basis(family):
    xs = [-1.3, -0.2, 0.5, 1.9]
    assert dt.vandermonde_poly_form(xs, family) == pytest.approx(dt.vandermonde(xs), rel=1e-10)


def _skew(n, seed):
    a = np.random.default_rng(seed).standard_normal((n, n))
    return a - a.T


@pytest.mark.parametrize("n", [2, 4, 6, 8])
def test_pairing_matches_elimination(n):
    a = _skew(n, n)
    assert dt.pfaffian_pairing(a) == pytest.approx(dt.pfaffian_elimination(a), rel=1e-10)


@given(hnp.arrays(float, (10, 10), elements=st.floats(-2, 2)), st.sampled_from([2, 4, 6, 8, 10]))
@settings(max_examples=60, deadline=None)
def test_pfaffian_squared_is_det(raw, n):
    a = raw[:n, :n] - raw[:n, :n].T
    pf = dt.pfaffian(a)
    det = np.linalg.det(a)
    assert pf * pf == pytest.approx(det, rel=1e-7, abs=1e-7 * max(1.0, np.max(np.abs(a))) ** n)


def test_pfaffian_four_by_four_formula():
    a = _skew(4, 1)
    ref = a[0, 1] * a[2, 3] - a[0, 2] * a[1, 3] + a[0, 3] * a[1, 2]
    assert dt.pfaffian(a) == pytest.approx(ref)


@pytest.mark.parametrize("n", [4, 12])
def test_pfaffian_congruence(n):
    a = _skew(n, 3)
    b = np.random.default_rng(4).standard_normal((n, n))
    assert dt.pfaffian(b @ a @ b.T) == pytest.approx(np.linalg.det(b) * dt.pfaffian(a), rel=1e-8)


def test_pfaffian_block_diagonal_and_empty():
    blocks = [2.0, -3.0, 0.5, 7.0, 1.5]
    a = np.zeros((10, 10))
    for k, v in enumerate(blocks):
        a[2 * k, 2 * k + 1], a[2 * k + 1, 2 * k] = v, -v
    assert dt.pfaffian(a) == pytest.approx(math.prod(blocks))
    assert dt.pfaffian(np.zeros((0, 0))) == 1.0


def test_pfaffian_singular_large():
    a = _skew(10, 5)
    a[:, 0] = 0
    a[0, :] = 0
    assert dt.pfaffian(a) == 0.0


def test_skew_matrix_validation():
    with pytest.raises(ValueError):
        dt.SkewMatrix(np.zeros((3, 3)))
    with pytest.raises(ValueError):
        dt.SkewMatrix(np.ones((2, 2)))
    with pytest.raises(ValueError):
        dt.SkewMatrix(np.zeros((2, 3)))
    assert dt.SkewMatrix(_skew(4, 0)).dim == 4


@pytest.mark.parametrize("k", range(8))
def test_gaussian_moment(k):
    ref, _ = integrate.quad(lambda x: x**k * math.exp(-x * x / 2), -np.inf, np.inf)
    assert float(dt.gaussian_moment(k)) == pytest.approx(ref, abs=1e-10)


@pytest.mark.parametrize("n", [2, 3])
def test_andreief_against_bruteforce(n):
    fs = [lambda x, j=j: np.asarray(x) ** j for j in range(n)]
    gs = [lambda x, j=j: np.cos(j * np.asarray(x)) for j in range(n)]
    assert dt.andreief(fs, gs) == pytest.approx(dt.andreief_bruteforce(fs, gs), rel=1e-8)


@pytest.mark.parametrize("n", range(1, 11))
def test_hankel_partition_matches_gamma_product(n):
    assert dt.partition_gue_hankel(n) == pytest.approx(coulomb.partition_gaussian(n, 2), rel=1e-10)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_de_bruijn_first(n):
    assert dt.de_bruijn_check_1(n) < 1e-8


@pytest.mark.parametrize("n", [1, 2])
def test_de_bruijn_second(n):
    assert dt.de_bruijn_check_2(n) < 1e-8


@pytest.mark.parametrize("n", range(1, 7))
def test_goe_partition_by_de_bruijn(n):
    assert dt.partition_goe_debruijn(n) == pytest.approx(coulomb.partition_gaussian(n, 1), rel=1e-10)


def test_sign_count_known_value():
    assert dt.sign_count_prob(9, 7) == pytest.approx(5.67686e-6, rel=1e-4)
    assert dt.sign_count_prob(1, 1) == pytest.approx(0.5)


def test_sign_count_exact_expression():
    import sympy

    exact = dt.sign_count_probs(9, exact=True)[7]
    pi = sympy.pi
    ref = (161229045760 - 20942589825 * pi**2 - 9172989000 * pi**3 + 3386880000 * pi**4) / (48168960000 * pi**4)
    assert sympy.simplify(exact - ref) == 0


@pytest.mark.parametrize("n", range(1, 11))
def test_sign_count_symmetric_and_normalized(n):
    ps = [float(v) for v in dt.sign_count_probs(n)]
    assert sum(ps) == pytest.approx(1.0, abs=1e-10)
    for k in range(n + 1):
        assert ps[k] == pytest.approx(ps[n - k], abs=1e-10)
        assert ps[k] >= 0
    assert float(dt.sign_count_gf(n, 1)) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("n", [2, 3])
def test_sign_count_against_gue_sampling(n):
    count = 100_000
    vals = sampling.sample_eigenvalues("gue", n, count, seed=21)
    freq = np.bincount((vals > 0).sum(axis=1), minlength=n + 1) / count
    ps = np.array([float(v) for v in dt.sign_count_probs(n)])
    sigma = np.sqrt(ps * (1 - ps) / count)
    assert np.all(np.abs(freq - ps) < 4 * sigma + 1e-12)


def test_sign_count_argument_checks():
    with pytest.raises(ValueError):
        dt.sign_count_prob(3, 4)
    with pytest.raises(ValueError):
        dt.sign_count_gf(0, 1.0)
    with pytest.raises(RuntimeError):
        dt.sign_count_probs(9, max_cond_digits=1.0)


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("mix", [((1.0, 2.0, 0.5), (1.0, -0.5, 2.0)),
                                 ((0.3, 1.0, 1.0, 2.0, 0.7), (0.1, 0.4, 1.2, -1.0, 0.8))])
def test_toda_equation(n, mix):
    fam = dt.ExpMixture(*mix)
    assert dt.toda_check(fam, n, 0.2) < 1e-6


def test_toda_low_order_taus():
    fam = dt.ExpMixture((1.0, 2.0), (0.5, 1.5))
    assert dt.toda_tau(fam, 0, 0.3) == 1.0
    assert dt.toda_tau(fam, -1, 0.3) == 0.0
    assert dt.toda_tau(fam, 1, 0.3) == pytest.approx(fam.derivative(0, 0.3))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_dyson_gaudin(n):
    assert dt.dyson_gaudin_check(n, N=5, seed=n) < 1e-10


def test_two_point_marginal():
    N = 3
    assert dt.two_point_marginal(N, 0.2, -0.7) == pytest.approx(dt.two_point_marginal(N, -0.7, 0.2))
    total, _ = integrate.dblquad(lambda y, x: dt.two_point_marginal(N, x, y), -9, 9, -9, 9, epsabs=1e-9)
    assert total == pytest.approx(1.0, abs=1e-6)
    assert dt.two_point_marginal(N, 0.4, 0.4) == pytest.approx(0.0, abs=1e-14)
