import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spheroid_mc import specfun
from spheroid_mc.errors import DomainError
from spheroid_mc.gfc import assemble_series

mpmath.mp.dps = 60


def _random_z(n, seed, rmax=60.0):
    gen = np.random.default_rng(seed)
    r = gen.uniform(0.05, rmax, n)
    a = gen.uniform(-np.pi, np.pi, n)
    return r * np.exp(1j * a)


def wronskian_residual(n, z):
    # j_n y_n' - j_n' y_n = 1/z^2
    j = specfun.sph_bessel_j(n, z)
    y = specfun.sph_bessel_y(n, z)
    jd = specfun.sph_bessel_deriv("j", n, z)
    yd = specfun.sph_bessel_deriv("y", n, z)
    w = j * yd - jd * y
    scale = np.abs(j * yd) + np.abs(jd * y) + np.abs(1 / z**2)
    return np.abs(w - 1 / z**2) / scale


def test_wronskian_random_complex_arguments():
    z = _random_z(1000, 1)
    n = np.random.default_rng(2).integers(0, 40, z.size)
    res = np.empty(z.size)
    for k in np.unique(n):
        sel = n == k
        res[sel] = wronskian_residual(int(k), z[sel])
    assert np.all(np.isfinite(res))
    assert res.max() < 1e-8


@pytest.mark.parametrize("n", [0, 1, 2, 5, 17, 40])
def test_j_and_h_against_mpmath(n):
    for z in _random_z(6, 10 + n, rmax=30.0):
        zm = mpmath.mpc(z.real, z.imag)
        pref = mpmath.sqrt(mpmath.pi / (2 * zm))
        j_ref = complex(pref * mpmath.besselj(n + 0.5, zm))
        h_ref = complex(pref * mpmath.hankel1(n + 0.5, zm))
        assert abs(specfun.sph_bessel_j(n, z) - j_ref) <= 1e-10 * abs(j_ref) + 1e-300
        assert abs(specfun.sph_hankel1(n, z) - h_ref) <= 1e-10 * abs(h_ref)


def test_known_values():
    assert specfun.sph_bessel_j(1, 1.0) == pytest.approx(0.30116867893975674, rel=1e-13)
    z = 1 + 0.5j
    assert specfun.sph_hankel1(0, z) == pytest.approx(-1j * np.exp(1j * z) / z, rel=1e-14)
    assert specfun.sph_bessel_j(0, 0.0) == 1.0
    assert specfun.sph_bessel_j(3, 0.0) == 0.0


def test_small_argument_series_matches_leading_term():
    z = 1e-5 + 2e-6j
    for n in range(5):
        lead = z**n / math.prod(range(1, 2 * n + 2, 2))
        assert specfun.sph_bessel_j(n, z) == pytest.approx(lead, rel=1e-9)


def test_derivative_by_finite_difference():
    z = 1.3 + 0.7j
    h = 1e-6
    for kind, f in [("j", specfun.sph_bessel_j), ("y", specfun.sph_bessel_y), ("h1", specfun.sph_hankel1)]:
        for n in range(4):
            fd = (f(n, z + h) - f(n, z - h)) / (2 * h)
            assert specfun.sph_bessel_deriv(kind, n, z) == pytest.approx(fd, rel=1e-8)


def test_derivative_identities():
    z = 2.0
    assert specfun.sph_bessel_deriv("j", 0, z) == pytest.approx(-specfun.sph_bessel_j(1, z), rel=1e-14)
    z = 0.8 - 1.1j
    for n in range(3):
        h1d = specfun.sph_bessel_deriv("h1", n, z)
        jd = specfun.sph_bessel_deriv("j", n, z)
        yd = specfun.sph_bessel_deriv("y", n, z)
        assert h1d == pytest.approx(jd + 1j * yd, rel=1e-12)
    assert specfun.sph_bessel_deriv("j", 1, 0.0) == pytest.approx(1 / 3)
    assert specfun.sph_bessel_deriv("j", 2, 0.0) == 0.0


def test_singular_kinds_raise_at_origin():
    with pytest.raises(DomainError):
        specfun.sph_bessel_y(0, 0.0)
    with pytest.raises(DomainError):
        specfun.sph_hankel1(2, 0.0)
    with pytest.raises(DomainError):
        specfun.sph_bessel_deriv("y", 1, 0.0)


def test_scaled_sequences_are_consistent():
    z = np.array([3.0 + 40j, 25 - 2j, 0.01 + 0.0j])
    j, jd, h, hd = specfun.bessel_pack(10, z)
    for n in (0, 4, 10):
        np.testing.assert_allclose(j[n] * np.exp(np.abs(z.imag)), specfun.sph_bessel_j(n, z), rtol=1e-12)
        np.testing.assert_allclose(h[n] * np.exp(1j * z), specfun.sph_hankel1(n, z), rtol=1e-12)


def test_associated_legendre_explicit():
    x = 0.4
    assert specfun.assoc_legendre(3, 2, x) == pytest.approx(15 * x * (1 - x * x), rel=1e-14)
    assert specfun.assoc_legendre(3, 2, x, condon_shortley=True) == pytest.approx(15 * x * (1 - x * x))
    assert specfun.assoc_legendre(1, 1, x, condon_shortley=True) == pytest.approx(-math.sqrt(1 - x * x))
    with pytest.raises(IndexError):
        specfun.assoc_legendre(1, 2, x)


def test_legendre_table_matches_numpy():
    x = np.linspace(-1, 1, 17)
    tab = specfun.legendre_table(12, x)
    for n in range(13):
        ref = np.polynomial.legendre.legval(x, [0] * n + [1])
        np.testing.assert_allclose(tab[n], ref, atol=1e-13)


def test_mode_weights():
    assert specfun.mode_weight(0, 0, 0.3) == pytest.approx(1 / (4 * math.pi))
    assert specfun.mode_weight(1, 0, 0.0) == pytest.approx(3 / (4 * math.pi))
    th = 0.9
    ref = 1 / math.pi * 5 / 2 * math.factorial(1) / math.factorial(3) * 3 * math.cos(th) * math.sin(th)
    assert specfun.mode_weight(2, 1, th) == pytest.approx(ref, rel=1e-13)


def test_condon_shortley_sign_cancels_in_series():
    radial = np.random.default_rng(0).normal(size=(8, 3)) + 0j
    q = (1.0, 0.7, 1.9)
    src = (1.2, 0.3)
    a = assemble_series(radial, q, src, rel_tol=None)
    b = assemble_series(radial, q, src, rel_tol=None, condon_shortley=True)
    np.testing.assert_allclose(a, b, rtol=1e-13)


@settings(max_examples=60, deadline=None)
@given(
    r=st.floats(0.1, 80.0),
    a=st.floats(-math.pi, math.pi),
    n=st.integers(0, 60),
)
def test_recurrence_holds(r, a, n):
    z = r * complex(math.cos(a), math.sin(a))
    # j_{n-1} + j_{n+1} = (2n+1)/z j_n for n >= 1, checked on the scaled sequence
    j = specfun.jn_scaled(n + 2, z)
    if n == 0:
        return
    lhs = j[n - 1] + j[n + 1]
    rhs = (2 * n + 1) / z * j[n]
    assert abs(lhs - rhs) <= 1e-10 * (abs(j[n - 1]) + abs(j[n + 1]) + abs(rhs)) + 1e-300
