"""Spherical Bessel/Hankel functions of complex argument and Legendre tools.

The radial solutions of the Helmholtz-type diffusion equation need
``j_n``, ``y_n`` and ``h_n = j_n + i y_n`` at complex arguments ``k r`` whose
imaginary part can reach several hundred at high frequency.  The raw values
then overflow, so the workhorses here return *scaled* sequences:

    jn_scaled(z)  = j_n(z) * exp(-|Im z|)
    h1_scaled(z)  = h_n(z) * exp(-i z)

Both are O(1)-ish for every argument and the exact exponential factor is
re-applied by the caller, usually combined with other exponents first.

Algorithms
----------
* ``j_n``: Miller's downward recurrence, started above ``max(N, |z|)``
  and normalised against the larger of the closed-form ``j_0`` and ``j_1``;
  for ``|z| < 1e-3`` a three term power series.
* ``h^(1)_n`` for ``Im z >= 0`` (and ``h^(2)_n`` for ``Im z <= 0``): upward
  recurrence from the closed forms of orders 0 and 1.  That Hankel function
  decays away from the real axis and is dominant in ``n``, so the
  recurrence is stable.  The other Hankel function is ``2 j_n - h_n`` with
  the exponentials combined before evaluation.
* ``y_n = (h^(1)_n - j_n) / i`` or ``(j_n - h^(2)_n) / i``, whichever
  Hankel function is the stable one.

Associated Legendre functions carry *no* Condon-Shortley phase by default.
Only the product ``P_n^m(cos th) P_n^m(cos th0)`` enters a Green's function,
so either convention gives identical fields.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError

__all__ = [
    "sph_bessel_j",
    "sph_bessel_y",
    "sph_hankel1",
    "sph_bessel_deriv",
    "jn_scaled",
    "h1_scaled",
    "h2_scaled",
    "derivative_from_sequence",
    "assoc_legendre",
    "legendre_table",
    "mode_weight",
    "bessel_pack",
]

_SERIES_RADIUS = 1e-3
_MILLER_EXTRA = 40
_RESCALE = 1e250


def _complex_array(z):
    return np.asarray(z, dtype=complex)


def _check_nonzero(z):
    if np.any(z == 0):
        raise DomainError("spherical y_n / h_n evaluated at z = 0")


def _hankel_upward(n_max, z, kind):
    out = np.empty((n_max + 1,) + z.shape, dtype=complex)
    if kind == 1:
        out[0] = -1j / z
        if n_max >= 1:
            out[1] = -(z + 1j) / z**2
    else:
        out[0] = 1j / z
        if n_max >= 1:
            out[1] = (1j - z) / z**2
    # high orders at small |z| overflow to inf; callers detect and drop them
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(1, n_max):
            out[n + 1] = (2 * n + 1) / z * out[n] - out[n - 1]
    return out


def _hankel_scaled(n_max, z, kind):
    """Sequence h^(kind)_n(z) * exp(-/+ i z), n = 0..n_max."""
    z = _complex_array(z)
    _check_nonzero(z)
    sign = 1 if kind == 1 else -1
    stable = sign * z.imag >= 0
    out = np.empty((n_max + 1,) + z.shape, dtype=complex)
    if np.any(stable):
        out[:, stable] = _hankel_upward(n_max, z[stable], kind)
    if np.any(~stable):
        zu = z[~stable]
        other = _hankel_upward(n_max, zu, 3 - kind)
        # h = 2 j - h_other; |exp(|Im z| -/+ i z)| = 1 on this half plane
        out[:, ~stable] = 2 * jn_scaled(n_max, zu) * np.exp(np.abs(zu.imag) - sign * 1j * zu) - other * np.exp(
            -2 * sign * 1j * zu
        )
    return out


def h1_scaled(n_max, z):
    """``h_n(z) * exp(-i z)`` for ``n = 0..n_max``; shape ``(n_max+1, *z.shape)``."""
    return _hankel_scaled(n_max, z, 1)


def h2_scaled(n_max, z):
    """``h^(2)_n(z) * exp(+i z)`` for ``n = 0..n_max``."""
    return _hankel_scaled(n_max, z, 2)


def _j_series(n_max, z):
    # j_n(z) = z^n/(2n+1)!! * (1 - w/(2n+3) + w^2/(2 (2n+3)(2n+5))),  w = z^2/2
    out = np.empty((n_max + 1,) + z.shape, dtype=complex)
    w = z * z / 2
    lead = np.ones_like(z)
    for n in range(n_max + 1):
        if n > 0:
            lead = lead * z / (2 * n + 1)
        a, b = 2 * n + 3, 2 * n + 5
        out[n] = lead * (1 - w / a + w * w / (2 * a * b))
    return out


def _j01_scaled(z):
    b = np.abs(z.imag)
    ep = np.exp(1j * z - b)
    em = np.exp(-1j * z - b)
    s = (ep - em) / 2j
    c = (ep + em) / 2
    return s / z, s / z**2 - c / z


def _j_miller(n_max, z):
    top = max(n_max, int(np.max(np.abs(z))))
    start = top + _MILLER_EXTRA + 2 * int(math.sqrt(top + 1))
    out = np.zeros((n_max + 1,) + z.shape, dtype=complex)
    f_up = np.zeros_like(z)
    f = np.full_like(z, 1e-30)
    for k in range(start, 0, -1):
        f_down = (2 * k + 1) / z * f - f_up
        f_up, f = f, f_down
        # k-1 is the index of the newly computed value
        if k - 1 <= n_max:
            out[k - 1] = f
        if k <= n_max:
            out[k] = f_up
        big = np.abs(f) > _RESCALE
        if np.any(big):
            f = np.where(big, f / _RESCALE, f)
            f_up = np.where(big, f_up / _RESCALE, f_up)
            lo = max(k - 1, 0)
            if lo <= n_max:
                out[lo:, big] /= _RESCALE
    ref0, ref1 = _j01_scaled(z)
    if n_max == 0:
        return out * (ref0 / out[0])
    use0 = np.abs(ref0) >= np.abs(ref1)
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(use0, ref0 / out[0], ref1 / out[1])
    return out * scale


def jn_scaled(n_max, z):
    """``j_n(z) * exp(-|Im z|)`` for ``n = 0..n_max``; shape ``(n_max+1, *z.shape)``."""
    z = _complex_array(z)
    out = np.zeros((n_max + 1,) + z.shape, dtype=complex)
    absz = np.abs(z)
    zero = absz == 0
    tiny = (absz < _SERIES_RADIUS) & ~zero
    mid = ~(zero | tiny)
    if np.any(zero):
        out[0, zero] = 1.0
    if np.any(tiny):
        zt = z[tiny]
        out[:, tiny] = _j_series(n_max, zt) * np.exp(-np.abs(zt.imag))
    if np.any(mid):
        out[:, mid] = _j_miller(n_max, z[mid])
    return out


def derivative_from_sequence(seq, z):
    """Derivatives ``f'_n`` for ``n = 0..len(seq)-2`` from a sequence ``f_0..f_N``.

    Uses ``f'_n = f_{n-1} - (n+1)/z f_n`` and ``f'_0 = -f_1``; valid for any
    of j, y, h and for their scaled variants (the scale factor depends on z
    only, so it passes straight through).
    """
    z = _complex_array(z)
    n_top = seq.shape[0] - 1
    d = np.empty((n_top,) + seq.shape[1:], dtype=complex)
    d[0] = -seq[1]
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(1, n_top):
            d[n] = seq[n - 1] - (n + 1) / z * seq[n]
    return d


def _check_order(n):
    if int(n) != n or n < 0:
        raise ValueError(f"order must be a non-negative integer, got {n!r}")
    return int(n)


def sph_bessel_j(n, z):
    """Spherical Bessel function of the first kind ``j_n(z)``, complex ``z``."""
    n = _check_order(n)
    z = _complex_array(z)
    return jn_scaled(n, z)[n] * np.exp(np.abs(z.imag))


def sph_hankel1(n, z):
    """Spherical Hankel function of the first kind ``h_n = j_n + i y_n``."""
    n = _check_order(n)
    z = _complex_array(z)
    return h1_scaled(n, z)[n] * np.exp(1j * z)


def sph_bessel_y(n, z):
    """Spherical Bessel function of the second kind ``y_n(z)``."""
    n = _check_order(n)
    z = _complex_array(z)
    _check_nonzero(z)
    b = np.abs(z.imag)
    j = jn_scaled(n, z)[n]
    upper = z.imag >= 0
    with np.errstate(over="ignore", invalid="ignore"):
        p = h1_scaled(n, z)[n] * np.exp(1j * z - b)
        m = h2_scaled(n, z)[n] * np.exp(-1j * z - b)
        y_scaled = np.where(upper, (p - j) / 1j, (j - m) / 1j)
        return y_scaled * np.exp(b)


def sph_bessel_deriv(kind, n, z):
    """Derivative with respect to the argument of ``j_n``, ``y_n`` or ``h_n``.

    ``kind`` is one of ``"j"``, ``"y"``, ``"h1"``.  At ``z = 0`` the first
    kind has the finite limit ``j'_1(0) = 1/3`` (zero for other orders); the
    singular kinds raise :class:`DomainError`.
    """
    n = _check_order(n)
    z = _complex_array(z)
    if kind == "j":
        zero = z == 0
        zs = np.where(zero, 1.0, z)
        seq = jn_scaled(n + 1, zs) * np.exp(np.abs(zs.imag))
        d = derivative_from_sequence(seq, zs)[n]
        return np.where(zero, 1.0 / 3.0 if n == 1 else 0.0, d)
    if kind == "y":
        _check_nonzero(z)
        seq = np.stack([sph_bessel_y(k, z) for k in range(n + 2)])
        return derivative_from_sequence(seq, z)[n]
    if kind == "h1":
        seq = h1_scaled(n + 1, z) * np.exp(1j * z)
        return derivative_from_sequence(seq, z)[n]
    raise ValueError(f"unknown Bessel kind {kind!r}")


def assoc_legendre(n, m, x, condon_shortley=False):
    """Associated Legendre function ``P_n^m(x)`` for ``|x| <= 1``.

    Built from ``P_m^m = (2m-1)!! (1-x^2)^{m/2}`` by the upward three-term
    recurrence in the degree.  ``condon_shortley=True`` multiplies by
    ``(-1)^m``.
    """
    n = _check_order(n)
    m = _check_order(m)
    if m > n:
        raise IndexError(f"order m={m} exceeds degree n={n}")
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1 + 1e-12):
        raise ValueError("assoc_legendre requires |x| <= 1")
    somx2 = np.sqrt(np.clip(1.0 - x * x, 0.0, None))
    pmm = np.ones_like(x)
    for i in range(1, m + 1):
        pmm = pmm * (2 * i - 1) * somx2
    if condon_shortley and m % 2 == 1:
        pmm = -pmm
    if n == m:
        return pmm
    pm1 = x * (2 * m + 1) * pmm
    if n == m + 1:
        return pm1
    p_prev, p = pmm, pm1
    for ell in range(m + 2, n + 1):
        p_prev, p = p, ((2 * ell - 1) * x * p - (ell + m - 1) * p_prev) / (ell - m)
    return p


def legendre_table(n_max, x):
    """Legendre polynomials ``P_0..P_{n_max}`` at ``x``; shape ``(n_max+1, *x.shape)``."""
    x = np.asarray(x, dtype=float)
    out = np.empty((n_max + 1,) + x.shape)
    out[0] = 1.0
    if n_max >= 1:
        out[1] = x
    for n in range(1, n_max):
        out[n + 1] = ((2 * n + 1) * x * out[n] - n * out[n - 1]) / (n + 1)
    return out


def mode_weight(n, m, theta0, condon_shortley=False):
    """Angular weight of mode ``(n, m)`` for a source at polar angle ``theta0``.

    ``L_m (2n+1)/2 (n-m)!/(n+m)! P_n^m(cos theta0)`` with ``L_0 = 1/(2 pi)``
    and ``L_m = 1/pi`` otherwise.
    """
    n = _check_order(n)
    m = _check_order(m)
    if m > n:
        raise IndexError(f"order m={m} exceeds degree n={n}")
    lm = 1.0 / (2.0 * math.pi) if m == 0 else 1.0 / math.pi
    ratio = math.factorial(n - m) / math.factorial(n + m)
    return lm * (2 * n + 1) / 2.0 * ratio * assoc_legendre(n, m, np.cos(theta0), condon_shortley)


def bessel_pack(n_max, z):
    """Scaled ``j_n``, ``j'_n``, ``h_n``, ``h'_n`` for ``n = 0..n_max`` at ``z``.

    Returns four arrays of shape ``(n_max+1, *z.shape)``: ``j`` and ``j'``
    carry the factor ``exp(-|Im z|)``, ``h`` and ``h'`` the factor
    ``exp(-i z)``.
    """
    z = _complex_array(z)
    js = jn_scaled(n_max + 1, z)
    hs = h1_scaled(n_max + 1, z)
    return js[:-1], derivative_from_sequence(js, z), hs[:-1], derivative_from_sequence(hs, z)
