"""Porous receiving spheroid driven by an external point source.

The receiver sits at the origin with radius ``g`` (gamma).  Outside it the
medium has diffusivity ``D`` and wavenumber ``k2 = sqrt(-i w / D)``; inside,
the homogenised medium has ``D1 = D_eff`` and a first-order loss ``k_f``, so
``k1 = sqrt((-k_f - i w) / D1)``.  Wavenumbers are bound by the physics of
each region (the outside one always uses the free ``D``).

For a unit source at radius ``r0 > g`` on the polar axis the mode-``n``
radial function is

    outside   R(r) = (i k2 / D) [ j(k2 r<) h(k2 r>) + beta h(k2 r) h(k2 r0) ]
    inside    R(r) = kappa R(g+) j(k1 r) / j(k1 g)

with the reflection coefficient

    beta = (D k2 j'(k2 g) - kappa D1 L1 j(k2 g)) / (kappa D1 L1 h(k2 g) - D k2 h'(k2 g)),
    L1   = k1 j'(k1 g) / j(k1 g).

These satisfy ``R(g-) = kappa R(g+)``, ``D1 R'(g-) = D R'(g+)``, continuity
at ``r0`` and the source jump ``r0^2 [R'] = -1 / D``.  Everything is
evaluated with exponentially scaled Bessel functions and the exponents are
combined before they are applied, so high frequencies neither overflow nor
cancel.  The textbook coefficients ``G, A, B, D`` (inside ``G j``; annulus
``B j + A y``; beyond ``r0`` ``D h``) are recovered for the residual check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import specfun
from .errors import SingularSystem
from .gfc import (
    DEFAULT_N_MAX,
    DEFAULT_REL_TOL,
    FrequencyGrid,
    FrequencySweep,
    angle_between,
    assemble_axis_series,
    inverse_transform,
    wavenumber,
)
from .porosity import MediumSpec, SpheroidSpec, derive_porosity

__all__ = ["RxModeCoefficients", "ReceiverSolver", "solve_rx_modes", "rx_point_gfc", "SINGULAR_RATIO"]

SINGULAR_RATIO = 1e-13


@dataclass
class RxModeCoefficients:
    """Mode coefficients in the textbook basis, shape ``(n_max+1, n_omega)``."""

    G: np.ndarray
    A: np.ndarray
    B: np.ndarray
    D: np.ndarray
    omega: np.ndarray
    residuals: np.ndarray


class ReceiverSolver:
    """Frequency-domain Green's function of a porous receiving sphere.

    Parameters
    ----------
    rx : SpheroidSpec
        Receiver geometry; its ``degradation_rate`` is the inside loss.
    medium : MediumSpec
        Surrounding fluid.
    r0 : float
        Distance of the point source from the receiver centre, ``> radius``.
    omega : array_like
        Angular frequencies, rad/s.
    n_max : int
        Series truncation.
    """

    def __init__(self, rx: SpheroidSpec, medium: MediumSpec, r0: float, omega, n_max: int = DEFAULT_N_MAX):
        if not r0 > rx.radius:
            raise ValueError("receiver source must lie outside the spheroid")
        self.rx = rx
        self.medium = medium
        self.r0 = float(r0)
        self.n_max = int(n_max)
        self.omega = np.atleast_1d(np.asarray(omega))
        por = derive_porosity(rx, medium)
        self.porosity = por
        self.kappa = por.kappa
        self.d_out = medium.diffusion_coeff
        self.d_in = por.d_eff
        self.k2 = wavenumber(self.omega, self.d_out)
        self.k1 = wavenumber(self.omega, self.d_in, rx.degradation_rate)
        self._solve()

    # -- solution in the stable basis ------------------------------------
    def _solve(self):
        g, n = self.rx.radius, self.n_max
        k1, k2 = self.k1, self.k2
        z1, z2 = k1 * g, k2 * g
        j1, j1d, _, _ = specfun.bessel_pack(n, z1)
        j2, j2d, h2, h2d = specfun.bessel_pack(n, z2)
        hr0 = specfun.h1_scaled(n, k2 * self.r0)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            L1 = k1 * j1d / j1
            a = self.kappa * self.d_in * L1
            # beta = (j/h) (D k2 j'/j - a)/(a - D k2 h'/h); the ratio sig stays O(1)
            # while beta itself shrinks like z^(2n+1) and underflows
            num = self.d_out * k2 * j2d / j2 - a
            den = a - self.d_out * k2 * h2d / h2
            size = np.abs(a) + np.abs(self.d_out * k2 * h2d / h2)
        # at low frequency and high order j underflows and h overflows; such
        # modes are far below the series' tail and are dropped per frequency
        usable = (j1 != 0) & (j2 != 0) & np.isfinite(L1) & np.isfinite(num) & np.isfinite(den) & np.isfinite(hr0)
        usable = np.logical_and.accumulate(usable, axis=0)
        if not np.all(usable[0]):
            raise SingularSystem("receiver interface system is singular at some (n, w)")
        ratio = np.abs(den) / np.where(size > 0, size, 1.0)
        if np.any(ratio[usable] < SINGULAR_RATIO):
            raise SingularSystem("receiver interface system is singular at some (n, w)")
        self.active = usable
        self.last_mode = usable.sum(axis=0) - 1
        with np.errstate(invalid="ignore"):
            self.sig = np.where(usable, num / den, 0.0)
        self._z1, self._z2 = z1, z2
        self._j1g = np.where(usable, j1, 1.0)
        self._j2g, self._h2g = np.where(usable, j2, 0.0), np.where(usable, h2, 1.0)
        self._hr0 = np.where(usable, hr0, 0.0)
        # R(g+) for every mode: j + beta h = j (1 + sig); exponent Im(z2) + i k2 r0 applied
        pref = 1j * k2 / self.d_out
        self.r_out_gamma = pref * self._hr0 * self._j2g * (1.0 + self.sig) * np.exp(z2.imag + 1j * k2 * self.r0)

    @property
    def beta_s(self):
        """Scaled reflection coefficient; the true one is ``beta_s * exp(Im z2 - i z2)``."""
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            return self.sig * self._j2g / self._h2g

    def _beta(self):
        z2 = self._z2
        return self.beta_s * np.exp(z2.imag - 1j * z2)

    def radial(self, r: float) -> np.ndarray:
        """Radial functions ``R_n(r, w)``, shape ``(n_max+1, n_omega)``."""
        r = float(r)
        g, n = self.rx.radius, self.n_max
        k1, k2 = self.k1, self.k2
        if r < 0:
            raise ValueError("radius must be >= 0")
        if r <= g:
            jr = specfun.jn_scaled(n, k1 * r)
            ratio = jr / self._j1g * np.exp(k1.imag * (r - g))
            return np.where(self.active, self.kappa * self.r_out_gamma * ratio, 0.0)
        if r == self.r0:
            raise ValueError("query coincides with the source radius")
        pref = 1j * k2 / self.d_out
        lo, hi = min(r, self.r0), max(r, self.r0)
        jlo = specfun.jn_scaled(n, k2 * lo)
        hhi = specfun.h1_scaled(n, k2 * hi)
        hr = specfun.h1_scaled(n, k2 * r)
        with np.errstate(over="ignore", invalid="ignore"):
            direct = jlo * hhi * np.exp(np.abs((k2 * lo).imag) + 1j * k2 * hi)
            z2 = self._z2
            refl = self.sig * self._j2g * (hr / self._h2g) * self._hr0 * np.exp(z2.imag - 1j * z2 + 1j * k2 * (r + self.r0))
            out = pref * (direct + refl)
        return np.where(self.active & np.isfinite(out), out, 0.0)

    def point(self, query, source_angles=(0.0, 0.0), rel_tol=DEFAULT_REL_TOL) -> np.ndarray:
        """``C(r, theta, phi; w)`` for a source at ``(r0, theta0, phi0)``."""
        r, th, ph = query
        cg = angle_between(th, ph, *source_angles)
        return assemble_axis_series(self.radial(r), cg, rel_tol=rel_tol, last_mode=self.last_mode)

    # -- volume integral ---------------------------------------------------
    def capture_exact(self) -> np.ndarray:
        """``P(w) = int_ball C dV``; only ``n = 0`` survives the angular integral."""
        g = self.rx.radius
        z1 = self._z1
        js = specfun.jn_scaled(1, z1)
        return self.kappa * self.r_out_gamma[0] * g * g * (js[1] / js[0]) / self.k1

    def capture_quadrature(self, n_r: int = 48, n_theta: int = 48, rel_tol=None) -> np.ndarray:
        """Tensor Gauss-Legendre integral of the inside field over the ball."""
        g = self.rx.radius
        xr, wr = np.polynomial.legendre.leggauss(n_r)
        xt, wt = np.polynomial.legendre.leggauss(n_theta)
        radii = 0.5 * g * (xr + 1.0)
        wrad = 0.5 * g * wr * radii**2
        leg = specfun.legendre_table(self.n_max, xt)
        # int dphi int sin(th) dth  (2n+1)/(4 pi) P_n(cos th)
        ang = 2 * math.pi * (2 * np.arange(self.n_max + 1) + 1) / (4 * math.pi) * (leg @ wt)
        keep = np.flatnonzero(np.abs(ang) > 1e-14 * np.abs(ang[0]))
        total = np.zeros_like(self.omega, dtype=complex)
        for ri, wi in zip(radii, wrad):
            rad = self.radial(ri)
            total += wi * np.tensordot(ang[keep], rad[keep], axes=1)
        return total

    # -- textbook coefficients and residuals ---------------------------------
    def coefficients(self) -> RxModeCoefficients:
        """``G, A, B, D`` of the textbook basis plus constraint residuals.

        Uses unscaled Bessel values, so it is meant for frequencies where
        ``exp(|Im k| r)`` stays within floating-point range.
        """
        n, g, r0 = self.n_max, self.rx.radius, self.r0
        k1, k2 = self.k1, self.k2
        with np.errstate(over="ignore", invalid="ignore"):
            beta = self._beta()
            jg1 = self._j1g * np.exp(np.abs(self._z1.imag))
            hr0 = self._hr0 * np.exp(1j * k2 * r0)
            pref = 1j * k2 / self.d_out
            a = pref * hr0
            G = self.kappa * self.r_out_gamma / jg1
            B = a * (1 + beta)
            A = a * 1j * beta
            jr0 = specfun.jn_scaled(n, k2 * r0) * np.exp(np.abs((k2 * r0).imag))
            Dn = pref * (jr0 + beta * hr0)
            res = self._residuals(G, A, B, Dn)
        return RxModeCoefficients(G=G, A=A, B=B, D=Dn, omega=self.omega, residuals=res)

    def system_matrix(self):
        """Rederived 4x4 system ``M x = b`` for ``x = (G, A, B, D)`` per mode.

        Rows: value jump at the surface, flux continuity at the surface,
        continuity at ``r0``, derivative jump at ``r0``.
        Returns ``M`` with shape ``(n_max+1, n_omega, 4, 4)`` and ``b``.
        """
        n, g, r0 = self.n_max, self.rx.radius, self.r0
        k1, k2, kap = self.k1, self.k2, self.kappa
        f = _unscaled_family(n, k1 * g)
        o = _unscaled_family(n, k2 * g)
        s = _unscaled_family(n, k2 * r0)
        zero = np.zeros_like(f["j"])
        M = np.empty(f["j"].shape + (4, 4), dtype=complex)
        M[..., 0, :] = np.stack([f["j"], -kap * o["y"], -kap * o["j"], zero], axis=-1)
        M[..., 1, :] = np.stack(
            [self.d_in * k1 * f["jd"], -self.d_out * k2 * o["yd"], -self.d_out * k2 * o["jd"], zero], axis=-1
        )
        M[..., 2, :] = np.stack([zero, s["y"], s["j"], -s["h"]], axis=-1)
        M[..., 3, :] = np.stack(
            [zero, r0**2 * k2 * s["yd"], r0**2 * k2 * s["jd"], -(r0**2) * k2 * s["hd"]], axis=-1
        )
        b = np.zeros(f["j"].shape + (4,), dtype=complex)
        b[..., 3] = 1.0 / self.d_out
        return M, b

    def _residuals(self, G, A, B, Dn):
        M, b = self.system_matrix()
        x = np.stack([G, A, B, Dn], axis=-1)
        return normwise_residual(M, x, b)


def _unscaled_family(n, z):
    with np.errstate(over="ignore", invalid="ignore"):
        js, jd, hs, hd = specfun.bessel_pack(n, z)
        ej = np.exp(np.abs(z.imag))
        eh = np.exp(1j * z)
        j, jdv, h, hdv = js * ej, jd * ej, hs * eh, hd * eh
    return {"j": j, "jd": jdv, "h": h, "hd": hdv, "y": (h - j) / 1j, "yd": (hdv - jdv) / 1j}


def normwise_residual(M, x, b):
    """Per-row ``|M x - b| / (sum |M_ij x_j| + |b_i|)``."""
    terms = M * x[..., None, :]
    r = terms.sum(axis=-1) - b
    scale = np.abs(terms).sum(axis=-1) + np.abs(b)
    return np.abs(r) / np.where(scale > 0, scale, 1.0)


def solve_rx_modes(rx: SpheroidSpec, medium: MediumSpec, r0: float, omega, n_max: int = DEFAULT_N_MAX):
    """Textbook-basis coefficients of the receiver problem."""
    return ReceiverSolver(rx, medium, r0, omega, n_max).coefficients()


def rx_point_gfc(rx, medium, source, query, grid: FrequencyGrid, n_max=DEFAULT_N_MAX, **inverse_kw):
    """Time-domain concentration at ``query`` after a unit release at ``source``.

    Both points are spherical coordinates ``(r, theta, phi)`` relative to
    the receiver centre.
    """
    solver = ReceiverSolver(rx, medium, source[0], grid.omega_eval, n_max)
    spec = solver.point(query, (source[1], source[2]))
    inverse_kw.setdefault("nonnegative", True)
    return inverse_transform(FrequencySweep(grid, spec), **inverse_kw)
