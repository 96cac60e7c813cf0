"""Porous transmitting spheroid: point-source Green's function and release rate.

The transmitter sits at the origin with radius ``g``.  Inside, ``D1 = D_eff``
and ``k1 = sqrt(-i w / D1)``; outside, ``D`` and ``k2 = sqrt(-i w / D)``.
For a unit source at ``r0 < g`` on the polar axis the mode-``n`` radial
function is

    inside    R(r) = (i k1 / D1) j(k1 r<) [ h(k1 r>) + alpha j(k1 r>) ]
    outside   R(r) = E h(k2 r)

where, with ``L2 = k2 h'(k2 g) / h(k2 g)`` and ``Lam = D L2 / kappa``,

    alpha = -(D1 k1 h'(k1 g) - Lam h(k1 g)) / (D1 k1 j'(k1 g) - Lam j(k1 g))
    E     = (i k1 / D1) j(k1 r0) v(k1 g) / (kappa h(k2 g)),   v = h + alpha j.

Averaging the source uniformly over the ball kills every mode but ``n = 0``.
The inside mass then has the closed form

    N_in(w) = 1/(i w) + (3 i g / (D1 k1)) v_1(k1 g) j_1(k1 g)

where ``v_1 = h_1 + alpha_0 j_1``; the ``1/(i w)`` part is the unit mass
present at ``t = 0+``.  The production path evaluates the same average by
Gauss-Legendre quadrature over the source radius; the closed form is kept as
an oracle.
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
    NEG_TOL,
    FrequencyGrid,
    FrequencySweep,
    TimeSeries,
    angle_between,
    clamp_nonnegative,
    assemble_axis_series,
    inverse_transform,
    wavenumber,
)
from .porosity import MediumSpec, SpheroidSpec, derive_porosity
from .receiver import SINGULAR_RATIO, _unscaled_family, normwise_residual

__all__ = [
    "TxModeCoefficients",
    "TransmitterSolver",
    "ReleaseProfile",
    "solve_tx_modes",
    "tx_total_concentration",
    "release_rate",
    "DEFAULT_R0_NODES",
]

DEFAULT_R0_NODES = 64


@dataclass
class TxModeCoefficients:
    """Mode coefficients in the textbook basis, shape ``(n_max+1, n_omega)``.

    Inside ``r < r0``: ``G j``; annulus ``r0 < r < g``: ``A j + B y``;
    outside: ``D h``.
    """

    G: np.ndarray
    A: np.ndarray
    B: np.ndarray
    D: np.ndarray
    omega: np.ndarray
    residuals: np.ndarray


@dataclass
class ReleaseProfile:
    g: TimeSeries
    n_inside: TimeSeries


class TransmitterSolver:
    """Frequency-domain Green's functions of a porous transmitting sphere.

    The interface coefficients (``alpha`` and the outside transfer) do not
    depend on the source radius, so one solver serves every ``r0``.
    """

    def __init__(self, tx: SpheroidSpec, medium: MediumSpec, omega, n_max: int = DEFAULT_N_MAX):
        self.tx = tx
        self.medium = medium
        self.n_max = int(n_max)
        self.omega = np.atleast_1d(np.asarray(omega))
        por = derive_porosity(tx, medium)
        self.porosity = por
        self.kappa = por.kappa
        self.d_in = por.d_eff
        self.d_out = medium.diffusion_coeff
        self.k1 = wavenumber(self.omega, self.d_in, tx.degradation_rate)
        self.k2 = wavenumber(self.omega, self.d_out)
        self._solve()

    def _solve(self):
        g, n = self.tx.radius, self.n_max
        k1, k2 = self.k1, self.k2
        z1, z2 = k1 * g, k2 * g
        j1, j1d, h1, h1d = specfun.bessel_pack(n, z1)
        _, _, h2, h2d = specfun.bessel_pack(n, z2)
        a = self.d_in * k1
        # alpha = -(h/j)(a h'/h - lam)/(a j'/j - lam); the ratio rho stays O(1)
        # while alpha itself grows like z^(-2n-1) and overflows for small z
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            lam = self.d_out * k2 * h2d / h2 / self.kappa
            num = a * h1d / h1 - lam
            den = a * j1d / j1 - lam
            size = np.abs(a * j1d / j1) + np.abs(lam)
        # modes whose Bessel values leave the floating-point range at low
        # frequency are negligible and dropped per frequency
        usable = (j1 != 0) & np.isfinite(h1) & np.isfinite(lam) & np.isfinite(num) & np.isfinite(den)
        usable = np.logical_and.accumulate(usable, axis=0)
        ratio = np.abs(den) / np.where(size > 0, size, 1.0)
        if not np.all(usable[0]) or np.any(ratio[usable] < SINGULAR_RATIO):
            raise SingularSystem("transmitter interface system is singular at some (n, w)")
        self.active = usable
        self.last_mode = usable.sum(axis=0) - 1
        with np.errstate(invalid="ignore"):
            self.rho = np.where(usable, num / den, 0.0)
        self._z1, self._z2 = z1, z2
        self._h2g = np.where(usable, h2, 1.0)
        self._h1g, self._j1g = np.where(usable, h1, 0.0), np.where(usable, j1, 1.0)
        # v(k1 g) = h + alpha j = h (1 - rho), scaled by exp(-i z1)
        self._vg = self._h1g * (1.0 - self.rho)

    @property
    def alpha_s(self):
        """Scaled image coefficient; the true one is ``alpha_s * exp(i z1 - |Im z1|)``."""
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            return -self.rho * self._h1g / self._j1g

    def radial(self, r: float, r0: float) -> np.ndarray:
        """Radial functions ``R_n(r; r0, w)``, shape ``(n_max+1, n_omega)``."""
        g, n = self.tx.radius, self.n_max
        k1, k2 = self.k1, self.k2
        if not 0 <= r0 < g:
            raise ValueError("transmitter source must lie inside the spheroid")
        pref = 1j * k1 / self.d_in
        z1 = self._z1
        if r <= g:
            if r == r0:
                raise ValueError("query coincides with the source radius")
            lo, hi = min(r, r0), max(r, r0)
            jlo = specfun.jn_scaled(n, k1 * lo)
            jhi = specfun.jn_scaled(n, k1 * hi)
            hhi = specfun.h1_scaled(n, k1 * hi)
            t1 = hhi * np.exp(1j * k1 * hi)
            with np.errstate(over="ignore", invalid="ignore"):
                t2 = -self.rho * self._h1g * (jhi / self._j1g) * np.exp(1j * z1 - z1.imag + k1.imag * hi)
                out = pref * jlo * np.exp(k1.imag * lo) * (t1 + t2)
        else:
            j0r = specfun.jn_scaled(n, k1 * r0)
            hr = specfun.h1_scaled(n, k2 * r)
            expo = k1.imag * r0 + 1j * z1 + 1j * k2 * (r - g)
            with np.errstate(over="ignore", invalid="ignore"):
                out = pref * j0r * self._vg * hr / (self.kappa * self._h2g) * np.exp(expo)
        return np.where(self.active[: out.shape[0]] & np.isfinite(out), out, 0.0)

    def point(self, query, source, rel_tol=DEFAULT_REL_TOL) -> np.ndarray:
        """``C(query; w)`` for a unit source at spherical point ``source``."""
        r, th, ph = query
        cg = angle_between(th, ph, source[1], source[2])
        return assemble_axis_series(self.radial(r, source[0]), cg, rel_tol=rel_tol, last_mode=self.last_mode)

    # -- source averaged over the ball -------------------------------------
    def _r0_nodes(self, nodes, split=None):
        g = self.tx.radius
        x, w = np.polynomial.legendre.leggauss(nodes)
        pieces = [(0.0, g)] if split is None or not 0 < split < g else [(0.0, split), (split, g)]
        out_r, out_w = [], []
        for a, b in pieces:
            r = a + 0.5 * (b - a) * (x + 1.0)
            out_r.append(r)
            out_w.append(0.5 * (b - a) * w * 3 * r**2 / g**3)
        return np.concatenate(out_r), np.concatenate(out_w)

    def total_concentration(self, r: float, nodes: int = DEFAULT_R0_NODES) -> np.ndarray:
        """Source-averaged concentration at radius ``r`` (spherically symmetric)."""
        radii, weights = self._r0_nodes(nodes, split=r)
        acc = np.zeros_like(self.omega, dtype=complex)
        for r0, w in zip(radii, weights):
            acc += w * self._radial0(r, r0)
        return acc / (4 * math.pi)

    def _radial0(self, r, r0):
        saved = self.n_max
        try:
            self.n_max = 0
            return self.radial(r, r0)[0]
        finally:
            self.n_max = saved

    def inside_mass_smooth(self, nodes: int = DEFAULT_R0_NODES) -> np.ndarray:
        """``N_in(w) - 1/(i w)`` by quadrature over the source radius."""
        g = self.tx.radius
        k1, z1 = self.k1, self._z1
        radii, weights = self._r0_nodes(nodes)
        v1 = self._v1_scaled()
        pref = 1j * k1 / self.d_in * g * g / k1
        acc = np.zeros_like(self.omega, dtype=complex)
        for r0, w in zip(radii, weights):
            j0 = specfun.jn_scaled(0, k1 * r0)[0]
            acc += w * j0 * np.exp(k1.imag * r0 + 1j * z1)
        return pref * v1 * acc

    def inside_mass_smooth_exact(self) -> np.ndarray:
        """Closed form of :meth:`inside_mass_smooth`."""
        g = self.tx.radius
        k1, z1 = self.k1, self._z1
        j1 = specfun.jn_scaled(1, z1)[1]
        return 3j * g / (self.d_in * k1) * self._v1_scaled() * j1 * np.exp(1j * z1 + z1.imag)

    def _v1_scaled(self):
        # h_1 + alpha_0 j_1 at k1 g, scaled by exp(-i z1)
        z1 = self._z1
        js = specfun.jn_scaled(1, z1)[1]
        hs = specfun.h1_scaled(1, z1)[1]
        return hs + self.alpha_s[0] * js

    def outside_mass(self) -> np.ndarray:
        """``N_out(w)`` from the outside field: ``-g^2 h_1(k2 g)/k2`` times the mode-0 transfer."""
        g = self.tx.radius
        k1, k2, z1, z2 = self.k1, self.k2, self._z1, self._z2
        # mode-0 transfer averaged over r0: (i k1/D1) <j0(k1 r0)> v0(k1 g) / (kappa h0(k2 g))
        j1 = specfun.jn_scaled(1, z1)[1]
        avg_j0 = 3 * j1 / z1  # exp(|Im z1|) scaling
        h2 = specfun.h1_scaled(1, z2)
        transfer = 1j * k1 / self.d_in * avg_j0 * self._vg[0] / (self.kappa * h2[0])
        return transfer * (-g * g * h2[1] / k2) * np.exp(z1.imag + 1j * z1)

    # -- textbook coefficients ------------------------------------------------
    def coefficients(self, r0: float) -> TxModeCoefficients:
        n, g = self.n_max, self.tx.radius
        k1, k2 = self.k1, self.k2
        z1 = self._z1
        pref = 1j * k1 / self.d_in
        with np.errstate(over="ignore", invalid="ignore"):
            alpha = self.alpha_s * np.exp(1j * z1 - np.abs(z1.imag))
            f0 = _unscaled_family(n, k1 * r0)
            G = pref * (f0["h"] + alpha * f0["j"])
            A = pref * f0["j"] * (1 + alpha)
            B = pref * f0["j"] * 1j
            vg = self._vg * np.exp(1j * z1)
            h2g = self._h2g * np.exp(1j * self._z2)
            Dn = pref * f0["j"] * vg / (self.kappa * h2g)
            M, b = self.system_matrix(r0)
            res = normwise_residual(M, np.stack([G, A, B, Dn], axis=-1), b)
        return TxModeCoefficients(G=G, A=A, B=B, D=Dn, omega=self.omega, residuals=res)

    def system_matrix(self, r0: float):
        """Rederived 4x4 system for ``x = (G, A, B, D)``.

        Rows: value jump at the surface, flux continuity at the surface,
        continuity at ``r0``, derivative jump ``r0^2 [R'] = -1/D1`` at ``r0``.
        """
        n, g = self.n_max, self.tx.radius
        k1, k2, kap = self.k1, self.k2, self.kappa
        f = _unscaled_family(n, k1 * g)
        o = _unscaled_family(n, k2 * g)
        s = _unscaled_family(n, k1 * r0)
        zero = np.zeros_like(f["j"])
        M = np.empty(f["j"].shape + (4, 4), dtype=complex)
        M[..., 0, :] = np.stack([zero, f["j"], f["y"], -kap * o["h"]], axis=-1)
        M[..., 1, :] = np.stack(
            [zero, self.d_in * k1 * f["jd"], self.d_in * k1 * f["yd"], -self.d_out * k2 * o["hd"]], axis=-1
        )
        M[..., 2, :] = np.stack([s["j"], -s["j"], -s["y"], zero], axis=-1)
        M[..., 3, :] = np.stack(
            [r0**2 * k1 * s["jd"], -(r0**2) * k1 * s["jd"], -(r0**2) * k1 * s["yd"], zero], axis=-1
        )
        b = np.zeros(f["j"].shape + (4,), dtype=complex)
        b[..., 3] = 1.0 / self.d_in
        return M, b


def solve_tx_modes(tx: SpheroidSpec, medium: MediumSpec, r0: float, omega, n_max: int = DEFAULT_N_MAX):
    """Textbook-basis coefficients of the transmitter problem for a source at ``r0``."""
    return TransmitterSolver(tx, medium, omega, n_max).coefficients(r0)


def tx_total_concentration(tx, medium, r: float, grid: FrequencyGrid, nodes=DEFAULT_R0_NODES, **inverse_kw):
    """Concentration at radius ``r`` after every cell releases at ``t = 0``.

    Normalised to one molecule in total; spherically symmetric, so only the
    radius of the query matters.
    """
    solver = TransmitterSolver(tx, medium, grid.omega_eval, n_max=0)
    spec = solver.total_concentration(r, nodes)
    inverse_kw.setdefault("nonnegative", True)
    return inverse_transform(FrequencySweep(grid, spec), **inverse_kw)


def release_rate(tx, medium, grid: FrequencyGrid, nodes=DEFAULT_R0_NODES, **inverse_kw) -> ReleaseProfile:
    """Expected release rate ``g(t) = -dN_in/dt`` of a spheroidal transmitter.

    ``N_in`` is rebuilt from its spectrum (with the unit initial mass
    restored analytically) and differentiated with centred differences.
    """
    solver = TransmitterSolver(tx, medium, grid.omega_eval, n_max=0)
    smooth = solver.inside_mass_smooth(nodes)
    sweep = FrequencySweep(grid, smooth + 1.0 / (1j * grid.omega_eval), initial_value=1.0)
    nonnegative = inverse_kw.pop("nonnegative", True)
    neg_tol = inverse_kw.pop("neg_tol", NEG_TOL)
    inverse_kw.setdefault("half_power_tail", True)
    # differentiate over the whole period so the last returned sample is an interior point
    full = inverse_transform(sweep, full_period=True, **inverse_kw)
    half = grid.n_time // 2
    vals = full.values[:half]
    g = np.maximum(-np.gradient(full.values, grid.dt)[:half], 0.0)
    if nonnegative:
        vals = clamp_nonnegative(vals, grid.dt, neg_tol)
    return ReleaseProfile(g=TimeSeries(grid.dt, g), n_inside=TimeSeries(grid.dt, vals))
