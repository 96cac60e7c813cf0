"""Frequency-domain machinery shared by the transmitter and receiver solvers.

Conventions
-----------
Fourier transform ``C(w) = int c(t) exp(-i w t) dt`` so that ``d/dt -> i w``.
A first-order loss ``reaction`` and diffusivity ``D`` give the Helmholtz form
``del^2 C + k^2 C = -delta / D`` with ``k^2 = (-reaction - i w) / D``; the root
with ``Im k >= 0`` keeps ``h_n(k r)`` bounded as ``r -> inf``.

Frequency grid
--------------
Samples sit at half-bin offsets ``w_k = (k + 1/2) dw`` for ``k < K`` so the
DC pole of a free-space problem is never evaluated.  With ``N = 2K`` time
samples spaced ``dt`` the grid satisfies ``dw = 2 pi / (N dt)`` and the top
sample sits just below the Nyquist rate ``pi / dt``.  The inverse is then a
single length-``N`` FFT followed by a half-bin phase ramp; the reconstruction
is real by construction because only ``Re`` of the one-sided sum is kept.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from . import specfun
from .errors import BandwidthTooNarrow, NegativeConcentration, TruncationNotConverged

__all__ = [
    "wavenumber",
    "FrequencyGrid",
    "FrequencySweep",
    "TimeSeries",
    "assemble_series",
    "assemble_axis_series",
    "angle_between",
    "inverse_transform",
    "clamp_nonnegative",
    "DEFAULT_N_MAX",
    "DEFAULT_REL_TOL",
    "DEFAULT_OMEGA_COUNT",
    "NEG_TOL",
]

DEFAULT_N_MAX = 60
DEFAULT_REL_TOL = 1e-6
DEFAULT_OMEGA_COUNT = 2**14
DEFAULT_BAND_TOL = 1e-3
NEG_TOL = 1e-3
DEFAULT_DAMPING = 6.0


def wavenumber(omega, diffusion: float, reaction: float = 0.0):
    """Complex wavenumber ``sqrt((-reaction - i omega) / D)`` with ``Im k >= 0``.

    ``omega`` may be complex (a damped frequency ``w - i sigma``).

    ``omega = 0`` with ``reaction = 0`` returns ``k = 0``, the DC-singular
    case that the half-bin frequency grid avoids.
    """
    if not diffusion > 0:
        raise ValueError("diffusion must be positive")
    if reaction < 0:
        raise ValueError("reaction must be >= 0")
    omega = np.asarray(omega)
    k = np.sqrt((-reaction - 1j * omega) / diffusion + 0j)
    k = np.where(k.imag < 0, -k, k)
    return k if k.ndim else complex(k)


@dataclass(frozen=True)
class FrequencyGrid:
    """Half-bin-offset frequency grid tied to a time grid.

    Parameters
    ----------
    dt : float
        Time step of the reconstructed series, s.
    omega_count : int
        Number of positive-frequency samples ``K``; the time grid has ``2K``
        points and spans ``T = 2 K dt``.
    damping : float
        Dimensionless damping ``sigma T``.  Spectra are sampled at
        ``w - i sigma`` (the transform of ``c(t) exp(-sigma t)``) and the
        inverse multiplies by ``exp(sigma t)``, which suppresses the wrapped
        image of slowly decaying tails by ``exp(-sigma T)``.
    """

    dt: float = 0.5
    omega_count: int = DEFAULT_OMEGA_COUNT
    damping: float = DEFAULT_DAMPING

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.omega_count < 1:
            raise ValueError("omega_count must be >= 1")
        if self.damping < 0:
            raise ValueError("damping must be >= 0")

    @property
    def n_time(self) -> int:
        return 2 * self.omega_count

    @property
    def omega_step(self) -> float:
        return 2.0 * math.pi / (self.n_time * self.dt)

    @property
    def omega(self) -> np.ndarray:
        return (np.arange(self.omega_count) + 0.5) * self.omega_step

    @property
    def sigma(self) -> float:
        return self.damping / self.duration

    @property
    def omega_eval(self) -> np.ndarray:
        """Frequencies at which spectra are sampled, ``w_k - i sigma``."""
        return self.omega - 1j * self.sigma

    @property
    def omega_max(self) -> float:
        return math.pi / self.dt

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_time) * self.dt

    @property
    def duration(self) -> float:
        return self.n_time * self.dt


@dataclass
class FrequencySweep:
    """Complex samples ``C(w_k)`` on a :class:`FrequencyGrid`.

    ``initial_value`` is the jump ``c(0+)`` of the time signal, if any.  A
    jump gives the spectrum a ``c(0+) / (i w)`` tail that no finite band can
    hold; the inverse transform restores the missing part analytically.
    """

    grid: FrequencyGrid
    samples: np.ndarray
    initial_value: float = 0.0

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=complex)
        if self.samples.shape[-1] != self.grid.omega_count:
            raise ValueError("samples do not match the frequency grid")

    @property
    def omega_step(self) -> float:
        return self.grid.omega_step

    @property
    def omega_count(self) -> int:
        return self.grid.omega_count

    def __mul__(self, other: "FrequencySweep") -> "FrequencySweep":
        if other.grid != self.grid:
            raise ValueError("sweeps live on different grids")
        return FrequencySweep(self.grid, self.samples * other.samples)


@dataclass
class TimeSeries:
    """Real samples ``values[j]`` at ``t0 + j dt``."""

    dt: float
    values: np.ndarray
    t0: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if not np.all(np.isfinite(self.values)):
            raise ValueError("time series contains non-finite values")

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.values.shape[-1])

    def __len__(self):
        return self.values.shape[-1]

    def at(self, t):
        """Linear interpolation at time(s) ``t``."""
        return np.interp(t, self.times, self.values)

    def peak(self):
        """``(t_peak, value)`` of the maximum."""
        i = int(np.argmax(self.values))
        return self.t0 + i * self.dt, float(self.values[i])

    def truncated(self, t_end: float) -> "TimeSeries":
        n = int(math.floor((t_end - self.t0) / self.dt + 1e-9)) + 1
        return TimeSeries(self.dt, self.values[:n].copy(), self.t0, dict(self.meta))


def angle_between(theta, phi, theta0, phi0):
    """Cosine of the angle between directions ``(theta, phi)`` and ``(theta0, phi0)``."""
    c = np.cos(theta) * np.cos(theta0) + np.sin(theta) * np.sin(theta0) * np.cos(np.subtract(phi, phi0))
    return np.clip(c, -1.0, 1.0)


def _check_truncation(terms, rel_tol, last_mode=None):
    # normwise over every trailing sample: a mode that is large relative to a
    # tiny high-frequency sample but negligible on the signal scale is fine
    total = np.sum(terms, axis=0)
    scale = float(np.max(np.abs(total))) if total.size else 0.0
    if last_mode is None:
        tail = terms[-1]
    else:
        # per-sample last retained mode, broadcast over the trailing (frequency) axis
        idx = np.broadcast_to(np.asarray(last_mode), total.shape)
        tail = np.take_along_axis(terms, idx[None], axis=0)[0]
    last = float(np.max(np.abs(tail))) if total.size else 0.0
    if scale > 0 and last > rel_tol * scale:
        raise TruncationNotConverged(f"last retained mode contributes {last / scale:.3g} of the sum")
    return total


def assemble_series(radial, query, source_angles, n_max=None, rel_tol=DEFAULT_REL_TOL, condon_shortley=False):
    """General double series ``sum_n sum_m H_mn R_n cos(m(phi-phi0)) P_n^m(cos theta)``.

    Parameters
    ----------
    radial : array_like, shape ``(n_max+1, ...)``
        Radial values ``R_n(r, w)`` for each mode; trailing axes (for example
        frequency) broadcast through.
    query : tuple
        ``(r, theta, phi)``; only the angles are used here.
    source_angles : tuple
        ``(theta0, phi0)`` of the point source.
    rel_tol : float or None
        Raise :class:`TruncationNotConverged` when the degree-``n_max`` shell
        exceeds this fraction of the sum; ``None`` disables the check.
    """
    radial = np.asarray(radial)
    n_top = radial.shape[0] - 1 if n_max is None else int(n_max)
    _, theta, phi = query
    theta0, phi0 = source_angles
    x, x0 = math.cos(theta), math.cos(theta0)
    shells = []
    for n in range(n_top + 1):
        ang = 0.0
        for m in range(n + 1):
            h = specfun.mode_weight(n, m, theta0, condon_shortley)
            ang += h * math.cos(m * (phi - phi0)) * specfun.assoc_legendre(n, m, x, condon_shortley)
        shells.append(ang * radial[n])
    shells = np.asarray(shells)
    if rel_tol is None:
        return shells.sum(axis=0)
    return _check_truncation(shells, rel_tol)


def assemble_axis_series(radial, cos_gamma, rel_tol=DEFAULT_REL_TOL, last_mode=None):
    """Series for a source on the polar axis: ``sum_n (2n+1)/(4 pi) R_n P_n(cos gamma)``.

    This is the m = 0 reduction obtained by rotating the source onto the
    axis; ``cos_gamma`` is the cosine of the source-query angle.  ``last_mode``
    optionally gives, per frequency, the highest mode that was representable;
    the truncation check then looks at that mode instead of ``n_max``.
    """
    radial = np.asarray(radial)
    n_top = radial.shape[0] - 1
    cg = np.asarray(cos_gamma, dtype=float)
    leg = specfun.legendre_table(n_top, cg)
    coef = ((2 * np.arange(n_top + 1) + 1) / (4 * math.pi)).reshape((-1,) + (1,) * cg.ndim) * leg
    # cos_gamma axes line up with the leading trailing axes of radial
    shells = coef.reshape(coef.shape + (1,) * (radial.ndim - 1 - cg.ndim)) * radial
    if rel_tol is None:
        return shells.sum(axis=0)
    return _check_truncation(shells, rel_tol, last_mode)


def _half_power_tail(t, omega_max):
    """``int_W^inf w^(-3/2) exp(i w t) dw`` for ``t >= 0``."""
    t = np.asarray(t, dtype=float)
    out = np.full(t.shape, 2.0 / math.sqrt(omega_max), dtype=complex)
    pos = t > 0
    x = omega_max * t[pos]
    s_f, c_f = special.fresnel(np.sqrt(2.0 * x / math.pi))
    fres = math.sqrt(2.0 * math.pi) * ((0.5 - c_f) + 1j * (0.5 - s_f))
    out[pos] = np.sqrt(t[pos]) * (2.0 / np.sqrt(x) * np.exp(1j * x) + 2j * fres)
    return out


def inverse_transform(
    sweep: FrequencySweep,
    band_tol: float = DEFAULT_BAND_TOL,
    nonnegative: bool = False,
    neg_tol: float = NEG_TOL,
    check_band: bool = True,
    half_power_tail: bool = False,
    full_period: bool = False,
) -> TimeSeries:
    """Real time series from a one-sided half-bin frequency sweep.

    ``c_j = (dw / pi) Re[ sum_k C_k exp(i w_k t_j) ]`` evaluated with one FFT.
    The half-bin sum is anti-periodic over ``T = N dt``: the second half of
    the window carries the wrapped image of the onset, so only ``[0, T/2)``
    is returned unless ``full_period`` is set.

    A jump ``c(0+) = initial_value`` is removed before the FFT as the pair
    ``f0 exp(-lam t) <-> f0 / (lam + i w)`` and added back exactly, with
    ``lam = 30 / T`` so the subtracted term has died out by the end of the
    window.  The sample at ``t = 0`` is reported as ``c(0+) = initial_value``.

    Parameters
    ----------
    band_tol : float
        Largest allowed ``|C(w_max)| / max|C|`` after removing the jump;
        :class:`BandwidthTooNarrow` otherwise.
    nonnegative : bool
        Treat the output as a concentration: clamp ringing in
        ``[-neg_tol * peak, 0)`` to zero and raise
        :class:`NegativeConcentration` for anything more negative.
    half_power_tail : bool
        The signal starts like ``sqrt(t)`` (spectrum ``~ (i w)^(-3/2)``);
        estimate that coefficient from the top sample and add the part of
        the tail beyond the band analytically.
    """
    grid = sweep.grid
    f0 = float(sweep.initial_value)
    w = grid.omega_eval
    lam = 30.0 / grid.duration
    smooth = sweep.samples - f0 / (lam + 1j * w) if f0 else sweep.samples
    if check_band:
        mag = np.abs(smooth)
        peak = mag.max()
        if peak > 0 and mag[-1] > band_tol * peak:
            raise BandwidthTooNarrow(
                f"|C(w_max)| is {mag[-1] / peak:.3g} of the peak; increase bandwidth (smaller dt)"
            )
    n = grid.n_time
    buf = np.zeros(n, dtype=complex)
    buf[: grid.omega_count] = smooth
    j = np.arange(n)
    full = np.fft.ifft(buf) * n
    vals = grid.omega_step / math.pi * np.real(np.exp(1j * math.pi * j / n) * full)
    t = grid.times
    if half_power_tail:
        coef = smooth[-1] * (1j * w[-1]) ** 1.5
        vals = vals + np.real(coef * np.exp(-0.75j * math.pi) * _half_power_tail(t, grid.omega_max)) / math.pi
    if grid.sigma:
        vals = vals * np.exp(grid.sigma * t)
    if f0:
        vals = vals + f0 * np.exp(-lam * t)
        # the smooth remainder vanishes at 0+, so the first sample is f0 itself
        vals[0] = f0
    if not full_period:
        vals = vals[: n // 2]
    if nonnegative:
        vals = clamp_nonnegative(vals, grid.dt, neg_tol)
    return TimeSeries(grid.dt, vals)


def clamp_nonnegative(vals, dt: float, neg_tol: float = NEG_TOL) -> np.ndarray:
    """Zero out ringing in ``[-neg_tol * peak, 0)``; raise on anything lower."""
    vals = np.asarray(vals, dtype=float)
    floor = -neg_tol * max(vals.max(), 0.0)
    if vals.min() < floor:
        i = int(np.argmin(vals))
        raise NegativeConcentration(f"value {vals[i]:.3g} at t={i * dt:g} s is below -{neg_tol:g} x peak")
    return np.where(vals < 0, 0.0, vals)
