"""End-to-end spheroid-to-spheroid channel.

The transmitter is far enough from the receiver to act as a point source at
its centre with release rate ``g(t)``.  With ``P(t)`` the probability that a
molecule released at the transmitter centre at ``t = 0`` is inside the
receiver at ``t``,

    p_obs(t) = (g * P)(t)            probability per released molecule
    y(t)     = N_total p_obs(t)      expected count, N_total = N_c^tx N

and the residual count from a release ``j`` slots earlier is
``I_j = y(j T_s + t_s)`` with ``t_s = argmax p_obs``.

Convolutions use the trapezoid rule on the shared grid (``dt`` times a
discrete convolution whose first and last terms carry weight 1/2).  A point
transmitter is represented by ``tx=None``; its release is a unit impulse.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import signal

from .errors import GridTooShort, SeparationWarning
from .gfc import DEFAULT_N_MAX, FrequencyGrid, FrequencySweep, TimeSeries, inverse_transform
from .porosity import MediumSpec, SpheroidSpec
from .receiver import ReceiverSolver
from .transmitter import release_rate

__all__ = [
    "ChannelResponse",
    "IsiProfile",
    "trapezoid_convolve",
    "unit_impulse",
    "receiver_capture",
    "end_to_end_concentration",
    "observation_probability",
    "isi_means",
    "expected_count",
]


@dataclass
class ChannelResponse:
    g: TimeSeries
    p_obs: TimeSeries
    y: TimeSeries
    t_sample: float
    n_total: float
    capture: TimeSeries | None = None
    meta: dict = field(default_factory=dict)

    @property
    def y_sample(self) -> float:
        return float(self.y.at(self.t_sample))


@dataclass
class IsiProfile:
    I: np.ndarray
    J: int
    T_s: float

    @property
    def total(self) -> float:
        return float(np.sum(self.I))


def trapezoid_convolve(a: TimeSeries, b: TimeSeries) -> TimeSeries:
    """``int_0^t a(s) b(t - s) ds`` on a shared grid by the trapezoid rule."""
    if not math.isclose(a.dt, b.dt):
        raise ValueError("series must share the time step")
    n = min(len(a), len(b))
    x, y = a.values[:n], b.values[:n]
    full = signal.fftconvolve(x, y)[:n]
    # end corrections: the s = 0 and s = t terms carry weight 1/2
    full = full - 0.5 * x[0] * y - 0.5 * x * y[0]
    full[0] = 0.0
    return TimeSeries(a.dt, a.dt * full)


def unit_impulse(dt: float, n: int) -> TimeSeries:
    """Discrete delta for :func:`trapezoid_convolve`: height ``2/dt`` at ``t = 0``."""
    v = np.zeros(n)
    v[0] = 2.0 / dt
    return TimeSeries(dt, v)


def _separation_check(tx, rx, separation):
    tx_radius = tx.radius if tx is not None else 0.0
    if separation < 2 * (tx_radius + rx.radius):
        warnings.warn(
            f"separation {separation:g} m is below twice the summed radii; the far-field point-source "
            "approximation is poor",
            SeparationWarning,
            stacklevel=3,
        )


def _release(tx, medium, grid, r0_nodes):
    if tx is None:
        return unit_impulse(grid.dt, grid.n_time // 2)
    return release_rate(tx, medium, grid, nodes=r0_nodes).g


def receiver_capture(rx, medium, separation, grid: FrequencyGrid, n_max=DEFAULT_N_MAX, quad=(48, 48)):
    """``P(t)``: probability that a molecule released at distance ``separation`` is inside the receiver."""
    solver = ReceiverSolver(rx, medium, separation, grid.omega_eval, n_max)
    if quad is None:
        spec = solver.capture_exact()
    else:
        spec = solver.capture_quadrature(*quad)
    return inverse_transform(FrequencySweep(grid, spec), nonnegative=True)


def end_to_end_concentration(
    tx: SpheroidSpec | None,
    rx: SpheroidSpec,
    medium: MediumSpec,
    separation: float,
    query,
    grid: FrequencyGrid,
    source_angles=(0.0, 0.0),
    n_max: int = DEFAULT_N_MAX,
    r0_nodes: int = 64,
) -> TimeSeries:
    """Receiver concentration at ``query`` driven by the transmitter release.

    ``query`` is ``(r, theta, phi)`` relative to the receiver centre and the
    transmitter centre sits at ``(separation, *source_angles)``.
    """
    _separation_check(tx, rx, separation)
    solver = ReceiverSolver(rx, medium, separation, grid.omega_eval, n_max)
    c_rx = inverse_transform(FrequencySweep(grid, solver.point(query, source_angles)), nonnegative=True)
    g = _release(tx, medium, grid, r0_nodes)
    out = trapezoid_convolve(g, c_rx)
    out.values = np.maximum(out.values, 0.0)
    return out


def observation_probability(
    tx: SpheroidSpec | None,
    rx: SpheroidSpec,
    medium: MediumSpec,
    separation: float,
    grid: FrequencyGrid,
    n_total: float | None = None,
    per_cell: float = 1.0,
    n_max: int = DEFAULT_N_MAX,
    quad=(48, 48),
    r0_nodes: int = 64,
) -> ChannelResponse:
    """Observation probability ``p_obs`` and expected count ``y``.

    Parameters
    ----------
    n_total : float, optional
        Molecules released per transmitted bit; defaults to
        ``tx.cell_count * per_cell`` (required when ``tx`` is ``None``).
    quad : tuple or None
        ``(n_r, n_theta)`` Gauss-Legendre nodes for the receiver volume
        integral; ``None`` uses the closed-form monopole integral.
    """
    _separation_check(tx, rx, separation)
    if n_total is None:
        if tx is None:
            raise ValueError("n_total is required for a point transmitter")
        n_total = tx.cell_count * per_cell
    cap = receiver_capture(rx, medium, separation, grid, n_max, quad)
    g = _release(tx, medium, grid, r0_nodes)
    p = trapezoid_convolve(g, cap)
    p.values = np.clip(p.values, 0.0, 1.0)
    t_s, _ = p.peak()
    y = TimeSeries(p.dt, n_total * p.values)
    return ChannelResponse(g=g, p_obs=p, y=y, t_sample=t_s, n_total=float(n_total), capture=cap)


def isi_means(response: ChannelResponse, J: int, T_s: float) -> IsiProfile:
    """Residual counts ``I_j = y(j T_s + t_s)`` for ``j = 1..J``."""
    if J < 0:
        raise ValueError("J must be >= 0")
    if not T_s > 0:
        raise ValueError("T_s must be positive")
    if J == 0:
        return IsiProfile(I=np.zeros(0), J=0, T_s=T_s)
    y = response.y
    t_last = J * T_s + response.t_sample
    if t_last > y.times[-1] + 1e-9 * y.dt or (J + 1) * T_s > y.times[-1] + y.dt:
        raise GridTooShort(f"time grid ends at {y.times[-1]:g} s but ISI needs {max(t_last, (J + 1) * T_s):g} s")
    t = np.arange(1, J + 1) * T_s + response.t_sample
    return IsiProfile(I=np.maximum(y.at(t), 0.0), J=J, T_s=T_s)


def expected_count(bits, y_ts: float, isi: IsiProfile) -> float:
    """``b_0 y(t_s) + sum_j b_j I_j`` for a bit pattern ``(b_0, ..., b_J)``."""
    bits = np.asarray(bits, dtype=float)
    return float(bits[0] * y_ts + np.dot(bits[1:], isi.I[: len(bits) - 1]))
