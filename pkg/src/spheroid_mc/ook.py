"""On-off keying with a genie-aided decision-feedback detector.

The receiver count in a slot is Poisson with mean
``b_0 y(t_s) + sum_j b_j I_j``.  Knowing the previous bits, the MAP rule
with equiprobable bits compares the count with

    xi = y / ln(1 + y / I)

where ``I`` is the ISI mean of the known pattern; it decides 1 when the
count exceeds ``xi``.  The bit error rate is the average of the
conditional Poisson tail over all ``2^(J+1)`` patterns.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .channel import IsiProfile
from .errors import MemoryTooLarge

__all__ = [
    "MAX_MEMORY",
    "OokConfig",
    "DetectionStats",
    "threshold",
    "decide",
    "pattern_isi",
    "ber_exact",
    "ber_monte_carlo",
]

MAX_MEMORY = 20


@dataclass(frozen=True)
class OokConfig:
    T_s: float = 600.0
    per_cell_release: int = 1
    J: int = 5
    t_sample: float | None = None

    def __post_init__(self):
        if not self.T_s > 0:
            raise ValueError("T_s must be positive")
        if self.per_cell_release < 1:
            raise ValueError("per_cell_release must be >= 1")
        if self.J < 0:
            raise ValueError("J must be >= 0")
        if self.t_sample is not None and not 0 < self.t_sample <= self.T_s:
            raise ValueError("t_sample must lie in (0, T_s]")


@dataclass
class DetectionStats:
    """``xi`` is the threshold at the average ISI; ``thresholds`` holds one per ISI pattern."""

    xi: float
    ber: float
    thresholds: np.ndarray | None = None


def threshold(y_ts, I_ts):
    """MAP threshold ``y / ln(1 + y/I)`` with the limits ``I -> 0`` (0) and ``y = 0`` (inf)."""
    y = np.asarray(y_ts, dtype=float)
    i = np.asarray(I_ts, dtype=float)
    if np.any(y < 0) or np.any(i < 0):
        raise ValueError("expected counts must be >= 0")
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        xi = y / np.log1p(y / i)
    xi = np.where(i == 0, 0.0, xi)
    xi = np.where(y == 0, np.inf, xi)
    return float(xi) if xi.ndim == 0 else xi


def decide(count, xi):
    """1 when ``count > xi`` (a tie decides 0)."""
    out = (np.asarray(count) > np.asarray(xi)).astype(int)
    return int(out) if out.ndim == 0 else out


def pattern_isi(isi: IsiProfile) -> np.ndarray:
    """ISI mean for each past-bit pattern; pattern ``p`` has ``b_j = bit j-1 of p``."""
    J = isi.J
    if J > MAX_MEMORY:
        raise MemoryTooLarge(f"J={J} exceeds the enumeration bound {MAX_MEMORY}")
    if J == 0:
        return np.zeros(1)
    p = np.arange(2**J, dtype=np.int64)
    bits = (p[:, None] >> np.arange(J)) & 1
    return bits @ np.asarray(isi.I[:J], dtype=float)


def _tails(y_ts, isi_means, xi):
    """``Pr(Y <= xi | y + I)`` and ``Pr(Y > xi | I)`` per pattern."""
    xi = np.asarray(xi, dtype=float)
    finite = np.isfinite(xi)
    k = np.where(finite, np.floor(np.where(finite, xi, 0.0)), 0.0)
    lam1 = y_ts + isi_means
    miss = np.where(finite, special.pdtr(k, lam1), 1.0)
    with np.errstate(invalid="ignore"):
        false_alarm = np.where(finite & (isi_means > 0), special.pdtrc(k, np.where(isi_means > 0, isi_means, 1.0)), 0.0)
    return miss, false_alarm


def ber_exact(config: OokConfig, y_ts: float, isi: IsiProfile, per_pattern: bool = True) -> DetectionStats:
    """Exact BER by enumerating every bit pattern.

    Parameters
    ----------
    y_ts : float
        Expected count at the sampling time for a ``1`` in the current slot.
    per_pattern : bool
        Recompute ``xi`` from each pattern's ISI mean (the MAP rule given
        the known past bits).  ``False`` uses one ``xi`` built from the
        average ISI ``sum_j I_j / 2`` for every pattern.
    """
    if y_ts < 0:
        raise ValueError("y_ts must be >= 0")
    if isi.J > MAX_MEMORY:
        raise MemoryTooLarge(f"J={isi.J} exceeds the enumeration bound {MAX_MEMORY}")
    if len(isi.I) < min(config.J, isi.J):
        raise ValueError("ISI profile is shorter than J")
    means = pattern_isi(isi)
    xi_avg = threshold(y_ts, 0.5 * float(np.sum(isi.I[: isi.J])))
    if y_ts == 0:
        return DetectionStats(xi=math.inf, ber=0.5, thresholds=np.full(means.shape, np.inf))
    xi = threshold(y_ts, means) if per_pattern else np.full(means.shape, xi_avg)
    miss, fa = _tails(y_ts, means, xi)
    ber = 0.5 * float(np.mean(miss + fa))
    return DetectionStats(xi=float(xi_avg), ber=min(ber, 0.5), thresholds=np.atleast_1d(xi))


def ber_monte_carlo(y_ts: float, isi: IsiProfile, slots: int, seed: int = 0, per_pattern: bool = True, chunk=1_000_000):
    """Simulated BER over ``slots`` independent slots.

    Returns ``(ber, standard_error)``.
    """
    gen = np.random.default_rng(seed)
    J = isi.J
    I = np.asarray(isi.I[:J], dtype=float)
    xi_avg = threshold(y_ts, 0.5 * float(np.sum(I)))
    errors = 0
    done = 0
    while done < slots:
        n = min(chunk, slots - done)
        b0 = gen.integers(0, 2, n)
        past = gen.integers(0, 2, (n, J)) if J else np.zeros((n, 0), dtype=int)
        isi_mean = past @ I if J else np.zeros(n)
        counts = gen.poisson(b0 * y_ts + isi_mean)
        xi = threshold(y_ts, isi_mean) if per_pattern else xi_avg
        errors += int(np.count_nonzero(decide(counts, xi) != b0))
        done += n
    p = errors / slots
    return p, math.sqrt(max(p * (1 - p), 1e-300) / slots)
