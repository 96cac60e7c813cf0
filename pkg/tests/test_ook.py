import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from spheroid_mc.channel import IsiProfile
from spheroid_mc.errors import MemoryTooLarge
from spheroid_mc.ook import (
    OokConfig,
    ber_exact,
    ber_monte_carlo,
    decide,
    pattern_isi,
    threshold,
)


def _isi(values, T_s=600.0):
    values = np.asarray(values, dtype=float)
    return IsiProfile(I=values, J=len(values), T_s=T_s)


def test_threshold_example():
    # y/ln(1 + y/I) at (20, 5) is 20/ln 5
    assert threshold(20.0, 5.0) == pytest.approx(12.426699, rel=1e-6)
    xi = threshold(20.0, 5.0)
    # the two Poisson likelihoods are equal at xi
    assert xi * math.log(25.0) - 25.0 == pytest.approx(xi * math.log(5.0) - 5.0, abs=1e-12)


def test_threshold_limits():
    assert threshold(3.0, 0.0) == 0.0
    assert threshold(0.0, 2.0) == math.inf
    assert threshold(1e-3, 1e-12) < 1e-3
    with pytest.raises(ValueError):
        threshold(-1.0, 1.0)


@settings(max_examples=100, deadline=None)
@given(y=st.floats(1e-3, 1e4), i=st.floats(1e-3, 1e4))
def test_threshold_between_means_and_equalizes_likelihoods(y, i):
    xi = threshold(y, i)
    assert i < xi < i + y
    ll1 = xi * math.log(y + i) - (y + i)
    ll0 = xi * math.log(i) - i
    assert abs(ll1 - ll0) < 1e-9 * max(1.0, abs(ll1))


def test_decide():
    xi = threshold(20.0, 5.0)
    assert decide(13, xi) == 1
    assert decide(12, xi) == 0
    assert decide(0, 0.5) == 0
    assert decide(3, 3.0) == 0
    np.testing.assert_array_equal(decide(np.array([0, 12, 13]), xi), [0, 0, 1])


def test_config_validation():
    with pytest.raises(ValueError):
        OokConfig(T_s=0)
    with pytest.raises(ValueError):
        OokConfig(per_cell_release=0)
    with pytest.raises(ValueError):
        OokConfig(J=-1)
    with pytest.raises(ValueError):
        OokConfig(T_s=100, t_sample=200)


def test_uninformative_channel():
    out = ber_exact(OokConfig(J=2), 0.0, _isi([2.0, 1.0]))
    assert out.ber == 0.5


def test_closed_case_without_isi():
    out = ber_exact(OokConfig(J=0), 10.0, _isi([]))
    assert out.ber == pytest.approx(math.exp(-10) / 2, rel=1e-12)
    assert out.xi == 0.0


def test_pattern_enumeration():
    means = pattern_isi(_isi([2.0, 1.0]))
    np.testing.assert_allclose(means, [0.0, 2.0, 1.0, 3.0])
    with pytest.raises(MemoryTooLarge):
        pattern_isi(_isi(np.ones(21)))
    with pytest.raises(MemoryTooLarge):
        ber_exact(OokConfig(J=21), 5.0, _isi(np.ones(21)))


def test_exact_against_direct_summation():
    # independent reference: explicit pattern loop and Poisson pmf sums
    y, I = 8.0, [2.0, 1.0]
    total = 0.0
    for b1 in (0, 1):
        for b2 in (0, 1):
            isi = b1 * I[0] + b2 * I[1]
            xi = y / math.log1p(y / isi) if isi > 0 else 0.0
            k = math.floor(xi)
            miss = stats.poisson.cdf(k, y + isi)
            fa = stats.poisson.sf(k, isi) if isi > 0 else 0.0
            total += 0.5 * (miss + fa)
    ref = total / 4
    assert ber_exact(OokConfig(J=2), y, _isi(I)).ber == pytest.approx(ref, rel=1e-12)


def test_exact_against_monte_carlo():
    ex = ber_exact(OokConfig(J=2), 8.0, _isi([2.0, 1.0])).ber
    p, se = ber_monte_carlo(8.0, _isi([2.0, 1.0]), slots=2_000_000, seed=3)
    assert abs(p - ex) < 3 * se


def test_single_threshold_variant():
    isi = _isi([2.0, 1.0])
    per = ber_exact(OokConfig(J=2), 8.0, isi)
    single = ber_exact(OokConfig(J=2), 8.0, isi, per_pattern=False)
    assert np.all(single.thresholds == pytest.approx(threshold(8.0, 1.5)))
    # the per-pattern rule is MAP for every genie pattern, so it cannot be worse
    assert per.ber <= single.ber + 1e-15
    p, se = ber_monte_carlo(8.0, isi, slots=1_000_000, seed=5, per_pattern=False)
    assert abs(p - single.ber) < 3 * se


def test_monte_carlo_is_reproducible():
    isi = _isi([1.0])
    assert ber_monte_carlo(5.0, isi, 10_000, seed=9) == ber_monte_carlo(5.0, isi, 10_000, seed=9)


@settings(max_examples=40, deadline=None)
@given(
    y=st.floats(0.5, 60.0),
    scale=st.floats(1.01, 3.0),
    isi=st.lists(st.floats(0.0, 20.0), min_size=0, max_size=4),
)
def test_ber_non_increasing_in_signal(y, scale, isi):
    prof = _isi(isi)
    cfg = OokConfig(J=len(isi))
    a = ber_exact(cfg, y, prof).ber
    b = ber_exact(cfg, y * scale, prof).ber
    assert 0 <= b <= 0.5 + 1e-12
    assert b <= a + 1e-12


def test_ber_without_isi_decreases_with_release_count():
    # y scales with the per-cell release count N
    bers = [ber_exact(OokConfig(J=0, per_cell_release=n), 0.7 * n, _isi([])).ber for n in range(1, 8)]
    assert np.all(np.diff(bers) <= 0)
