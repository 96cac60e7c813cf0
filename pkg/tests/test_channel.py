import warnings

import numpy as np
import pytest

from spheroid_mc.channel import (
    end_to_end_concentration,
    expected_count,
    isi_means,
    observation_probability,
    receiver_capture,
    trapezoid_convolve,
    unit_impulse,
)
from spheroid_mc.errors import GridTooShort, SeparationWarning
from spheroid_mc.gfc import FrequencyGrid, TimeSeries
from spheroid_mc.porosity import MediumSpec, SpheroidSpec
from spheroid_mc.receiver import rx_point_gfc

MED = MediumSpec()
TX = SpheroidSpec(275e-6, 24000)
RX = SpheroidSpec(275e-6, 24000, degradation_rate=0.01)
SEP = 1000e-6


@pytest.fixture(scope="module")
def table1():
    grid = FrequencyGrid(0.5, 2**13)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SeparationWarning)
        return observation_probability(TX, RX, MED, SEP, grid), grid


def _far(func, *args, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SeparationWarning)
        return func(*args, **kw)


def test_trapezoid_convolution_identity():
    dt = 0.5
    x = TimeSeries(dt, np.exp(-0.01 * np.arange(400) * dt))
    out = trapezoid_convolve(unit_impulse(dt, 400), x)
    np.testing.assert_allclose(out.values[1:], x.values[1:], rtol=1e-12)


def test_trapezoid_convolution_against_closed_form():
    # e^{-t} * e^{-2t} = e^{-t} - e^{-2t}; trapezoid error is O(dt^2)
    for dt, tol in [(0.01, 2e-5), (0.005, 5e-6)]:
        t = np.arange(2000) * dt
        out = trapezoid_convolve(TimeSeries(dt, np.exp(-t)), TimeSeries(dt, np.exp(-2 * t)))
        ref = np.exp(-t) - np.exp(-2 * t)
        assert np.max(np.abs(out.values - ref)) < tol


def test_point_transmitter_gives_receiver_gfc():
    grid = FrequencyGrid(0.5, 2**12)
    rx = SpheroidSpec(275e-6, 24000)
    q = (0.0, 0.0, 0.0)
    c = _far(end_to_end_concentration, None, rx, MED, 1500e-6, q, grid)
    ref = rx_point_gfc(rx, MED, (1500e-6, 0.0, 0.0), q, grid)
    n = len(c)
    np.testing.assert_allclose(c.values[1:], ref.values[1:n], rtol=1e-10, atol=1e-12 * ref.values.max())


def test_separation_warning():
    grid = FrequencyGrid(0.5, 2**10)
    with pytest.warns(SeparationWarning):
        observation_probability(None, RX, MED, 500e-6, grid, n_total=1.0, quad=None)


def test_doubling_separation_lowers_and_delays_peak():
    grid = FrequencyGrid(0.5, 2**13)
    a = _far(observation_probability, TX, RX, MED, 1000e-6, grid, quad=None)
    b = _far(observation_probability, TX, RX, MED, 2000e-6, grid, quad=None)
    assert b.p_obs.values.max() < a.p_obs.values.max()
    assert b.t_sample > a.t_sample


def test_probability_bounds(table1):
    resp, grid = table1
    p = resp.p_obs.values
    assert np.all(p >= 0) and np.all(p <= 1)
    assert np.all(resp.y.values >= 0)
    # g integrates to at most one, so p_obs cannot exceed the largest capture
    assert p.max() <= resp.capture.values.max() * (1 + 1e-6)
    assert resp.t_sample == pytest.approx(resp.p_obs.times[np.argmax(p)])


def test_molecules_disperse_without_degradation():
    grid = FrequencyGrid(0.5, 2**13)
    rx = SpheroidSpec(275e-6, 24000)
    r = _far(observation_probability, TX, rx, MED, SEP, grid, quad=None)
    p = r.p_obs.values
    assert p[-1] < 0.1 * p.max()
    assert np.all(np.diff(p[np.argmax(p) + 10 :]) <= 1e-12 * p.max())


def test_lower_receiver_porosity_amplifies_and_delays():
    grid = FrequencyGrid(0.5, 2**13)
    dense = RX.with_cells(26000)
    sparse = RX.with_cells(15000)
    a = _far(observation_probability, TX, dense, MED, SEP, grid, quad=None)
    b = _far(observation_probability, TX, sparse, MED, SEP, grid, quad=None)
    assert a.p_obs.values.max() > b.p_obs.values.max()
    assert a.t_sample > b.t_sample


def test_count_is_linear_in_release():
    grid = FrequencyGrid(0.5, 2**13)
    a = _far(observation_probability, TX, RX, MED, SEP, grid, per_cell=1, quad=None)
    b = _far(observation_probability, TX, RX, MED, SEP, grid, per_cell=3, quad=None)
    np.testing.assert_allclose(b.y.values, 3 * a.y.values, rtol=1e-14)
    ia, ib = isi_means(a, 4, 600.0), isi_means(b, 4, 600.0)
    np.testing.assert_allclose(ib.I, 3 * ia.I, rtol=1e-14)


def test_quadrature_convergence(table1):
    resp, grid = table1
    fine = receiver_capture(RX, MED, SEP, grid, quad=(96, 96))
    coarse = resp.capture
    assert np.max(np.abs(fine.values - coarse.values)) < 5e-3 * coarse.values.max()


def test_isi_matches_direct_convolution(table1):
    resp, grid = table1
    isi = isi_means(resp, 5, 600.0)
    assert isi.I.shape == (5,)
    assert np.all(isi.I >= 0)
    assert np.all(np.diff(isi.I) <= 0)
    g, cap, dt = resp.g.values, resp.capture.values, grid.dt
    for j in range(1, 6):
        m = int(round((j * 600.0 + resp.t_sample) / dt))
        w = np.ones(m + 1)
        w[0] = w[-1] = 0.5
        direct = resp.n_total * dt * np.sum(w * g[: m + 1] * cap[m::-1])
        assert isi.I[j - 1] == pytest.approx(direct, rel=1e-9)


def test_isi_edge_cases(table1):
    resp, _ = table1
    empty = isi_means(resp, 0, 600.0)
    assert empty.J == 0 and empty.I.size == 0 and empty.total == 0.0
    with pytest.raises(GridTooShort):
        isi_means(resp, 10, 600.0)
    # residual counts shrink as slots lengthen
    first = [isi_means(resp, 1, T).I[0] for T in (300.0, 600.0, 1200.0, 1900.0)]
    assert np.all(np.diff(first) < 0)
    assert first[-1] < 0.2 * resp.y_sample


def test_expected_count(table1):
    resp, _ = table1
    isi = isi_means(resp, 2, 600.0)
    y = resp.y_sample
    assert expected_count([1, 0, 0], y, isi) == pytest.approx(y)
    assert expected_count([0, 1, 1], y, isi) == pytest.approx(isi.I[0] + isi.I[1])
    assert expected_count([1, 1, 0], y, isi) == pytest.approx(y + isi.I[0])
