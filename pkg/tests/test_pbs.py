import math

import numpy as np
import pytest
from scipy import stats

from spheroid_mc.pbs import (
    PbsConfig,
    ProbeSphere,
    Region,
    Scenario,
    ShellPair,
    count_shell,
    measure_probe,
    measure_receiver_count,
    normals_and_uniform,
    philox4x32,
    release_at_point,
    release_from_spheroid,
    run,
    step,
    uniform_ball,
    uniforms,
)
from spheroid_mc.pbs.simulator import ParticleEnsemble
from spheroid_mc.porosity import MediumSpec, SpheroidSpec, derive_porosity

MED = MediumSpec()
D = MED.diffusion_coeff


@pytest.mark.parametrize(
    "counter, key, expected",
    [
        ([0, 0, 0, 0], [0, 0], [0x6627E8D5, 0xE169C58D, 0xBC57AC4C, 0x9B00DBD8]),
        ([0xFFFFFFFF] * 4, [0xFFFFFFFF] * 2, [0x408F276D, 0x41C83B0E, 0xA20BC7C6, 0x6D5451FD]),
        (
            [0x243F6A88, 0x85A308D3, 0x13198A2E, 0x03707344],
            [0xA4093822, 0x299F31D0],
            [0xD16CFE09, 0x94FDCCEB, 0x5001E420, 0x24126EA1],
        ),
    ],
)
def test_philox_known_answers(counter, key, expected):
    out = philox4x32(np.array(counter, dtype=np.uint32)[:, None], np.array(key, dtype=np.uint32))
    assert [int(v) for v in out[:, 0]] == expected


def test_streams_are_partition_independent():
    ids = np.arange(1000, dtype=np.uint64)
    whole = uniforms(42, ids, 7)
    part = uniforms(42, ids[500:], 7)
    np.testing.assert_array_equal(whole[:, 500:], part)
    assert not np.array_equal(uniforms(43, ids, 7), whole)
    assert not np.array_equal(uniforms(42, ids, 8), whole)
    assert np.all((whole > 0) & (whole < 1))


def test_normals_are_standard():
    z, u = normals_and_uniform(1, np.arange(200_000, dtype=np.uint64), 0)
    assert abs(z.mean()) < 0.01
    assert abs(z.var() - 1) < 0.01
    assert stats.kstest(z[0], "norm").pvalue > 0.01
    assert stats.kstest(u, "uniform").pvalue > 0.01
    assert abs(np.corrcoef(z[0], z[1])[0, 1]) < 0.01


def test_uniform_ball_radial_law():
    pts = uniform_ball(11, np.arange(10_000, dtype=np.uint64), 2.0, center=(1.0, -1.0, 0.5))
    r = np.linalg.norm(pts - np.array([1.0, -1.0, 0.5]), axis=1)
    assert np.all(r <= 2.0)
    assert stats.kstest((r / 2.0) ** 3, "uniform").pvalue > 0.01


def test_release_from_spheroid():
    tx = SpheroidSpec(275e-6, 1000)
    ens = release_from_spheroid(tx, per_cell=3, seed=2)
    assert len(ens.positions) == 3000
    assert ens.n_alive == 3000
    # particles of one cell share its centre
    np.testing.assert_array_equal(ens.positions[0], ens.positions[2])
    assert np.all(np.linalg.norm(ens.positions, axis=1) <= tx.radius)
    single = release_from_spheroid(SpheroidSpec(275e-6, 1), per_cell=1, seed=5)
    assert len(single.positions) == 1
    lay = release_from_spheroid(tx, per_cell=1, seed=2, layouts=4)
    assert len(lay.positions) == 4000
    np.testing.assert_array_equal(lay.positions[:1000], ens.positions[::3])
    with pytest.raises(ValueError):
        release_from_spheroid(tx, per_cell=0)


def test_free_mean_squared_displacement():
    cfg = PbsConfig(dt=0.5, seed=3, particles=100_000, duration=50.0)
    ens = release_at_point((0.0, 0.0, 0.0), cfg.particles)
    scen = Scenario(MED, [])
    for _ in range(cfg.n_steps):
        step(ens, scen, cfg)
    msd = np.mean(np.sum(ens.positions**2, axis=1))
    assert msd == pytest.approx(6 * D * ens.time, rel=0.02)
    assert ens.time == pytest.approx(50.0)


def test_survival_follows_first_order_decay():
    cfg = PbsConfig(dt=0.5, seed=4, particles=100_000, duration=50.0)
    container = Region(np.zeros(3), 1.0, D, 0.01)
    scen = Scenario(MED, [container])
    ens = release_at_point((0.0, 0.0, 0.0), cfg.particles, scen)
    out = run(scen, ens, cfg, every=20)
    np.testing.assert_allclose(out.alive / out.n_initial, np.exp(-0.01 * out.times), rtol=0.02)


def test_conservation_without_degradation():
    tx = SpheroidSpec(275e-6, 24000)
    scen = Scenario.from_specs(MED, tx)
    cfg = PbsConfig(dt=0.5, seed=5, particles=24000, duration=20.0)
    ens = release_from_spheroid(tx, 1, seed=5, scenario=scen)
    out = run(scen, ens, cfg)
    assert np.all(out.alive == 24000)
    # region labels stay consistent with positions
    lab = scen.locate(ens.positions)
    assert np.mean(lab == ens.region) > 0.9999


def test_transparent_boundary_null():
    # with D_eff = D the two scalings are 1 and the crossing logic must be invisible
    empty = SpheroidSpec(275e-6, 0)
    scen = Scenario.from_specs(MED, empty)
    assert derive_porosity(empty, MED).kappa == 1.0
    cfg = PbsConfig(dt=0.5, seed=6, particles=20_000, duration=25.0)
    a = release_at_point((300e-6, 0.0, 0.0), cfg.particles, scen)
    b = release_at_point((300e-6, 0.0, 0.0), cfg.particles)
    for _ in range(cfg.n_steps):
        step(a, scen, cfg)
        step(b, Scenario(MED, []), cfg)
    np.testing.assert_allclose(a.positions, b.positions, rtol=0, atol=1e-15)


def test_boundary_keeps_equilibrium_ratio():
    # start at the stationary state c_in = kappa c_out and check it persists
    rx = SpheroidSpec(275e-6, 24000)
    kappa = derive_porosity(rx, MED).kappa
    g = rx.radius
    n_out = 100_000
    gen = np.random.default_rng(0)
    vol_in = 4 / 3 * math.pi * g**3
    vol_out = 4 / 3 * math.pi * ((3 * g) ** 3 - g**3)
    n_in = int(round(n_out * kappa * vol_in / vol_out))
    r_in = g * np.cbrt(gen.uniform(size=n_in))
    r_out = np.cbrt(gen.uniform(g**3, (3 * g) ** 3, size=n_out))
    r = np.concatenate([r_in, r_out])
    v = gen.normal(size=(r.size, 3))
    pos = r[:, None] * v / np.linalg.norm(v, axis=1)[:, None]
    scen = Scenario.from_specs(MED, rx)
    ens = ParticleEnsemble(pos, np.ones(r.size, bool), scen.locate(pos), np.arange(r.size, dtype=np.uint64))
    cfg = PbsConfig(dt=0.5, seed=8, particles=r.size, duration=10.0)
    shells = ShellPair((0.0, 0.0, 0.0), g, 20e-6)
    out = run(scen, ens, cfg, shells={"s": shells})
    vin, vout = shells.volumes()
    counts = out.shells["s"].sum(axis=0)
    ratio = (counts[0] / vin) / (counts[1] / vout)
    assert ratio == pytest.approx(kappa, rel=0.05)


def test_determinism():
    tx = SpheroidSpec(275e-6, 2000)
    rx = SpheroidSpec(275e-6, 24000, degradation_rate=0.01, center=(1000e-6, 0.0, 0.0))
    scen = Scenario.from_specs(MED, tx, rx)
    cfg = PbsConfig(dt=0.5, seed=9, particles=2000, duration=10.0)
    runs = []
    for _ in range(2):
        ens = release_from_spheroid(tx, 1, seed=9, scenario=scen)
        runs.append((run(scen, ens, cfg, receivers={"rx": rx}), ens))
    np.testing.assert_array_equal(runs[0][1].positions, runs[1][1].positions)
    np.testing.assert_array_equal(runs[0][0].receivers["rx"], runs[1][0].receivers["rx"])


def test_overlapping_spheroids_rejected():
    a = SpheroidSpec(275e-6, 100)
    b = SpheroidSpec(275e-6, 100, center=(500e-6, 0.0, 0.0))
    with pytest.raises(ValueError):
        Scenario.from_specs(MED, a, b)


def test_probe_measurements():
    probe = ProbeSphere((0.0, 0.0, 0.0))
    assert probe.radius == 10e-6
    empty = release_at_point((0.0, 0.0, 0.0), 0)
    assert measure_probe(empty, probe) == 0.0
    full = release_at_point((0.0, 0.0, 0.0), 10)
    assert measure_probe(full, probe, normalization=10) == pytest.approx(1 / probe.volume)
    with pytest.warns(UserWarning):
        measure_probe(full, ProbeSphere((0.0, 0.0, 0.0), 50e-6), region_radius=275e-6)
    with pytest.raises(ValueError):
        ProbeSphere((0.0, 0.0, 0.0), 0.0)


def test_probe_on_uniform_density():
    n = 200_000
    side = 200e-6
    pos = np.random.default_rng(1).uniform(-side / 2, side / 2, size=(n, 3))
    ens = ParticleEnsemble(pos, np.ones(n, bool), np.zeros(n, np.int8), np.arange(n, dtype=np.uint64))
    probe = ProbeSphere((0.0, 0.0, 0.0), 20e-6)
    rho = n / side**3
    expected = rho * probe.volume
    sigma = math.sqrt(expected * (1 - probe.volume / side**3))
    assert abs(measure_probe(ens, probe) * probe.volume - expected) < 4 * sigma


def test_receiver_count_closed_ball():
    rx = SpheroidSpec(275e-6, 24000)
    ens = release_at_point((0.0, 0.0, 0.0), 5)
    assert measure_receiver_count(ens, rx) == 5
    on_surface = release_at_point((275e-6, 0.0, 0.0), 3)
    assert measure_receiver_count(on_surface, rx) == 3
    outside = release_at_point((276e-6, 0.0, 0.0), 3)
    assert measure_receiver_count(outside, rx) == 0
    ens.alive[:2] = False
    assert measure_receiver_count(ens, rx) == 3


def test_shell_counts():
    pts = np.array([[0.0, 0.0, 0.95], [0.0, 1.05, 0.0], [0.5, 0.0, 0.0], [0.0, 0.0, 1.0]])
    ens = ParticleEnsemble(pts, np.ones(4, bool), np.zeros(4, np.int8), np.arange(4, dtype=np.uint64))
    assert count_shell(ens, ShellPair((0.0, 0.0, 0.0), 1.0, 0.1)) == (2, 1)


def test_config_validation():
    with pytest.raises(ValueError):
        PbsConfig(dt=0)
    with pytest.raises(ValueError):
        PbsConfig(particles=0)
    with pytest.raises(ValueError):
        PbsConfig(seed=-1)
    assert PbsConfig(dt=0.5, duration=100).n_steps == 200
