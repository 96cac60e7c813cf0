"""Command-line front end.

Usage::

    spheroid-mc <subcommand> [--config FILE] [--seed N] [--out DIR] [--n-max N]
                             [--particles N] [--Ts SECONDS] [--J N]

Subcommands and the CSV files they write:

=================  ==========================================================
``porosity``       ``porosity.csv`` (role, N_c, epsilon, tau, D_eff, kappa),
                   ``kappa_curve.csv`` (N_c, epsilon, kappa)
``gfc-rx``         ``gfc_rx.csv`` (t_s, one column per query radius)
``gfc-tx``         ``gfc_tx.csv`` (t_s, one column per query radius)
``release-rate``   ``release_rate.csv`` (t_s, g, n_inside)
``channel``        ``channel.csv`` (t_s, p_obs, y), ``isi.csv`` (j, I_j)
``ber``            ``ber.csv`` (T_s, J, N, y_sample, t_sample_s, xi, ber)
``pbs``            ``pbs.csv`` (t_s, receiver_count, center_probe_count, alive)
``validate FIG``   ``FIG_*.csv`` tables, series, metrics and scalars
=================  ==========================================================

Every CSV starts with ``#`` lines holding the command, the full config as
JSON and its SHA-256; each run also writes ``manifest.json`` (config hash,
seed, versions and the SHA-256 of every file).  Precedence: command-line
flags override the config file, which overrides the defaults.  The output
directory is ``--out``, else ``output_dir`` from the config, else the
``SPHEROIDAL_MC_OUT`` environment variable, else ``./results``.
"""

from __future__ import annotations

import argparse
import hashlib
import math
import os
import platform
import sys
import warnings
from pathlib import Path

import numpy as np
import scipy
import yaml

from . import __version__
from .channel import isi_means, observation_probability
from .config import ExperimentConfig, load_config
from .errors import ConfigError, PresetUnknown, SeparationWarning, SpheroidError
from .gfc import FrequencySweep, inverse_transform
from .ook import OokConfig, ber_exact
from .output import write_csv, write_json
from .pbs import PbsConfig, ProbeSphere, Scenario, release_from_spheroid, run
from .porosity import derive_porosity, kappa_curve
from .receiver import ReceiverSolver
from .transmitter import release_rate, tx_total_concentration
from .validation import FIGURES, SOURCE_RADIUS_UM, validate_figure

__all__ = ["main", "build_parser", "OUT_ENV"]

OUT_ENV = "SPHEROIDAL_MC_OUT"
RX_RADII_UM = (0.0, 100.0, 200.0, 265.0)
TX_RADII_UM = (0.0, 100.0, 200.0, 275.0, 400.0, 600.0)
UM = 1e-6


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML experiment config")
    common.add_argument("--seed", type=int, help="PBS seed")
    common.add_argument("--out", help="output directory")
    common.add_argument("--n-max", dest="n_max", type=int, help="series truncation order")
    common.add_argument("--particles", type=int, help="PBS particle budget")
    common.add_argument("--Ts", dest="T_s", type=float, help="slot duration, s")
    common.add_argument("--J", dest="J", type=int, help="ISI memory, slots")
    p = argparse.ArgumentParser(prog="spheroid-mc", description="Spheroid-to-spheroid molecular communication")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("porosity", "gfc-rx", "gfc-tx", "release-rate", "channel", "ber", "pbs"):
        sub.add_parser(name, parents=[common])
    v = sub.add_parser("validate", parents=[common])
    v.add_argument("figure", help=f"one of {', '.join(FIGURES)}")
    v.add_argument("--no-pbs", action="store_true", help="analytical side only")
    return p


def _out_dir(args, cfg: ExperimentConfig) -> Path:
    if args.out:
        return Path(args.out)
    if cfg.output_dir:
        return Path(cfg.output_dir)
    return Path(os.environ.get(OUT_ENV, "results"))


def _meta(command: str, cfg: ExperimentConfig) -> dict:
    return {"command": command, "config": cfg.to_dict(), "config_sha256": cfg.digest()}


def _far(func, *args, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SeparationWarning)
        return func(*args, **kw)


def _cmd_porosity(cfg, out, meta):
    rows = []
    for role, sc in (("transmitter", cfg.transmitter), ("receiver", cfg.receiver)):
        por = derive_porosity(sc.spec(), cfg.medium)
        rows.append((role, sc.cell_count, por.epsilon, por.tortuosity, por.d_eff, por.kappa))
        print(f"{role}: epsilon={por.epsilon:.4f} kappa={por.kappa:.4f}")
    files = [write_csv(out / "porosity.csv", ("role", "N_c", "epsilon", "tau", "D_eff", "kappa"), rows, meta)]
    counts = np.arange(15000, 25001, 500)
    eps, kap = kappa_curve(counts, cfg.receiver.radius_um * UM, cfg.receiver.cell_volume, cfg.medium.diffusion_coeff)
    files.append(write_csv(out / "kappa_curve.csv", ("N_c", "epsilon", "kappa"), zip(counts, eps, kap), meta))
    return files


def _cmd_gfc_rx(cfg, out, meta):
    grid = cfg.grid.frequency_grid()
    rx = cfg.rx_spec()
    solver = ReceiverSolver(rx, cfg.medium, SOURCE_RADIUS_UM * UM, grid.omega_eval, cfg.grid.n_max)
    cols, vals = ["t_s"], []
    for r in RX_RADII_UM:
        spec = solver.point((r * UM, math.pi / 2, 0.0), (math.pi / 2, 0.0))
        vals.append(inverse_transform(FrequencySweep(grid, spec), nonnegative=True).values)
        cols.append(f"c_r{r:g}um")
    t = grid.times[: len(vals[0])]
    return [write_csv(out / "gfc_rx.csv", cols, np.column_stack([t] + vals), meta)]


def _cmd_gfc_tx(cfg, out, meta):
    grid = cfg.grid.frequency_grid()
    tx = cfg.tx_spec()
    cols, vals = ["t_s"], []
    for r in TX_RADII_UM:
        vals.append(tx_total_concentration(tx, cfg.medium, r * UM, grid).values)
        cols.append(f"c_r{r:g}um")
    t = grid.times[: len(vals[0])]
    return [write_csv(out / "gfc_tx.csv", cols, np.column_stack([t] + vals), meta)]


def _cmd_release(cfg, out, meta):
    rel = release_rate(cfg.tx_spec(), cfg.medium, cfg.grid.frequency_grid())
    rows = np.column_stack([rel.g.times, rel.g.values, rel.n_inside.values])
    return [write_csv(out / "release_rate.csv", ("t_s", "g", "n_inside"), rows, meta)]


def _channel(cfg, cover: float):
    count = cfg.grid.omega_count
    while count * cfg.grid.dt < cover:
        count *= 2
    grid = cfg.grid.frequency_grid(count)
    tx = cfg.tx_spec()
    return _far(
        observation_probability, tx, cfg.rx_spec(), cfg.medium, cfg.separation, grid, per_cell=cfg.ook.N, n_max=cfg.grid.n_max
    )


def _cmd_channel(cfg, out, meta):
    resp = _channel(cfg, (cfg.ook.J + 1) * cfg.ook.T_s + 1.0)
    isi = isi_means(resp, cfg.ook.J, cfg.ook.T_s)
    rows = np.column_stack([resp.p_obs.times, resp.p_obs.values, resp.y.values])
    return [
        write_csv(out / "channel.csv", ("t_s", "p_obs", "y"), rows, meta),
        write_csv(out / "isi.csv", ("j", "I_j"), [(j + 1, v) for j, v in enumerate(isi.I)], meta),
    ]


def _cmd_ber(cfg, out, meta):
    o = cfg.ook
    resp = _channel(cfg, (o.J + 1) * o.T_s + 1.0)
    isi = isi_means(resp, o.J, o.T_s)
    stats = ber_exact(OokConfig(T_s=o.T_s, per_cell_release=o.N, J=o.J), resp.y_sample, isi)
    print(f"T_s={o.T_s:g} J={o.J} y={resp.y_sample:.6g} ber={stats.ber:.6g}")
    row = (o.T_s, o.J, o.N, resp.y_sample, resp.t_sample, stats.xi, stats.ber)
    return [write_csv(out / "ber.csv", ("T_s", "J", "N", "y_sample", "t_sample_s", "xi", "ber"), [row], meta)]


def _cmd_pbs(cfg, out, meta):
    tx = cfg.tx_spec()
    rx = cfg.rx_spec((cfg.separation, math.pi / 2, 0.0))
    scen = Scenario.from_specs(cfg.medium, tx, rx)
    layouts = max(1, int(round(cfg.pbs.particles / max(tx.cell_count, 1))))
    ens = release_from_spheroid(tx, cfg.ook.N, cfg.pbs.seed, scen, layouts=layouts)
    pcfg = PbsConfig(cfg.grid.dt, cfg.pbs.seed, len(ens.ids), cfg.pbs.duration)
    res = run(scen, ens, pcfg, probes={"center": ProbeSphere(tuple(rx.center_cartesian))}, receivers={"rx": rx})
    rows = np.column_stack([res.times, res.receivers["rx"], res.probes["center"], res.alive])
    meta = dict(meta, layouts=layouts, particles_used=len(ens.ids))
    return [write_csv(out / "pbs.csv", ("t_s", "receiver_count", "center_probe_count", "alive"), rows, meta)]


def _cmd_validate(cfg, out, meta, figure, pbs):
    rep = validate_figure(figure, cfg, pbs=pbs)
    for k, v in sorted(rep.scalars.items()):
        print(f"{k}={v:.6g}")
    for name, frac in rep.band_fractions(None).items():
        print(f"{name}: within 3 sigma {frac:.4f}")
    return rep.write(out, meta)


_COMMANDS = {
    "porosity": _cmd_porosity,
    "gfc-rx": _cmd_gfc_rx,
    "gfc-tx": _cmd_gfc_tx,
    "release-rate": _cmd_release,
    "channel": _cmd_channel,
    "ber": _cmd_ber,
    "pbs": _cmd_pbs,
}


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _manifest(out: Path, command: str, cfg: ExperimentConfig, files) -> Path:
    data = {
        "command": command,
        "config": cfg.to_dict(),
        "config_sha256": cfg.digest(),
        "seed": cfg.pbs.seed,
        "versions": {
            "spheroid_mc": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "pyyaml": yaml.__version__,
        },
        "files": {p.name: _sha256(p) for p in sorted(files)},
    }
    return write_json(out / "manifest.json", data)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config).override(seed=args.seed, particles=args.particles, n_max=args.n_max, T_s=args.T_s, J=args.J)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    out = _out_dir(args, cfg)
    command = args.command if args.command != "validate" else f"validate {args.figure}"
    meta = _meta(command, cfg)
    try:
        if args.command == "validate":
            files = _cmd_validate(cfg, out, meta, args.figure, not args.no_pbs)
        else:
            files = _COMMANDS[args.command](cfg, out, meta)
    except PresetUnknown as exc:
        print(f"error: {exc.args[0]}", file=sys.stderr)
        return 2
    except SpheroidError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    _manifest(out, command, cfg, files)
    return 0


if __name__ == "__main__":
    sys.exit(main())
