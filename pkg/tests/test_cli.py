import csv
import json

import pytest

from spheroid_mc.cli import OUT_ENV, main


def _rows(path):
    lines = [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def test_porosity_prints_table1_values(tmp_path, capsys):
    assert main(["porosity", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "epsilon=0.1349 kappa=4.4919" in out
    rows = _rows(tmp_path / "porosity.csv")
    assert float(rows[1]["kappa"]) == pytest.approx(4.49193, abs=1e-5)
    assert len(_rows(tmp_path / "kappa_curve.csv")) == 21


def test_ber_row(tmp_path):
    assert main(["ber", "--Ts", "600", "--J", "5", "--out", str(tmp_path)]) == 0
    (row,) = _rows(tmp_path / "ber.csv")
    assert float(row["T_s"]) == 600 and int(row["J"]) == 5
    assert 0 < float(row["ber"]) < 0.5


def test_headers_and_manifest(tmp_path):
    assert main(["release-rate", "--out", str(tmp_path), "--seed", "3"]) == 0
    text = (tmp_path / "release_rate.csv").read_text().splitlines()
    assert text[0] == "# command: release-rate"
    cfg = json.loads(text[1].split(": ", 1)[1])
    assert cfg["pbs"]["seed"] == 3
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert man["seed"] == 3
    assert man["config_sha256"] == text[2].split(": ", 1)[1]
    assert set(man["files"]) == {"release_rate.csv"}
    assert {"numpy", "scipy", "spheroid_mc"} <= set(man["versions"])


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text(f"ook: {{T_s: 300, J: 2}}\noutput_dir: {tmp_path / 'from_file'}\n")
    assert main(["ber", "--config", str(cfg), "--Ts", "400"]) == 0
    (row,) = _rows(tmp_path / "from_file" / "ber.csv")
    assert float(row["T_s"]) == 400 and int(row["J"]) == 2


def test_env_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv(OUT_ENV, str(tmp_path / "env"))
    assert main(["porosity"]) == 0
    assert (tmp_path / "env" / "porosity.csv").exists()


def test_errors_exit_nonzero(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text("grid: {dtt: 1}\n")
    assert main(["porosity", "--config", str(bad), "--out", str(tmp_path)]) != 0
    assert "grid.dtt" in capsys.readouterr().err
    assert main(["ber", "--J", "50", "--out", str(tmp_path)]) != 0
    assert main(["validate", "fig9", "--out", str(tmp_path)]) != 0
    assert "fig9" in capsys.readouterr().err


def test_validate_is_byte_identical(tmp_path):
    args = ["validate", "fig3", "--seed", "42", "--particles", "2000"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert "fig3_series.csv" in names and "manifest.json" in names
    for name in names:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_pbs_subcommand(tmp_path):
    assert main(["pbs", "--particles", "500", "--seed", "1", "--out", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "pbs.csv")
    assert int(rows[0]["alive"]) == 24000
    assert all(int(r["receiver_count"]) <= int(r["alive"]) for r in rows)
