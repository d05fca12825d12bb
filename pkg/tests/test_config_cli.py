import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from qilink import scenarios as sc
from qilink.chain import LinkParams
from qilink.cli import main
from qilink.config import PRESETS, load_config, parse_overrides
from qilink.errors import ConfigError, DomainError, QilinkError


def write(tmp_path, text, name="cfg.yaml"):
    p = tmp_path / name
    p.write_text(text)
    return p


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


# --- configuration -------------------------------------------------------------------

def test_empty_file_gives_defaults(tmp_path):
    cfg = load_config(write(tmp_path, ""))
    assert cfg.link == LinkParams()
    assert cfg.link.kappa_A == 0.74 and cfg.link.kappa_1 == 0.5 and cfg.link.G_B == 1.34e4


def test_out_of_range_names_key(tmp_path):
    with pytest.raises(ConfigError, match="kappa_1"):
        load_config(write(tmp_path, "link:\n  kappa_1: 1.3\n"))


def test_unknown_key_rejected(tmp_path):
    with pytest.raises(ConfigError, match="kappa_Z"):
        load_config(write(tmp_path, "link:\n  kappa_Z: 0.3\n"))


def test_parse_error(tmp_path):
    with pytest.raises(ConfigError):
        load_config(write(tmp_path, "link: [unclosed\n"))


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope.yaml")


def test_gain_override():
    cfg = load_config(overrides=parse_overrides(["G_A_minus_1=2.48e-5"]))
    assert cfg.link.g_a_excess == pytest.approx(2.48e-5, rel=1e-9)
    assert cfg.to_dict()["link"]["G_A_minus_1"] == pytest.approx(2.48e-5, rel=1e-9)


def test_conflicting_gain_keys():
    with pytest.raises(ConfigError):
        load_config(overrides={"link.G_A": 1.1, "link.G_A_minus_1": 0.1})


def test_bare_and_dotted_keys_agree(tmp_path):
    a = load_config(overrides=parse_overrides(["kappa_2=0.3"]))
    b = load_config(write(tmp_path, "link:\n  kappa_2: 0.3\n"))
    assert a.link == b.link


def test_mode_count_override_detaches_bandwidth():
    cfg = load_config(overrides={"link.M": 1000})
    assert cfg.link.M == 1000 and cfg.link.W is None
    cfg = load_config(overrides={"link.T": 1e-6})
    assert cfg.link.M == 2_000_000


@pytest.mark.parametrize(
    "item",
    ["sweep.spacing=cubic", "sweep.lo=0", "montecarlo.targets=[0.7]", "output.format=xml", "scenario=nope", "noequals"],
)
def test_invalid_settings(item):
    with pytest.raises(ConfigError):
        load_config(overrides=parse_overrides([item]))


def test_preset_defaults_yield_to_explicit_settings():
    cfg = load_config(overrides={"link.kappa_2": 0.5})
    assert sc.preset_config(cfg, "fig3-info-bottom").link.kappa_2 == 0.5
    assert sc.preset_config(load_config(), "fig3-info-bottom").link.kappa_2 == 0.1
    secure = sc.preset_config(load_config(), "secure-point")
    assert secure.link.g_a_excess == pytest.approx(2.48e-5, rel=1e-9)
    own_gain = sc.preset_config(load_config(overrides={"link.G_A": 1.00001}), "secure-point")
    assert own_gain.link.G_A == 1.00001


# --- scenarios ---------------------------------------------------------------------------

def test_threshold_report():
    t = sc.run_scenario(load_config(), "threshold-report")
    row = t.rows[0]
    assert row["N_B_thresh"] == pytest.approx(2.14e3, rel=0.01)
    assert row["margin_db"] == pytest.approx(8.3, abs=0.1)


def test_fig2_zero_brightness_all_half():
    cfg = load_config(overrides={"sweep.spacing": "linear", "sweep.lo": 0.0, "sweep.hi": 1e-3, "sweep.points": 2})
    t = sc.run_scenario(cfg, "fig2-ber-curves")
    assert set(t.column("ber", n_s=0.0)) == {0.5}
    assert len(set(t.column("curve"))) == 5


def test_fig2_curves_monotone_and_cross_one_in_a_million():
    t = sc.run_scenario(load_config(), "fig2-ber-curves")
    for curve in ("alice", "alice_ideal"):
        ber = np.array(t.column("ber", curve=curve))
        assert np.all(np.diff(ber) <= 0)
        n_s = np.array(t.column("n_s", curve=curve))
        crossing = n_s[np.argmax(ber < 1e-6)]
        assert 1e-5 <= crossing <= 1e-3
    # 60 points per decade over three decades
    assert len(t.column("n_s", curve="alice")) == 181


def test_fig3_peak():
    t = sc.run_scenario(load_config(), "fig3-info-top")
    assert 0.75 <= max(t.column("delta_lb")) <= 0.85
    assert t.notes["peak_delta_lb"] == max(t.column("delta_lb"))


def test_every_preset_runs():
    cfg = load_config(overrides={"montecarlo.n_bits": 2000, "sweep.points": 7})
    for name in PRESETS:
        assert sc.run_scenario(cfg, name).rows


def test_sweep_over_link_variable():
    cfg = load_config(overrides=parse_overrides(
        ["sweep.variable=M", "sweep.lo=1e5", "sweep.hi=1e7", "sweep.points=3"]
    ))
    t = sc.run_sweep(cfg)
    ber = t.column("ber_a")
    assert ber[0] > ber[1] > ber[2]


def test_sweep_failure_is_annotated():
    cfg = load_config(overrides=parse_overrides(
        ["sweep.variable=N_B", "sweep.spacing=linear", "sweep.lo=1", "sweep.hi=2", "sweep.points=2"]
    ))
    with pytest.raises(DomainError, match="N_B="):
        sc.run_sweep(cfg)


# --- emission ------------------------------------------------------------------------------

def test_csv_json_round_trip(tmp_path):
    cfg = load_config(overrides={"sweep.points": 2})
    t = sc.run_scenario(cfg, "fig3-info-top")
    sc.emit(t, tmp_path / "a.csv", "csv")
    sc.emit(t, tmp_path / "a.json", "json")
    rows_csv = read_csv(tmp_path / "a.csv")
    doc = json.loads((tmp_path / "a.json").read_text())
    assert len(rows_csv) == 2 and doc["schema_version"] == 1
    for rc, rj in zip(rows_csv, doc["rows"]):
        for col in doc["columns"]:
            assert float(rc[col]) == rj[col]
    meta = json.loads((tmp_path / "a.csv.meta.json").read_text())
    assert meta["scenario"] == "fig3-info-top"
    assert meta["config"]["link"]["kappa_2"] == 0.9
    assert {"artifact_version", "seed", "generated_at"} <= meta.keys()


def test_csv_float_precision(tmp_path):
    t = sc.run_scenario(load_config(), "threshold-report")
    sc.emit(t, tmp_path / "t.csv")
    raw = (tmp_path / "t.csv").read_bytes()
    assert b"e+03" in raw and b"\r\n" in raw


def test_output_is_deterministic(tmp_path):
    def run(name):
        out = tmp_path / name
        assert main(["mc", "--out", str(out), "--format", "json", "--seed", "5",
                     "--set", "montecarlo.n_bits=2000"]) == 0
        doc = json.loads(out.read_text())
        doc["metadata"].pop("generated_at")
        doc["metadata"]["config"]["output"].pop("path")
        return doc, out.with_name(out.name + ".meta.json")

    a, _ = run("a.json")
    b, _ = run("b.json")
    assert a == b
    c1 = tmp_path / "c1.csv"
    c2 = tmp_path / "c2.csv"
    main(["run", "secure-point", "--out", str(c1)])
    main(["run", "secure-point", "--out", str(c2)])
    assert c1.read_bytes() == c2.read_bytes()


def test_empty_table_rejected():
    t = sc.ResultTable("x", ["a"], [], load_config())
    with pytest.raises(QilinkError):
        sc.emit(t, None)


# --- CLI -------------------------------------------------------------------------------------

def test_cli_threshold_stdout(capsys):
    assert main(["threshold"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].startswith("N_B,N_B_thresh,margin_db")


def test_cli_exit_codes(tmp_path, capsys):
    assert main(["run", "secure-point", "--set", "kappa_1=1.3"]) == 2
    assert "kappa_1" in capsys.readouterr().err
    assert main(["run", "secure-point", "--config", str(tmp_path / "missing.yaml")]) == 2
    assert main(["mc", "--set", "montecarlo.targets=[1e-300]"]) == 3
    assert main(["run", "fig2-ber-curves", "--out", str(tmp_path / "no" / "dir.csv")]) == 1


def test_cli_ideal_receiver(capsys):
    main(["run", "secure-point"])
    real = capsys.readouterr().out
    main(["run", "secure-point", "--ideal-receiver"])
    ideal = capsys.readouterr().out
    assert real != ideal


def test_cli_waveform(tmp_path):
    wave = tmp_path / "w.csv"
    assert main(["mc", "--out", str(tmp_path / "m.csv"), "--waveform", str(wave),
                 "--set", "montecarlo.n_bits=1000", "--set", "montecarlo.waveform_bits=25"]) == 0
    rows = read_csv(wave)
    assert len(rows) == 25 and rows[0].keys() == {"index", "sign", "statistic", "decoded"}


def test_cli_config_file(tmp_path):
    cfg = write(tmp_path, "sweep:\n  points: 3\nlink:\n  kappa_2: 0.1\n")
    out = tmp_path / "s.csv"
    assert main(["sweep", "--config", str(cfg), "--out", str(out)]) == 0
    rows = read_csv(out)
    assert len(rows) == 3


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "qilink", "threshold", "--format", "json"],
                       capture_output=True, text=True, check=False)
    assert r.returncode == 0
    assert json.loads(r.stdout)["rows"][0]["margin_db"] == pytest.approx(8.36, abs=0.05)
