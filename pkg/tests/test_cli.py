import csv
import json

import jsonschema
import numpy as np
import pytest

from pairlab import cli
from pairlab.config import ConfigError, RunConfig, config_from_dict, load_config, load_schema

OUTPUTS = load_schema("outputs.schema.json")


def check(obj, kind):
    jsonschema.validate(obj, {**OUTPUTS, "$ref": f"#/$defs/{kind}"})


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    return json.loads(out)


@pytest.fixture
def small_config(tmp_path):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps({"seed": 3, "duration_s": 2.0}))
    return p


@pytest.fixture
def ptt1(tmp_path, capsys, small_config):
    p = tmp_path / "run.ptt1"
    run_json(capsys, "simulate", "--config", small_config, "--out", p)
    return p


class TestModel:
    def test_model_heralded_prediction(self, capsys):
        out = run_json(capsys, "model", "eq1", "--rp", "5e5", "--window-ns", "8")
        assert out == {"g2c": pytest.approx(0.007984, abs=5e-7)}
        check(out, "model")

    def test_model_correlation_ratio_and_crosscorr(self, capsys):
        assert run_json(capsys, "model", "eq2", "--g2-ss", 2, "--g2-ii", 2, "--g2-si", 4) == {"g2c": 1.0}
        out = run_json(capsys, "model", "crosscorr", "--g2-ii", 1.338, "--rp", 5e5)
        assert out["g2_si"] == pytest.approx(224.23, abs=0.01)

    def test_lineshape(self, capsys):
        out = run_json(capsys, "model", "lineshape")
        check(out, "model")
        assert out["tau0_ns"] == pytest.approx(2.0, rel=0.01)
        assert out["g2_ii_zero"] == pytest.approx(1.607, abs=1e-3)
        assert out["g2_ii_window"] == pytest.approx(1.243, abs=2e-3)

    def test_efficiencies_and_etalon(self, capsys):
        out = run_json(capsys, "model", "efficiencies", "--n-s", 6.8e4, "--n-i", 1.7e4, "--r", 4.6e3)
        assert out["eta_heralded"] == pytest.approx(0.451, abs=1e-3)
        out = run_json(capsys, "model", "etalon")
        assert out["transmission"] == pytest.approx(1.13e-3, rel=0.01)

    def test_domain_error_exit(self, capsys):
        code, out, err = run(capsys, "model", "eq1", "--rp", "1e9")
        assert code == 3 and out == ""
        rec = json.loads(err.strip())
        assert rec["error"] == "DomainError"
        check(rec, "error")


class TestUsage:
    def test_unknown_subcommand(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.main(["frobnicate"])
        assert exc.value.code == 2

    def test_unknown_flag(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.main(["model", "eq1", "--rp", "1", "--bogus"])
        assert exc.value.code == 2

    def test_bad_config(self, capsys, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text(json.dumps({"source": {"pump_watts": 1}}))
        code, _, err = run(capsys, "simulate", "--config", p, "--out", tmp_path / "x.ptt1")
        assert code == 2 and json.loads(err)["error"] == "ConfigError"

    def test_missing_input(self, capsys, tmp_path):
        code, _, err = run(capsys, "summary", "--in", tmp_path / "missing.ptt1")
        assert code == 3 and "error" in json.loads(err)

    def test_corrupt_input(self, capsys, tmp_path):
        p = tmp_path / "bad.ptt1"
        p.write_bytes(b"XXXX" + bytes(30))
        code, _, err = run(capsys, "summary", "--in", p)
        assert code == 3 and json.loads(err)["error"] == "FormatError"


class TestPipeline:
    def test_simulate_deterministic(self, capsys, tmp_path, small_config, ptt1):
        out = run_json(capsys, "simulate", "--config", small_config, "--out", tmp_path / "b.ptt1",
                       "--workers", 2)
        check(out, "simulate")
        assert (tmp_path / "b.ptt1").read_bytes() == ptt1.read_bytes()

    def test_summary(self, capsys, ptt1):
        out = run_json(capsys, "summary", "--in", ptt1, "--eta-det", 0.6, "--pump-mw", 1.2)
        check(out, "summary")
        eff = out["efficiencies"]
        # two seconds of data; the configured heralding efficiency is 0.4533
        assert eff["eta_heralded"] == pytest.approx(0.45, abs=0.03)
        assert out["singles"]["APD3"] == pytest.approx(1.7e4, rel=0.03)

    def test_herald_g2(self, capsys, ptt1):
        out = run_json(capsys, "herald-g2", "--in", ptt1, "--window-ns", 8)
        check(out, "herald_g2")
        assert out["g2c"] < 0.05 and out["window_ns"] == 8.0

    def test_correlate_mirror(self, capsys, tmp_path, ptt1):
        ab, ba = tmp_path / "ab.csv", tmp_path / "ba.csv"
        centered = ["--bin-ps", 162, "--max-lag-ns", 9.963]
        out = run_json(capsys, "correlate", "--in", ptt1, "--a", 2, "--b", 0, "--out", ab, *centered)
        check(out, "correlate")
        assert out["max_lag_ps"] == 9963
        run_json(capsys, "correlate", "--in", ptt1, "--a", 0, "--b", 2, "--out", ba, *centered)
        rows_ab = list(csv.DictReader(open(ab)))
        rows_ba = list(csv.DictReader(open(ba)))
        assert list(rows_ab[0]) == ["lag_ps", "counts", "g2", "g2_err"]
        assert [r["counts"] for r in rows_ab] == [r["counts"] for r in reversed(rows_ba)]
        assert [float(r["lag_ps"]) for r in rows_ab] == [-float(r["lag_ps"]) for r in reversed(rows_ba)]
        np.testing.assert_allclose([float(r["g2"]) for r in rows_ab],
                                   [float(r["g2"]) for r in reversed(rows_ba)], rtol=1e-12)

    def test_correlate_rounds_range(self, capsys, tmp_path, ptt1):
        out = run_json(capsys, "correlate", "--in", ptt1, "--a", 2, "--b", 0, "--out", tmp_path / "c.csv")
        assert out["max_lag_ps"] % 81 == 0 and out["max_lag_ps"] >= 20_000

    def test_cluster(self, capsys, tmp_path):
        p = tmp_path / "lines.csv"
        out = run_json(capsys, "cluster", "--span-ghz", 40, "--out", p)
        check(out, "cluster")
        rows = list(csv.reader(open(p)))
        assert rows[0] == ["detuning_GHz", "weight"]
        assert [float(r[0]) for r in rows[1:]] == [-32, -16, 0, 16, 32]
        assert out["cluster_spacing_ghz"] == 240.0

    def test_sweep(self, capsys, tmp_path, small_config):
        out = run_json(capsys, "sweep", "--config", small_config, "--rates", "1e5,5e5",
                       "--out-dir", tmp_path / "sw", "--workers", 2, "--keep-streams")
        check(out, "sweep")
        rows = list(csv.DictReader(open(tmp_path / "sw" / "sweep.csv")))
        assert [float(r["rate"]) for r in rows] == [1e5, 5e5]
        assert (tmp_path / "sw" / "rate_01.ptt1").exists()
        again = run_json(capsys, "sweep", "--config", small_config, "--rates", "1e5,5e5",
                         "--out-dir", tmp_path / "sw2")
        assert again["points"] == out["points"]


class TestConfig:
    def test_defaults(self):
        cfg = load_config(None)
        assert isinstance(cfg, RunConfig)
        assert cfg.source.generation_rate == pytest.approx(2.5e5)
        assert cfg.window_ns == 8.0

    def test_units_and_overrides(self):
        cfg = config_from_dict({"source": {"generation_rate_per_s": 6e5, "pump_mw": 2.0},
                                "idler_arm": {"transmission": 0.2, "splitter": 0.5,
                                              "detector": {"dead_time_ns": 50}},
                                "analysis": {"window_ns": 4.0}, "comb": {"fsr_i_ghz": 14.0}})
        assert cfg.source.pair_rate_R == 3e5
        assert cfg.idler_arm.detector.dead_time == 50 and cfg.idler_arm.detector.efficiency == 0.6
        assert cfg.window_ns == 4.0 and cfg.comb.fsr_i == 14.0

    @pytest.mark.parametrize("raw", [{"seed": -1}, {"unknown": 1}, {"source": {"pump_mw": 0}},
                                     {"source": {"generation_rate_per_s": 1, "pair_rate_per_s_mw": 1}},
                                     {"comb": {"pulling": 3}}, {"signal_arm": {"transmission": 2}}])
    def test_rejected(self, raw):
        with pytest.raises(ConfigError):
            config_from_dict(raw)

    def test_invalid_json(self, tmp_path):
        p = tmp_path / "c.json"
        p.write_text("{")
        with pytest.raises(ConfigError):
            load_config(p)
