"""Configuration parsing, mode dispatch, artifacts, and exit codes."""

import json

import numpy as np
import pytest

from finsec.cli_report import (
    Config,
    ConfigError,
    ReportDocument,
    emit_plot_data,
    main,
    parse_config,
    run,
)
from finsec.expr import Ident, Sum
from finsec.geometry import triple_curve

MINIMAL = {"p": 2, "mode": "analyze", "expression": {"op": "ident"}}

PAIRED_UNSTABLE = {
    "p": 2,
    "mode": "fsm",
    "generators": {"g1": {"kind": "sqrt_log", "k": 1}},
    "symbols": {
        "a": {"terms": [
            {"step": {"breakpoints": [0], "values": [1, 0]}},
            {"step": {"breakpoints": [0], "values": [0, 1]}, "so": ["g1"]},
        ]},
        "b": {"step": {"values": [-1]}},
    },
    "expression": {"op": "sum", "children": [
        {"op": "prod", "children": [{"op": "conv", "symbol": "a"},
                                    {"op": "mult", "symbol": "chi_minus"}]},
        {"op": "prod", "children": [{"op": "conv", "symbol": "b"},
                                    {"op": "mult", "symbol": "chi_plus"}]},
    ]},
}

PAIRED_STABLE = {
    "p": 2,
    "mode": "fsm",
    "symbols": {"a": {"step": {"values": [1]}}, "b": {"step": {"values": [-1]}}},
    "expression": {"op": "sum", "children": [
        {"op": "prod", "children": [{"op": "conv", "symbol": "a"},
                                    {"op": "mult", "symbol": "chi_minus"}]},
        {"op": "prod", "children": [{"op": "conv", "symbol": "b"},
                                    {"op": "mult", "symbol": "chi_plus"}]},
    ]},
}


class TestParseConfig:
    def test_minimal_valid(self):
        cfg = parse_config(json.dumps(MINIMAL))
        assert cfg.p == 2.0
        assert cfg.mode == "analyze"
        assert isinstance(cfg.expression, Ident)
        assert cfg.fiber["strategy"] == "product"

    def test_unknown_keys_rejected(self):
        bad = {**MINIMAL, "surprise": 1}
        with pytest.raises(ConfigError) as err:
            parse_config(json.dumps(bad))
        assert "surprise" in str(err.value)

    def test_schema_error_names_path(self):
        bad = {**MINIMAL, "grid": {"n": 3}}
        with pytest.raises(ConfigError) as err:
            parse_config(json.dumps(bad))
        assert "grid" in str(err.value)

    def test_undefined_symbol_named(self):
        bad = {**MINIMAL, "expression": {"op": "conv", "symbol": "a"}}
        with pytest.raises(ConfigError) as err:
            parse_config(json.dumps(bad))
        assert "'a'" in str(err.value)

    def test_invalid_json(self):
        with pytest.raises(ConfigError):
            parse_config("{not json")

    def test_paired_expression_builds(self):
        cfg = parse_config(json.dumps(PAIRED_UNSTABLE))
        assert isinstance(cfg.expression, Sum)
        assert "g1" in cfg.generators
        assert not cfg.symbols["a"].is_pure_step()

    def test_mult_requires_pure_step(self):
        bad = {**PAIRED_UNSTABLE,
               "expression": {"op": "mult", "symbol": "a"}}
        with pytest.raises(ConfigError) as err:
            parse_config(json.dumps(bad))
        assert "piecewise constant" in str(err.value)

    def test_phase_generator_with_safe_expression(self):
        cfg = parse_config(json.dumps({
            **MINIMAL,
            "generators": {"w": {"kind": "phase",
                                 "psi": "sqrt(log(t*t + 2))",
                                 "cluster": {"kind": "sampled", "tau0": 2,
                                             "rho": 1.5, "count": 8}}},
        }))
        vals = cfg.generators["w"].cluster_values(8)
        assert len(vals) == 8

    def test_malicious_expression_rejected(self):
        bad = {**MINIMAL,
               "generators": {"w": {"kind": "phase",
                                    "psi": "__import__('os').system('x')"}}}
        with pytest.raises(ConfigError):
            parse_config(json.dumps(bad))

    def test_raw_round_trip(self):
        cfg = parse_config(json.dumps(PAIRED_UNSTABLE))
        again = parse_config(json.dumps(cfg.raw))
        assert again.raw == cfg.raw


class TestRun:
    def test_analyze_identity(self, tmp_path, capsys):
        cfg = parse_config(json.dumps(MINIMAL))
        code = run(cfg, tmp_path)
        assert code == 0
        doc = json.loads((tmp_path / "report.json").read_text())
        assert doc["verdicts"]["verdict"] == "stable"
        assert "stable" in capsys.readouterr().out

    def test_fsm_unstable_exit_zero_with_witness(self, tmp_path):
        cfg = parse_config(json.dumps(PAIRED_UNSTABLE))
        code = run(cfg, tmp_path)
        assert code == 0
        doc = json.loads((tmp_path / "report.json").read_text())
        assert doc["verdicts"]["finite_section_method"] == "does not apply"
        c_fail = [r for r in doc["records"]
                  if r["condition"] == "c" and r["status"] == "fail"]
        assert c_fail
        x = c_fail[0]["witness"]["x"]
        assert abs(complex(x[0], x[1]) - 0.5) < 1e-6

    def test_simulate_emits_tables(self, tmp_path):
        raw = {**PAIRED_STABLE, "mode": "simulate",
               "tau_list": [4, 8], "grid": {"n": 64},
               "rhs": {"kind": "gaussian", "width": 2.0}}
        cfg = parse_config(json.dumps(raw))
        assert run(cfg, tmp_path) == 0
        sweep = (tmp_path / "sweep.csv").read_text().splitlines()
        assert sweep[0] == "tau,n,sigma_min,cond2,condp"
        assert len(sweep) == 3
        conv = (tmp_path / "convergence.csv").read_text().splitlines()
        assert conv[0] == "tau,diff_norm,residual"

    def test_spectrum_emits_cloud_and_overlay(self, tmp_path):
        raw = {**PAIRED_STABLE, "mode": "spectrum",
               "tau_list": [4], "grid": {"n": 64}}
        cfg = parse_config(json.dumps(raw))
        assert run(cfg, tmp_path) == 0
        lines = (tmp_path / "spectrum.csv").read_text().splitlines()
        assert lines[0] == "re,im"
        assert len(lines) == 65
        assert (tmp_path / "spectrum.svg").exists()
        assert (tmp_path / "lens.csv").exists()

    def test_analyze_sequence_expression_with_projseq(self, tmp_path):
        raw = {
            "p": 2,
            "mode": "analyze",
            "symbols": {"a": {"step": {"values": [1]}},
                        "b": {"step": {"values": [-1]}}},
            "expression": {"op": "sum", "children": [
                {"op": "prod", "children": [
                    {"op": "projseq"},
                    {"op": "sum", "children": [
                        {"op": "prod", "children": [
                            {"op": "conv", "symbol": "a"},
                            {"op": "mult", "symbol": "chi_minus"}]},
                        {"op": "prod", "children": [
                            {"op": "conv", "symbol": "b"},
                            {"op": "mult", "symbol": "chi_plus"}]}]},
                    {"op": "projseq"}]},
                {"op": "sum", "children": [
                    {"op": "ident"},
                    {"op": "scale", "factor": -1, "child": {"op": "projseq"}}]},
            ]},
        }
        cfg = parse_config(json.dumps(raw))
        assert run(cfg, tmp_path) == 0
        doc = json.loads((tmp_path / "report.json").read_text())
        assert doc["verdicts"]["verdict"] == "stable"

    def test_verdict_independent_of_output_paths(self, tmp_path):
        cfg1 = parse_config(json.dumps(PAIRED_STABLE))
        cfg2 = parse_config(json.dumps(
            {**PAIRED_STABLE, "output": {"report": "deep/other.json"}}))
        assert run(cfg1, tmp_path / "a") == run(cfg2, tmp_path / "b") == 0
        d1 = json.loads((tmp_path / "a" / "report.json").read_text())
        d2 = json.loads((tmp_path / "b" / "deep" / "other.json").read_text())
        assert d1["verdicts"] == d2["verdicts"]


class TestMain:
    def test_cli_round_trip(self, tmp_path):
        cfg_path = tmp_path / "c.json"
        cfg_path.write_text(json.dumps(PAIRED_STABLE))
        code = main(["fsm", "--config", str(cfg_path), "--out", str(tmp_path)])
        assert code == 0
        doc = json.loads((tmp_path / "report.json").read_text())
        assert doc["verdicts"]["finite_section_method"] == "applies"

    def test_cli_mode_overrides_config(self, tmp_path):
        cfg_path = tmp_path / "c.json"
        cfg_path.write_text(json.dumps({**PAIRED_STABLE, "mode": "analyze",
                                        "tau_list": [4], "grid": {"n": 64}}))
        code = main(["spectrum", "--config", str(cfg_path), "--out", str(tmp_path)])
        assert code == 0
        assert (tmp_path / "spectrum.csv").exists()

    def test_missing_config_is_input_error(self, tmp_path):
        assert main(["analyze", "--config", str(tmp_path / "nope.json")]) == 2

    def test_bad_config_is_input_error(self, tmp_path):
        cfg_path = tmp_path / "c.json"
        cfg_path.write_text(json.dumps({"p": 2}))
        assert main(["analyze", "--config", str(cfg_path)]) == 2

    def test_seed_recorded(self, tmp_path):
        cfg_path = tmp_path / "c.json"
        cfg_path.write_text(json.dumps(PAIRED_STABLE))
        main(["fsm", "--config", str(cfg_path), "--out", str(tmp_path),
              "--seed", "7"])
        doc = json.loads((tmp_path / "report.json").read_text())
        assert doc["environment"]["seed"] == 7

    def test_threads_env_fallback(self, tmp_path, monkeypatch):
        monkeypatch.setenv("FINSEC_THREADS", "3")
        cfg_path = tmp_path / "c.json"
        cfg_path.write_text(json.dumps(PAIRED_STABLE))
        main(["fsm", "--config", str(cfg_path), "--out", str(tmp_path)])
        doc = json.loads((tmp_path / "report.json").read_text())
        assert doc["environment"]["threads"] == 3


class TestReportAndPlots:
    def test_report_round_trip(self, tmp_path):
        cfg = parse_config(json.dumps(PAIRED_STABLE))
        run(cfg, tmp_path)
        raw = json.loads((tmp_path / "report.json").read_text())
        doc = ReportDocument.from_dict(raw)
        assert doc.to_dict() == raw

    def test_lens_plot_polyline(self, tmp_path):
        path = emit_plot_data("lens", {"p": 4.0}, tmp_path / "lens.csv")
        rows = path.read_text().splitlines()
        assert rows[0] == "curve_id,mu,re,im"
        pts = np.array([[float(v) for v in r.split(",")] for r in rows[1:]])
        z = pts[:, 2] + 1j * pts[:, 3]
        assert np.abs(z - 0.0).min() < 1e-8
        assert np.abs(z - 1.0).min() < 1e-8

    def test_point_curve_marker(self, tmp_path):
        curve = triple_curve(2.0, 1j, 1j, 1j)
        path = emit_plot_data("curve", {"curve": curve}, tmp_path / "c.csv")
        rows = path.read_text().splitlines()[1:]
        pts = {r.split(",", 2)[2] for r in rows}
        assert pts == {"0.0,1.0"}
        assert (tmp_path / "c.svg").exists()

    def test_sweep_rows_parse_back(self, tmp_path):
        rows = [[4.0, 64, 1.0, 1.0, 1.0], [8.0, 64, 1.0, 1.0, 1.0]]
        path = emit_plot_data("sweep", {"rows": rows}, tmp_path / "s.csv")
        lines = path.read_text().splitlines()
        assert [float(v) for v in lines[1].split(",")] == rows[0]

    def test_unknown_kind(self, tmp_path):
        with pytest.raises(ValueError):
            emit_plot_data("alien", {}, tmp_path / "x.csv")
