import json
import math

import pytest

from spherelab import cli, report
from spherelab.errors import ConfigError


def run_doc(study="frequency-disappearance", raw=None, seed=0):
    config = cli.build_config(study, raw, seed_override=seed)
    return cli.run_study(config)


class TestConfigParsing:
    def test_flat_format_with_comments(self, tmp_path):
        path = tmp_path / "cfg.txt"
        path.write_text("# study config\nn_fixed = 8   # inline comment\n\nm_values = 64,128,256\n")
        raw = cli.parse_config_file(path)
        assert raw["n_fixed"][0] == "8"
        assert raw["m_values"] == ("64,128,256", 4)

    def test_missing_equals_reports_line(self, tmp_path):
        path = tmp_path / "cfg.txt"
        path.write_text("n_fixed 8\n")
        with pytest.raises(ConfigError, match="line 1"):
            cli.parse_config_file(path)

    def test_duplicate_key_rejected(self, tmp_path):
        path = tmp_path / "cfg.txt"
        path.write_text("seed = 1\nseed = 2\n")
        with pytest.raises(ConfigError, match="duplicate"):
            cli.parse_config_file(path)

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown key 'bogus'"):
            cli.build_config("frequency-disappearance", {"bogus": ("1", 3)})

    def test_unknown_study_rejected(self):
        with pytest.raises(ConfigError, match="unknown study"):
            cli.build_config("no-such-study")

    def test_empty_degree_grid_named(self):
        with pytest.raises(ConfigError, match="degree grid spec.*m_values"):
            cli.build_config("frequency-disappearance", {"m_values": ("", 1)})

    def test_bad_value_names_field_and_line(self):
        with pytest.raises(ConfigError, match=r"\[field: n_fixed\] \[line 7\]"):
            cli.build_config("frequency-disappearance", {"n_fixed": ("eight", 7)})

    def test_defaults_applied(self):
        config = cli.build_config("bilinear-sharpness-s2")
        assert config.params["n_values"] == [8, 16, 32, 64, 128, 256, 512]
        assert config.params["seed"] == 0

    def test_seed_override(self):
        config = cli.build_config("bilinear-sharpness-s2", seed_override=42)
        assert config.params["seed"] == 42


class TestRunStudy:
    def test_bilinear_defaults(self):
        doc = run_doc("bilinear-sharpness-s2",
                      {"n_values": ("8,16,32,64", 1)})
        fit = doc.fits["ratio_vs_min_degree"]
        assert fit.exponent == pytest.approx(0.25, abs=0.03)
        assert doc.meta["seed"] == 0
        assert doc.meta["sample_count"] == 4

    def test_deterministic_payload(self):
        a = run_doc("windowed-projector", {"centers": ("8", 1), "n_draws": ("4", 2)})
        b = run_doc("windowed-projector", {"centers": ("8", 1), "n_draws": ("4", 2)})
        assert report.stable_payload(a) == report.stable_payload(b)


class TestEmitReport:
    def test_csv_schema(self):
        doc = run_doc(raw={"m_values": ("64,128,256", 1)})
        rows = report.parse_report(report.emit_report(doc, "csv"), "csv")
        assert list(rows[0].keys()) == list(report.CSV_COLUMNS)
        for row in rows:
            assert row["family_h"] == ""
            assert row["k"] == ""
            got = float(row["ratio_over_bound"])
            expected = float(row["ratio"]) / float(row["bound"])
            assert got == pytest.approx(expected, rel=1e-11)

    def test_csv_trilinear_rows_filled(self):
        doc = run_doc("trilinear-s2", {"n_values": ("2,4,8", 1), "m_values": ("2,4,8", 2)})
        rows = report.parse_report(report.emit_report(doc, "csv"), "csv")
        assert all(row["family_h"] == "highest-weight" for row in rows)
        assert all(row["k"] != "" for row in rows)

    def test_csv_12_significant_digits(self):
        doc = run_doc(raw={"m_values": ("64,128,256", 1)})
        rows = report.parse_report(report.emit_report(doc, "csv"), "csv")
        sample = doc.grids[0].samples[0]
        assert rows[0]["ratio"] == f"{sample.ratio:.12g}"
        assert len(rows[0]["ratio"].replace(".", "").replace("-", "").lstrip("0")) <= 13

    def test_json_round_trip(self):
        doc = run_doc("critical-exponent", {"m_values": ("16,32,64", 1)})
        parsed = report.parse_report(report.emit_report(doc, "json"), "json")
        assert parsed == doc

    def test_round_trip_preserves_inf_exponent(self):
        from spherelab.experiments import critical_p_scan
        grid = critical_p_scan(2, [8, 16, 32], [2.0, math.inf])
        doc = report.ReportDocument(study="critical-exponent", config={}, grids=[grid])
        parsed = report.parse_report(report.emit_report(doc, "json"), "json")
        assert parsed == doc
        assert any(s.lebesgue_r == math.inf for s in parsed.grids[0].samples)

    def test_unknown_format(self):
        doc = run_doc(raw={"m_values": ("64,128,256", 1)})
        with pytest.raises(ValueError):
            report.emit_report(doc, "yaml")


class TestPlot:
    def test_two_sample_doc_has_two_marks(self):
        from spherelab.experiments import ratio_grid
        grid = ratio_grid(2, "highest-weight", "highest-weight", [(4, 4), (8, 8)])
        doc = report.ReportDocument(study="demo", config={}, grids=[grid])
        svg = report.plot_svg(doc).decode()
        # the scatter group carries one <use> per sample
        group = svg.split('<g id="PathCollection_1">', 1)[1].split("</g>", 1)[0]
        assert group.count("<use") == 2

    def test_slope_annotation_matches_fit(self):
        doc = run_doc("bilinear-sharpness-s2", {"n_values": ("8,16,32,64", 1)})
        svg = report.plot_svg(doc).decode()
        fit = doc.fits["ratio_vs_min_degree"]
        assert f"{fit.exponent:.4f}" in svg

    def test_identical_docs_identical_bytes(self):
        a = run_doc(raw={"m_values": ("64,128,256", 1)})
        b = run_doc(raw={"m_values": ("64,128,256", 1)})
        assert report.plot_svg(a) == report.plot_svg(b)

    def test_too_few_samples(self):
        from spherelab.experiments import ratio_grid
        grid = ratio_grid(2, "zonal", "zonal", [(4, 4)])
        doc = report.ReportDocument(study="demo", config={}, grids=[grid])
        with pytest.raises(ValueError):
            report.plot_svg(doc)


class TestMain:
    def test_successful_run_writes_outputs(self, tmp_path, capsys):
        code = cli.main(["run", "frequency-disappearance", "--out", str(tmp_path),
                         "--format", "json", "--plot"])
        assert code == 0
        out = capsys.readouterr().out
        assert "fit ratio_vs_m" in out
        json_path = tmp_path / "frequency-disappearance.json"
        svg_path = tmp_path / "frequency-disappearance.svg"
        assert json_path.exists() and svg_path.exists()
        payload = json.loads(json_path.read_bytes())
        assert payload["study"] == "frequency-disappearance"
        assert payload["meta"]["seed"] == 0

    def test_csv_default_format(self, tmp_path):
        code = cli.main(["run", "critical-exponent", "--out", str(tmp_path),
                         "--config", str(_write(tmp_path, "m_values = 16,32,64\n"))])
        assert code == 0
        assert (tmp_path / "critical-exponent.csv").exists()

    def test_config_error_exit_code(self, tmp_path, capsys):
        cfg = _write(tmp_path, "m_values = \n")
        code = cli.main(["run", "frequency-disappearance", "--config", str(cfg),
                         "--out", str(tmp_path)])
        assert code == 2
        assert "degree grid spec" in capsys.readouterr().err

    def test_unknown_key_exit_code(self, tmp_path):
        cfg = _write(tmp_path, "wavelength = 3\n")
        assert cli.main(["run", "frequency-disappearance", "--config", str(cfg),
                         "--out", str(tmp_path)]) == 2

    def test_budget_exit_code(self, tmp_path):
        cfg = _write(tmp_path, "centers = 4000\nn_draws = 2\n")
        assert cli.main(["run", "windowed-projector", "--config", str(cfg),
                         "--out", str(tmp_path)]) == 4

    def test_study_name_mismatch(self, tmp_path):
        cfg = _write(tmp_path, "study = critical-exponent\n")
        assert cli.main(["run", "frequency-disappearance", "--config", str(cfg),
                         "--out", str(tmp_path)]) == 2

    def test_unwritable_output_path(self, tmp_path):
        blocker = tmp_path / "blocker"
        blocker.write_text("not a directory")
        code = cli.main(["run", "frequency-disappearance", "--out", str(blocker)])
        assert code == 2

    def test_seed_echoed(self, tmp_path):
        code = cli.main(["run", "frequency-disappearance", "--seed", "7",
                         "--out", str(tmp_path), "--format", "json"])
        assert code == 0
        payload = json.loads((tmp_path / "frequency-disappearance.json").read_bytes())
        assert payload["meta"]["seed"] == 7
        assert payload["config"]["seed"] == 7

    def test_bilinear_default_config_exponent(self, tmp_path):
        code = cli.main(["run", "bilinear-sharpness-s2", "--out", str(tmp_path),
                         "--format", "json"])
        assert code == 0
        payload = json.loads((tmp_path / "bilinear-sharpness-s2.json").read_bytes())
        exponent = payload["fits"]["ratio_vs_min_degree"]["exponent"]
        assert abs(exponent - 0.25) < 0.02


def _write(tmp_path, text):
    path = tmp_path / "cfg.txt"
    path.write_text(text)
    return path
