"""Command-line behavior: exit codes, streams, file outputs."""

from __future__ import annotations

import json
import sys
import types

import pytest

from xcosw.cli import main
from xcosw.export import parse_csv
from xcosw.interchange import from_interchange_json
from xcosw.xcosxml import parse_xcos_xml, serialize_xcos_xml

from conftest import MODELS, build_dc_motor

LAG = str(MODELS / "lag.xcosw.xml")
UNSET = str(MODELS / "dc_motor_unset.xcosw.xml")
DELAY = str(MODELS / "unit_delay.xcosw.xml")


class TestValidate:
    def test_clean_model_passes_silently(self, capsys):
        assert main(["validate", LAG]) == 0
        out = capsys.readouterr()
        assert out.out == ""

    def test_unset_params_fail_with_one_line_each(self, capsys):
        assert main(["validate", UNSET]) == 1
        lines = capsys.readouterr().out.splitlines()
        assert len(lines) == 2
        assert lines[0] == "error UNSET_PARAM elec1: parameter(s) not set: num"
        assert lines[1] == "error UNSET_PARAM kgain1: parameter(s) not set: gain"

    def test_missing_file_is_an_io_error(self, capsys):
        assert main(["validate", "no/such/file.xml"]) == 2
        assert "cannot read" in capsys.readouterr().err

    def test_unparseable_file_is_an_io_error(self, tmp_path, capsys):
        bad = tmp_path / "junk.xml"
        bad.write_text("<XcosDiagram><oops</XcosDiagram>")
        assert main(["validate", str(bad)]) == 2
        assert "cannot parse" in capsys.readouterr().err

    def test_json_input_is_accepted(self, capsys):
        assert main(["validate", str(MODELS / "lag.json")]) == 0


class TestSimulate:
    def test_csv_to_stdout(self, capsys):
        assert main(["simulate", LAG, "--tf", "1", "--dt", "0.25"]) == 0
        out = capsys.readouterr().out
        res = parse_csv(out)
        assert res.times == (0.0, 0.25, 0.5, 0.75, 1.0)
        assert "scope1" in res.signals

    def test_csv_to_file_with_note_on_stderr(self, tmp_path, capsys):
        target = tmp_path / "r.csv"
        code = main(["simulate", LAG, "--tf", "3", "--out", str(target)])
        assert code == 0
        streams = capsys.readouterr()
        assert streams.out == ""
        assert f"wrote {target}" in streams.err
        text = target.read_text()
        assert text.splitlines()[0] == "t,scope1"
        res = parse_csv(text)
        assert res.times[-1] == 3.0

    def test_json_format(self, capsys):
        assert main(["simulate", LAG, "--tf", "1", "--format", "json"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["metadata"]["solver"] == "rk4"
        assert len(doc["times"]) == len(doc["signals"]["scope1"])

    def test_adaptive_flag(self, capsys):
        code = main(["simulate", LAG, "--tf", "1", "--solver", "adaptive",
                     "--format", "json"])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["metadata"]["solver"] == "adaptive"

    def test_cli_overrides_beat_file_settings(self, capsys):
        # lag fixture stores tf=3; the flag narrows it to 1
        assert main(["simulate", LAG, "--tf", "1", "--dt", "0.5"]) == 0
        res = parse_csv(capsys.readouterr().out)
        assert res.times[-1] == 1.0

    def test_file_settings_apply_without_flags(self, capsys):
        assert main(["simulate", DELAY]) == 0  # fixture stores tf=3, dt=0.05
        res = parse_csv(capsys.readouterr().out)
        assert res.times[-1] == 3.0

    def test_invalid_model_prints_diagnostics_to_stderr(self, capsys):
        assert main(["simulate", UNSET, "--tf", "1"]) == 1
        streams = capsys.readouterr()
        assert streams.out == ""
        assert "UNSET_PARAM" in streams.err

    def test_bad_options_rejected(self, capsys):
        assert main(["simulate", LAG, "--dt", "0"]) == 1
        assert "bad simulation options" in capsys.readouterr().err

    def test_plot_renders_next_to_the_csv(self, tmp_path, capsys):
        csv_path = tmp_path / "r.csv"
        png_path = tmp_path / "r.png"
        code = main([
            "simulate", LAG, "--tf", "1", "--out", str(csv_path),
            "--plot", str(png_path),
        ])
        assert code == 0
        assert csv_path.exists()
        assert png_path.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
        assert f"wrote {png_path}" in capsys.readouterr().err


class TestConvert:
    def test_xml_to_json(self, capsys):
        assert main(["convert", LAG, "--to", "json"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["format"] == 1
        assert {b["id"] for b in doc["blocks"]} == {"step1", "lag1", "scope1"}

    def test_json_to_xml_round_trip(self, tmp_path, capsys):
        json_path = tmp_path / "m.json"
        assert main(["convert", LAG, "--to", "json", "--out", str(json_path)]) == 0
        assert main(["convert", str(json_path), "--to", "xml"]) == 0
        text = capsys.readouterr().out
        original = parse_xcos_xml((MODELS / "lag.xcosw.xml").read_bytes())
        assert parse_xcos_xml(text).canonicalize() == original.canonicalize()

    def test_sniffs_json_without_extension(self, tmp_path, capsys):
        blob = tmp_path / "diagram"
        blob.write_bytes(
            (MODELS / "lag.json").read_bytes()
        )
        assert main(["convert", str(blob), "--to", "xml"]) == 0
        assert "<XcosDiagram" in capsys.readouterr().out


class TestBlocks:
    def test_palette_listing(self, capsys):
        assert main(["blocks"]) == 0
        doc = json.loads(capsys.readouterr().out)
        kinds = [entry["kind"] for entry in doc]
        assert kinds[0] == "STEP_FUNCTION"
        assert "DOLLAR" in kinds


class TestServe:
    def _install_stub(self, monkeypatch):
        calls = {}

        def run(app, host, port, log_level):
            calls.update(app=app, host=host, port=port, log_level=log_level)

        monkeypatch.setitem(sys.modules, "uvicorn", types.SimpleNamespace(run=run))
        return calls

    def test_explicit_port_flag(self, monkeypatch):
        calls = self._install_stub(monkeypatch)
        assert main(["serve", "--port", "9001"]) == 0
        assert calls["port"] == 9001
        assert calls["host"] == "127.0.0.1"

    def test_port_env_fallback(self, monkeypatch):
        calls = self._install_stub(monkeypatch)
        monkeypatch.setenv("XCOSW_PORT", "9002")
        assert main(["serve"]) == 0
        assert calls["port"] == 9002

    def test_default_port(self, monkeypatch):
        calls = self._install_stub(monkeypatch)
        monkeypatch.delenv("XCOSW_PORT", raising=False)
        assert main(["serve"]) == 0
        assert calls["port"] == 8080

    def test_flag_beats_env(self, monkeypatch):
        calls = self._install_stub(monkeypatch)
        monkeypatch.setenv("XCOSW_PORT", "9002")
        assert main(["serve", "--port", "9003"]) == 0
        assert calls["port"] == 9003
