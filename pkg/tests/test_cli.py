"""
Test suite for the command-line entry point
"""

import json
from pathlib import Path

import pytest
import yaml

from nda_riccati.cli import EXIT_BLOWUP, EXIT_CONFIG, EXIT_OK, EXIT_TOLERANCE, main

GOLDEN = Path(__file__).parent / "golden"


def _write_spec(tmp_path, name, data):
    path = tmp_path / name
    path.write_text(json.dumps(data), encoding="utf-8")
    return str(path)


def _run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, out


class TestCommands:
    """Test cases for the individual subcommands"""

    def test_laws(self, capsys):
        """Test the composition law report"""
        code, out = _run(capsys, ["laws", "--algebra", "O", "--samples", "20", "--seed", "1"])
        payload = json.loads(out)
        assert code == EXIT_OK
        assert payload["status"] == "ok"
        assert payload["config"]["command"] == "laws"
        assert payload["config"]["algebra"] == "O"
        assert payload["config"]["samples"] == 20

    def test_laws_deterministic(self, capsys):
        """Test that a fixed seed gives byte-identical output"""
        argv = ["laws", "--algebra", "H", "--samples", "15", "--seed", "4", "--float"]
        _, first = _run(capsys, argv)
        _, second = _run(capsys, argv)
        assert first == second

    def test_closure(self, capsys, tmp_path):
        """Test the quaternionic closure with a rendered table"""
        table = tmp_path / "closure.txt"
        code, out = _run(capsys, ["closure", "--algebra", "H", "--table", str(table)])
        payload = json.loads(out)
        assert code == EXIT_OK
        assert payload["dimension"] == 15
        assert payload["closed"] is True
        assert len(table.read_text(encoding="utf-8").splitlines()) == 15

    def test_integrate_blowup(self, capsys, tmp_path):
        """Test that tan(t) past its pole exits with the blow-up code"""
        spec = _write_spec(tmp_path, "tan.json", {"algebra": "R", "b_minus": 1, "b_plus": 1})
        code, out = _run(capsys, ["integrate", "--spec", spec, "--t1", "2"])
        assert code == EXIT_BLOWUP
        assert json.loads(out)["status"] == "blowup"

    def test_integrate_csv(self, capsys, tmp_path):
        """Test that the trajectory is written to the requested CSV"""
        spec = _write_spec(tmp_path, "rot.json", {"algebra": "H", "b_0L": [0, 1, 0, 0], "initial": [1, 0, 0, 0]})
        csv_path = tmp_path / "traj.csv"
        code, out = _run(capsys, ["integrate", "--spec", spec, "--step", "0.1", "--csv", str(csv_path)])
        assert code == EXIT_OK
        assert json.loads(out)["points"] == 11
        assert csv_path.read_text().splitlines()[0] == "t,x_0,x_1,x_2,x_3"

    def test_superposition(self, capsys, tmp_path):
        """Test the real superposition rule from the command line"""
        spec = _write_spec(tmp_path, "tan.json", {"algebra": "R", "b_minus": 1, "b_plus": 1})
        code, out = _run(capsys, ["superposition", "--spec", spec, "--t1", "0.5",
                                  "--initials", "0", "0.1", "-0.2", "--k", "1.5"])
        assert code == EXIT_OK
        assert json.loads(out)["max_error"] < 1e-6

    def test_conformal(self, capsys, tmp_path):
        """Test the exact conformal check"""
        spec = _write_spec(tmp_path, "oct.json", {"algebra": "O", "b_minus": [1, 0, 0, 0, 0, 0, 0, 2],
                                                  "b_0R": [0, 1, 0, 0, 0, 0, 0, 0], "b_plus": "1/2"})
        code, out = _run(capsys, ["conformal", "--spec", spec, "--check", "30"])
        payload = json.loads(out)
        assert code == EXIT_OK
        assert payload["exact"] is True
        assert payload["samples"] == 30

    def test_lift_compare(self, capsys, tmp_path):
        """Test the projected lift against the direct solution"""
        spec = _write_spec(tmp_path, "quat.json", {"algebra": "H", "b_minus": [0, 1, 0, 0], "b_plus": [0, 0, 1, 0]})
        code, out = _run(capsys, ["lift", "--spec", spec, "--compare"])
        payload = json.loads(out)
        assert code == EXIT_OK
        assert payload["comparison"]["max_deviation"] < 1e-5

    def test_lift_compare_needs_riccati_spec(self, capsys, tmp_path):
        """Test that comparing a raw lift spec is a usage error"""
        spec = _write_spec(tmp_path, "lift.json", {"algebra": "C", "a12": [1, 0]})
        code, _ = _run(capsys, ["lift", "--spec", spec, "--compare"])
        assert code == EXIT_CONFIG

    def test_symplectic(self, capsys):
        """Test the quaternionic symplectic report"""
        code, out = _run(capsys, ["symplectic", "--algebra", "H", "--samples", "10"])
        assert code == EXIT_OK
        assert json.loads(out)["passed"] is True

    def test_schrodinger_tolerance(self, capsys, tmp_path):
        """Test that a coarse grid fails the residual tolerance"""
        spec = _write_spec(tmp_path, "psi.json", {"V": {"type": "polynomial", "params": {"coeffs": [1, 1]}},
                                                  "W": [0, "1/2"], "psi0": [1, 0, 1, 0]})
        code, out = _run(capsys, ["schrodinger", "--spec", spec, "--step", "0.1"])
        assert code == EXIT_TOLERANCE
        assert json.loads(out)["status"] == "tolerance_failed"

    def test_schrodinger_ok(self, capsys, tmp_path):
        """Test a fine-grid Schrodinger run"""
        spec = _write_spec(tmp_path, "psi.json", {"V": "8/25", "u0": ["4/5", 0, 0, 0]})
        code, out = _run(capsys, ["schrodinger", "--spec", spec])
        assert code == EXIT_OK
        assert json.loads(out)["max_residual"] < 1e-5

    def test_table_matches_golden(self, capsys):
        """Test that the default table is the octonionic linear table"""
        code, out = _run(capsys, ["table"])
        assert code == EXIT_OK
        assert out == (GOLDEN / "octonion_linear_fields.txt").read_text(encoding="utf-8")

    def test_out_file(self, capsys, tmp_path):
        """Test that --out writes the report instead of stdout"""
        target = tmp_path / "reports" / "laws.json"
        code, out = _run(capsys, ["laws", "--algebra", "C", "--samples", "5", "--out", str(target)])
        assert code == EXIT_OK
        assert out == ""
        assert json.loads(target.read_text(encoding="utf-8"))["algebra"] == "C"


class TestConfiguration:
    """Test cases for run configuration errors"""

    def test_missing_algebra(self, capsys):
        """Test that laws needs --algebra"""
        code, _ = _run(capsys, ["laws"])
        assert code == EXIT_CONFIG

    def test_unknown_algebra(self, capsys):
        """Test that unknown algebra names are rejected"""
        code, _ = _run(capsys, ["laws", "--algebra", "S"])
        assert code == EXIT_CONFIG

    def test_missing_spec(self, capsys):
        """Test that integrate needs --spec"""
        code, _ = _run(capsys, ["integrate"])
        assert code == EXIT_CONFIG

    def test_reversed_interval(self, capsys, tmp_path):
        """Test that t1 must exceed t0"""
        spec = _write_spec(tmp_path, "zero.json", {"algebra": "R"})
        code, _ = _run(capsys, ["integrate", "--spec", spec, "--t0", "1", "--t1", "0"])
        assert code == EXIT_CONFIG

    def test_config_file(self, capsys, tmp_path):
        """Test that a YAML config supplies options and the command line overrides them"""
        config = tmp_path / "run.yaml"
        config.write_text(yaml.safe_dump({"algebra": "C", "samples": 10, "seed": 3}), encoding="utf-8")
        code, out = _run(capsys, ["laws", "--config", str(config), "--seed", "5"])
        payload = json.loads(out)
        assert code == EXIT_OK
        assert payload["config"]["algebra"] == "C"
        assert payload["config"]["samples"] == 10
        assert payload["config"]["seed"] == 5

    def test_config_file_unknown_key(self, capsys, tmp_path):
        """Test that unknown config keys are rejected"""
        config = tmp_path / "run.yaml"
        config.write_text(yaml.safe_dump({"algebra": "C", "colour": "blue"}), encoding="utf-8")
        code, _ = _run(capsys, ["laws", "--config", str(config)])
        assert code == EXIT_CONFIG

    def test_bad_spec_file(self, capsys, tmp_path):
        """Test that a malformed spec is reported with the config exit code"""
        spec = _write_spec(tmp_path, "bad.json", {"algebra": "H", "b_minus": [1, 2]})
        code, _ = _run(capsys, ["integrate", "--spec", spec])
        assert code == EXIT_CONFIG


if __name__ == "__main__":
    pytest.main([__file__])
