import json
import subprocess
import sys

import numpy as np
import pytest

from motile.cli import main
from motile.config import (SUBCOMMANDS, ConvergeSettings, SimulateSettings, config_from_dict, parse_config,
                           serialize_config)
from motile.errors import ParseError, ValidationError
from motile.geometry import build_curve, circle_points, ellipse_points
from motile.interface_solver import SimConfig, run
from motile.io import (load_trajectory, read_curve_csv, read_graph_csv, save_trajectory,
                       write_curve_csv, write_graph_csv)
from motile.svg import emit_svg


# configuration

def test_empty_config_gives_defaults():
    settings = parse_config(None)
    assert isinstance(settings, SimulateSettings)
    assert settings.config == SimConfig()
    assert config_from_dict({}) == settings


def test_supercritical_beta_rejected(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"beta": 2.0}))
    with pytest.raises(ValidationError):
        parse_config(path)


def test_unknown_key_rejected():
    with pytest.raises(ValidationError):
        config_from_dict({"betta": 0.5})
    with pytest.raises(ValidationError):
        config_from_dict({"Ns": [32, 64], "speed": 1}, "converge")


@pytest.mark.parametrize("kind", SUBCOMMANDS)
def test_config_round_trip(kind):
    settings = config_from_dict({}, kind)
    assert config_from_dict(json.loads(serialize_config(settings)), kind) == settings


def test_converge_round_trip_non_default():
    settings = config_from_dict({"zeta": 1.5, "Ns": [64, 128, 256], "tol": 1e-5}, "converge")
    assert isinstance(settings, ConvergeSettings)
    assert config_from_dict(json.loads(serialize_config(settings)), "converge") == settings


def test_parse_error_reports_position(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "n": 64\n  "beta": 0.5\n}\n')
    with pytest.raises(ParseError, match=r"bad\.json:3:3: Expecting ','"):
        parse_config(path)


# files

def test_curve_csv_round_trip(tmp_path):
    c = build_curve(ellipse_points(37, 4.0, 3.0, center=(0.1, -0.3)))
    path = write_curve_csv(c, tmp_path / "c.csv")
    assert path.read_text().splitlines()[0] == "x,y"
    assert np.array_equal(read_curve_csv(path).points, c.points)


def test_graph_csv_round_trip(tmp_path):
    s = np.linspace(0, 2 * np.pi, 16, endpoint=False)
    u = 0.1 * np.cos(2 * s) + 1e-17
    s2, u2 = read_graph_csv(write_graph_csv(s, u, tmp_path / "g.csv"))
    assert np.array_equal(s2, s) and np.array_equal(u2, u)


def test_trajectory_round_trip(tmp_path):
    traj = run(build_curve(ellipse_points(32, 2.0, 1.5)), SimConfig(n=32, beta=0.5, t_end=0.3))
    files = save_trajectory(traj, tmp_path / "traj")
    assert all(f.exists() for f in files)
    back = load_trajectory(tmp_path / "traj")
    assert back.times == pytest.approx(traj.times, abs=0)
    assert all(a == b for a, b in zip(back.snapshots, traj.snapshots))
    assert back.initial_area == traj.initial_area


# svg

def test_svg_single_circle():
    text = emit_svg([build_curve(circle_points(64))])
    assert "<svg" in text and text.rstrip().endswith("</svg>")
    assert text.count("<path") == 1


def test_svg_distinct_strokes_and_deterministic():
    curves = [build_curve(circle_points(64)), build_curve(ellipse_points(64, 2, 1))]
    a, b = emit_svg(curves), emit_svg(curves)
    assert a == b
    strokes = [part.split('"')[0] for part in a.split('stroke="')[1:]]
    assert len(set(strokes[:2])) == 2


def test_svg_requires_curves():
    with pytest.raises(ValueError):
        emit_svg([])


# command line

def test_main_phi_table(tmp_path):
    cfg = tmp_path / "t.json"
    cfg.write_text(json.dumps({"v_min": -2.0, "v_max": 2.0, "k": 33, "m": 1001}))
    assert main(["phi-table", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    manifest = json.loads((tmp_path / "o" / "manifest.json").read_text())
    assert manifest["status"] == "ok"
    table = json.loads((tmp_path / "o" / "phi0_table.json").read_text())
    assert len(table["values"]) == 33


def test_main_traveling_wave(tmp_path):
    out = tmp_path / "w"
    assert main(["traveling-wave", "--c", "0.5", "--lambda", "1", "--beta", "1", "--out", str(out)]) == 0
    rows = (out / "profile.csv").read_text().splitlines()
    assert rows[0] == "x,w_B,w_F,y_B,y_F"
    report = json.loads((out / "report.json").read_text())
    assert report["gap"] > 0


def test_main_wave_sweep(tmp_path):
    cfg = tmp_path / "s.json"
    cfg.write_text(json.dumps({"sweep": {"c": [0.5], "lambda": [1.0, 2.0], "beta": [1.0]}}))
    out = tmp_path / "s"
    assert main(["traveling-wave", "--sweep", "--config", str(cfg), "--out", str(out)]) == 0
    lines = (out / "sweep.csv").read_text().splitlines()
    assert lines[0] == "c,lambda,beta,x_star_B,x_star_F,gap,pointwise_ok" and len(lines) == 3


def test_main_simulate_with_svg(tmp_path):
    cfg = tmp_path / "sim.json"
    cfg.write_text(json.dumps({"n": 64, "beta": 0.5, "t_end": 0.2,
                               "initial": {"kind": "ellipse", "a": 2.0, "b": 1.0}}))
    out = tmp_path / "sim"
    assert main(["simulate", "--config", str(cfg), "--out", str(out), "--svg"]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["status"] == "ok"
    assert (out / "overlay.svg").exists()
    assert load_trajectory(out / "trajectory").final.n == 64


def test_main_graph_simulate(tmp_path):
    cfg = tmp_path / "g.json"
    cfg.write_text(json.dumps({"n": 64, "beta": 0.5, "t_end": 0.01, "checkpoints": 2}))
    out = tmp_path / "g"
    assert main(["graph-simulate", "--config", str(cfg), "--out", str(out)]) == 0
    assert sorted(p.name for p in out.glob("state_*.csv"))


def test_main_reports_validation_error(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"beta": 2.0}))
    out = tmp_path / "bad"
    assert main(["simulate", "--config", str(cfg), "--out", str(out)]) == 1
    assert capsys.readouterr().err.startswith("ValidationError:")
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["status"] == "error" and manifest["error"].startswith("ValidationError")


def test_console_entry_point_exit_code(tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text("{not json")
    proc = subprocess.run([sys.executable, "-m", "motile", "phi-table", "--config", str(cfg),
                           "--out", str(tmp_path / "x")], capture_output=True, text=True)
    assert proc.returncode == 1
    assert "ParseError" in proc.stderr and "bad.json:1:2" in proc.stderr
