import json
import subprocess
import sys
from pathlib import Path

import jsonschema
import pytest

from steklov_lab.cli import run
from steklov_lab.schemas import CONFIG_SCHEMAS, REPORT_SCHEMAS

CONFIGS = Path(__file__).resolve().parents[1] / "configs"

# lighter settings so the whole command matrix stays fast
FAST = {
    "solve": {"h_target": 0.1},
    "stability": {"h_target": 0.1, "eps": [0.1, 0.05, 0.025]},
    "diverge": {"n_grid": [2, 4], "h_max": 0.1},
    "singularity": {"h_target": 0.05},
    "continuity": {"h_target": 0.1},
    "converge": {"levels": 3, "h_target": 0.2},
    "optimize": {"budget": 10, "restarts": 1, "h_target": 0.1},
}


def write_config(tmp_path, command, **over):
    cfg = json.loads((CONFIGS / f"{command}.json").read_text())
    cfg.update(FAST[command])
    cfg.update(over)
    p = tmp_path / f"{command}.json"
    p.write_text(json.dumps(cfg))
    return p


def reports(out: Path):
    return sorted(out.glob("*.json"))


@pytest.mark.parametrize("command", sorted(FAST))
def test_every_command_runs_and_validates(tmp_path, command):
    out = tmp_path / "out"
    assert run([command, "--config", str(write_config(tmp_path, command)), "--out", str(out), "--quiet"]) == 0
    (rep,) = reports(out)
    data = json.loads(rep.read_text())
    jsonschema.validate(data, REPORT_SCHEMAS[command])
    assert rep.name == f"{command}-{data['provenance']['settings_hash']}.json"
    assert rep.with_suffix(".csv").read_text().strip()
    assert "seconds" in rep.with_suffix(".log").read_text()


@pytest.mark.parametrize("command", sorted(CONFIG_SCHEMAS))
def test_shipped_configs_match_schema(command):
    jsonschema.validate(json.loads((CONFIGS / f"{command}.json").read_text()), CONFIG_SCHEMAS[command])


def test_malformed_json_exit_2_no_output(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"curve": {"kind": "circle",\n  "params": }')
    out = tmp_path / "out"
    assert run(["solve", "--config", str(bad), "--out", str(out)]) == 2
    assert not out.exists()
    assert "bad.json:2:" in capsys.readouterr().err


def test_schema_error_names_field(tmp_path, capsys):
    p = write_config(tmp_path, "solve", k="three")
    out = tmp_path / "out"
    assert run(["solve", "--config", str(p), "--out", str(out)]) == 2
    assert "field 'k'" in capsys.readouterr().err
    assert not out.exists()


def test_unknown_field_rejected(tmp_path):
    p = write_config(tmp_path, "solve", h=0.1)
    assert run(["solve", "--config", str(p), "--out", str(tmp_path / "o")]) == 2


def test_numerical_failure_names_stage(tmp_path, capsys):
    p = write_config(tmp_path, "solve", arcs=[[1.0, 1.01]], h_target=0.2)
    out = tmp_path / "out"
    assert run(["solve", "--config", str(p), "--out", str(out)]) == 1
    assert "stage 'meshing'" in capsys.readouterr().err
    assert not out.exists() or not reports(out)


def test_reports_byte_identical(tmp_path):
    p = write_config(tmp_path, "optimize")
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(["optimize", "--config", str(p), "--out", str(a), "--quiet"]) == 0
    assert run(["optimize", "--config", str(p), "--out", str(b), "--quiet"]) == 0
    (ra,), (rb,) = reports(a), reports(b)
    assert ra.name == rb.name and ra.read_bytes() == rb.read_bytes()
    assert ra.with_suffix(".csv").read_bytes() == rb.with_suffix(".csv").read_bytes()


def test_seed_flag_changes_provenance(tmp_path):
    p = write_config(tmp_path, "optimize")
    out = tmp_path / "o"
    assert run(["optimize", "--config", str(p), "--out", str(out), "--seed", "5", "--quiet"]) == 0
    (rep,) = reports(out)
    data = json.loads(rep.read_text())
    assert data["provenance"]["seed"] == 5 and data["config"]["seed"] == 5


def test_solve_square_first_eigenvalue(tmp_path):
    p = write_config(tmp_path, "solve", h_target=0.05)
    out = tmp_path / "o"
    assert run(["solve", "--config", str(p), "--out", str(out), "--quiet"]) == 0
    (rep,) = reports(out)
    lam = json.loads(rep.read_text())["lambda"]
    assert lam[0] == pytest.approx(3.153, rel=0.01)
    assert lam == sorted(lam)


def test_module_entry_point(tmp_path):
    p = write_config(tmp_path, "solve")
    r = subprocess.run([sys.executable, "-m", "steklov_lab.cli", "solve", "--config", str(p),
                        "--out", str(tmp_path / "o")], capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
    assert "wrote" in r.stderr


def test_missing_arguments_exit_2():
    assert run(["solve"]) == 2
