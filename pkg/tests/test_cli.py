import hashlib
import json
import math
import subprocess
import sys

import pytest

from scherk import cli, energy, mesh, surface
from scherk.differential import scherk_function
from scherk.surface import GrainAngle, Point

from test_mesh import FIGURE1_SHA256


def run(argv, capsysbinary):
    code = cli.main(argv)
    out, err = capsysbinary.readouterr()
    return code, out, err.decode()


def test_eval_json(capsysbinary):
    code, out, _ = run(["eval", "--alpha", "1.0", "--x", "0.5", "--y", "0.25"], capsysbinary)
    assert code == 0
    doc = json.loads(out)
    g = GrainAngle(1.0)
    assert doc["z"] == surface.scherk_height(Point(0.5, 0.25), g).z
    assert doc["ell"] == g.ell and doc["sheet"] == 0 and doc["near_core"] is False
    assert len(doc["gradient"]) == 2 and len(doc["hessian"]) == 3


def test_eval_sheet_and_symmetric_zero(capsysbinary):
    code, out, _ = run(["eval", "--x", "0.0", "--y", "1.0", "--sheet", "2"], capsysbinary)
    assert code == 0
    doc = json.loads(out)
    assert doc["z"] == pytest.approx(2 * GrainAngle(math.pi / 2).jump)
    assert b"-0.0" not in out


def test_eval_on_core_is_config_error(capsysbinary):
    code, out, err = run(["eval", "--x", "0", "--y", "0"], capsysbinary)
    assert code == cli.EXIT_CONFIG and out == b"" and "core" in err


@pytest.mark.parametrize("argv", [
    [],
    ["bogus"],
    ["eval", "--x", "1"],
    ["eval", "--x", "nan", "--y", "1"],
    ["energy", "--mode", "gamma", "--range", "1:0:3"],
    ["energy", "--mode", "shift", "--range", "-0.1:0.3:3"],
    ["mesh", "--grid", "1x5"],
    ["identity", "logsin", "--tol", "-1"],
    ["identity", "theorem2", "--beta", "2.0"],
])
def test_config_errors(argv, capsysbinary):
    code, out, _ = run(argv, capsysbinary)
    assert code == cli.EXIT_CONFIG and out == b""


def test_theorem2_check_passes(capsysbinary):
    argv = ["identity", "theorem2", "--beta", "1.0472", "--n", "2", "--samples", "100", "--check", "--tol", "1e-9"]
    code, out, err = run(argv, capsysbinary)
    assert code == 0
    assert json.loads(out)["max_error"] <= 1e-9
    assert "check theorem2" in err


def test_tolerance_exceeded(capsysbinary):
    code, out, _ = run(["identity", "sineproduct", "--check", "--tol", "0"], capsysbinary)
    assert code == cli.EXIT_TOL
    assert json.loads(out)["max_error"] > 0  # payload is still written


def test_without_check_tolerance_ignored(capsysbinary):
    code, _, _ = run(["identity", "sineproduct", "--tol", "0"], capsysbinary)
    assert code == 0


def test_runtime_failure_on_unwritable_output(tmp_path, capsysbinary):
    code, _, err = run(["bi", "--samples", "5", "-o", str(tmp_path / "missing" / "x.json")], capsysbinary)
    assert code == cli.EXIT_RUNTIME and "runtime failure" in err


def test_output_file_matches_stdout(tmp_path, capsysbinary):
    argv = ["identity", "logsin", "--samples", "20"]
    _, out, _ = run(argv, capsysbinary)
    p = tmp_path / "o.json"
    code, out2, _ = run(argv + ["-o", str(p)], capsysbinary)
    assert code == 0 and out2 == b"" and p.read_bytes() == out


def test_seed_changes_samples(capsysbinary):
    _, a, _ = run(["bi", "--samples", "10", "--seed", "1"], capsysbinary)
    _, b, _ = run(["bi", "--samples", "10", "--seed", "1"], capsysbinary)
    _, c, _ = run(["bi", "--samples", "10", "--seed", "2"], capsysbinary)
    assert a == b and a != c


def test_energy_gamma_reference_row_bit_exact(capsysbinary):
    argv = ["energy", "--mode", "gamma", "--range", "0.9:1.1:3", "--L", "6", "--grid", "65",
            "--refine-tol", "0"]
    code, out, _ = run(argv, capsysbinary)
    assert code == 0
    lines = out.decode().splitlines()
    assert lines[0] == "gamma,energy" and len(lines) == 4
    gamma, e = (float(v) for v in lines[2].split(","))
    g = GrainAngle(1.0)
    assert gamma == 1.0
    assert e == energy.area_excess(scherk_function(g), g, energy.QuadratureSpec.periodic(g, 6.0, 65))


def test_mesh_obj(capsysbinary):
    code, out, err = run(["mesh", "--grid", "9x7", "--sheets", "0,1", "-v"], capsysbinary)
    assert code == 0 and "mesh:" in err
    v, t = mesh.parse_obj(out)
    assert len(v) == 2 * 63 and len(t) > 0
    assert b"g sheet_1" in out


def test_figure1_thread_independent(tmp_path, capsysbinary):
    a, b = tmp_path / "a.obj", tmp_path / "b.obj"
    assert run(["figure1", "-o", str(a)], capsysbinary)[0] == 0
    assert run(["figure1", "-o", str(b), "--threads", "4"], capsysbinary)[0] == 0
    assert a.read_bytes() == b.read_bytes()
    assert hashlib.sha256(a.read_bytes()).hexdigest() == FIGURE1_SHA256


def test_residual_check_csv(capsysbinary):
    code, out, _ = run(["residual", "--alpha", "2.5", "--grid", "21", "--check"], capsysbinary)
    assert code == 0
    lines = out.decode().splitlines()
    assert lines[0] == "x,y,residual,excluded" and len(lines) == 1 + 21 * 21


def test_console_entry_point():
    r = subprocess.run([sys.executable, "-m", "scherk.cli", "identity", "sumofsums", "--samples", "5",
                        "--check"], capture_output=True)
    assert r.returncode == 0
    assert json.loads(r.stdout)["max_error"] <= 1e-12
