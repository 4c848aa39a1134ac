import json
import subprocess
import sys

import numpy as np
import pytest

from varelastic import FORMAT_VERSION, __version__
from varelastic.cli import run
from varelastic.io import load_system, save_system
from varelastic.shapes import from_spec


@pytest.fixture
def curves(tmp_path):
    def make(spec, name=None):
        path = tmp_path / (name or spec.split(":")[0] + ".json")
        save_system(path, from_spec(spec))
        return str(path)
    return make


def test_version(capsys):
    assert run(["--version"]) == 0
    out = capsys.readouterr().out
    assert __version__ in out and f"format {FORMAT_VERSION}" in out


def test_energy_unit_circle(curves, capsys):
    assert run(["energy", "--input", curves("circle:1,2048"), "--p", "2"]) == 0
    out = capsys.readouterr().out.split()
    assert out[:6] == ["mass", "6.28318", "E_2", "6.28319", "F_2", "12.5664"]


def test_energy_json_output(curves, tmp_path):
    out = tmp_path / "e.json"
    assert run(["energy", "--input", curves("circle:1,256"), "--p", "3", "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["p"] == 3.0 and data["checks"][0]["pass"] is True


def test_check_square_fails(curves, capsys):
    assert run(["check", "--input", curves("square:2,64"), "--p", "2"]) == 1
    assert "irregular vertices: 4; relaxed energy infinite (p-polygon)" in capsys.readouterr().out


def test_check_figbm_passes():
    assert run(["check", "--gen", "figbm:512"]) == 0


def test_malformed_json_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"curves": [\n  {"nodes": [[0, 0],, [1, 1]]}\n]}')
    assert run(["energy", "--input", str(bad)]) == 2
    assert "line 2 column 21" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["energy", "--input", "/nonexistent.json"],
    ["energy", "--gen", "circle:abc"],
    ["energy", "--gen", "circle:1,64", "--p", "0.5"],
    ["energy", "--gen", "circle:1,64", "--unknown"],
    ["frobnicate"],
    ["reconstruct", "--gen", "circle:1,64", "--bbox", "1,1,0,0", "--res", "10,10", "--out", "x.pgm"],
    ["energy", "--gen", "circle:1,64", "--out", "/nonexistent/dir/x.json"],
    ["inpaint", "--lambda", "3", "--out", "r.json"],
])
def test_input_errors_exit_2(argv, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert run(argv) == 2


def test_monotonicity_csv(tmp_path):
    out = tmp_path / "m.csv"
    assert run(["monotonicity", "--gen", "circle:1,512", "--center", "0,0", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "r,A" and len(lines) == 201
    assert (tmp_path / "m.svg").exists()


def test_reconstruct_pgm(tmp_path):
    out = tmp_path / "d.pgm"
    argv = ["reconstruct", "--gen", "circle:1,512", "--bbox", "-2,-2,2,2", "--res", "64,32", "--out", str(out)]
    assert run(argv) == 0
    first = out.read_bytes()
    assert first.startswith(b"P5\n64 32\n255\n") and len(first) == len(b"P5\n64 32\n255\n") + 64 * 32
    side = json.loads((tmp_path / "d.json").read_text())
    assert side["bbox"] == [-2.0, -2.0, 2.0, 2.0] and side["resolution"] == [64, 32]
    assert run(["--threads", "3"] + argv) == 0
    assert out.read_bytes() == first


def test_graph_report(tmp_path, curves):
    rep = tmp_path / "g.json"
    assert run(["graph", "--input", curves("figbm:512"), "--report", str(rep)]) == 0
    data = json.loads(rep.read_text())
    assert len(data["vertices"]) == 5
    assert sorted(e["multiplicity"] for e in data["edges"]) == [1, 1, 1, 1, 2, 2, 2, 2]
    assert data["regularity"]["regular"] and data["cusp_parity"]["even"]
    assert run(["graph", "--gen", "square:2,64", "--report", str(rep), "--snap-tol", "1e-6"]) == 1


def test_cusps(tmp_path, capsys):
    out = tmp_path / "c.json"
    assert run(["cusps", "--gen", "two-cusp:256", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["cusp_count"] == 2
    assert run(["cusps", "--gen", "square:2,64"]) == 1


def test_minimize_with_freeze(tmp_path, curves):
    src = curves("ellipse:2,1,96")
    freeze = tmp_path / "freeze.json"
    freeze.write_text(json.dumps({"frozen": [list(range(20))]}))
    out, trace = tmp_path / "solved.json", tmp_path / "trace.csv"
    argv = ["minimize", "--input", src, "--freeze", str(freeze), "--p", "2", "--lambda", "1",
            "--iters", "100", "--grad-tol", "1e-8", "--out", str(out), "--trace", str(trace)]
    assert run(argv) == 0
    before, after = load_system(src), load_system(out)
    assert np.array_equal(before.curves[0].nodes[:20], after.curves[0].nodes[:20])
    assert trace.read_text().splitlines()[0] == "iter,energy,grad_norm,step"
    assert (tmp_path / "trace.svg").exists()
    first = (out.read_bytes(), trace.read_bytes())
    assert run(argv) == 0
    assert (out.read_bytes(), trace.read_bytes()) == first


def test_minimize_bad_freeze(tmp_path, curves):
    freeze = tmp_path / "freeze.json"
    freeze.write_text(json.dumps({"frozen": [[0, 999]]}))
    assert run(["minimize", "--input", curves("circle:1,32"), "--freeze", str(freeze),
                "--out", str(tmp_path / "o.json")]) == 2


def test_render_is_byte_identical(tmp_path, curves):
    src = curves("figbm:512")
    a, b = tmp_path / "a.svg", tmp_path / "b.svg"
    assert run(["render", "--input", src, "--out", str(a)]) == 0
    assert run(["render", "--input", src, "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    text = a.read_text()
    assert "multiplicity 1" in text and "multiplicity 2" in text


def test_inpaint_and_bm_compare_short(tmp_path):
    out = tmp_path / "r.json"
    assert run(["inpaint", "--lambda", "0.2", "--res", "16", "--iters", "30", "--out", str(out)]) in (0, 1)
    assert json.loads(out.read_text())["scenario"] == "inpaint"
    assert run(["bm-compare", "--res", "16", "--iters", "30", "--out", str(out)]) in (0, 1)
    assert json.loads(out.read_text())["scenario"] == "bm-compare"


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "varelastic", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and __version__ in proc.stdout
