import json

import numpy as np
import pytest

from fundgap import __version__
from fundgap.cli import parse_function, run
from fundgap.domains import GraphDomain, Polygon, Simplex
from fundgap.io import SpecError, domain_from_spec, export_mesh, load_domain
from fundgap.domains import triangulate, rectangle


@pytest.fixture
def square_json(tmp_path):
    p = tmp_path / "square.json"
    p.write_text('{"type": "rectangle", "a": 1, "b": 1}')
    return p


def test_domain_specs(tmp_path):
    assert isinstance(domain_from_spec({"type": "polygon", "vertices": [[0, 0], [1, 0], [0, 1]]}), Polygon)
    assert isinstance(domain_from_spec({"type": "triangle_moduli", "p": [0.6, 0.5]}), Simplex)
    g = domain_from_spec({"type": "graph", "L": 1, "epsilon": 0.1, "profile": "sin2"})
    assert isinstance(g, GraphDomain) and g.w(0.5) == pytest.approx(1.0)
    (tmp_path / "w.csv").write_text("0,1\n0.5,2\n1,1\n")
    spec = {"type": "graph", "L": 1, "epsilon": 0.1, "profile": "weight_file", "path": "w.csv"}
    (tmp_path / "g.json").write_text(json.dumps(spec))
    assert load_domain(tmp_path / "g.json").w(0.5) == pytest.approx(2.0)
    inline = domain_from_spec({"type": "graph", "L": 1, "epsilon": 0.1, "profile": "weight_file",
                               "samples": [1, 3, 1]})
    assert inline.w(0.5) == pytest.approx(3.0)


@pytest.mark.parametrize("spec", [
    {"type": "circle"},
    {"type": "rectangle", "a": 1},
    {"type": "triangle_moduli", "p": [0.2, 0.5]},
    {"type": "graph", "L": 1, "epsilon": 0.1, "profile": "zigzag"},
    {"vertices": []},
])
def test_bad_specs(spec):
    with pytest.raises(SpecError):
        domain_from_spec(spec)


def test_mesh_export():
    m = triangulate(rectangle(1, 1), 0.5)
    lines = export_mesh(m).splitlines()
    assert lines[0] == "vertices %d" % m.n_vertices
    assert lines[m.n_vertices + 1] == "triangles %d" % m.n_triangles
    assert len(lines) == m.n_vertices + m.n_triangles + 2


def test_parse_function():
    assert parse_function("const:3")(np.zeros(2)).tolist() == [3, 3]
    assert parse_function("abs:2,0.5")(np.array([0.0])).tolist() == [1.0]
    for bad in ("const", "wiggle:1", "linear:1", "abs:x,1"):
        with pytest.raises(ValueError):
            parse_function(bad)


def test_gap_command(square_json, tmp_path, capsys):
    out = tmp_path / "g.json"
    assert run(["gap", "--domain", str(square_json), "--levels", "5", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["results"]["xi"] == pytest.approx(6 * np.pi**2, rel=1e-4)
    assert doc["version"] == __version__
    assert doc["seed"] == doc["config"]["seed"]
    assert "xi" in doc["tolerances"]
    assert "xi =" in capsys.readouterr().out


def test_schrodinger_command(tmp_path):
    out = tmp_path / "s.json"
    assert run(["schrodinger1d", "--V", "const:0", "--R", "1", "--bc", "dirichlet", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["results"]["gap"] == pytest.approx(3 * np.pi**2, abs=1e-6)


def test_byte_identical_outputs(tmp_path):
    paths = []
    for i in range(2):
        j, c = tmp_path / ("r%d.json" % i), tmp_path / ("r%d.csv" % i)
        assert run(["collapse-c1", "--nx", "32", "--eps-list", "0.4,0.2,0.1", "--out", str(j), "--csv", str(c)]) == 0
        paths.append((j.read_bytes(), c.read_bytes()))
    assert paths[0] == paths[1]
    assert paths[0][1].startswith(b"# fundgap " + __version__.encode())


def test_workers_do_not_change_output(tmp_path, monkeypatch):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run(["moduli-scan", "--grid-n", "4", "--levels", "2", "--out", str(a)]) == 0
    monkeypatch.setenv("FUNDGAP_WORKERS", "2")
    assert run(["moduli-scan", "--grid-n", "4", "--levels", "2", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


@pytest.mark.parametrize("argv", [
    ["nonsense"],
    ["gap"],
    ["gap", "--domain", "missing.json"],
    ["gap", "--domain", '{"type": "rectangle", "a": -1, "b": 1}'],
    ["gap", "--domain", "{not json"],
    ["gap", "--levels", "0", "--domain", '{"type": "rectangle", "a": 1, "b": 1}'],
    ["collapse-c1", "--eps-list", "0.1,0.2,0.05"],
    ["rectangle", "--a", "1", "--b", "2"],
    ["schrodinger1d", "--V", "wiggle:1"],
])
def test_bad_arguments_exit_2(argv):
    assert run(argv) == 2


def test_bad_worker_env(monkeypatch):
    monkeypatch.setenv("FUNDGAP_WORKERS", "many")
    assert run(["lavine", "--trials", "2"]) == 2


def test_solver_failure_exit_3(monkeypatch):
    from fundgap import cli
    from fundgap.eigensolve import ConvergenceError

    def boom(cfg):
        raise ConvergenceError("no convergence")

    monkeypatch.setitem(cli.RUNNERS, "lavine", boom)
    assert run(["lavine"]) == 3


def test_failed_check_exit_1(monkeypatch):
    from fundgap import cli

    monkeypatch.setitem(cli.RUNNERS, "lavine", lambda cfg: ({}, {}, ["a"], [], "failed", False))
    assert run(["lavine"]) == 1


def test_verify_subset(tmp_path):
    out = tmp_path / "v.json"
    assert run(["verify", "--quick", "--only", "1,12", "--out", str(out)]) == 0
    res = json.loads(out.read_text())["results"]
    assert [r["number"] for r in res] == [1, 12]


def test_help_lists_csv_columns(capsys):
    assert run(["--help"]) == 0
    assert "CSV columns" in capsys.readouterr().out
