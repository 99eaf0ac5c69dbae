# test/test_cli.py
import os
import sys

# 将项目根目录添加到 sys.path，确保 src 模块可导入
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src import config
from src.main import main
from src.surfaces.catalog import hopf_family
from src.surfaces.model import canonical_code
from src.surfaces.moves import ih_neighbors
from src.tools.mbs_format import serialize_surfaces

HOPF34 = os.path.join(config.FIXTURES_PATH, "hopf34.mbs")


def test_validate(capsys):
    assert main(["validate", HOPF34]) == 0
    out = capsys.readouterr().out
    assert out.splitlines() == ["X1: ok", "X2: ok", "X3: ok", "X4: ok"]


def test_info_reports_invariants(capsys):
    assert main(["info", HOPF34, "X1"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert "chi_E: 0" in lines
    assert "H1: Z" in lines
    assert "H2: 0" in lines
    assert "class_x: in_class" in lines
    assert "minimality: minimal" in lines


def test_boundary(capsys):
    assert main(["boundary", HOPF34, "X4"]) == 0
    assert "summary: 3x torus" in capsys.readouterr().out


def test_apply_prints_surface_block(capsys):
    assert main(["apply", HOPF34, "X4", "ix:C", "--out-name", "Y"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "surface Y"
    assert lines[1] == "branch m1 degree=4 shift=0"


def test_equiv_no_within_depth(capsys):
    assert main(["equiv", HOPF34, "X2,X3", "--depth", "4"]) == 1
    assert "verdict: no-within-depth 4" in capsys.readouterr().out


def test_order_uses_document_certificate(capsys):
    assert main(["order", HOPF34, "X1,X2"]) == 0
    out = capsys.readouterr().out
    assert "euler_filter: pass" in out
    assert "certificate: verified" in out
    assert "condition2: assumed" in out


def test_hasse_writes_dot(tmp_path, capsys):
    dot = tmp_path / "hasse.dot"
    assert main(["hasse", HOPF34, "--dot", str(dot)]) == 0
    out = capsys.readouterr().out
    assert "edges: 4" in out
    assert "edge: X1 -> X2" in out
    assert dot.exists()


def test_catalog_reproduces_fixture(capsys):
    assert main(["catalog", "hopf", "3", "4"]) == 0
    with open(HOPF34, "r", encoding="utf-8") as f:
        assert capsys.readouterr().out == f.read()


def test_catalog_bad_parameters_exit_code(capsys):
    assert main(["catalog", "hopf", "4", "6"]) == 1
    assert "BadParameters" in capsys.readouterr().err


def test_parse_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.mbs"
    bad.write_text("surface A\nbranch l degree=3\nattach l.7 D.0\n", encoding="utf-8")
    assert main(["validate", str(bad)]) == 2
    assert "line 3" in capsys.readouterr().err


def test_unknown_surface_exit_code(capsys):
    assert main(["info", HOPF34, "X9"]) == 2


def test_equiv_log_then_replay(tmp_path, capsys):
    X4 = hopf_family(3, 4).surfaces["X4"]
    other = [Y for Y in ih_neighbors(X4) if canonical_code(Y) != canonical_code(X4)][0]
    doc = tmp_path / "pair.mbs"
    doc.write_text(serialize_surfaces({"A": X4, "B": other}), encoding="utf-8")
    log = tmp_path / "path.log"
    assert main(["equiv", str(doc), "A,B", "--depth", "2", "--log", str(log)]) == 0
    assert "verdict: equivalent" in capsys.readouterr().out
    assert main(["replay", str(doc), "A,B", str(log)]) == 0
    assert "verdict: replayed" in capsys.readouterr().out
