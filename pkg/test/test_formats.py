# test/test_formats.py
import os
import sys

import pytest

# 将项目根目录添加到 sys.path，确保 src 模块可导入
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src import config
from src.surfaces.catalog import hopf_family, theta_torus
from src.surfaces.errors import ParseError
from src.surfaces.model import canonical_code
from src.surfaces.order import hasse
from src.tools.cert_format import facts_from_document, load_certificate, parse_certificate, serialize_certificate
from src.tools.dot_writer import to_dot, write_dot
from src.tools.mbs_format import load, parse, serialize, serialize_surfaces


def _fixture(name):
    return os.path.join(config.FIXTURES_PATH, name)


def _read(name):
    with open(_fixture(name), "r", encoding="utf-8") as f:
        return f.read()


@pytest.mark.parametrize("p, q", [(3, 4), (3, 5)])
def test_hopf_fixture_matches_catalog(p, q):
    name = f"hopf{p}{q}.mbs"
    doc = load(_fixture(name))
    assert doc.names == ["X1", "X2", "X3", "X4"]
    text = _read(name)
    assert serialize(doc) == text, "规范输出应与样例文件逐字节一致"
    assert serialize_surfaces(hopf_family(p, q).surfaces, doc.facts) == text
    for n, X in hopf_family(p, q).surfaces.items():
        assert canonical_code(doc.build(n)) == canonical_code(X)


def test_theta_fixture_matches_catalog():
    assert serialize_surfaces({"theta": theta_torus()}) == _read("theta.mbs")


@pytest.mark.parametrize("p, q", [(3, 4), (3, 5)])
def test_certificate_fixtures(p, q):
    fam = hopf_family(p, q)
    for (lo, hi), cert in fam.certificates.items():
        name = f"hopf{p}{q}_{lo}_{hi}.cert"
        assert load_certificate(_fixture(name)) == cert
        assert serialize_certificate(cert) == _read(name)


def test_facts_from_document_carry_certificates():
    doc = load(_fixture("hopf34.mbs"))
    facts = facts_from_document(doc)
    assert [(f.lower, f.upper, f.evidence) for f in facts] == [
        ("X1", "X2", "certificate"),
        ("X1", "X3", "certificate"),
        ("X2", "X4", "certificate"),
        ("X3", "X4", "certificate"),
    ]
    cited = parse('surface A\nbranch l degree=1\nsector D orientable boundaries=1\nattach l.0 D.0\n'
                  'fact A le A cite="folklore"\nfact A equal A\n')
    assert [(f.evidence, f.citation) for f in facts_from_document(cited)] == [
        ("citation", "folklore"),
        ("filter-only", ""),
    ]


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("surface A\nbranch l1 degree=3 shift=1\nsector A orientable boundaries=2\nattach l1.5 A.0\n", "orbit out of range"),
        ("surface A\nbranch l degree=3\nsector A orientable boundaries=2\nattach l.0 A.0\nattach l.1 A.0\n", "circle reused"),
        ("surface A\nbranch l degree=3\nattach l.0 Z.0\n", "unknown sector"),
        ("branch l degree=3\n", "outside a surface"),
        ("surface A\nbranch l degree=3 colour=red\n", "colour"),
        ("surface A\nbranch l degree=3 shift=3\n", "shift"),
    ],
)
def test_parse_errors_name_the_line(text, fragment):
    with pytest.raises(ParseError) as info:
        parse(text)
    assert fragment in str(info.value)
    assert info.value.line >= 1


def test_certificate_parse_errors():
    with pytest.raises(ParseError):
        parse_certificate("branchmap m1 l1\n")
    with pytest.raises(ParseError):
        parse_certificate("certificate X1 le X2\npiece K cone l1 prongs=out0\n")
    with pytest.raises(ParseError):
        parse_certificate("certificate X1 le X2\npiece K cone l1 carries=m1 prongs=up0\n")


def test_hasse_dot_output(tmp_path):
    fam = hopf_family(3, 4)
    diagram = hasse(fam.surfaces, fam.facts())
    text = to_dot(diagram)
    assert text.startswith("digraph hasse {")
    assert text.count(" -> ") == 4
    assert '"X1" -> "X2";' in text
    assert text.count("rank = same;") == 3
    out = tmp_path / "hasse.dot"
    write_dot(diagram, str(out))
    assert out.read_text(encoding="utf-8") == text
