"""
标准位置证书的文本格式（.cert）。

    certificate <X> le <Y>
    assume order_condition2 "<citation>"
    branchmap <Y 分支> <X 分支>
    piece <id> copy <X 扇区> level=<n>
    piece <id> annulus <X 分支> arc=<i>-<j>
    piece <id> mobius <X 分支> orbit=<o>
    piece <id> cone <X 分支> carries=<Y 分支> prongs=out0,loop2,loop1
    glue <piece>.<circle> <piece>.<circle>
"""
import shlex
from typing import List, Optional, Tuple

from src.surfaces.errors import ParseError
from src.surfaces.model import ASSUMPTION_KINDS, AssumptionRecord
from src.surfaces.order import OrderFact, Piece, Prong, StandardPositionCertificate
from src.tools.mbs_format import parse_int, parse_keyvals, parse_ref, quote


def _prongs(text: str, lineno: int) -> Tuple[Prong, ...]:
    out = []
    for tok in text.split(","):
        for kind in ("out", "loop"):
            if tok.startswith(kind):
                out.append(Prong(kind, parse_int(tok[len(kind):], lineno, "prong target")))
                break
        else:
            raise ParseError(lineno, f"bad prong {tok!r}")
    return tuple(out)


def _piece(args: List[str], lineno: int) -> Piece:
    if len(args) < 3:
        raise ParseError(lineno, "piece needs <id> <kind> <target>")
    pid, kind, target, rest = args[0], args[1], args[2], args[3:]
    if kind == "copy":
        kv = parse_keyvals(rest, ("level",), lineno)
        return Piece(pid, kind, x_sector=target, level=parse_int(kv.get("level", "0"), lineno, "level"))
    if kind == "annulus":
        kv = parse_keyvals(rest, ("arc",), lineno)
        i, _, j = kv.get("arc", "").partition("-")
        return Piece(pid, kind, x_branch=target, arc=(parse_int(i, lineno, "arc"), parse_int(j, lineno, "arc")))
    if kind == "mobius":
        kv = parse_keyvals(rest, ("orbit",), lineno)
        return Piece(pid, kind, x_branch=target, orbit=parse_int(kv.get("orbit", "0"), lineno, "orbit"))
    if kind == "cone":
        kv = parse_keyvals(rest, ("carries", "prongs"), lineno)
        if "carries" not in kv or "prongs" not in kv:
            raise ParseError(lineno, "cone needs carries= and prongs=")
        return Piece(pid, kind, x_branch=target, carries=kv["carries"], prongs=_prongs(kv["prongs"], lineno))
    raise ParseError(lineno, f"unknown piece kind {kind!r}")


def parse_certificate(text: str) -> StandardPositionCertificate:
    header: Optional[Tuple[str, str]] = None
    branch_map, pieces, glue, assumptions = [], [], [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        try:
            tokens = shlex.split(raw, comments=True)
        except ValueError as exc:
            raise ParseError(lineno, str(exc)) from None
        if not tokens:
            continue
        head, args = tokens[0], tokens[1:]
        if head == "certificate":
            if len(args) != 3 or args[1] != "le" or header is not None:
                raise ParseError(lineno, "expected one `certificate <X> le <Y>` line")
            header = (args[0], args[2])
            continue
        if header is None:
            raise ParseError(lineno, "certificate header must come first")
        if head == "branchmap" and len(args) == 2:
            branch_map.append((args[0], args[1]))
        elif head == "piece":
            pieces.append(_piece(args, lineno))
        elif head == "glue" and len(args) == 2:
            glue.append((parse_ref(args[0], lineno), parse_ref(args[1], lineno)))
        elif head == "assume" and len(args) == 2 and args[0] in ASSUMPTION_KINDS:
            assumptions.append(AssumptionRecord(args[0], args[1]))
        else:
            raise ParseError(lineno, f"unknown or malformed declaration {head!r}")
    if header is None:
        raise ParseError(1, "empty certificate")
    return StandardPositionCertificate(
        header[0], header[1], tuple(branch_map), tuple(pieces), tuple(glue), tuple(assumptions)
    )


def load_certificate(path: str) -> StandardPositionCertificate:
    with open(path, "r", encoding="utf-8") as f:
        return parse_certificate(f.read())


def serialize_certificate(cert: StandardPositionCertificate) -> str:
    lines = [f"certificate {cert.x_name} le {cert.y_name}"]
    lines += [f"assume {a.kind} {quote(a.provenance)}" for a in cert.assumptions]
    lines += [f"branchmap {yb} {xb}" for yb, xb in cert.branch_map]
    for p in cert.pieces:
        if p.kind == "copy":
            lines.append(f"piece {p.id} copy {p.x_sector} level={p.level}")
        elif p.kind == "annulus":
            lines.append(f"piece {p.id} annulus {p.x_branch} arc={p.arc[0]}-{p.arc[1]}")
        elif p.kind == "mobius":
            lines.append(f"piece {p.id} mobius {p.x_branch} orbit={p.orbit}")
        else:
            prongs = ",".join(pr.text() for pr in p.prongs)
            lines.append(f"piece {p.id} cone {p.x_branch} carries={p.carries} prongs={prongs}")
    lines += [f"glue {a[0]}.{a[1]} {b[0]}.{b[1]}" for a, b in cert.glue]
    return "\n".join(lines) + "\n"


def facts_from_document(doc) -> List[OrderFact]:
    """把文档中的 fact 行转换为 OrderFact，证书路径相对于文档所在目录。"""
    facts = []
    for f in doc.facts:
        path = doc.cert_path(f)
        if path is not None:
            facts.append(OrderFact(f.lower, f.upper, f.relation, "certificate", load_certificate(path)))
        elif f.cite is not None:
            facts.append(OrderFact(f.lower, f.upper, f.relation, "citation", citation=f.cite))
        else:
            facts.append(OrderFact(f.lower, f.upper, f.relation, "filter-only"))
    return facts
