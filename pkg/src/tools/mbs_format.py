"""
曲面文档的逐行文本格式（.mbs）。

    surface <name>
    branch <id> degree=<d> shift=<s>
    sector <id> orientable genus=<g> boundaries=<b>
    sector <id> nonorientable crosscaps=<c> boundaries=<b>
    attach <branch>.<orbit> <sector>.<circle> [sign=+|-] [side=+|-] [wrap=<w>]
    free <sector>.<circle>
    assume <kind> "<citation>"
    fact <A> le <B> cert=<path> | fact <A> le <B> cite="<text>" | fact <A> incomparable|equal <B>

`#` 之后为注释。解析只做局部检查（声明顺序、轨道/圆周越界与重复），完整校验在 build() 中进行。
"""
import os
import shlex
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from src.surfaces.errors import ParseError
from src.surfaces.model import (
    ASSUMPTION_KINDS,
    AssumptionRecord,
    AttachEntry,
    BranchModel,
    MultibranchedSurface,
    Sector,
    SurfaceSig,
    build,
)
from src.surfaces.order import RELATIONS


@dataclass
class SurfaceDecl:
    name: str
    line: int
    branches: List[BranchModel] = field(default_factory=list)
    sectors: List[Sector] = field(default_factory=list)
    attachment: List[AttachEntry] = field(default_factory=list)
    free_circles: List[Tuple[str, int]] = field(default_factory=list)
    assumptions: List[AssumptionRecord] = field(default_factory=list)


@dataclass
class FactDecl:
    lower: str
    relation: str
    upper: str
    cert: Optional[str] = None
    cite: Optional[str] = None
    line: int = 0


@dataclass
class MbsDocument:
    surfaces: Dict[str, SurfaceDecl] = field(default_factory=dict)
    facts: List[FactDecl] = field(default_factory=list)
    base_dir: str = "."

    @property
    def names(self) -> List[str]:
        return list(self.surfaces)

    def build(self, name: str) -> MultibranchedSurface:
        decl = self.surfaces.get(name)
        if decl is None:
            raise KeyError(name)
        return build(decl.branches, decl.sectors, decl.attachment, decl.assumptions, decl.free_circles)

    def build_all(self) -> Dict[str, MultibranchedSurface]:
        return {name: self.build(name) for name in self.surfaces}

    def cert_path(self, fact: FactDecl) -> Optional[str]:
        if fact.cert is None:
            return None
        return fact.cert if os.path.isabs(fact.cert) else os.path.join(self.base_dir, fact.cert)


def parse_keyvals(tokens: List[str], allowed: Tuple[str, ...], lineno: int) -> Dict[str, str]:
    out: Dict[str, str] = {}
    for tok in tokens:
        key, eq, value = tok.partition("=")
        if not eq or key not in allowed:
            raise ParseError(lineno, f"unknown key {tok!r}")
        if key in out:
            raise ParseError(lineno, f"key {key!r} given twice")
        out[key] = value
    return out


def parse_int(value: Optional[str], lineno: int, what: str) -> int:
    try:
        return int(value)
    except (TypeError, ValueError):
        raise ParseError(lineno, f"{what} must be an integer, got {value!r}") from None


def _bit(value: Optional[str], lineno: int) -> int:
    if value is None or value == "+":
        return 1
    if value == "-":
        return -1
    raise ParseError(lineno, f"expected + or -, got {value!r}")


def parse_ref(token: str, lineno: int) -> Tuple[str, int]:
    name, dot, index = token.rpartition(".")
    if not dot or not name:
        raise ParseError(lineno, f"expected <id>.<index>, got {token!r}")
    return name, parse_int(index, lineno, "index")


def _parse_branch(decl: SurfaceDecl, args: List[str], lineno: int) -> None:
    if len(args) < 1:
        raise ParseError(lineno, "branch needs an id")
    kv = parse_keyvals(args[1:], ("degree", "shift"), lineno)
    if "degree" not in kv:
        raise ParseError(lineno, "branch needs degree=")
    degree, shift = parse_int(kv["degree"], lineno, "degree"), parse_int(kv.get("shift", "0"), lineno, "shift")
    if degree < 1 or not 0 <= shift < degree:
        raise ParseError(lineno, f"degree={degree} shift={shift} violates 0 <= shift < degree")
    if any(b.id == args[0] for b in decl.branches):
        raise ParseError(lineno, f"branch {args[0]!r} declared twice")
    decl.branches.append(BranchModel(args[0], degree, shift))


def _parse_sector(decl: SurfaceDecl, args: List[str], lineno: int) -> None:
    if len(args) < 2 or args[1] not in ("orientable", "nonorientable"):
        raise ParseError(lineno, "sector needs an id and orientable|nonorientable")
    if any(s.id == args[0] for s in decl.sectors):
        raise ParseError(lineno, f"sector {args[0]!r} declared twice")
    if args[1] == "orientable":
        kv = parse_keyvals(args[2:], ("genus", "boundaries"), lineno)
        genus = parse_int(kv.get("genus", "0"), lineno, "genus")
        sig = SurfaceSig(True, genus, parse_int(kv.get("boundaries"), lineno, "boundaries"))
    else:
        kv = parse_keyvals(args[2:], ("crosscaps", "boundaries"), lineno)
        sig = SurfaceSig(False, parse_int(kv.get("crosscaps"), lineno, "crosscaps"), parse_int(kv.get("boundaries"), lineno, "boundaries"))
    decl.sectors.append(Sector(args[0], sig))


def _parse_attach(decl: SurfaceDecl, args: List[str], lineno: int) -> None:
    if len(args) < 2:
        raise ParseError(lineno, "attach needs <branch>.<orbit> <sector>.<circle>")
    bid, orbit = parse_ref(args[0], lineno)
    sid, circle = parse_ref(args[1], lineno)
    kv = parse_keyvals(args[2:], ("sign", "side", "wrap"), lineno)
    branch = next((b for b in decl.branches if b.id == bid), None)
    if branch is None:
        raise ParseError(lineno, f"unknown branch {bid!r}")
    sector = next((s for s in decl.sectors if s.id == sid), None)
    if sector is None:
        raise ParseError(lineno, f"unknown sector {sid!r}")
    if not 0 <= orbit < branch.orbit_count:
        raise ParseError(lineno, f"orbit out of range: {bid} has k={branch.orbit_count}")
    if not 0 <= circle < sector.sig.boundary_count:
        raise ParseError(lineno, f"circle out of range: {sid} has {sector.sig.boundary_count} boundaries")
    for e in decl.attachment:
        if (e.sector, e.circle) == (sid, circle):
            raise ParseError(lineno, f"circle reused: {sid}.{circle}")
        if (e.branch, e.orbit) == (bid, orbit):
            raise ParseError(lineno, f"orbit reused: {bid}.{orbit}")
    wrap = parse_int(kv["wrap"], lineno, "wrap") if "wrap" in kv else None
    decl.attachment.append(
        AttachEntry(bid, orbit, sid, circle, _bit(kv.get("sign"), lineno), _bit(kv.get("side"), lineno), wrap)
    )


def _parse_fact(args: List[str], lineno: int) -> FactDecl:
    if len(args) < 3 or args[1] not in RELATIONS:
        raise ParseError(lineno, "fact needs <A> le|incomparable|equal <B>")
    kv = parse_keyvals(args[3:], ("cert", "cite"), lineno)
    return FactDecl(args[0], args[1], args[2], kv.get("cert"), kv.get("cite"), lineno)


def parse(text: str, base_dir: str = ".") -> MbsDocument:
    doc = MbsDocument(base_dir=base_dir)
    current: Optional[SurfaceDecl] = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        try:
            tokens = shlex.split(raw, comments=True)
        except ValueError as exc:
            raise ParseError(lineno, str(exc)) from None
        if not tokens:
            continue
        head, args = tokens[0], tokens[1:]
        if head == "surface":
            if len(args) != 1:
                raise ParseError(lineno, "surface needs exactly one name")
            if args[0] in doc.surfaces:
                raise ParseError(lineno, f"surface {args[0]!r} declared twice")
            current = SurfaceDecl(args[0], lineno)
            doc.surfaces[args[0]] = current
            continue
        if head == "fact":
            doc.facts.append(_parse_fact(args, lineno))
            continue
        if current is None:
            raise ParseError(lineno, f"{head!r} outside a surface block")
        if head == "branch":
            _parse_branch(current, args, lineno)
        elif head == "sector":
            _parse_sector(current, args, lineno)
        elif head == "attach":
            _parse_attach(current, args, lineno)
        elif head == "free":
            if len(args) != 1:
                raise ParseError(lineno, "free needs <sector>.<circle>")
            current.free_circles.append(parse_ref(args[0], lineno))
        elif head == "assume":
            if len(args) != 2 or args[0] not in ASSUMPTION_KINDS:
                raise ParseError(lineno, f"assume needs one of {', '.join(ASSUMPTION_KINDS)} and a quoted citation")
            current.assumptions.append(AssumptionRecord(args[0], args[1]))
        else:
            raise ParseError(lineno, f"unknown declaration {head!r}")
    for fact in doc.facts:
        for name in (fact.lower, fact.upper):
            if name not in doc.surfaces:
                raise ParseError(fact.line, f"fact refers to unknown surface {name!r}")
    return doc


def load(path: str) -> MbsDocument:
    with open(path, "r", encoding="utf-8") as f:
        return parse(f.read(), base_dir=os.path.dirname(os.path.abspath(path)))


# ---------------------------------------------------------------------------
# 输出
# ---------------------------------------------------------------------------

def quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _sign(v: int) -> str:
    return "+" if v > 0 else "-"


def surface_lines(name: str, X: MultibranchedSurface) -> List[str]:
    lines = [f"surface {name}"]
    for b in X.branches:
        lines.append(f"branch {b.id} degree={b.degree} shift={b.shift}")
    for s in X.sectors:
        if s.sig.orientable:
            lines.append(f"sector {s.id} orientable genus={s.sig.genus} boundaries={s.sig.boundary_count}")
        else:
            lines.append(f"sector {s.id} nonorientable crosscaps={s.sig.genus} boundaries={s.sig.boundary_count}")
    for e in X.attachment:
        lines.append(f"attach {e.branch}.{e.orbit} {e.sector}.{e.circle} sign={_sign(e.sign)} side={_sign(e.side)}")
    for sid, c in X.free_circles:
        lines.append(f"free {sid}.{c}")
    for a in sorted(X.assumptions):
        lines.append(f"assume {a.kind} {quote(a.provenance)}")
    return lines


def fact_line(fact: FactDecl) -> str:
    line = f"fact {fact.lower} {fact.relation} {fact.upper}"
    if fact.cert is not None:
        line += f" cert={fact.cert}"
    if fact.cite is not None:
        line += f" cite={quote(fact.cite)}"
    return line


def serialize_surfaces(surfaces: Dict[str, MultibranchedSurface], facts: List[FactDecl] = ()) -> str:
    blocks = ["\n".join(surface_lines(name, X)) for name, X in surfaces.items()]
    if facts:
        blocks.append("\n".join(fact_line(f) for f in facts))
    return "\n\n".join(blocks) + "\n"


def serialize(doc: MbsDocument) -> str:
    """规范输出：附着行按分支声明顺序与轨道号排列，wrap= 省略。"""
    return serialize_surfaces(doc.build_all(), doc.facts)
