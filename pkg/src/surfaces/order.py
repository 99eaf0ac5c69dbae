"""
偏序 [X] ≤ [Y] 的可计算必要条件、标准位置证书校验、星形替换、极小性报告与 Hasse 图。

证书把 Y 拆成 N(X) 内的若干块：扇区副本 (E_X 的平行层)、分支邻域内的环面块 / 莫比乌斯块，
以及携带 Y 分支的锥块 C_d × S¹。校验的最后一步把块沿粘合表重新拼起来，按规范编码与 Y 比较。
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import networkx as nx

from src.surfaces.errors import (
    FactRejected,
    MalformedCertificate,
    PosetViolation,
    SurfaceError,
    ValidationError,
)
from src.surfaces.invariants import euler_sectors
from src.surfaces.model import (
    AssumptionRecord,
    AttachEntry,
    BranchModel,
    MultibranchedSurface,
    Sector,
    SurfaceSig,
    build,
    canonical_code,
)

logger = logging.getLogger(__name__)

PIECE_KINDS = ("copy", "annulus", "mobius", "cone")
RELATIONS = ("le", "incomparable", "equal")
EVIDENCE = ("certificate", "citation", "filter-only")


@dataclass(frozen=True)
class Prong:
    """锥块的一根叉：out 接到 X 的轨道 target；loop 绕核心与第 target 根叉相连。"""

    kind: str  # out | loop
    target: int

    def text(self) -> str:
        return f"{self.kind}{self.target}"


@dataclass(frozen=True)
class Piece:
    id: str
    kind: str
    x_sector: Optional[str] = None
    x_branch: Optional[str] = None
    level: Optional[int] = None
    arc: Optional[Tuple[int, int]] = None
    orbit: Optional[int] = None
    carries: Optional[str] = None
    prongs: Tuple[Prong, ...] = ()


@dataclass(frozen=True)
class StandardPositionCertificate:
    x_name: str
    y_name: str
    branch_map: Tuple[Tuple[str, str], ...]  # (Y 分支, X 分支)
    pieces: Tuple[Piece, ...]
    glue: Tuple[Tuple[Tuple[str, int], Tuple[str, int]], ...]
    assumptions: Tuple[AssumptionRecord, ...] = ()

    def piece(self, piece_id: str) -> Piece:
        for p in self.pieces:
            if p.id == piece_id:
                return p
        raise MalformedCertificate(f"unknown piece {piece_id!r}")


@dataclass(frozen=True)
class EulerVerdict:
    passed: bool
    chi_x: int
    chi_y: int
    reason: str = ""


@dataclass(frozen=True)
class CertificateVerdict:
    verified: bool
    reason: str = ""
    condition2: Optional[str] = None
    reassembled: Optional[MultibranchedSurface] = field(default=None, compare=False)


@dataclass(frozen=True)
class OrderFact:
    lower: str
    upper: str
    relation: str = "le"
    evidence: str = "certificate"
    certificate: Optional[StandardPositionCertificate] = None
    citation: str = ""


@dataclass(frozen=True)
class MinimalityReport:
    subject: str
    assumptions_used: Tuple[AssumptionRecord, ...]
    verdict: str  # minimal | unknown


@dataclass
class HasseDiagram:
    classes: Dict[str, Tuple[str, ...]]  # 类代表名 -> 成员名
    graph: nx.DiGraph
    flagged: List[str] = field(default_factory=list)

    @property
    def edges(self) -> List[Tuple[str, str]]:
        return sorted(self.graph.edges())


# ---------------------------------------------------------------------------
# 欧拉过滤
# ---------------------------------------------------------------------------

def euler_filter(
    X: MultibranchedSurface,
    Y: MultibranchedSurface,
    equality_mode: bool = False,
    cert: Optional[StandardPositionCertificate] = None,
) -> EulerVerdict:
    """χ(E_Y) ≤ χ(E_X) 的必要条件；equality_mode 下 χ 相等时还检查证书的块结构。"""
    cx, cy = euler_sectors(X), euler_sectors(Y)
    if cy > cx:
        return EulerVerdict(False, cx, cy, f"chi(E_Y)={cy} > chi(E_X)={cx}")
    if not equality_mode or cy < cx:
        return EulerVerdict(True, cx, cy)

    if cert is None:
        return EulerVerdict(False, cx, cy, "equality needs a certificate")
    if any(p.kind == "mobius" for p in cert.pieces):
        return EulerVerdict(False, cx, cy, "mobius piece in N(B_X)")
    counts: Dict[str, int] = {}
    for p in cert.pieces:
        if p.kind == "copy":
            counts[p.x_sector] = counts.get(p.x_sector, 0) + 1
    for s in X.sectors:
        if s.sig.is_annulus or s.sig.is_mobius:
            continue
        if counts.get(s.id, 0) != 1:
            return EulerVerdict(False, cx, cy, f"sector {s.id} needs exactly one copy, found {counts.get(s.id, 0)}")
    return EulerVerdict(True, cx, cy)


# ---------------------------------------------------------------------------
# 证书校验
# ---------------------------------------------------------------------------

def _piece_circles(X: MultibranchedSurface, p: Piece) -> Dict[int, Tuple[str, int]]:
    """块的各边界圆所在的特征环面 (X 分支, 轨道)。"""
    if p.kind == "copy":
        return {e.circle: (e.branch, e.orbit) for e in X.circles_of_sector(p.x_sector)}
    b = X.branch(p.x_branch)
    if p.kind == "annulus":
        return {0: (b.id, b.orbit_of_slot(p.arc[0])), 1: (b.id, b.orbit_of_slot(p.arc[1]))}
    if p.kind == "mobius":
        return {0: (b.id, p.orbit)}
    return {i: (b.id, pr.target) for i, pr in enumerate(p.prongs) if pr.kind == "out"}


def _piece_sig(X: MultibranchedSurface, p: Piece) -> Tuple[int, bool]:
    if p.kind == "copy":
        sig = X.sector(p.x_sector).sig
        return sig.euler(), sig.orientable
    return 0, p.kind != "mobius"


def _check_pieces(X: MultibranchedSurface, Y: MultibranchedSurface, cert: StandardPositionCertificate) -> None:
    seen = set()
    levels = set()
    for p in cert.pieces:
        if p.id in seen:
            raise MalformedCertificate(f"duplicate piece id {p.id!r}")
        seen.add(p.id)
        if p.kind not in PIECE_KINDS:
            raise MalformedCertificate(f"unknown piece kind {p.kind!r}", p.id)
        if p.kind == "copy":
            X.sector(p.x_sector)
            if (p.x_sector, p.level) in levels:
                raise MalformedCertificate(f"level clash: two copies of {p.x_sector} at level {p.level}", p.id)
            levels.add((p.x_sector, p.level))
            continue
        b = X.branch(p.x_branch)
        if p.kind == "annulus":
            i, j = p.arc
            if not (0 <= i < b.degree and 0 <= j < b.degree) or i == j:
                raise MalformedCertificate("arc endpoints out of range", p.id)
            if (j - i) % b.degree in (1, b.degree - 1):
                raise MalformedCertificate("arc is boundary-parallel", p.id)
        elif p.kind == "mobius":
            if b.wrap != 2:
                raise MalformedCertificate("a mobius piece needs a branch of wrap 2", p.id)
            if not 0 <= p.orbit < b.orbit_count:
                raise MalformedCertificate("orbit out of range", p.id)
        else:
            carried = Y.branch(p.carries)
            if len(p.prongs) != carried.orbit_count:
                raise MalformedCertificate(
                    f"cone carrying {carried.id} needs {carried.orbit_count} prongs, got {len(p.prongs)}", p.id
                )
            for i, pr in enumerate(p.prongs):
                if pr.kind == "out":
                    if not 0 <= pr.target < b.orbit_count:
                        raise MalformedCertificate(f"prong {i} leaves to a missing orbit", p.id)
                elif pr.kind == "loop":
                    back = p.prongs[pr.target] if 0 <= pr.target < len(p.prongs) else None
                    if pr.target == i or back is None or back != Prong("loop", i):
                        raise MalformedCertificate(f"prong {i} loop is not paired", p.id)
                else:
                    raise MalformedCertificate(f"unknown prong kind {pr.kind!r}", p.id)


def _check_branch_map(X: MultibranchedSurface, Y: MultibranchedSurface, cert: StandardPositionCertificate) -> None:
    mapping = dict(cert.branch_map)
    if len(mapping) != len(cert.branch_map) or set(mapping) != set(Y.branch_ids):
        raise MalformedCertificate("branch map must list every Y-branch once")
    for xb in mapping.values():
        X.branch(xb)
    cones: Dict[str, Piece] = {}
    for p in cert.pieces:
        if p.kind == "cone":
            if p.carries in cones:
                raise MalformedCertificate(f"branch map: {p.carries} carried twice", p.id)
            cones[p.carries] = p
    for yb, xb in mapping.items():
        cone = cones.get(yb)
        if cone is None or cone.x_branch != xb:
            raise MalformedCertificate(f"branch map: {yb} is not carried by a cone in N({xb})")
    if X.has_assumption("atoroidal_branches"):
        used: Dict[str, str] = {}
        for yb, xb in mapping.items():
            if xb in used:
                raise MalformedCertificate(f"branch map: N({xb}) holds both {used[xb]} and {yb}")
            used[xb] = yb


def _reassemble(X: MultibranchedSurface, Y: MultibranchedSurface, cert: StandardPositionCertificate) -> MultibranchedSurface:
    circles = {p.id: _piece_circles(X, p) for p in cert.pieces}
    glued: Dict[Tuple[str, int], Tuple[str, int]] = {}
    for a, b in cert.glue:
        for pid, c in (a, b):
            if c not in circles.get(pid, {}):
                raise MalformedCertificate(f"glue refers to missing circle {pid}.{c}")
            if (pid, c) in glued:
                raise MalformedCertificate(f"circle {pid}.{c} glued twice")
        if circles[a[0]][a[1]] != circles[b[0]][b[1]]:
            raise MalformedCertificate(f"glue {a[0]}.{a[1]} {b[0]}.{b[1]} crosses characteristic annuli")
        glued[a], glued[b] = b, a
    for pid, cs in circles.items():
        for c in cs:
            if (pid, c) not in glued:
                raise MalformedCertificate(f"circle {pid}.{c} is not glued")

    kinds = {p.id: p.kind for p in cert.pieces}
    material = [p for p in cert.pieces if p.kind != "cone"]
    parts = nx.Graph()
    parts.add_nodes_from(p.id for p in material)
    for a, b in cert.glue:
        if kinds[a[0]] != "cone" and kinds[b[0]] != "cone":
            parts.add_edge(a[0], b[0])

    sectors: List[Sector] = []
    entries: List[AttachEntry] = []
    order = {p.id: i for i, p in enumerate(cert.pieces)}
    for n, comp in enumerate(sorted(nx.connected_components(parts), key=lambda c: min(order[p] for p in c))):
        sid = f"S{n}"
        chi, orientable, boundary = 0, True, []
        for pid in sorted(comp, key=order.get):
            p = cert.piece(pid)
            pc, po = _piece_sig(X, p)
            chi += pc
            orientable = orientable and po
            for c in sorted(circles[pid]):
                other = glued[(pid, c)]
                if kinds[other[0]] == "cone":
                    boundary.append(other)
        if not boundary:
            raise MalformedCertificate(f"pieces {sorted(comp)} close up without meeting a Y-branch")
        excess = 2 - chi - len(boundary)
        if orientable and excess % 2:
            raise MalformedCertificate(f"pieces {sorted(comp)} do not assemble to an orientable surface")
        genus = excess // 2 if orientable else excess
        sectors.append(Sector(sid, SurfaceSig(orientable, genus, len(boundary))))
        for c, (cone_id, prong) in enumerate(boundary):
            cone = cert.piece(cone_id)
            xe = X.entry_at(cone.x_branch, cone.prongs[prong].target)
            entries.append(AttachEntry(cone.carries, prong, sid, c, xe.sign, xe.side))

    for p in cert.pieces:
        if p.kind != "cone":
            continue
        for i, pr in enumerate(p.prongs):
            if pr.kind == "loop" and i < pr.target:
                sid = f"L{len(sectors)}"
                sectors.append(Sector(sid, SurfaceSig(True, 0, 2)))
                entries.append(AttachEntry(p.carries, i, sid, 0, 1, 1))
                entries.append(AttachEntry(p.carries, pr.target, sid, 1, -1, -1))

    branches = [BranchModel(b.id, b.degree, b.shift) for b in Y.branches]
    try:
        return build(branches, sectors, entries)
    except ValidationError as exc:
        raise MalformedCertificate(f"reassembly is not a valid surface: {exc}") from exc


def check_certificate(
    X: MultibranchedSurface, Y: MultibranchedSurface, cert: StandardPositionCertificate
) -> CertificateVerdict:
    """逐项检验证书；偏序定义中的条件 (2) 只能来自假设记录，并在结论中原样回显。"""
    condition2 = next((a.provenance for a in cert.assumptions if a.kind == "order_condition2"), None)
    try:
        _check_pieces(X, Y, cert)
        _check_branch_map(X, Y, cert)
        rebuilt = _reassemble(X, Y, cert)
    except SurfaceError as exc:
        logger.info("certificate %s le %s rejected: %s", cert.x_name, cert.y_name, exc)
        return CertificateVerdict(False, str(exc), condition2)
    except (KeyError, TypeError, IndexError) as exc:
        return CertificateVerdict(False, f"malformed certificate: {exc}", condition2)
    if canonical_code(rebuilt) != canonical_code(Y):
        return CertificateVerdict(False, "reassembled complex is not isomorphic to Y", condition2, rebuilt)
    return CertificateVerdict(True, "", condition2, rebuilt)


# ---------------------------------------------------------------------------
# 星形模型与极小性
# ---------------------------------------------------------------------------

def star_replacement(X: MultibranchedSurface) -> MultibranchedSurface:
    """把每个既非环面也非莫比乌斯带的扇区换成 C_b × S¹：一条 b 度正规分支加 b 个环面扇区。"""
    branches = list(X.branches)
    sectors: List[Sector] = []
    entries = [e for e in X.attachment]
    for s in X.sectors:
        if s.sig.is_annulus or s.sig.is_mobius:
            sectors.append(s)
            continue
        attached = X.circles_of_sector(s.id)
        cone = _fresh_id(f"c_{s.id}", {b.id for b in branches})
        branches.append(BranchModel(cone, len(attached), 0))
        entries = [e for e in entries if e.sector != s.id]
        for i, e in enumerate(attached):
            aid = _fresh_id(f"{s.id}_{i}", {t.id for t in X.sectors} | {t.id for t in sectors})
            sectors.append(Sector(aid, SurfaceSig(True, 0, 2)))
            entries.append(AttachEntry(e.branch, e.orbit, aid, 0, e.sign, e.side))
            entries.append(AttachEntry(cone, i, aid, 1, 1, 1))
    free = [(sid, c) for sid, c in X.free_circles if any(t.id == sid for t in sectors)]
    return build(branches, sectors, entries, X.assumptions, free)


def _fresh_id(base: str, taken: set) -> str:
    name, n = base, 0
    while name in taken:
        n += 1
        name = f"{base}_{n}"
    return name


def minimality(X: MultibranchedSurface, subject: str = "") -> MinimalityReport:
    used = tuple(sorted(a for a in X.assumptions if a.kind in ("atoroidal_branches", "acylindrical_sectors")))
    both = X.has_assumption("atoroidal_branches") and X.has_assumption("acylindrical_sectors")
    return MinimalityReport(subject, used, "minimal" if both else "unknown")


# ---------------------------------------------------------------------------
# Hasse 图
# ---------------------------------------------------------------------------

def _accept_le(family: Dict[str, MultibranchedSurface], fact: OrderFact) -> Optional[str]:
    """返回 None 表示已由证书验证，否则返回需要标注的引用。"""
    X, Y = family[fact.lower], family[fact.upper]
    verdict = euler_filter(X, Y)
    if not verdict.passed:
        raise FactRejected(f"{fact.lower} le {fact.upper}: {verdict.reason}")
    if fact.evidence == "certificate":
        if fact.certificate is None:
            raise FactRejected(f"{fact.lower} le {fact.upper}: certificate missing")
        cv = check_certificate(X, Y, fact.certificate)
        if not cv.verified:
            raise FactRejected(f"{fact.lower} le {fact.upper}: {cv.reason}")
        return None
    if fact.evidence == "citation" and fact.citation:
        return fact.citation
    raise FactRejected(f"{fact.lower} le {fact.upper}: needs a verified certificate or a citation")


def hasse(
    family: Dict[str, MultibranchedSurface],
    facts: Sequence[OrderFact],
    same_class: Optional[Callable[[MultibranchedSurface, MultibranchedSurface], bool]] = None,
) -> HasseDiagram:
    """
    same_class 用来裁决 le 事实之间的环：返回 True 时两端并为一个类，否则抛出 PosetViolation。
    未提供时任何环都视为矛盾。命令行传入 moves.same_ih_class。
    """
    names = sorted(family)
    rep = {n: n for n in names}

    def find(n: str) -> str:
        while rep[n] != n:
            rep[n] = rep[rep[n]]
            n = rep[n]
        return n

    def union(a: str, b: str) -> None:
        ra, rb = sorted((find(a), find(b)))
        rep[rb] = ra

    by_code: Dict[bytes, str] = {}
    for n in names:
        code = canonical_code(family[n])
        if code in by_code:
            union(by_code[code], n)
        else:
            by_code[code] = n

    for fact in facts:
        for n in (fact.lower, fact.upper):
            if n not in family:
                raise FactRejected(f"fact refers to unknown surface {n!r}")
        if fact.relation not in RELATIONS:
            raise FactRejected(f"unknown relation {fact.relation!r}")
        if fact.relation == "equal":
            union(fact.lower, fact.upper)

    flagged: List[str] = []
    le_pairs: List[Tuple[str, str]] = []
    for fact in facts:
        if fact.relation != "le":
            continue
        citation = _accept_le(family, fact)
        if citation is not None:
            flagged.append(f"{fact.lower} le {fact.upper}: {citation}")
        le_pairs.append((fact.lower, fact.upper))

    while True:
        graph = nx.DiGraph()
        graph.add_nodes_from(sorted({find(n) for n in names}))
        graph.add_edges_from((find(a), find(b)) for a, b in le_pairs if find(a) != find(b))
        cyclic = [sorted(c) for c in nx.strongly_connected_components(graph) if len(c) > 1]
        if not cyclic:
            break
        for comp in sorted(cyclic):
            base = comp[0]
            for other in comp[1:]:
                if same_class is None or not same_class(family[base], family[other]):
                    raise PosetViolation(f"cycle between distinct classes {base} and {other}")
                logger.info("merging %s and %s: same class", base, other)
                union(base, other)

    for fact in facts:
        if fact.relation != "incomparable":
            continue
        a, b = find(fact.lower), find(fact.upper)
        if a == b or nx.has_path(graph, a, b) or nx.has_path(graph, b, a):
            raise PosetViolation(f"{fact.lower} and {fact.upper} are declared incomparable but are related")

    reduced = nx.transitive_reduction(graph)
    reduced.add_nodes_from(graph.nodes())
    classes: Dict[str, List[str]] = {}
    for n in names:
        classes.setdefault(find(n), []).append(n)
    logger.debug("hasse: %d classes, %d cover relations", reduced.number_of_nodes(), reduced.number_of_edges())
    return HasseDiagram({k: tuple(v) for k, v in sorted(classes.items())}, reduced, flagged)
