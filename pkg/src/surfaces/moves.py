"""
改写演算：IX / XI / IH 变换、极大展开、等价性有界搜索，以及形式压缩与管接。

所有变换都返回新的曲面值。合并两条分支时，被并入分支的叶片按坍缩环面两端的 σ 决定
正向或反向接入（反向时 σ 取反），两端 ε 相同时被并入叶片的 ε 取反；XI 变换插入的环面
在新分支一侧记为 (+,+)，在原分支一侧记为 (-,-)。
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from src import config
from src.surfaces.errors import (
    InvalidSpec,
    InvalidSplit,
    NonOrientableUnsupported,
    NotApplicable,
    NotMaximallySpread,
)
from src.surfaces.invariants import classify_branch, classify_sector, is_maximally_spread
from src.surfaces.model import (
    AttachEntry,
    BranchModel,
    CanonicalCode,
    MultibranchedSurface,
    Sector,
    SurfaceSig,
    build,
    canonical_code,
)

logger = logging.getLogger(__name__)

IX_KINDS = ("ix_normal_annulus", "ix_quasi_normal", "ix_mobius")
XI_KINDS = ("xi_split", "xi_extract", "xi_unmobius")

Arc = Tuple[int, int]


@dataclass(frozen=True)
class MoveDescriptor:
    """IX 的 target 为扇区 id，XI 的 target 为分支 id；arc/rest 为闭区间 (起点, 终点)。"""

    kind: str
    target: str
    arc: Optional[Arc] = None
    rest: Optional[Arc] = None

    def text(self) -> str:
        if self.kind in IX_KINDS or self.kind == "ix":
            return f"ix:{self.target}"
        if self.kind == "xi_split":
            return f"xi-split:{self.target}:{_arc_text(self.arc)}|{_arc_text(self.rest)}"
        if self.kind == "xi_extract":
            return f"xi-extract:{self.target}:{_arc_text(self.arc)}"
        return f"xi-unmobius:{self.target}"


def _arc_text(arc: Optional[Arc]) -> str:
    return f"{arc[0]}-{arc[1]}" if arc else ""


def _parse_arc(text: str) -> Arc:
    start, _, end = text.partition("-")
    try:
        return int(start), int(end)
    except ValueError:
        raise InvalidSpec(f"bad arc {text!r}") from None


def parse_descriptor(text: str) -> MoveDescriptor:
    """解析命令行紧凑语法：ix:A、xi-split:l1:0-1|2-3、xi-extract:l2:0-1、xi-unmobius:l2。"""
    head, _, body = text.strip().partition(":")
    if not body:
        raise InvalidSpec(f"bad move descriptor {text!r}")
    if head == "ix":
        return MoveDescriptor("ix", body)
    target, _, arcs = body.partition(":")
    if head == "xi-unmobius" and not arcs:
        return MoveDescriptor("xi_unmobius", target)
    if head == "xi-extract" and arcs:
        return MoveDescriptor("xi_extract", target, _parse_arc(arcs))
    if head == "xi-split" and "|" in arcs:
        p, _, q = arcs.partition("|")
        return MoveDescriptor("xi_split", target, _parse_arc(p), _parse_arc(q))
    raise InvalidSpec(f"bad move descriptor {text!r}")


@dataclass(frozen=True)
class IHMove:
    ix: MoveDescriptor
    xi: Tuple[MoveDescriptor, ...] = ()

    def text(self) -> str:
        return " ; ".join([self.ix.text()] + [m.text() for m in self.xi])


@dataclass(frozen=True)
class MoveStep:
    move: IHMove
    source: CanonicalCode
    target: CanonicalCode
    backward: bool = False


@dataclass(frozen=True)
class MovePath:
    steps: Tuple[MoveStep, ...] = ()

    def to_text(self) -> str:
        return "\n".join(("<- " if s.backward else "-> ") + s.move.text() for s in self.steps)


@dataclass(frozen=True)
class EquivalenceResult:
    equivalent: bool
    depth: int
    path: Optional[MovePath] = None
    visited: int = 0


# ---------------------------------------------------------------------------
# 基础工具
# ---------------------------------------------------------------------------

def _cycle(X: MultibranchedSurface, branch_id: str, start: int, step: int, count: int) -> List[AttachEntry]:
    k = X.branch(branch_id).orbit_count
    return [X.entry_at(branch_id, (start + step * i) % k) for i in range(count)]


def _merge_orientation(end_host: AttachEntry, end_moved: AttachEntry) -> Tuple[int, int, int]:
    """返回 (步长, σ 因子, ε 因子)：两端 σ 不同则正向接入，ε 相同则被并入叶片的 ε 取反。"""
    forward = end_host.side != end_moved.side
    return (1 if forward else -1), (1 if forward else -1), (-1 if end_host.sign == end_moved.sign else 1)


def _reseat(
    entries: Sequence[AttachEntry], branch_id: str, side_factor: int = 1, sign_factor: int = 1, offset: int = 0,
) -> List[AttachEntry]:
    """把叶片依次放到 branch_id 的轨道 offset, offset+1, ... 上。"""
    return [
        AttachEntry(branch_id, offset + j, e.sector, e.circle, e.sign * sign_factor, e.side * side_factor)
        for j, e in enumerate(entries)
    ]


def _rebuild(
    X: MultibranchedSurface,
    drop_branches: Sequence[str],
    drop_sectors: Sequence[str],
    new_branches: Sequence[BranchModel],
    new_sectors: Sequence[Sector],
    new_entries: Sequence[AttachEntry],
) -> MultibranchedSurface:
    replaced = {b.id for b in new_branches}
    gone_b = set(drop_branches) | replaced
    gone_s = set(drop_sectors)
    branches: List[BranchModel] = []
    for b in X.branches:
        if b.id in replaced:
            branches.append(next(nb for nb in new_branches if nb.id == b.id))
        elif b.id not in gone_b:
            branches.append(b)
    branches.extend(nb for nb in new_branches if nb.id not in set(X.branch_ids))
    sectors = [s for s in X.sectors if s.id not in gone_s] + list(new_sectors)
    entries = [e for e in X.attachment if e.branch not in gone_b and e.sector not in gone_s]
    entries.extend(new_entries)
    return build(branches, sectors, entries, X.assumptions, X.free_circles)


def _ends(X: MultibranchedSurface, sector_id: str) -> List[AttachEntry]:
    return X.circles_of_sector(sector_id)


# ---------------------------------------------------------------------------
# IX
# ---------------------------------------------------------------------------

def _ix_kind(X: MultibranchedSurface, sector_id: str) -> Optional[str]:
    kind = classify_sector(X, sector_id).kind
    ends = _ends(X, sector_id)
    if kind == "normal_annulus":
        if ends[0].branch == ends[1].branch:
            return None
        d1, d2 = X.branch(ends[0].branch).degree, X.branch(ends[1].branch).degree
        return "ix_normal_annulus" if d1 + d2 - 2 >= 1 else None
    if kind == "quasi_normal_annulus":
        one = next(e for e in ends if X.branch(e.branch).wrap == 1)
        other = next(e for e in ends if e is not one)
        k_new = X.branch(other.branch).orbit_count - 1 + X.branch(one.branch).degree - 1
        return "ix_quasi_normal" if k_new >= 1 else None
    if kind == "normal_mobius":
        return "ix_mobius" if X.branch(ends[0].branch).degree >= 2 else None
    return None


def applicable_ix(X: MultibranchedSurface) -> List[MoveDescriptor]:
    out = []
    for s in X.sectors:
        kind = _ix_kind(X, s.id)
        if kind:
            out.append(MoveDescriptor(kind, s.id))
    return out


def apply_ix(X: MultibranchedSurface, m: MoveDescriptor) -> MultibranchedSurface:
    if m.kind not in IX_KINDS + ("ix",):
        raise NotApplicable(f"{m.text()} is not an IX-move")
    X.sector(m.target)
    kind = _ix_kind(X, m.target)
    if kind is None or (m.kind != "ix" and m.kind != kind):
        raise NotApplicable(f"{m.text()} is not applicable", m.target)
    ends = _ends(X, m.target)
    logger.debug("apply %s (%s)", m.text(), kind)

    if kind == "ix_normal_annulus":
        host, moved = ends
        l1, l2 = X.branch(host.branch), X.branch(moved.branch)
        step, side_f, sign_f = _merge_orientation(host, moved)
        kept = _cycle(X, l1.id, host.orbit + 1, 1, l1.degree - 1)
        absorbed = _cycle(X, l2.id, moved.orbit + step, step, l2.degree - 1)
        merged = _reseat(kept, l1.id) + _reseat(absorbed, l1.id, side_f, sign_f, offset=len(kept))
        nb = BranchModel(l1.id, len(merged), 0)
        return _rebuild(X, [l2.id], [m.target], [nb], [], merged)

    if kind == "ix_quasi_normal":
        one = next(e for e in ends if X.branch(e.branch).wrap == 1)
        host = next(e for e in ends if e is not one)
        l1, l2 = X.branch(one.branch), X.branch(host.branch)
        step, side_f, sign_f = _merge_orientation(host, one)
        inserted = _cycle(X, l1.id, one.orbit + step, step, l1.degree - 1)
        rest = _cycle(X, l2.id, host.orbit + 1, 1, l2.orbit_count - 1)
        k_new = len(inserted) + len(rest)
        w, t = l2.slope
        degree = w * k_new
        nb = BranchModel(l2.id, degree, (k_new * t) % degree)
        entries = _reseat(inserted, l2.id, side_f, sign_f) + _reseat(rest, l2.id, offset=len(inserted))
        return _rebuild(X, [l1.id], [m.target], [nb], [], entries)

    (end,) = ends
    l = X.branch(end.branch)
    others = _cycle(X, l.id, end.orbit + 1, 1, l.degree - 1)
    k_new = len(others)
    nb = BranchModel(l.id, 2 * k_new, k_new % (2 * k_new))
    return _rebuild(X, [], [m.target], [nb], [], _reseat(others, l.id))


# ---------------------------------------------------------------------------
# XI
# ---------------------------------------------------------------------------

def _arc_members(arc: Arc, k: int) -> List[int]:
    start, end = arc
    return [(start + i) % k for i in range(((end - start) % k) + 1)]


def _xi_descriptors(X: MultibranchedSurface, branch_id: str) -> List[MoveDescriptor]:
    b = X.branch(branch_id)
    out: List[MoveDescriptor] = []
    if b.is_normal:
        d = b.degree
        if d >= 4:
            for ps in range(d):
                for size in range(2, d - 1):
                    qs = (ps + size) % d
                    if ps < qs:
                        out.append(MoveDescriptor("xi_split", b.id, (ps, (qs - 1) % d), (qs, (ps - 1) % d)))
        return out
    k, w = b.orbit_count, b.wrap
    if k >= 2:
        for size in range(2, k + 1):
            if size == k and w < 3:
                continue
            for start in range(k):
                out.append(MoveDescriptor("xi_extract", b.id, (start, (start + size - 1) % k)))
        if w == 2:
            out.append(MoveDescriptor("xi_unmobius", b.id))
    return out


def applicable_xi(X: MultibranchedSurface) -> List[MoveDescriptor]:
    out: List[MoveDescriptor] = []
    for bid in X.branch_ids:
        if classify_branch(X, bid).spreadable:
            out.extend(_xi_descriptors(X, bid))
    return out


def _check_xi(X: MultibranchedSurface, m: MoveDescriptor) -> None:
    b = X.branch(m.target)
    if not classify_branch(X, b.id).spreadable:
        raise NotApplicable(f"branch {b.id} is not spreadable", b.id)
    if m not in _xi_descriptors(X, b.id):
        raise NotApplicable(f"{m.text()} is not applicable", b.id)


def apply_xi(X: MultibranchedSurface, m: MoveDescriptor) -> MultibranchedSurface:
    if m.kind not in XI_KINDS:
        raise NotApplicable(f"{m.text()} is not an XI-move")
    _check_xi(X, m)
    b = X.branch(m.target)
    k = b.orbit_count
    logger.debug("apply %s", m.text())

    if m.kind == "xi_split":
        part = [X.entry_at(b.id, j) for j in _arc_members(m.arc, k)]
        rest = [X.entry_at(b.id, j) for j in _arc_members(m.rest, k)]
        q_id = X.fresh_branch_id(f"{b.id}_q")
        a_id = X.fresh_sector_id("N")
        annulus = Sector(a_id, SurfaceSig(True, 0, 2))
        lp = BranchModel(b.id, len(part) + 1, 0)
        lq = BranchModel(q_id, len(rest) + 1, 0)
        entries = [AttachEntry(b.id, 0, a_id, 0, 1, 1)] + _shifted(part, b.id)
        entries += [AttachEntry(q_id, 0, a_id, 1, -1, -1)] + _shifted(rest, q_id)
        return _rebuild(X, [], [], [lp, lq], [annulus], entries)

    if m.kind == "xi_extract":
        members = _arc_members(m.arc, k)
        chosen = [X.entry_at(b.id, j) for j in members]
        after = (members[-1] + 1) % k
        remaining = [X.entry_at(b.id, (after + i) % k) for i in range(k - len(members))]
        new_id = X.fresh_branch_id(f"{b.id}_x")
        a_id = X.fresh_sector_id("Q")
        w, t = b.slope
        k_res = len(remaining) + 1
        residual = BranchModel(b.id, w * k_res, (k_res * t) % (w * k_res))
        ln = BranchModel(new_id, len(chosen) + 1, 0)
        entries = [AttachEntry(new_id, 0, a_id, 0, 1, 1)] + _shifted(chosen, new_id)
        entries += [AttachEntry(b.id, 0, a_id, 1, -1, -1)] + _shifted(remaining, b.id)
        return _rebuild(X, [], [], [residual, ln], [Sector(a_id, SurfaceSig(True, 0, 2))], entries)

    sheets = [X.entry_at(b.id, j) for j in range(k)]
    mb_id = X.fresh_sector_id("M")
    ln = BranchModel(b.id, k + 1, 0)
    entries = [AttachEntry(b.id, 0, mb_id, 0, 1, 1)] + _shifted(sheets, b.id)
    return _rebuild(X, [], [], [ln], [Sector(mb_id, SurfaceSig(False, 1, 1))], entries)


def _shifted(entries: Sequence[AttachEntry], branch_id: str) -> List[AttachEntry]:
    return [
        AttachEntry(branch_id, j + 1, e.sector, e.circle, e.sign, e.side)
        for j, e in enumerate(entries)
    ]


# ---------------------------------------------------------------------------
# 展开与 IH
# ---------------------------------------------------------------------------

def _deterministic_xi(X: MultibranchedSurface, branch_id: str) -> Optional[MoveDescriptor]:
    b = X.branch(branch_id)
    if b.is_normal:
        if b.degree < 4:
            return None
        return MoveDescriptor("xi_split", b.id, (0, 1), (2, b.degree - 1))
    if b.wrap == 2:
        return MoveDescriptor("xi_unmobius", b.id) if b.orbit_count >= 2 else None
    if b.orbit_count >= 2:
        return MoveDescriptor("xi_extract", b.id, (0, b.orbit_count - 1))
    return None


def _spread_target(X: MultibranchedSurface) -> Optional[str]:
    for bid in sorted(X.branch_ids):
        if classify_branch(X, bid).spreadable and _xi_descriptors(X, bid):
            return bid
    return None


def spread_maximally(X: MultibranchedSurface, strategy: str = "deterministic") -> MultibranchedSurface:
    """总是改写 id 最小的可展开分支，直到没有可展开分支。"""
    if strategy != "deterministic":
        raise InvalidSpec(f"unknown spreading strategy {strategy!r}")
    current = X
    while True:
        bid = _spread_target(current)
        if bid is None:
            break
        current = apply_xi(current, _deterministic_xi(current, bid))
    stuck = [bid for bid in current.branch_ids if classify_branch(current, bid).spreadable]
    if stuck:
        logger.warning("branches %s are spreadable but admit no XI-move (normal degree <= 2)", stuck)
    return current


def maximal_spreadings(X: MultibranchedSurface) -> List[Tuple[MultibranchedSurface, Tuple[MoveDescriptor, ...]]]:
    """枚举全部极大展开（按规范编码去重），每次只改写 id 最小的可展开分支。"""
    limit = config.get_search_node_limit()
    results: Dict[CanonicalCode, Tuple[MultibranchedSurface, Tuple[MoveDescriptor, ...]]] = {}
    seen = set()
    stack: List[Tuple[MultibranchedSurface, Tuple[MoveDescriptor, ...]]] = [(X, ())]
    while stack:
        Y, path = stack.pop()
        code = canonical_code(Y)
        if code in seen:
            continue
        seen.add(code)
        if len(seen) > limit:
            logger.warning("re-spreading enumeration truncated at %d surfaces", limit)
            break
        bid = _spread_target(Y)
        if bid is None:
            results.setdefault(code, (Y, path))
            continue
        for m in reversed(_xi_descriptors(Y, bid)):
            stack.append((apply_xi(Y, m), path + (m,)))
    return [results[c] for c in sorted(results)]


def apply_ih(X: MultibranchedSurface, move: IHMove) -> MultibranchedSurface:
    Y = apply_ix(X, move.ix)
    for m in move.xi:
        Y = apply_xi(Y, m)
    return Y


def ih_moves(X: MultibranchedSurface) -> List[Tuple[IHMove, MultibranchedSurface]]:
    if not is_maximally_spread(X):
        raise NotMaximallySpread("IH-moves need a maximally spread surface")
    out: List[Tuple[IHMove, MultibranchedSurface]] = []
    seen = set()
    for ix in applicable_ix(X):
        collapsed = apply_ix(X, ix)
        for Z, path in maximal_spreadings(collapsed):
            code = canonical_code(Z)
            if code in seen:
                continue
            if not is_maximally_spread(Z):
                logger.debug("dropping %s: result keeps an unspreadable branch", ix.text())
                continue
            seen.add(code)
            out.append((IHMove(ix, path), Z))
    return out


def ih_neighbors(X: MultibranchedSurface) -> List[MultibranchedSurface]:
    return [Z for _, Z in ih_moves(X)]


def equivalent(X: MultibranchedSurface, Y: MultibranchedSurface, depth: Optional[int] = None) -> EquivalenceResult:
    """
    双向 BFS，按规范编码记忆化。找到的路径可重放；NoWithinDepth 只是搜索界，
    不构成不等价的证明。
    """
    if depth is None:
        depth = config.get_equiv_depth()
    for Z in (X, Y):
        if not is_maximally_spread(Z):
            raise NotMaximallySpread("equivalence search needs maximally spread surfaces")
    cx, cy = canonical_code(X), canonical_code(Y)
    if cx == cy:
        return EquivalenceResult(True, depth, MovePath(()), 1)

    limit = config.get_search_node_limit()
    parents = ({cx: None}, {cy: None})
    frontiers = ([X], [Y])
    used = [0, 0]
    while used[0] + used[1] < depth and frontiers[0] and frontiers[1]:
        side = 0 if len(frontiers[0]) <= len(frontiers[1]) else 1
        mine, other = parents[side], parents[1 - side]
        nxt: List[MultibranchedSurface] = []
        for S in frontiers[side]:
            cs = canonical_code(S)
            for move, T in ih_moves(S):
                ct = canonical_code(T)
                if ct in mine:
                    continue
                mine[ct] = (cs, move)
                if ct in other:
                    path = _join_paths(parents, ct)
                    logger.info("equivalent after %d IH-moves", len(path.steps))
                    return EquivalenceResult(True, depth, path, len(parents[0]) + len(parents[1]))
                nxt.append(T)
            if len(parents[0]) + len(parents[1]) > limit:
                logger.warning("equivalence search truncated at %d surfaces", limit)
                return EquivalenceResult(False, depth, None, limit)
        frontiers = (nxt, frontiers[1]) if side == 0 else (frontiers[0], nxt)
        used[side] += 1
    return EquivalenceResult(False, depth, None, len(parents[0]) + len(parents[1]))


def _join_paths(parents, meet: CanonicalCode) -> MovePath:
    forward: List[MoveStep] = []
    node = meet
    while parents[0][node] is not None:
        src, move = parents[0][node]
        forward.append(MoveStep(move, src, node))
        node = src
    forward.reverse()
    node = meet
    while parents[1][node] is not None:
        src, move = parents[1][node]
        forward.append(MoveStep(move, src, node, backward=True))
        node = src
    return MovePath(tuple(forward))


def same_ih_class(X: MultibranchedSurface, Y: MultibranchedSurface, depth: Optional[int] = None) -> bool:
    """两侧先各自确定性展开，再在深度内搜索 IH 等价。"""
    if not is_maximally_spread(X):
        X = spread_maximally(X)
    if not is_maximally_spread(Y):
        Y = spread_maximally(Y)
    return equivalent(X, Y, depth).equivalent


def replay_path(X: MultibranchedSurface, Y: MultibranchedSurface, path: MovePath) -> bool:
    """从 X 重放正向步骤、从 Y 重放反向步骤，两侧应在同一规范编码处相遇。"""
    current = X
    for step in path.steps:
        if step.backward:
            break
        if canonical_code(current) != step.source:
            return False
        current = apply_ih(current, step.move)
    meet_x = canonical_code(current)
    current = Y
    for step in reversed([s for s in path.steps if s.backward]):
        if canonical_code(current) != step.source:
            return False
        current = apply_ih(current, step.move)
    return canonical_code(current) == meet_x


def parse_ih_move(text: str) -> IHMove:
    parts = [p.strip() for p in text.split(";")]
    ix = parse_descriptor(parts[0])
    xi = tuple(parse_descriptor(p) for p in parts[1:])
    if ix.kind != "ix" or any(m.kind not in XI_KINDS for m in xi):
        raise InvalidSpec(f"bad IH-move {text!r}")
    return IHMove(ix, xi)


def replay_log(X: MultibranchedSurface, Y: MultibranchedSurface, text: str) -> bool:
    """重放 MovePath.to_text() 的文本日志：`->` 行作用在 X 上，`<-` 行倒序作用在 Y 上。"""
    forward: List[IHMove] = []
    backward: List[IHMove] = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        arrow, _, body = line.partition(" ")
        if arrow == "->":
            forward.append(parse_ih_move(body))
        elif arrow == "<-":
            backward.append(parse_ih_move(body))
        else:
            raise InvalidSpec(f"log line must start with -> or <-: {line!r}")
    for move in forward:
        X = apply_ih(X, move)
    for move in reversed(backward):
        Y = apply_ih(Y, move)
    return canonical_code(X) == canonical_code(Y)


# ---------------------------------------------------------------------------
# 形式压缩与管接（仅可定向扇区）
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NonSeparating:
    pass


@dataclass(frozen=True)
class Separating:
    genus1: int
    circles1: Tuple[int, ...]
    genus2: int
    circles2: Tuple[int, ...]


@dataclass(frozen=True)
class AddHandle:
    sector: str


@dataclass(frozen=True)
class JoinSectors:
    sector1: str
    circle1: int
    sector2: str
    circle2: int


def _sector_circle_entries(X: MultibranchedSurface, sector_id: str) -> Dict[int, AttachEntry]:
    return {e.circle: e for e in X.circles_of_sector(sector_id)}


def compress_sector(X: MultibranchedSurface, sector_id: str, spec, cap: bool = False) -> MultibranchedSurface:
    """
    沿压缩圆盘的形式压缩。非分离曲线：(g, b) -> (g-1, b)；分离曲线：扇区拆为
    (g1, |C1|+1) 与 (g2, |C2|+1)，两条新圆周不附着任何分支，记入 free_circles；
    cap=True 时直接以圆盘封口。曲线的本质性不做检验。两侧都必须保留至少一条附着在分支上的圆周，
    否则结果不连通，抛出 InvalidSplit。
    """
    s = X.sector(sector_id)
    if not s.sig.orientable:
        raise NonOrientableUnsupported("compression is only modelled on orientable sectors", s.id)
    if s.sig.euler() >= 0:
        raise InvalidSplit("disks and annuli carry no essential compressing curve", s.id)

    if isinstance(spec, NonSeparating):
        if s.sig.genus < 1:
            raise InvalidSplit("nonseparating compression needs genus >= 1", s.id)
        new = Sector(s.id, SurfaceSig(True, s.sig.genus - 1, s.sig.boundary_count))
        return build(
            [b for b in X.branches],
            [new if t.id == s.id else t for t in X.sectors],
            X.attachment, X.assumptions, X.free_circles,
        )

    if not isinstance(spec, Separating):
        raise InvalidSplit(f"unknown curve spec {spec!r}", s.id)
    c1, c2 = tuple(spec.circles1), tuple(spec.circles2)
    if spec.genus1 < 0 or spec.genus2 < 0 or spec.genus1 + spec.genus2 != s.sig.genus:
        raise InvalidSplit("genus split must add up to the sector genus", s.id)
    if sorted(c1 + c2) != list(range(s.sig.boundary_count)):
        raise InvalidSplit("circle bipartition must cover every boundary circle once", s.id)
    if (spec.genus1 == 0 and not c1) or (spec.genus2 == 0 and not c2):
        raise InvalidSplit("one side of the curve would be a disk", s.id)
    by_circle = _sector_circle_entries(X, s.id)
    if not all(any(c in by_circle for c in side) for side in (c1, c2)):
        raise InvalidSplit("one side of the curve meets no branch, the result would be disconnected", s.id)

    other_id = X.fresh_sector_id(f"{s.id}_c")
    free_old = {c for sid, c in X.free_circles if sid == s.id}
    sectors: List[Sector] = []
    entries = [e for e in X.attachment if e.sector != s.id]
    free = [(sid, c) for sid, c in X.free_circles if sid != s.id]
    for new_id, genus, circles in ((s.id, spec.genus1, c1), (other_id, spec.genus2, c2)):
        extra = 0 if cap else 1
        sectors.append(Sector(new_id, SurfaceSig(True, genus, len(circles) + extra)))
        for j, c in enumerate(circles):
            if c in by_circle:
                e = by_circle[c]
                entries.append(AttachEntry(e.branch, e.orbit, new_id, j, e.sign, e.side))
            elif c in free_old:
                free.append((new_id, j))
        if not cap:
            free.append((new_id, len(circles)))
    others = [t for t in X.sectors if t.id != s.id]
    pos = [t.id for t in X.sectors].index(s.id)
    ordered = others[:pos] + [sectors[0]] + others[pos:] + [sectors[1]]
    return build(X.branches, ordered, entries, X.assumptions, free)


def cap_free_circles(X: MultibranchedSurface) -> MultibranchedSurface:
    """以圆盘封住全部自由圆周。"""
    if not X.free_circles:
        return X
    free_by_sector: Dict[str, List[int]] = {}
    for sid, c in X.free_circles:
        free_by_sector.setdefault(sid, []).append(c)
    sectors, entries = [], []
    for s in X.sectors:
        gone = sorted(free_by_sector.get(s.id, []))
        sectors.append(Sector(s.id, SurfaceSig(s.sig.orientable, s.sig.genus, s.sig.boundary_count - len(gone))))
    for e in X.attachment:
        gone = free_by_sector.get(e.sector, [])
        shift = sum(1 for c in gone if c < e.circle)
        entries.append(AttachEntry(e.branch, e.orbit, e.sector, e.circle - shift, e.sign, e.side))
    return build(X.branches, sectors, entries, X.assumptions, ())


def tube(X: MultibranchedSurface, spec) -> MultibranchedSurface:
    """compress_sector 的形式逆：加柄，或沿一对自由圆周把两个扇区接成一个。"""
    if isinstance(spec, AddHandle):
        s = X.sector(spec.sector)
        if not s.sig.orientable:
            raise InvalidSpec("tubing is only modelled on orientable sectors", s.id)
        new = Sector(s.id, SurfaceSig(True, s.sig.genus + 1, s.sig.boundary_count))
        return build(X.branches, [new if t.id == s.id else t for t in X.sectors], X.attachment, X.assumptions, X.free_circles)

    if not isinstance(spec, JoinSectors):
        raise InvalidSpec(f"unknown tubing spec {spec!r}")
    free = set(X.free_circles)
    if (spec.sector1, spec.circle1) not in free or (spec.sector2, spec.circle2) not in free:
        raise InvalidSpec("tubing joins two free circles")
    if spec.sector1 == spec.sector2:
        raise InvalidSpec("joining a sector to itself is a handle, use AddHandle")
    s1, s2 = X.sector(spec.sector1), X.sector(spec.sector2)
    if not (s1.sig.orientable and s2.sig.orientable):
        raise InvalidSpec("tubing is only modelled on orientable sectors")

    def renumber(sector: Sector, dropped: int, offset: int) -> Dict[int, int]:
        keep = [c for c in range(sector.sig.boundary_count) if c != dropped]
        return {c: offset + j for j, c in enumerate(keep)}

    map1 = renumber(s1, spec.circle1, 0)
    map2 = renumber(s2, spec.circle2, len(map1))
    merged = Sector(s1.id, SurfaceSig(True, s1.sig.genus + s2.sig.genus, len(map1) + len(map2)))
    entries = []
    for e in X.attachment:
        if e.sector == s1.id:
            entries.append(AttachEntry(e.branch, e.orbit, s1.id, map1[e.circle], e.sign, e.side))
        elif e.sector == s2.id:
            entries.append(AttachEntry(e.branch, e.orbit, s1.id, map2[e.circle], e.sign, e.side))
        else:
            entries.append(e)
    new_free = []
    for sid, c in X.free_circles:
        if (sid, c) in ((s1.id, spec.circle1), (s2.id, spec.circle2)):
            continue
        if sid == s1.id:
            new_free.append((s1.id, map1[c]))
        elif sid == s2.id:
            new_free.append((s1.id, map2[c]))
        else:
            new_free.append((sid, c))
    sectors = [merged if t.id == s1.id else t for t in X.sectors if t.id != s2.id]
    return build(X.branches, sectors, entries, X.assumptions, new_free)
