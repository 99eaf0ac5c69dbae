"""
多分支曲面的核心数据类型：校验构造、轨道视图、同构判定与规范编码。

局部模型：分支 l 的经圆上有 d 个叶片端点（slot 0..d-1），沿纵向绕行一周后
slot i 移到 i+s。于是轨道数 k = gcd(d, s)（gcd(d, 0) = d），每条轨道含
w = d / k 个 slot，轨道 j 的 slot 集合为 {j, j+k, j+2k, ...}。每条轨道恰好
粘一条扇区边界圆，其缠绕数即为 w。
"""
import json
import logging
from dataclasses import dataclass, field, replace
from functools import cached_property
from math import gcd
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import networkx as nx

from src.surfaces.errors import (
    BadSignature,
    ClosedSector,
    Disconnected,
    NoBranch,
    NonUniformWrap,
    ReusedCircle,
    ReusedOrbit,
    UnattachedCircle,
    UnknownBranch,
    UnknownSector,
    ValidationError,
)

logger = logging.getLogger(__name__)

ASSUMPTION_KINDS = ("essential", "atoroidal_branches", "acylindrical_sectors", "order_condition2")

CanonicalCode = bytes


@dataclass(frozen=True, order=True)
class SurfaceSig:
    """扇区闭包的紧曲面类型；不可定向时 genus 表示交叉帽个数。"""

    orientable: bool
    genus: int
    boundary_count: int

    def euler(self) -> int:
        if self.orientable:
            return 2 - 2 * self.genus - self.boundary_count
        return 2 - self.genus - self.boundary_count

    @property
    def is_disk(self) -> bool:
        return self.orientable and self.genus == 0 and self.boundary_count == 1

    @property
    def is_annulus(self) -> bool:
        return self.orientable and self.genus == 0 and self.boundary_count == 2

    @property
    def is_mobius(self) -> bool:
        return (not self.orientable) and self.genus == 1 and self.boundary_count == 1


@dataclass(frozen=True)
class BranchModel:
    id: str
    degree: int
    shift: int = 0

    @property
    def orbit_count(self) -> int:
        return gcd(self.degree, self.shift)

    @property
    def wrap(self) -> int:
        return self.degree // self.orbit_count

    @property
    def is_normal(self) -> bool:
        return self.shift == 0

    @property
    def is_pure(self) -> bool:
        return self.orbit_count == 1

    @property
    def slope(self) -> Tuple[int, int]:
        """特征环面上曲线的斜率 (w, t)，t = s / k。"""
        return self.wrap, self.shift // self.orbit_count

    def orbit_of_slot(self, slot: int) -> int:
        return slot % self.orbit_count

    def slots(self, orbit: int) -> Tuple[int, ...]:
        k = self.orbit_count
        return tuple(orbit + m * k for m in range(self.wrap))


@dataclass(frozen=True)
class Sector:
    id: str
    sig: SurfaceSig


@dataclass(frozen=True)
class AttachEntry:
    """(分支, 轨道) -> (扇区, 边界圆)。sign 为 ε，side 为 σ，取值 +1/-1。

    wrap 仅记录输入中显式请求的缠绕数，用于校验，不参与比较。
    """

    branch: str
    orbit: int
    sector: str
    circle: int
    sign: int = 1
    side: int = 1
    wrap: Optional[int] = field(default=None, compare=False)


@dataclass(frozen=True, order=True)
class AssumptionRecord:
    kind: str
    provenance: str = ""


@dataclass(frozen=True)
class OrbitView:
    orbit: int
    wrap: int
    slots: Tuple[int, ...]
    sector: str
    circle: int
    sign: int
    side: int


@dataclass(frozen=True)
class MultibranchedSurface:
    """不可变的多分支曲面值。请通过 build() 构造以保证不变量成立。"""

    branches: Tuple[BranchModel, ...]
    sectors: Tuple[Sector, ...]
    attachment: Tuple[AttachEntry, ...]
    assumptions: FrozenSet[AssumptionRecord] = frozenset()
    free_circles: Tuple[Tuple[str, int], ...] = ()

    @cached_property
    def _branch_index(self) -> Dict[str, BranchModel]:
        return {b.id: b for b in self.branches}

    @cached_property
    def _sector_index(self) -> Dict[str, Sector]:
        return {s.id: s for s in self.sectors}

    @cached_property
    def _by_orbit(self) -> Dict[Tuple[str, int], AttachEntry]:
        return {(e.branch, e.orbit): e for e in self.attachment}

    @cached_property
    def _by_circle(self) -> Dict[Tuple[str, int], AttachEntry]:
        return {(e.sector, e.circle): e for e in self.attachment}

    @property
    def branch_ids(self) -> List[str]:
        return [b.id for b in self.branches]

    @property
    def sector_ids(self) -> List[str]:
        return [s.id for s in self.sectors]

    @property
    def has_free_circles(self) -> bool:
        return bool(self.free_circles)

    def branch(self, branch_id: str) -> BranchModel:
        try:
            return self._branch_index[branch_id]
        except KeyError:
            raise UnknownBranch(f"unknown branch {branch_id!r}", branch_id) from None

    def sector(self, sector_id: str) -> Sector:
        try:
            return self._sector_index[sector_id]
        except KeyError:
            raise UnknownSector(f"unknown sector {sector_id!r}", sector_id) from None

    def entry_at(self, branch_id: str, orbit: int) -> AttachEntry:
        return self._by_orbit[(branch_id, orbit)]

    def entry_of_circle(self, sector_id: str, circle: int) -> Optional[AttachEntry]:
        return self._by_circle.get((sector_id, circle))

    def sheets(self, branch_id: str) -> List[AttachEntry]:
        """按轨道编号排列的附着项。"""
        b = self.branch(branch_id)
        return [self._by_orbit[(b.id, j)] for j in range(b.orbit_count)]

    def circles_of_sector(self, sector_id: str) -> List[AttachEntry]:
        s = self.sector(sector_id)
        out = []
        for c in range(s.sig.boundary_count):
            e = self._by_circle.get((s.id, c))
            if e is not None:
                out.append(e)
        return out

    def circle_wraps(self, sector_id: str) -> List[int]:
        return [self.branch(e.branch).wrap for e in self.circles_of_sector(sector_id)]

    def has_assumption(self, kind: str) -> bool:
        return any(a.kind == kind for a in self.assumptions)

    def with_assumptions(self, records: Iterable[AssumptionRecord]) -> "MultibranchedSurface":
        return replace(self, assumptions=frozenset(self.assumptions) | frozenset(records))

    def fresh_branch_id(self, base: str) -> str:
        return _fresh(base, set(self.branch_ids))

    def fresh_sector_id(self, base: str) -> str:
        return _fresh(base, set(self.sector_ids))


def _fresh(base: str, taken: set) -> str:
    if base not in taken:
        return base
    n = 1
    while f"{base}_{n}" in taken:
        n += 1
    return f"{base}_{n}"


def build(
    branches: Sequence[BranchModel],
    sectors: Sequence[Sector],
    attachment: Sequence[AttachEntry],
    assumptions: Iterable[AssumptionRecord] = (),
    free_circles: Iterable[Tuple[str, int]] = (),
) -> MultibranchedSurface:
    """校验原始数据并构造曲面，遇到第一条被违反的不变量即抛出 ValidationError。"""
    branches = tuple(branches)
    sectors = tuple(sectors)
    free = tuple(sorted(set(free_circles)))
    if not branches:
        raise NoBranch("a multibranched surface needs at least one branch")

    branch_index: Dict[str, BranchModel] = {}
    for b in branches:
        if b.id in branch_index:
            raise ValidationError("duplicate branch id", b.id)
        if b.degree < 1 or not (0 <= b.shift < b.degree):
            raise BadSignature(f"degree={b.degree} shift={b.shift} violates 0 <= shift < degree", b.id)
        branch_index[b.id] = b

    sector_index: Dict[str, Sector] = {}
    for s in sectors:
        if s.id in sector_index:
            raise ValidationError("duplicate sector id", s.id)
        if s.sig.boundary_count < 1:
            raise ClosedSector("closed sectors are not allowed", s.id)
        if s.sig.genus < 0 or (not s.sig.orientable and s.sig.genus < 1):
            raise BadSignature("invalid genus / crosscap count", s.id)
        sector_index[s.id] = s

    for e in attachment:
        loc = f"{e.branch}.{e.orbit} {e.sector}.{e.circle}"
        b = branch_index.get(e.branch)
        if b is None:
            raise UnknownBranch(f"unknown branch {e.branch!r}", loc)
        if e.sector not in sector_index:
            raise UnknownSector(f"unknown sector {e.sector!r}", loc)
        if not 0 <= e.orbit < b.orbit_count:
            raise ValidationError(f"orbit out of range (k={b.orbit_count})", loc)
        if not 0 <= e.circle < sector_index[e.sector].sig.boundary_count:
            raise ValidationError("circle out of range", loc)
        if e.sign not in (1, -1) or e.side not in (1, -1):
            raise ValidationError("sign/side must be +1 or -1", loc)

    # 旋转模型下同一分支上的所有圆周缠绕数相同
    requested: Dict[str, set] = {}
    for e in attachment:
        if e.wrap is not None:
            requested.setdefault(e.branch, set()).add(e.wrap)
    for bid, wraps in requested.items():
        b = branch_index[bid]
        if len(wraps) > 1:
            raise NonUniformWrap(f"mixed wraps {sorted(wraps)} requested at one branch", bid)
        (w,) = wraps
        if w != b.wrap:
            raise NonUniformWrap(f"wrap {w} requested but degree={b.degree} shift={b.shift} gives wrap {b.wrap}", bid)

    seen_orbits: Dict[Tuple[str, int], AttachEntry] = {}
    seen_circles: Dict[Tuple[str, int], AttachEntry] = {}
    for e in attachment:
        if (e.branch, e.orbit) in seen_orbits:
            raise ReusedOrbit("orbit attached twice", f"{e.branch}.{e.orbit}")
        if (e.sector, e.circle) in seen_circles:
            raise ReusedCircle("circle attached twice", f"{e.sector}.{e.circle}")
        seen_orbits[(e.branch, e.orbit)] = e
        seen_circles[(e.sector, e.circle)] = e

    for sid, c in free:
        if sid not in sector_index or not 0 <= c < sector_index[sid].sig.boundary_count:
            raise ValidationError("free circle out of range", f"{sid}.{c}")
        if (sid, c) in seen_circles:
            raise ReusedCircle("free circle is also attached", f"{sid}.{c}")
    free_set = set(free)

    for s in sectors:
        for c in range(s.sig.boundary_count):
            if (s.id, c) not in seen_circles and (s.id, c) not in free_set:
                raise UnattachedCircle("boundary circle is not attached", f"{s.id}.{c}")
    for b in branches:
        for j in range(b.orbit_count):
            if (b.id, j) not in seen_orbits:
                raise UnattachedCircle("orbit carries no circle", f"{b.id}.{j}")

    g = nx.Graph()
    g.add_nodes_from(("b", b.id) for b in branches)
    g.add_nodes_from(("s", s.id) for s in sectors)
    g.add_edges_from((("b", e.branch), ("s", e.sector)) for e in attachment)
    if not nx.is_connected(g):
        raise Disconnected(f"incidence graph has {nx.number_connected_components(g)} components")

    order = {b.id: i for i, b in enumerate(branches)}
    ordered = tuple(sorted(attachment, key=lambda e: (order[e.branch], e.orbit)))
    return MultibranchedSurface(branches, sectors, ordered, frozenset(assumptions), free)


def orbits(X: MultibranchedSurface, branch_id: str) -> List[OrbitView]:
    b = X.branch(branch_id)
    return [
        OrbitView(j, b.wrap, b.slots(j), e.sector, e.circle, e.sign, e.side)
        for j, e in enumerate(X.sheets(b.id))
    ]


# ---------------------------------------------------------------------------
# 规范编码
# ---------------------------------------------------------------------------

def _rank(colors: Dict[str, tuple]) -> Dict[str, int]:
    values = sorted(set(colors.values()))
    pos = {v: i for i, v in enumerate(values)}
    return {key: pos[v] for key, v in colors.items()}


def _dihedral_views(seq: Sequence) -> List[Tuple[bool, int, tuple]]:
    """经圆轨道序列在旋转与反向下的全部视图 (reversed, r, 视图)。"""
    k = len(seq)
    views = []
    for r in range(k):
        views.append((False, r, tuple(seq[(r + p) % k] for p in range(k))))
        views.append((True, r, tuple(seq[(r - p) % k] for p in range(k))))
    return views


def _refine(X: MultibranchedSurface) -> Tuple[Dict[str, int], Dict[str, int]]:
    free_count: Dict[str, int] = {}
    for sid, _ in X.free_circles:
        free_count[sid] = free_count.get(sid, 0) + 1
    bcol = _rank({b.id: (b.degree, b.shift) for b in X.branches})
    scol = _rank({
        s.id: (s.sig.orientable, s.sig.genus, s.sig.boundary_count, free_count.get(s.id, 0))
        for s in X.sectors
    })
    for _ in range(len(X.branches) + len(X.sectors)):
        nb = {}
        for b in X.branches:
            seq = [(scol[e.sector], e.sign * e.side) for e in X.sheets(b.id)]
            nb[b.id] = (bcol[b.id], min(v for _, _, v in _dihedral_views(seq)))
        ns = {}
        for s in X.sectors:
            feats = sorted((bcol[e.branch], e.sign * e.side) for e in X.circles_of_sector(s.id))
            ns[s.id] = (scol[s.id], tuple(feats))
        nb, ns = _rank(nb), _rank(ns)
        stable = len(set(nb.values())) == len(set(bcol.values())) and len(set(ns.values())) == len(set(scol.values()))
        bcol, scol = nb, ns
        if stable:
            break
    return bcol, scol


def canonical_code(X: MultibranchedSurface) -> CanonicalCode:
    """
    规范编码：颜色细化确定分支的候选位置与候选旋转/反向，再回溯取字典序最小的编码。

    扇区标号按首次出现的顺序分配；可定向扇区在首次出现时翻转定向使首个 ε 为 +，
    不可定向扇区在每条圆周上单独翻转局部定向使 ε 为 +。
    """
    bcol, scol = _refine(X)
    free_count: Dict[str, int] = {}
    for sid, _ in X.free_circles:
        free_count[sid] = free_count.get(sid, 0) + 1

    candidates: Dict[str, List[Tuple[bool, int]]] = {}
    for b in X.branches:
        seq = [(scol[e.sector], e.sign * e.side) for e in X.sheets(b.id)]
        views = _dihedral_views(seq)
        best_view = min(v for _, _, v in views)
        candidates[b.id] = [(rev, r) for rev, r, v in views if v == best_view]

    slots = sorted(X.branch_ids, key=lambda bid: bcol[bid])
    colors_at = [bcol[bid] for bid in slots]
    best: List[Optional[list]] = [None]

    def place(b: BranchModel, rev: bool, r: int, labels: Dict[str, int], flips: Dict[str, int]) -> tuple:
        k = b.orbit_count
        toks = []
        for p in range(k):
            o = (r - p) % k if rev else (r + p) % k
            e = X.entry_at(b.id, o)
            eps, sig = (-e.sign, -e.side) if rev else (e.sign, e.side)
            sector = X.sector(e.sector)
            new = e.sector not in labels
            if new:
                labels[e.sector] = len(labels)
                if sector.sig.orientable:
                    flips[e.sector] = eps
            if sector.sig.orientable:
                eps, sig = eps * flips[e.sector], sig * flips[e.sector]
            else:
                eps, sig = 1, sig * eps
            head = (
                (int(sector.sig.orientable), sector.sig.genus, sector.sig.boundary_count, free_count.get(e.sector, 0))
                if new else (0, 0, 0, 0)
            )
            toks.append((labels[e.sector], int(new)) + head + (eps, sig))
        return (b.degree, b.shift, tuple(toks))

    def dfs(pos: int, used: FrozenSet[str], prefix: list, labels: Dict[str, int], flips: Dict[str, int]) -> None:
        if pos == len(slots):
            if best[0] is None or prefix < best[0]:
                best[0] = list(prefix)
            return
        for bid in X.branch_ids:
            if bid in used or bcol[bid] != colors_at[pos]:
                continue
            for rev, r in candidates[bid]:
                lab, fl = dict(labels), dict(flips)
                tok = place(X.branch(bid), rev, r, lab, fl)
                cand = prefix + [tok]
                if best[0] is not None and cand > best[0][: len(cand)]:
                    continue
                dfs(pos + 1, used | {bid}, cand, lab, fl)

    dfs(0, frozenset(), [], {}, {})
    return json.dumps(best[0], separators=(",", ":")).encode("ascii")


def is_isomorphic(X: MultibranchedSurface, Y: MultibranchedSurface) -> bool:
    if len(X.branches) != len(Y.branches) or len(X.sectors) != len(Y.sectors):
        return False
    return canonical_code(X) == canonical_code(Y)


def relabel(
    X: MultibranchedSurface,
    branch_names: Dict[str, str],
    sector_names: Dict[str, str],
    rotations: Optional[Dict[str, int]] = None,
    circle_perms: Optional[Dict[str, Sequence[int]]] = None,
) -> MultibranchedSurface:
    """按给定的改名、轨道旋转与圆周重排生成同构副本。"""
    rotations = rotations or {}
    circle_perms = circle_perms or {}
    branches = [replace(b, id=branch_names.get(b.id, b.id)) for b in X.branches]
    sectors = [replace(s, id=sector_names.get(s.id, s.id)) for s in X.sectors]
    entries = []
    for e in X.attachment:
        k = X.branch(e.branch).orbit_count
        perm = circle_perms.get(e.sector)
        entries.append(replace(
            e,
            branch=branch_names.get(e.branch, e.branch),
            orbit=(e.orbit + rotations.get(e.branch, 0)) % k,
            sector=sector_names.get(e.sector, e.sector),
            circle=perm[e.circle] if perm else e.circle,
        ))
    free = [
        (sector_names.get(s, s), circle_perms[s][c] if s in circle_perms else c)
        for s, c in X.free_circles
    ]
    return build(branches, sectors, entries, X.assumptions, free)
