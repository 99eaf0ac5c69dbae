"""
特征环面系统与 ∂N(X) 的面粘合构造。

N(X) = N(B_X) ∪ N(E_X)。每条分支的实心环面边界上，k 条特征曲线（斜率 (w, t)）把环面
切成 k 个间隙环面；每个可定向扇区贡献正反两个面，不可定向扇区贡献一个二重覆叠面。
slot i 与 i+1 之间的间隙由 slot i 所在曲线的上侧与 slot i+1 所在曲线的下侧围成。
"""
import logging
from collections import Counter, deque
from dataclasses import dataclass
from typing import Dict, List, Tuple

import networkx as nx

from src.surfaces.model import MultibranchedSurface

logger = logging.getLogger(__name__)

UPPER, LOWER = 1, -1


@dataclass(frozen=True)
class CharacteristicAnnulus:
    branch: str
    orbit: int
    slope: Tuple[int, int]
    sides: Tuple[str, str] = ("+", "-")


@dataclass(frozen=True)
class Face:
    name: str
    kind: str  # gap | sector_face | double_cover
    euler: int


@dataclass(frozen=True)
class Gluing:
    """一条曲线侧：在此处一个间隙面与一个扇区面沿圆周粘合。

    *_sign 为该面在圆周上诱导的边界定向相对于分支纵向的符号。
    """

    branch: str
    orbit: int
    side: int
    gap_face: str
    gap_sign: int
    sector_face: str
    sector_sign: int


@dataclass(frozen=True)
class FaceComplex:
    faces: Tuple[Face, ...]
    gluings: Tuple[Gluing, ...]
    collars: Tuple[Tuple[str, str], ...] = ()

    def curve_side_usage(self) -> Dict[Tuple[str, int, int], int]:
        usage: Counter = Counter()
        for g in self.gluings:
            usage[(g.branch, g.orbit, g.side)] += 2
        return dict(usage)


@dataclass(frozen=True, order=True)
class BoundaryComponent:
    orientable: bool
    genus: int
    euler: int

    def describe(self) -> str:
        if self.orientable:
            if self.genus == 0:
                return "sphere"
            return "torus" if self.genus == 1 else f"genus-{self.genus}"
        return f"nonorientable-{self.genus}"


@dataclass(frozen=True)
class BoundarySurfaceReport:
    components: Tuple[BoundaryComponent, ...]

    @property
    def euler(self) -> int:
        return sum(c.euler for c in self.components)

    def summary(self) -> str:
        counts = Counter(c.describe() for c in self.components)
        return ", ".join(f"{n}x {name}" for name, n in sorted(counts.items()))


def characteristic_annuli(X: MultibranchedSurface) -> List[CharacteristicAnnulus]:
    return [
        CharacteristicAnnulus(b.id, j, b.slope)
        for b in X.branches
        for j in range(b.orbit_count)
    ]


def _sector_face(X: MultibranchedSurface, sector_id: str, positive: bool) -> str:
    if X.sector(sector_id).sig.orientable:
        return f"sector:{sector_id}:{'+' if positive else '-'}"
    return f"cover:{sector_id}"


def face_complex(X: MultibranchedSurface) -> FaceComplex:
    faces: List[Face] = []
    for s in X.sectors:
        if s.sig.orientable:
            faces.append(Face(f"sector:{s.id}:+", "sector_face", s.sig.euler()))
            faces.append(Face(f"sector:{s.id}:-", "sector_face", s.sig.euler()))
        else:
            faces.append(Face(f"cover:{s.id}", "double_cover", 2 * s.sig.euler()))

    gluings: List[Gluing] = []
    for b in X.branches:
        k = b.orbit_count
        for g in range(k):
            faces.append(Face(f"gap:{b.id}:{g}", "gap", 0))
        for j, e in enumerate(X.sheets(b.id)):
            upper_sign = e.sign * e.side
            # σ=+ 时正面朝向上侧
            upper_face = _sector_face(X, e.sector, e.side == 1)
            lower_face = _sector_face(X, e.sector, e.side != 1)
            gluings.append(Gluing(b.id, j, UPPER, f"gap:{b.id}:{j}", -1, upper_face, upper_sign))
            gluings.append(Gluing(b.id, j, LOWER, f"gap:{b.id}:{(j - 1) % k}", 1, lower_face, -upper_sign))

    collars = tuple(
        (_sector_face(X, sid, True), _sector_face(X, sid, False)) for sid, _ in X.free_circles
    )
    return FaceComplex(tuple(faces), tuple(gluings), collars)


def boundary_surface(X: MultibranchedSurface) -> BoundarySurfaceReport:
    fc = face_complex(X)
    graph = nx.MultiGraph()
    graph.add_nodes_from(f.name for f in fc.faces)
    for g in fc.gluings:
        graph.add_edge(g.gap_face, g.sector_face, parity=-(g.gap_sign * g.sector_sign))
    for a, b in fc.collars:
        graph.add_edge(a, b, parity=1)

    euler = {f.name: f.euler for f in fc.faces}
    components: List[BoundaryComponent] = []
    for comp in nx.connected_components(graph):
        chi = sum(euler[n] for n in comp)
        orientable = _two_colorable(graph, next(iter(sorted(comp))))
        genus = (2 - chi) // 2 if orientable else 2 - chi
        components.append(BoundaryComponent(orientable, genus, chi))
    report = BoundarySurfaceReport(tuple(sorted(components)))
    logger.debug("boundary surface: %d faces, %d gluings -> %s", len(fc.faces), len(fc.gluings), report.summary())
    return report


def _two_colorable(graph: nx.MultiGraph, start: str) -> bool:
    """按粘合奇偶性给面定向（±1），出现矛盾即不可定向。"""
    color = {start: 1}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for _, v, parity in graph.edges(u, data="parity"):
            want = color[u] * parity
            if v not in color:
                color[v] = want
                queue.append(v)
            elif color[v] != want:
                return False
    return True
