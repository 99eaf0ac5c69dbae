"""分支/扇区分类、欧拉示性数、整系数同调与类 𝒳 的可组合检验条件。"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Tuple

from sympy.polys.domains import ZZ
from sympy.polys.matrices import DomainMatrix
from sympy.polys.matrices.normalforms import invariant_factors

from src.surfaces.model import MultibranchedSurface

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BranchClass:
    normal: bool
    pure: bool
    tribranched_at: bool
    spreadable: bool


SECTOR_KINDS = ("normal_annulus", "quasi_normal_annulus", "normal_mobius", "generic")


@dataclass(frozen=True)
class SectorClass:
    kind: str
    wraps: Tuple[int, ...] = ()


@dataclass(frozen=True)
class ClassXReport:
    maximally_spread: bool
    no_disk_sector: bool
    min_degree_ok: bool
    essential_assumed: bool
    verdict: str  # in_class | out | conditional
    reasons: Tuple[str, ...] = ()

    @property
    def checkable_conditions(self) -> Tuple[bool, bool, bool]:
        """可组合检验的三项条件：极大展开、无圆盘扇区、分支度数 ≥ 3。"""
        return self.maximally_spread, self.no_disk_sector, self.min_degree_ok


@dataclass(frozen=True)
class HomologyReport:
    b0: int
    h1_rank: int
    h1_torsion: Tuple[int, ...]
    h2_rank: int

    def h1_text(self) -> str:
        parts = []
        if self.h1_rank == 1:
            parts.append("Z")
        elif self.h1_rank > 1:
            parts.append(f"Z^{self.h1_rank}")
        parts.extend(f"Z/{t}" for t in self.h1_torsion)
        return " + ".join(parts) if parts else "0"

    def h2_text(self) -> str:
        if self.h2_rank == 0:
            return "0"
        return "Z" if self.h2_rank == 1 else f"Z^{self.h2_rank}"


def euler_sectors(X: MultibranchedSurface) -> int:
    return sum(s.sig.euler() for s in X.sectors)


def classify_branch(X: MultibranchedSurface, branch_id: str) -> BranchClass:
    b = X.branch(branch_id)
    tribranched = b.degree == 3
    return BranchClass(
        normal=b.is_normal,
        pure=b.is_pure,
        tribranched_at=tribranched,
        spreadable=not ((b.is_normal and tribranched) or b.is_pure),
    )


def classify_sector(X: MultibranchedSurface, sector_id: str) -> SectorClass:
    s = X.sector(sector_id)
    entries = X.circles_of_sector(s.id)
    wraps = tuple(sorted(X.branch(e.branch).wrap for e in entries))
    if len(entries) != s.sig.boundary_count:
        # 含自由圆周的形式复形不参与 IX 分类
        return SectorClass("generic", wraps)
    if s.sig.is_annulus:
        if wraps == (1, 1):
            return SectorClass("normal_annulus", wraps)
        if wraps[0] == 1 and wraps[1] >= 2:
            return SectorClass("quasi_normal_annulus", wraps)
    if s.sig.is_mobius and wraps == (1,):
        return SectorClass("normal_mobius", wraps)
    return SectorClass("generic", wraps)


def is_maximally_spread(X: MultibranchedSurface) -> bool:
    return not any(classify_branch(X, bid).spreadable for bid in X.branch_ids)


def class_x_report(X: MultibranchedSurface) -> ClassXReport:
    spread = is_maximally_spread(X)
    no_disk = not any(s.sig.is_disk for s in X.sectors)
    degree_ok = all(b.degree >= 3 for b in X.branches)
    essential = X.has_assumption("essential")

    reasons: List[str] = []
    if not spread:
        reasons.append("maximally_spread")
    if not no_disk:
        reasons.append("disk_sector")
    if not degree_ok:
        reasons.append("min_degree")
    if reasons:
        verdict = "out"
    elif not essential:
        verdict = "conditional"
        reasons.append("essential")
    else:
        verdict = "in_class"
    return ClassXReport(spread, no_disk, degree_ok, essential, verdict, tuple(reasons))


def chain_complex(X: MultibranchedSurface) -> Tuple[List[List[int]], List[List[int]], int, int, int]:
    """
    胞腔模型：每个分支一个顶点与一条环边；每个扇区 (b-1) 条连接边、2g 条（可定向）
    或 g 条交叉帽环边，以及一个 2-胞腔，其边界为 Σ ε_j·w_j·(分支环) + 2·Σ(交叉帽环)。

    返回 (∂1, ∂2, #顶点, #边, #面)，矩阵按行 = 低维胞腔、列 = 高维胞腔。
    """
    vindex = {b.id: i for i, b in enumerate(X.branches)}
    edges: List[Tuple[int, int]] = []  # (tail, head)
    loop_of: Dict[str, int] = {}
    for b in X.branches:
        loop_of[b.id] = len(edges)
        edges.append((vindex[b.id], vindex[b.id]))

    faces: List[Dict[int, int]] = []
    for s in X.sectors:
        entries = X.circles_of_sector(s.id)
        base = vindex[entries[0].branch]
        col: Dict[int, int] = {}
        for e in entries:
            w = X.branch(e.branch).wrap
            col[loop_of[e.branch]] = col.get(loop_of[e.branch], 0) + e.sign * w
        for e in entries[1:]:
            # 连接边在面边界中出现两次且方向相反，贡献为零
            edges.append((base, vindex[e.branch]))
        # 自由圆周：连接边与圆周本身收缩为基点处的一条环边
        for _ in range(s.sig.boundary_count - len(entries)):
            col[len(edges)] = 1
            edges.append((base, base))
        if s.sig.orientable:
            for _ in range(2 * s.sig.genus):
                edges.append((base, base))
        else:
            for _ in range(s.sig.genus):
                col[len(edges)] = 2
                edges.append((base, base))
        faces.append(col)

    nv, ne, nf = len(X.branches), len(edges), len(faces)
    d1 = [[0] * ne for _ in range(nv)]
    for j, (t, h) in enumerate(edges):
        d1[h][j] += 1
        d1[t][j] -= 1
    d2 = [[0] * nf for _ in range(ne)]
    for j, col in enumerate(faces):
        for i, v in col.items():
            d2[i][j] = v
    return d1, d2, nv, ne, nf


def _rank_and_factors(rows: List[List[int]], nrows: int, ncols: int) -> Tuple[int, Tuple[int, ...]]:
    if nrows == 0 or ncols == 0:
        return 0, ()
    m = DomainMatrix([[ZZ(v) for v in r] for r in rows], (nrows, ncols), ZZ)
    factors = [abs(int(f)) for f in invariant_factors(m) if f != 0]
    return len(factors), tuple(f for f in factors if f != 1)


def homology(X: MultibranchedSurface) -> HomologyReport:
    d1, d2, nv, ne, nf = chain_complex(X)
    r1, _ = _rank_and_factors(d1, nv, ne)
    r2, torsion = _rank_and_factors(d2, ne, nf)
    report = HomologyReport(
        b0=nv - r1,
        h1_rank=ne - r1 - r2,
        h1_torsion=tuple(sorted(torsion)),
        h2_rank=nf - r2,
    )
    logger.debug("homology: V=%d E=%d F=%d -> %s", nv, ne, nf, report)
    return report
