"""
可执行的样例构造：Hopf 链族 X1..X4（含四个偏序证书）、θ 图 × S¹，以及测试用的随机曲面生成器。

命名约定：l1、l2 为纯分支 (p,1)、(q,1)；m1、m2 为展开后的三叉正规分支 (3,0)。
"""
import logging
import random
from dataclasses import dataclass, field
from math import gcd
from typing import Dict, List, Optional, Tuple

from src import config
from src.surfaces.errors import BadParameters, Disconnected, LimitsUnsatisfiable
from src.surfaces.model import (
    AssumptionRecord,
    AttachEntry,
    BranchModel,
    MultibranchedSurface,
    Sector,
    SurfaceSig,
    build,
)
from src.surfaces.order import OrderFact, Piece, Prong, StandardPositionCertificate

logger = logging.getLogger(__name__)

ANNULUS = SurfaceSig(True, 0, 2)

ESSENTIAL = AssumptionRecord("essential", "sectors are annuli meeting the Hopf link exterior T^2 x I essentially")
ATOROIDAL = AssumptionRecord("atoroidal_branches", "Hopf link exterior is T^2 x I")
ACYLINDRICAL = AssumptionRecord("acylindrical_sectors", "E_X is a single spanning annulus of T^2 x I")
CONDITION2 = AssumptionRecord("order_condition2", "no essential annulus in N(X) - Y (blow-up of a branch neighborhood)")


@dataclass
class HopfFamily:
    p: int
    q: int
    surfaces: Dict[str, MultibranchedSurface]
    certificates: Dict[Tuple[str, str], StandardPositionCertificate] = field(default_factory=dict)

    def facts(self) -> List[OrderFact]:
        return [
            OrderFact(lo, hi, "le", "certificate", cert)
            for (lo, hi), cert in sorted(self.certificates.items())
        ]


def _self_annulus(branch: str, sector: str, first: int, second: int) -> List[AttachEntry]:
    # 回到同一分支的环面围住一个实心环，两端比特相反
    return [
        AttachEntry(branch, first, sector, 0, 1, 1),
        AttachEntry(branch, second, sector, 1, -1, -1),
    ]


def _cone(pid: str, x_branch: str, carries: str, prongs: str) -> Piece:
    parsed = tuple(
        Prong("out" if tok.startswith("out") else "loop", int(tok[3:] if tok.startswith("out") else tok[4:]))
        for tok in prongs.split(",")
    )
    return Piece(pid, "cone", x_branch=x_branch, carries=carries, prongs=parsed)


def _copy(pid: str, sector: str, level: int = 0) -> Piece:
    return Piece(pid, "copy", x_sector=sector, level=level)


def hopf_family(p: int, q: int, s1: int = 1, s2: int = 1) -> HopfFamily:
    """p, q 互素且均 ≥ 3；纯分支的偏移默认取 1（任意与度数互素的偏移在抽象模型中同痕）。"""
    if p < 3 or q < 3:
        raise BadParameters(f"p={p}, q={q}: both must be at least 3")
    if gcd(p, q) != 1:
        raise BadParameters(f"p={p}, q={q} are not coprime")
    if gcd(p, s1) != 1 or gcd(q, s2) != 1:
        raise BadParameters("pure branch shifts must be coprime to their degrees")

    l1, l2 = BranchModel("l1", p, s1 % p), BranchModel("l2", q, s2 % q)
    m1, m2 = BranchModel("m1", 3, 0), BranchModel("m2", 3, 0)
    base = [ESSENTIAL]

    x1 = build(
        [l1, l2],
        [Sector("A", ANNULUS)],
        [AttachEntry("l1", 0, "A", 0), AttachEntry("l2", 0, "A", 1)],
        base + [ATOROIDAL, ACYLINDRICAL],
    )
    x2 = build(
        [m1, l2],
        [Sector("B", ANNULUS), Sector("A1", ANNULUS)],
        [AttachEntry("m1", 0, "B", 0), AttachEntry("l2", 0, "B", 1)] + _self_annulus("m1", "A1", 1, 2),
        base,
    )
    x3 = build(
        [l1, m2],
        [Sector("B", ANNULUS), Sector("A2", ANNULUS)],
        [AttachEntry("m2", 0, "B", 0), AttachEntry("l1", 0, "B", 1)] + _self_annulus("m2", "A2", 1, 2),
        base,
    )
    x4 = build(
        [m1, m2],
        [Sector("C", ANNULUS), Sector("A1", ANNULUS), Sector("A2", ANNULUS)],
        [AttachEntry("m1", 0, "C", 0), AttachEntry("m2", 0, "C", 1)]
        + _self_annulus("m1", "A1", 1, 2)
        + _self_annulus("m2", "A2", 1, 2),
        base,
    )
    surfaces = {"X1": x1, "X2": x2, "X3": x3, "X4": x4}

    conds = (CONDITION2,)
    certs = {
        ("X1", "X2"): StandardPositionCertificate(
            "X1", "X2", (("m1", "l1"), ("l2", "l2")),
            (_copy("P", "A"), _cone("K1", "l1", "m1", "out0,loop2,loop1"), _cone("K2", "l2", "l2", "out0")),
            ((("P", 0), ("K1", 0)), (("P", 1), ("K2", 0))),
            conds,
        ),
        ("X1", "X3"): StandardPositionCertificate(
            "X1", "X3", (("l1", "l1"), ("m2", "l2")),
            (_copy("P", "A"), _cone("K1", "l1", "l1", "out0"), _cone("K2", "l2", "m2", "out0,loop2,loop1")),
            ((("P", 0), ("K1", 0)), (("P", 1), ("K2", 0))),
            conds,
        ),
        ("X2", "X4"): StandardPositionCertificate(
            "X2", "X4", (("m1", "m1"), ("m2", "l2")),
            (
                _copy("P", "B"), _copy("Q", "A1"),
                _cone("K1", "m1", "m1", "out0,out1,out2"), _cone("K2", "l2", "m2", "out0,loop2,loop1"),
            ),
            ((("P", 0), ("K1", 0)), (("P", 1), ("K2", 0)), (("Q", 0), ("K1", 1)), (("Q", 1), ("K1", 2))),
            conds,
        ),
        ("X3", "X4"): StandardPositionCertificate(
            "X3", "X4", (("m1", "l1"), ("m2", "m2")),
            (
                _copy("P", "B"), _copy("Q", "A2"),
                _cone("K1", "l1", "m1", "out0,loop2,loop1"), _cone("K2", "m2", "m2", "out0,out1,out2"),
            ),
            ((("P", 0), ("K2", 0)), (("P", 1), ("K1", 0)), (("Q", 0), ("K2", 1)), (("Q", 1), ("K2", 2))),
            conds,
        ),
    }
    logger.debug("hopf family (%d, %d) built", p, q)
    return HopfFamily(p, q, surfaces, certs)


def theta_torus() -> MultibranchedSurface:
    """θ 图 × S¹：两条三叉正规分支，三个环面把 v1 的轨道 i 接到 v2 的轨道 i。"""
    entries = []
    for i in range(3):
        entries += [AttachEntry("v1", i, f"T{i}", 0), AttachEntry("v2", i, f"T{i}", 1)]
    return build(
        [BranchModel("v1", 3, 0), BranchModel("v2", 3, 0)],
        [Sector(f"T{i}", ANNULUS) for i in range(3)],
        entries,
    )


@dataclass(frozen=True)
class RandomLimits:
    max_branches: int = 3
    max_sectors: int = 4
    max_degree: int = 6
    attempts: int = 200


def _random_attempt(rng: random.Random, limits: RandomLimits) -> MultibranchedSurface:
    branches = []
    for i in range(rng.randint(1, limits.max_branches)):
        d = rng.randint(3, limits.max_degree)
        branches.append(BranchModel(f"b{i}", d, rng.randrange(d)))
    slots = [(b.id, j) for b in branches for j in range(b.orbit_count)]
    rng.shuffle(slots)
    n_sectors = rng.randint(1, min(limits.max_sectors, len(slots)))
    cuts = sorted(rng.sample(range(1, len(slots)), n_sectors - 1))
    groups = [slots[a:b] for a, b in zip([0] + cuts, cuts + [len(slots)])]

    sectors, entries = [], []
    for n, group in enumerate(groups):
        sid = f"s{n}"
        if rng.random() < 0.75:
            sig = SurfaceSig(True, rng.randint(0, 1), len(group))
        else:
            sig = SurfaceSig(False, rng.randint(1, 2), len(group))
        sectors.append(Sector(sid, sig))
        for c, (bid, j) in enumerate(group):
            eps = rng.choice((1, -1))
            entries.append(AttachEntry(bid, j, sid, c, eps, eps))
    return build(branches, sectors, entries)


def random_surface(seed: Optional[int] = None, limits: Optional[RandomLimits] = None) -> MultibranchedSurface:
    """拒绝采样生成合法曲面；同一 seed 结果确定。"""
    if seed is None:
        seed = config.get_random_seed()
    if limits is None:
        limits = RandomLimits(*config.get_random_limits())
    if limits.max_branches < 1 or limits.max_sectors < 1 or limits.max_degree < 3 or limits.attempts < 1:
        raise LimitsUnsatisfiable(f"limits {limits} admit no surface")
    rng = random.Random(seed)
    for attempt in range(limits.attempts):
        try:
            return _random_attempt(rng, limits)
        except Disconnected:
            logger.debug("seed %d attempt %d disconnected, retrying", seed, attempt)
    raise LimitsUnsatisfiable(f"no connected surface after {limits.attempts} attempts (seed {seed})")
