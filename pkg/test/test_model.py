# test/test_model.py
import os
import sys

import pytest

# 将项目根目录添加到 sys.path，确保 src 模块可导入
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.surfaces.catalog import hopf_family, theta_torus
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
)
from src.surfaces.model import (
    AttachEntry,
    BranchModel,
    Sector,
    SurfaceSig,
    build,
    canonical_code,
    is_isomorphic,
    orbits,
    relabel,
)

ANNULUS = SurfaceSig(True, 0, 2)
DISK = SurfaceSig(True, 0, 1)


def _tri_disks():
    """一条 (3,0) 分支配三个圆盘。"""
    return build(
        [BranchModel("l", 3, 0)],
        [Sector(f"D{i}", DISK) for i in range(3)],
        [AttachEntry("l", i, f"D{i}", 0) for i in range(3)],
    )


def test_build_hopf_x1_orbits():
    X = hopf_family(3, 4).surfaces["X1"]
    assert X.branch("l1").orbit_count == 1
    assert X.branch("l1").wrap == 3
    assert X.branch("l2").wrap == 4
    view = orbits(X, "l1")
    assert len(view) == 1
    assert view[0].slots == (0, 1, 2)
    assert view[0].sector == "A"


def test_orbit_slots_follow_gcd():
    X = build(
        [BranchModel("l", 6, 2)],
        [Sector("S", SurfaceSig(True, 0, 2))],
        [AttachEntry("l", 0, "S", 0), AttachEntry("l", 1, "S", 1)],
    )
    b = X.branch("l")
    assert (b.orbit_count, b.wrap, b.slope) == (2, 3, (3, 1))
    assert [v.slots for v in orbits(X, "l")] == [(0, 2, 4), (1, 3, 5)]


def test_requested_wrap_must_match_rotation_model():
    with pytest.raises(NonUniformWrap):
        build(
            [BranchModel("l", 4, 0)],
            [Sector("S", SurfaceSig(True, 1, 4))],
            [AttachEntry("l", j, "S", j, wrap=2 if j == 0 else None) for j in range(4)],
        )


def test_mixed_requested_wraps_rejected():
    with pytest.raises(NonUniformWrap):
        build(
            [BranchModel("l", 4, 0)],
            [Sector("S", SurfaceSig(True, 1, 4))],
            [AttachEntry("l", j, "S", j, wrap=1 if j else 2) for j in range(4)],
        )


@pytest.mark.parametrize(
    "branches, sectors, entries, error",
    [
        ([], [Sector("D", DISK)], [], NoBranch),
        ([BranchModel("l", 3, 3)], [], [], BadSignature),
        ([BranchModel("l", 1, 0)], [Sector("S", SurfaceSig(True, 1, 0))], [], ClosedSector),
        (
            [BranchModel("l", 2, 0)],
            [Sector("D", DISK)],
            [AttachEntry("l", 0, "D", 0)],
            UnattachedCircle,
        ),
        (
            [BranchModel("l", 2, 0)],
            [Sector("A", ANNULUS)],
            [AttachEntry("l", 0, "A", 0), AttachEntry("l", 0, "A", 1)],
            ReusedOrbit,
        ),
        (
            [BranchModel("l", 2, 0)],
            [Sector("D", DISK), Sector("E", DISK)],
            [AttachEntry("l", 0, "D", 0), AttachEntry("l", 1, "D", 0)],
            ReusedCircle,
        ),
        (
            [BranchModel("a", 1, 0), BranchModel("b", 1, 0)],
            [Sector("D", DISK), Sector("E", DISK)],
            [AttachEntry("a", 0, "D", 0), AttachEntry("b", 0, "E", 0)],
            Disconnected,
        ),
        (
            [BranchModel("l", 1, 0)],
            [Sector("D", DISK)],
            [AttachEntry("x", 0, "D", 0)],
            UnknownBranch,
        ),
    ],
)
def test_build_rejects_invalid_input(branches, sectors, entries, error):
    with pytest.raises(error):
        build(branches, sectors, entries)


def test_sector_lookup_errors():
    X = _tri_disks()
    with pytest.raises(UnknownBranch):
        X.branch("nope")
    assert X.sector("D0").sig.is_disk
    assert X.fresh_branch_id("l") == "l_1"
    assert X.fresh_sector_id("N") == "N"


def test_canonical_code_ignores_names_and_rotations():
    X = hopf_family(3, 4).surfaces["X4"]
    Y = relabel(
        X,
        {"m1": "p", "m2": "q"},
        {"C": "Z", "A1": "Y1", "A2": "Y2"},
        rotations={"m1": 1, "m2": 2},
        circle_perms={"C": [1, 0]},
    )
    assert canonical_code(X) == canonical_code(Y)
    assert is_isomorphic(X, Y)


def test_canonical_code_ignores_branch_reversal():
    X = theta_torus()
    entries = []
    for e in X.attachment:
        if e.branch == "v2":
            # 反转 v2：slot 顺序反向，ε 与 σ 同时取反
            entries.append(AttachEntry("v2", (-e.orbit) % 3, e.sector, e.circle, -e.sign, -e.side))
        else:
            entries.append(e)
    Y = build(X.branches, X.sectors, entries)
    assert canonical_code(X) == canonical_code(Y)


def test_canonical_code_separates_hopf_family():
    fam = hopf_family(3, 4).surfaces
    codes = {canonical_code(X) for X in fam.values()}
    # X2 与 X3 的组合结构在 (3,4) 下不同构
    assert len(codes) == 4
    assert not is_isomorphic(fam["X4"], theta_torus())


def test_canonical_code_is_ascii_bytes():
    code = canonical_code(theta_torus())
    assert isinstance(code, bytes)
    code.decode("ascii")
