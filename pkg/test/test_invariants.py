# test/test_invariants.py
import os
import sys

import pytest

# 将项目根目录添加到 sys.path，确保 src 模块可导入
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.surfaces.catalog import hopf_family, random_surface, theta_torus
from src.surfaces.invariants import (
    chain_complex,
    class_x_report,
    classify_branch,
    classify_sector,
    euler_sectors,
    homology,
    is_maximally_spread,
)
from src.surfaces.model import AttachEntry, BranchModel, Sector, SurfaceSig, build

from homology_oracle import oracle_homology


def _tri_disks():
    return build(
        [BranchModel("l", 3, 0)],
        [Sector(f"D{i}", SurfaceSig(True, 0, 1)) for i in range(3)],
        [AttachEntry("l", i, f"D{i}", 0) for i in range(3)],
    )


def _pants_on_three():
    """三条纯分支上的一条裤衩面扇区。"""
    return build(
        [BranchModel(f"l{i}", 3, 1) for i in range(3)],
        [Sector("P", SurfaceSig(True, 0, 3))],
        [AttachEntry(f"l{i}", 0, "P", i) for i in range(3)],
    )


def test_branch_classes():
    fam = hopf_family(3, 4).surfaces
    l1 = classify_branch(fam["X1"], "l1")
    assert l1.pure and not l1.normal and not l1.spreadable
    m1 = classify_branch(fam["X2"], "m1")
    assert m1.normal and m1.tribranched_at and not m1.spreadable
    X = build(
        [BranchModel("l", 4, 0)],
        [Sector("A", SurfaceSig(True, 0, 2)), Sector("B", SurfaceSig(True, 0, 2))],
        [AttachEntry("l", 0, "A", 0), AttachEntry("l", 1, "A", 1), AttachEntry("l", 2, "B", 0), AttachEntry("l", 3, "B", 1)],
    )
    assert classify_branch(X, "l").spreadable
    assert not is_maximally_spread(X)


def test_sector_classes():
    fam = hopf_family(3, 4).surfaces
    assert classify_sector(fam["X1"], "A").kind == "generic"
    assert classify_sector(fam["X2"], "B").kind == "quasi_normal_annulus"
    assert classify_sector(fam["X2"], "B").wraps == (1, 4)
    assert classify_sector(fam["X4"], "C").kind == "normal_annulus"
    X = build(
        [BranchModel("l", 3, 0)],
        [Sector("M", SurfaceSig(False, 1, 1)), Sector("S", SurfaceSig(True, 1, 2))],
        [AttachEntry("l", 0, "M", 0), AttachEntry("l", 1, "S", 0), AttachEntry("l", 2, "S", 1)],
    )
    assert classify_sector(X, "M").kind == "normal_mobius"


def test_euler_sectors():
    assert euler_sectors(hopf_family(3, 4).surfaces["X1"]) == 0
    assert euler_sectors(theta_torus()) == 0
    assert euler_sectors(_pants_on_three()) == -1
    assert euler_sectors(_tri_disks()) == 3


@pytest.mark.parametrize(
    "surface, h1, h2",
    [
        (lambda: hopf_family(3, 4).surfaces["X1"], "Z", "0"),
        (lambda: theta_torus(), "Z^3", "Z^2"),
        (lambda: _tri_disks(), "0", "Z^2"),
        (lambda: hopf_family(3, 4).surfaces["X2"], "Z^2", "Z"),
    ],
)
def test_homology_of_known_surfaces(surface, h1, h2):
    report = homology(surface())
    assert report.b0 == 1
    assert report.h1_text() == h1
    assert report.h2_text() == h2


def test_homology_torsion_from_wraps():
    # 圆盘沿 3 重缠绕粘到纯分支上：H1 = Z/3
    X = build(
        [BranchModel("l", 3, 1)],
        [Sector("D", SurfaceSig(True, 0, 1))],
        [AttachEntry("l", 0, "D", 0)],
    )
    report = homology(X)
    assert report.h1_rank == 0
    assert report.h1_torsion == (3,)
    assert report.h1_text() == "Z/3"


def test_homology_of_mobius_sector():
    X = build(
        [BranchModel("l", 1, 0)],
        [Sector("M", SurfaceSig(False, 1, 1))],
        [AttachEntry("l", 0, "M", 0)],
    )
    # 莫比乌斯带形变收缩到核心圆
    assert homology(X).h1_text() == "Z"
    assert homology(X).h2_rank == 0


def test_chain_complex_euler_characteristic():
    for seed in range(5):
        X = random_surface(seed)
        _, _, nv, ne, nf = chain_complex(X)
        assert nv - ne + nf == euler_sectors(X), "胞腔模型的欧拉示性数应等于 χ(E_X)"


@pytest.mark.parametrize("seed", range(20))
def test_homology_matches_oracle(seed):
    X = random_surface(seed)
    report = homology(X)
    assert (report.b0, report.h1_rank, report.h1_torsion, report.h2_rank) == oracle_homology(X)


def test_class_x_report_verdicts():
    fam = hopf_family(3, 4).surfaces
    report = class_x_report(fam["X4"])
    assert report.checkable_conditions == (True, True, True)
    assert report.verdict == "in_class"

    theta = class_x_report(theta_torus())
    assert theta.verdict == "conditional"
    assert theta.reasons == ("essential",)

    disks = class_x_report(_tri_disks())
    assert disks.verdict == "out"
    assert "disk_sector" in disks.reasons
