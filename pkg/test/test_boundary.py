# test/test_boundary.py
import os
import sys

import pytest

# 将项目根目录添加到 sys.path，确保 src 模块可导入
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.surfaces.boundary import boundary_surface, characteristic_annuli, face_complex
from src.surfaces.catalog import hopf_family, random_surface, theta_torus
from src.surfaces.invariants import euler_sectors
from src.surfaces.model import AttachEntry, BranchModel, Sector, SurfaceSig, build

from face_trace_oracle import trace_boundary


def _summary(X):
    return sorted((c.orientable, c.euler) for c in boundary_surface(X).components)


@pytest.mark.parametrize(
    "surface, tori",
    [
        (lambda: theta_torus(), 3),
        (lambda: hopf_family(3, 4).surfaces["X1"], 1),
        (lambda: hopf_family(3, 4).surfaces["X2"], 2),
        (lambda: hopf_family(3, 4).surfaces["X4"], 3),
    ],
)
def test_boundary_tori(surface, tori):
    X = surface()
    report = boundary_surface(X)
    assert [c.describe() for c in report.components] == ["torus"] * tori
    assert _summary(X) == trace_boundary(X)


def test_characteristic_annuli_follow_orbits():
    X = hopf_family(3, 4).surfaces["X2"]
    annuli = characteristic_annuli(X)
    assert len(annuli) == 4
    assert {(a.branch, a.slope) for a in annuli} == {("m1", (1, 0)), ("l2", (4, 1))}


def test_each_curve_side_used_twice():
    X = random_surface(3)
    usage = face_complex(X).curve_side_usage()
    assert set(usage.values()) == {2}
    assert len(usage) == 2 * sum(b.orbit_count for b in X.branches)


def test_disk_sectors_give_spheres():
    X = build(
        [BranchModel("l", 3, 0)],
        [Sector(f"D{i}", SurfaceSig(True, 0, 1)) for i in range(3)],
        [AttachEntry("l", i, f"D{i}", 0) for i in range(3)],
    )
    report = boundary_surface(X)
    assert [c.describe() for c in report.components] == ["sphere"] * 3
    assert report.summary() == "3x sphere"


def test_mobius_sector_boundary():
    X = build(
        [BranchModel("l", 1, 0)],
        [Sector("M", SurfaceSig(False, 1, 1))],
        [AttachEntry("l", 0, "M", 0)],
    )
    # 实心 Klein 瓶或实心环的边界：χ 为 0 的单个分支
    report = boundary_surface(X)
    assert len(report.components) == 1
    assert report.euler == 0


@pytest.mark.parametrize("seed", range(20))
def test_boundary_euler_identity_and_oracle(seed):
    X = random_surface(seed)
    report = boundary_surface(X)
    assert report.euler == 2 * euler_sectors(X), "χ(∂N(X)) 应等于 2χ(E_X)"
    assert _summary(X) == trace_boundary(X)
