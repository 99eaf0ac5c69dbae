# test/test_moves.py
import os
import sys

import pytest

# 将项目根目录添加到 sys.path，确保 src 模块可导入
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.surfaces.boundary import boundary_surface
from src.surfaces.catalog import hopf_family, theta_torus
from src.surfaces.errors import (
    InvalidSpec,
    InvalidSplit,
    NonOrientableUnsupported,
    NotApplicable,
    NotMaximallySpread,
)
from src.surfaces.invariants import euler_sectors, homology, is_maximally_spread
from src.surfaces.model import AttachEntry, BranchModel, Sector, SurfaceSig, build, canonical_code, relabel
from src.surfaces.moves import (
    AddHandle,
    JoinSectors,
    MoveDescriptor,
    NonSeparating,
    Separating,
    applicable_ix,
    applicable_xi,
    apply_ih,
    apply_ix,
    apply_xi,
    cap_free_circles,
    compress_sector,
    equivalent,
    ih_moves,
    ih_neighbors,
    parse_descriptor,
    parse_ih_move,
    replay_log,
    replay_path,
    spread_maximally,
    tube,
)


def _normal_branch(degree, sectors):
    """一条正规分支，轨道 j 依次接到 sectors[j] = (扇区, 圆周)。"""
    sigs = {}
    for sid, c in sectors:
        sigs[sid] = max(sigs.get(sid, 0), c + 1)
    return build(
        [BranchModel("l", degree, 0)],
        [Sector(sid, SurfaceSig(True, 1, n)) for sid, n in sigs.items()],
        [AttachEntry("l", j, sid, c) for j, (sid, c) in enumerate(sectors)],
    )


def _degree4():
    return _normal_branch(4, [("S", 0), ("S", 1), ("T", 0), ("T", 1)])


def test_descriptor_syntax():
    assert parse_descriptor("ix:A") == MoveDescriptor("ix", "A")
    assert parse_descriptor("xi-split:l1:0-1|2-3") == MoveDescriptor("xi_split", "l1", (0, 1), (2, 3))
    assert parse_descriptor("xi-extract:l2:0-1") == MoveDescriptor("xi_extract", "l2", (0, 1))
    assert parse_descriptor("xi-unmobius:l2") == MoveDescriptor("xi_unmobius", "l2")
    assert MoveDescriptor("xi_split", "l1", (0, 1), (2, 3)).text() == "xi-split:l1:0-1|2-3"
    with pytest.raises(InvalidSpec):
        parse_descriptor("xi-split:l1:0-1")


def test_ix_on_hopf_x4_gives_degree_four_branch():
    X4 = hopf_family(3, 4).surfaces["X4"]
    moves = applicable_ix(X4)
    assert [m.text() for m in moves] == ["ix:C"]
    assert moves[0].kind == "ix_normal_annulus"
    Y = apply_ix(X4, moves[0])
    assert [(b.degree, b.shift) for b in Y.branches] == [(4, 0)]
    assert sorted(Y.sector_ids) == ["A1", "A2"]
    assert euler_sectors(Y) == euler_sectors(X4)


def test_merged_branch_orbits_are_consecutive():
    X4 = hopf_family(3, 4).surfaces["X4"]
    Y = apply_ix(X4, MoveDescriptor("ix", "C"))
    assert sorted(e.orbit for e in Y.attachment if e.branch == "m1") == [0, 1, 2, 3]
    assert [e.sector for e in Y.sheets("m1")].count("A1") == 2


def test_quasi_normal_collapse_onto_multi_orbit_branch():
    # l2 = (6, 2)：两条轨道，每条缠绕 3 次
    X = build(
        [BranchModel("l1", 3, 0), BranchModel("l2", 6, 2)],
        [Sector("Q", SurfaceSig(True, 0, 2)), Sector("S", SurfaceSig(True, 1, 3))],
        [
            AttachEntry("l1", 0, "Q", 0),
            AttachEntry("l2", 0, "Q", 1, -1, -1),
            AttachEntry("l1", 1, "S", 0),
            AttachEntry("l1", 2, "S", 1),
            AttachEntry("l2", 1, "S", 2),
        ],
    )
    (m,) = applicable_ix(X)
    assert m.kind == "ix_quasi_normal"
    Y = apply_ix(X, m)
    (b,) = Y.branches
    assert (b.degree, b.shift, b.orbit_count) == (9, 3, 3)
    assert [(e.orbit, e.circle) for e in Y.sheets("l2")] == [(0, 0), (1, 1), (2, 2)]
    back = apply_xi(Y, MoveDescriptor("xi_extract", "l2", (0, 1)))
    assert canonical_code(back) == canonical_code(X)


@pytest.mark.parametrize("name", ["X1", "X2", "X3", "X4"])
@pytest.mark.parametrize("pq", [(3, 4), (3, 5)])
def test_catalog_ix_xi_round_trips(pq, name):
    X = hopf_family(*pq).surfaces[name]
    code = canonical_code(X)
    for m in applicable_ix(X):
        Y = apply_ix(X, m)
        inverses = applicable_xi(Y)
        assert any(canonical_code(apply_xi(Y, xi)) == code for xi in inverses), m.text()
        for xi in inverses:
            Z = apply_xi(Y, xi)
            (new,) = [s for s in Z.sector_ids if s not in Y.sector_ids]
            assert canonical_code(apply_ix(Z, MoveDescriptor("ix", new))) == canonical_code(Y), xi.text()


def test_xi_split_enumeration_count():
    for d in (4, 5, 6):
        X = _normal_branch(d, [("S", j) for j in range(d)])
        splits = [m for m in applicable_xi(X) if m.kind == "xi_split"]
        assert len(splits) == d * (d - 3) // 2


def test_xi_split_then_ix_restores():
    X = _degree4()
    for m in applicable_xi(X):
        Y = apply_xi(X, m)
        assert is_maximally_spread(Y)
        new = [s for s in Y.sector_ids if s not in X.sector_ids]
        assert len(new) == 1
        Z = apply_ix(Y, MoveDescriptor("ix", new[0]))
        assert canonical_code(Z) == canonical_code(X)


def test_quasi_normal_collapse_and_extract():
    X2 = hopf_family(3, 4).surfaces["X2"]
    (m,) = applicable_ix(X2)
    assert m.kind == "ix_quasi_normal"
    Y = apply_ix(X2, m)
    (b,) = Y.branches
    assert (b.degree, b.shift, b.orbit_count, b.wrap) == (8, 2, 2, 4)
    extracts = [x for x in applicable_xi(Y) if x.kind == "xi_extract"]
    assert [x.text() for x in extracts] == ["xi-extract:l2:0-1", "xi-extract:l2:1-0"]
    codes = {canonical_code(apply_xi(Y, x)) for x in extracts}
    assert codes == {canonical_code(X2)}


def test_mobius_collapse_and_unmobius():
    X = build(
        [BranchModel("l", 3, 0)],
        [Sector("M", SurfaceSig(False, 1, 1)), Sector("S", SurfaceSig(True, 1, 2))],
        [AttachEntry("l", 0, "M", 0), AttachEntry("l", 1, "S", 0), AttachEntry("l", 2, "S", 1)],
    )
    (m,) = applicable_ix(X)
    assert m.kind == "ix_mobius"
    Y = apply_ix(X, m)
    (b,) = Y.branches
    assert (b.degree, b.shift, b.wrap) == (4, 2, 2)
    back = apply_xi(Y, MoveDescriptor("xi_unmobius", "l"))
    assert canonical_code(back) == canonical_code(X)


def test_xi_not_applicable():
    X = hopf_family(3, 4).surfaces["X1"]
    with pytest.raises(NotApplicable):
        apply_xi(X, MoveDescriptor("xi_split", "l1", (0, 1), (2, 2)))
    with pytest.raises(NotApplicable):
        apply_ix(X, MoveDescriptor("ix", "A"))
    # w = 2 时不允许取全部轨道
    Y = build(
        [BranchModel("l", 4, 2)],
        [Sector("S", SurfaceSig(True, 1, 2))],
        [AttachEntry("l", 0, "S", 0), AttachEntry("l", 1, "S", 1)],
    )
    with pytest.raises(NotApplicable):
        apply_xi(Y, MoveDescriptor("xi_extract", "l", (0, 1)))


def test_spread_maximally_is_deterministic():
    X = _normal_branch(6, [("S", j) for j in range(6)])
    Y1, Y2 = spread_maximally(X), spread_maximally(X)
    assert is_maximally_spread(Y1)
    assert canonical_code(Y1) == canonical_code(Y2)
    assert all(b.degree == 3 for b in Y1.branches)
    assert euler_sectors(Y1) == euler_sectors(X)


def test_spread_keeps_degree_two_branch(caplog):
    X = _normal_branch(2, [("S", 0), ("S", 1)])
    with caplog.at_level("WARNING"):
        Y = spread_maximally(X)
    assert canonical_code(Y) == canonical_code(X)
    assert "admit no XI-move" in caplog.text


def test_ih_requires_maximal_spread():
    with pytest.raises(NotMaximallySpread):
        ih_neighbors(_degree4())


def test_ih_neighbors_of_x4():
    X4 = hopf_family(3, 4).surfaces["X4"]
    neighbors = ih_neighbors(X4)
    codes = [canonical_code(Y) for Y in neighbors]
    assert canonical_code(X4) in codes
    # 另一种拆分得到 θ 型曲面：三个环面都连接两条分支
    assert len(neighbors) == 2
    for Y in neighbors:
        assert homology(Y) == homology(X4)
        assert boundary_surface(Y) == boundary_surface(X4)
        result = equivalent(X4, Y, 2)
        assert result.equivalent
        assert len(result.path.steps) <= 1


def test_ih_moves_replay():
    X4 = hopf_family(3, 4).surfaces["X4"]
    for move, Y in ih_moves(X4):
        assert canonical_code(apply_ih(X4, move)) == canonical_code(Y)


def test_equivalent_hopf_x2_x3_bounded_no():
    fam = hopf_family(3, 4).surfaces
    result = equivalent(fam["X2"], fam["X3"], 4)
    assert not result.equivalent
    assert result.path is None


def test_equivalent_path_replays():
    X4 = hopf_family(3, 4).surfaces["X4"]
    theta_like = [Y for Y in ih_neighbors(X4) if canonical_code(Y) != canonical_code(X4)][0]
    result = equivalent(theta_like, X4, 3)
    assert result.equivalent
    assert replay_path(theta_like, X4, result.path)


def test_compress_nonseparating_and_tube_back():
    X = _degree4()
    Y = compress_sector(X, "S", NonSeparating())
    assert Y.sector("S").sig == SurfaceSig(True, 0, 2)
    Z = tube(Y, AddHandle("S"))
    assert canonical_code(Z) == canonical_code(X)


def test_compress_separating_records_free_circles():
    X = _normal_branch(4, [("S", 0), ("S", 1), ("S", 2), ("S", 3)])
    Y = compress_sector(X, "S", Separating(0, (0, 1), 1, (2, 3)))
    assert Y.has_free_circles
    assert len(Y.free_circles) == 2
    # 未封口时只是沿曲线剪开
    assert euler_sectors(Y) == euler_sectors(X)
    capped = cap_free_circles(Y)
    assert not capped.has_free_circles
    assert euler_sectors(capped) == euler_sectors(X) + 2
    (a, ca), (b, cb) = Y.free_circles
    joined = tube(Y, JoinSectors(a, ca, b, cb))
    assert canonical_code(joined) == canonical_code(X)


def test_compress_rejections():
    X = hopf_family(3, 4).surfaces["X1"]
    with pytest.raises(InvalidSplit):
        compress_sector(X, "A", NonSeparating())
    Y = _degree4()
    with pytest.raises(InvalidSplit):
        compress_sector(Y, "S", Separating(0, (), 1, (0, 1)))
    M = build(
        [BranchModel("l", 1, 0)],
        [Sector("K", SurfaceSig(False, 2, 1))],
        [AttachEntry("l", 0, "K", 0)],
    )
    with pytest.raises(NonOrientableUnsupported):
        compress_sector(M, "K", NonSeparating())


def test_compress_cutting_off_a_handle_is_rejected():
    X = build(
        [BranchModel("l", 3, 0)],
        [Sector("S", SurfaceSig(True, 2, 3))],
        [AttachEntry("l", j, "S", j) for j in range(3)],
    )
    with pytest.raises(InvalidSplit):
        compress_sector(X, "S", Separating(1, (), 1, (0, 1, 2)))
    Y = compress_sector(X, "S", Separating(1, (0,), 1, (1, 2)))
    assert sorted(s.sig.genus for s in Y.sectors) == [1, 1]
    assert len(Y.free_circles) == 2


def test_theta_ix_round_trip():
    X = theta_torus()
    code = canonical_code(X)
    for m in applicable_ix(X):
        Y = apply_ix(X, m)
        assert any(canonical_code(apply_xi(Y, xi)) == code for xi in applicable_xi(Y))


def test_ih_neighbors_of_x1_is_empty():
    X1 = hopf_family(3, 4).surfaces["X1"]
    assert ih_neighbors(X1) == []
    Y = relabel(X1, {"l1": "a", "l2": "b"}, {"A": "Z"})
    result = equivalent(X1, Y, 0)
    assert result.equivalent
    assert result.path.steps == ()


def test_path_text_log_replays():
    X4 = hopf_family(3, 4).surfaces["X4"]
    theta_like = [Y for Y in ih_neighbors(X4) if canonical_code(Y) != canonical_code(X4)][0]
    result = equivalent(X4, theta_like, 2)
    log = result.path.to_text()
    assert log.startswith("-> ix:") or log.startswith("<- ix:")
    assert replay_log(X4, theta_like, log)
    assert not replay_log(X4, theta_like, "")
    with pytest.raises(InvalidSpec):
        replay_log(X4, theta_like, "=> ix:C")
    with pytest.raises(InvalidSpec):
        parse_ih_move("xi-unmobius:l2 ; ix:C")
