import argparse
import logging
import os
import sys
from typing import Callable, Dict, List, Optional

# 将项目根目录加入 sys.path（便于直接运行）
ROOT_DIR = os.path.abspath(os.path.join(os.path.dirname(__file__), '..'))
if ROOT_DIR not in sys.path:
    sys.path.append(ROOT_DIR)

from src import config
from src.surfaces.boundary import boundary_surface
from src.surfaces.catalog import hopf_family, theta_torus
from src.surfaces.errors import ParseError, SurfaceError
from src.surfaces.invariants import (
    class_x_report,
    classify_branch,
    classify_sector,
    euler_sectors,
    homology,
    is_maximally_spread,
)
from src.surfaces.model import MultibranchedSurface, canonical_code
from src.surfaces.moves import (
    IX_KINDS,
    applicable_ix,
    applicable_xi,
    apply_ix,
    apply_xi,
    equivalent,
    ih_moves,
    parse_descriptor,
    replay_log,
    same_ih_class,
    spread_maximally,
)
from src.surfaces.order import check_certificate, euler_filter, hasse, minimality
from src.tools import mbs_format
from src.tools.cert_format import facts_from_document, load_certificate, serialize_certificate
from src.tools.dot_writer import write_dot

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_REJECTED, EXIT_INPUT = 0, 1, 2


def _yes(flag: bool) -> str:
    return "yes" if flag else "no"


def _load_surface(path: str, name: str) -> MultibranchedSurface:
    doc = mbs_format.load(path)
    if name not in doc.surfaces:
        raise ParseError(0, f"no surface named {name!r} in {path}")
    return doc.build(name)


def _pair(text: str) -> List[str]:
    names = [n.strip() for n in text.split(",")]
    if len(names) != 2 or not all(names):
        raise ParseError(0, f"expected <A>,<B>, got {text!r}")
    return names


def cmd_validate(args: argparse.Namespace) -> int:
    doc = mbs_format.load(args.file)
    code = EXIT_OK
    for name in doc.names:
        try:
            doc.build(name)
            print(f"{name}: ok")
        except SurfaceError as exc:
            print(f"{name}: invalid {type(exc).__name__}: {exc}")
            code = EXIT_REJECTED
    return code


def cmd_info(args: argparse.Namespace) -> int:
    X = _load_surface(args.file, args.name)
    print(f"surface: {args.name}")
    for b in X.branches:
        bc = classify_branch(X, b.id)
        print(
            f"branch {b.id}: degree={b.degree} shift={b.shift} orbits={b.orbit_count} wrap={b.wrap} "
            f"normal={_yes(bc.normal)} pure={_yes(bc.pure)} spreadable={_yes(bc.spreadable)}"
        )
    for s in X.sectors:
        sc = classify_sector(X, s.id)
        kind = "orientable" if s.sig.orientable else "nonorientable"
        print(f"sector {s.id}: {kind} genus={s.sig.genus} boundaries={s.sig.boundary_count} class={sc.kind}")
    hom = homology(X)
    report = class_x_report(X)
    print(f"chi_E: {euler_sectors(X)}")
    print(f"H0: Z^{hom.b0}" if hom.b0 != 1 else "H0: Z")
    print(f"H1: {hom.h1_text()}")
    print(f"H2: {hom.h2_text()}")
    print(f"maximally_spread: {_yes(report.maximally_spread)}")
    print(f"no_disk_sector: {_yes(report.no_disk_sector)}")
    print(f"min_degree_3: {_yes(report.min_degree_ok)}")
    print(f"essential: {'assumed' if report.essential_assumed else 'not assumed'}")
    print(f"class_x: {report.verdict}" + (f" ({', '.join(report.reasons)})" if report.reasons else ""))
    print(f"minimality: {minimality(X, args.name).verdict}")
    return EXIT_OK


def cmd_boundary(args: argparse.Namespace) -> int:
    X = _load_surface(args.file, args.name)
    report = boundary_surface(X)
    print(f"components: {len(report.components)}")
    for i, c in enumerate(report.components):
        print(f"component {i}: {c.describe()} chi={c.euler}")
    print(f"chi: {report.euler}")
    print(f"summary: {report.summary()}")
    return EXIT_OK


def cmd_moves(args: argparse.Namespace) -> int:
    X = _load_surface(args.file, args.name)
    for m in applicable_ix(X):
        print(f"ix: {m.text()} ({m.kind})")
    for m in applicable_xi(X):
        print(f"xi: {m.text()}")
    if is_maximally_spread(X):
        moves = ih_moves(X)
        print(f"ih_neighbors: {len(moves)}")
        for move, _ in moves:
            print(f"ih: {move.text()}")
    return EXIT_OK


def cmd_apply(args: argparse.Namespace) -> int:
    X = _load_surface(args.file, args.name)
    m = parse_descriptor(args.descriptor)
    Y = apply_ix(X, m) if m.kind in IX_KINDS + ("ix",) else apply_xi(X, m)
    print("\n".join(mbs_format.surface_lines(args.out_name or args.name, Y)))
    return EXIT_OK


def cmd_spread(args: argparse.Namespace) -> int:
    X = _load_surface(args.file, args.name)
    Y = spread_maximally(X)
    print("\n".join(mbs_format.surface_lines(args.out_name or args.name, Y)))
    return EXIT_OK


def cmd_canon(args: argparse.Namespace) -> int:
    X = _load_surface(args.file, args.name)
    print(f"canonical_code: {canonical_code(X).decode('ascii')}")
    return EXIT_OK


def cmd_equiv(args: argparse.Namespace) -> int:
    a, b = _pair(args.pair)
    doc = mbs_format.load(args.file)
    X, Y = doc.build(a), doc.build(b)
    depth = config.get_equiv_depth(args.depth)
    result = equivalent(X, Y, depth)
    print(f"visited: {result.visited}")
    if not result.equivalent:
        print(f"verdict: no-within-depth {depth}")
        return EXIT_REJECTED
    print("verdict: equivalent")
    print(f"steps: {len(result.path.steps)}")
    for line in result.path.to_text().splitlines():
        print(f"step: {line}")
    if args.log:
        with open(args.log, "w", encoding="utf-8") as f:
            f.write(result.path.to_text() + "\n")
        print(f"log: {args.log}")
    return EXIT_OK


def cmd_replay(args: argparse.Namespace) -> int:
    a, b = _pair(args.pair)
    doc = mbs_format.load(args.file)
    with open(args.log, "r", encoding="utf-8") as f:
        ok = replay_log(doc.build(a), doc.build(b), f.read())
    print(f"verdict: {'replayed' if ok else 'mismatch'}")
    return EXIT_OK if ok else EXIT_REJECTED


def cmd_order(args: argparse.Namespace) -> int:
    a, b = _pair(args.pair)
    doc = mbs_format.load(args.file)
    X, Y = doc.build(a), doc.build(b)
    cert = None
    if args.cert:
        cert = load_certificate(args.cert)
    else:
        for fact in doc.facts:
            if (fact.lower, fact.upper, fact.relation) == (a, b, "le") and fact.cert:
                cert = load_certificate(doc.cert_path(fact))
                break

    code = EXIT_OK
    verdict = euler_filter(X, Y, args.equality, cert)
    print(f"chi_E_X: {verdict.chi_x}")
    print(f"chi_E_Y: {verdict.chi_y}")
    print(f"euler_filter: {'pass' if verdict.passed else 'fail'}" + (f" ({verdict.reason})" if verdict.reason else ""))
    if not verdict.passed:
        code = EXIT_REJECTED
    if cert is None:
        print("certificate: none")
        return code
    cv = check_certificate(X, Y, cert)
    print(f"certificate: {'verified' if cv.verified else 'rejected'}" + (f" ({cv.reason})" if cv.reason else ""))
    print(f"condition2: " + (f"assumed {mbs_format.quote(cv.condition2)}" if cv.condition2 is not None else "not assumed"))
    return code if cv.verified else EXIT_REJECTED


def cmd_hasse(args: argparse.Namespace) -> int:
    doc = mbs_format.load(args.file)
    diagram = hasse(doc.build_all(), facts_from_document(doc), same_ih_class)
    print(f"classes: {len(diagram.classes)}")
    for rep, members in diagram.classes.items():
        print(f"class {rep}: {' '.join(members)}")
    print(f"edges: {len(diagram.edges)}")
    for lower, upper in diagram.edges:
        print(f"edge: {lower} -> {upper}")
    for note in diagram.flagged:
        print(f"cited: {note}")
    if args.dot:
        write_dot(diagram, args.dot)
        print(f"dot: {args.dot}")
    return EXIT_OK


def cmd_serialize(args: argparse.Namespace) -> int:
    sys.stdout.write(mbs_format.serialize(mbs_format.load(args.file)))
    return EXIT_OK


def cmd_catalog(args: argparse.Namespace) -> int:
    if args.family == "theta":
        sys.stdout.write(mbs_format.serialize_surfaces({"theta": theta_torus()}))
        return EXIT_OK
    if len(args.params) not in (2, 4):
        raise ParseError(0, "catalog hopf needs <p> <q> [<A> <B>]")
    p, q = int(args.params[0]), int(args.params[1])
    family = hopf_family(p, q)
    if len(args.params) == 4:
        key = (args.params[2], args.params[3])
        if key not in family.certificates:
            raise ParseError(0, f"no certificate for {key[0]} le {key[1]}")
        sys.stdout.write(serialize_certificate(family.certificates[key]))
        return EXIT_OK
    facts = [
        mbs_format.FactDecl(lo, "le", hi, cert=f"hopf{p}{q}_{lo}_{hi}.cert")
        for lo, hi in sorted(family.certificates)
    ]
    sys.stdout.write(mbs_format.serialize_surfaces(family.surfaces, facts))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="多分支曲面组合引擎 CLI 入口")
    parser.add_argument("-v", "--verbose", action="store_true", help="输出调试日志到 stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, func: Callable[[argparse.Namespace], int], help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        return p

    p = add("validate", cmd_validate, "校验文档中的全部曲面")
    p.add_argument("file")
    for name, func, help_text in (
        ("info", cmd_info, "分类、欧拉示性数、同调与类 X 报告"),
        ("boundary", cmd_boundary, "∂N(X) 的连通分支与分类"),
        ("moves", cmd_moves, "列出可用的 IX / XI / IH 变换"),
        ("spread", cmd_spread, "确定性地极大展开"),
        ("canon", cmd_canon, "输出规范编码"),
    ):
        p = add(name, func, help_text)
        p.add_argument("file")
        p.add_argument("name")
        if name == "spread":
            p.add_argument("--out-name", type=str, help="输出曲面的名字，默认沿用原名")
    p = add("apply", cmd_apply, "施加一个变换，例如 ix:A 或 xi-split:l1:0-1|2-3")
    p.add_argument("file")
    p.add_argument("name")
    p.add_argument("descriptor")
    p.add_argument("--out-name", type=str, help="输出曲面的名字，默认沿用原名")
    p = add("equiv", cmd_equiv, "有界 IH 等价性搜索")
    p.add_argument("file")
    p.add_argument("pair", help="<A>,<B>")
    p.add_argument("--depth", type=int, default=None, help="搜索深度，默认取 MBS_EQUIV_DEPTH")
    p.add_argument("--log", type=str, help="把找到的路径写成可重放的文本日志")
    p = add("replay", cmd_replay, "从 equiv --log 的日志重放 IH 路径")
    p.add_argument("file")
    p.add_argument("pair", help="<A>,<B>")
    p.add_argument("log")
    p = add("order", cmd_order, "偏序必要条件与证书校验")
    p.add_argument("file")
    p.add_argument("pair", help="<A>,<B>")
    p.add_argument("--cert", type=str, help="证书文件；缺省时使用文档中对应的 fact")
    p.add_argument("--equality", action="store_true", help="欧拉过滤的等号模式")
    p = add("hasse", cmd_hasse, "由文档中的 fact 构造 Hasse 图")
    p.add_argument("file")
    p.add_argument("--dot", type=str, help="输出 dot 文件路径")
    p = add("serialize", cmd_serialize, "规范化重新输出文档")
    p.add_argument("file")
    p = add("catalog", cmd_catalog, "输出样例文档：hopf <p> <q> [<A> <B>] 或 theta")
    p.add_argument("family", choices=("hopf", "theta"))
    p.add_argument("params", nargs="*")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else config.get_log_level(), stream=sys.stderr)
    try:
        return args.func(args)
    except (ParseError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except KeyError as exc:
        print(f"error: unknown surface {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SurfaceError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_REJECTED


if __name__ == "__main__":
    sys.exit(main())
