"""
把 Hasse 图导出为 graphviz dot 文本。

同一高度（到极小元的最长链长度）的类放在同一 rank，节点按名字字典序输出，边从低到高。
例如导出到 hasse.dot 后可运行：

    dot -Tpng -O hasse.dot
"""
from typing import Dict, List

import networkx as nx

from src.surfaces.order import HasseDiagram


def _heights(graph: nx.DiGraph) -> Dict[str, int]:
    height: Dict[str, int] = {}
    for node in nx.topological_sort(graph):
        preds = list(graph.predecessors(node))
        height[node] = 1 + max(height[p] for p in preds) if preds else 0
    return height


def to_dot(diagram: HasseDiagram, name: str = "hasse") -> str:
    lines: List[str] = [f"digraph {name} {{", "\trankdir = BT;"]
    height = _heights(diagram.graph)
    layers: Dict[int, List[str]] = {}
    for node in sorted(diagram.graph.nodes()):
        layers.setdefault(height[node], []).append(node)
    for level in sorted(layers):
        lines.append("\t{")
        lines.append("\t\trank = same;")
        for node in layers[level]:
            members = diagram.classes.get(node, (node,))
            label = " = ".join(members)
            lines.append(f'\t\t"{node}" [label="{label}"];')
        lines.append("\t}")
    for lower, upper in diagram.edges:
        lines.append(f'\t"{lower}" -> "{upper}";')
    lines.append("}")
    return "\n".join(lines) + "\n"


def write_dot(diagram: HasseDiagram, file_name: str) -> None:
    with open(file_name, "w", encoding="utf-8") as out_file:
        out_file.write(to_dot(diagram))
