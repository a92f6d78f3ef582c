"""Graphviz export."""

from __future__ import annotations

from tricolor.core import Color, Tdag, require_well_formed

DOT_COLORS = {Color.RED: "red", Color.YELLOW: "gold", Color.GREEN: "green"}


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(t: Tdag, name: str = "tdag") -> str:
    """DOT text with nodes in breadth-first order and arcs sorted by feature.

    The output depends only on the TDAG, so repeated exports are byte-identical.
    """
    require_well_formed(t)
    order = t.topological_order()
    lines = [f"digraph {_quote(name)} {{", "  rankdir=TB;", "  node [shape=ellipse, fontname=Helvetica];"]
    for nid in order:
        n = t.node(nid)
        label = n.label if n.label is not None else nid
        attrs = f"label={_quote(label)}, color={DOT_COLORS[n.color]}"
        if nid == t.root:
            attrs += ", peripheries=2"
        lines.append(f"  {_quote(nid)} [{attrs}];")
    for nid in order:
        out = t.out_arcs(nid)
        for f in sorted(out):
            a = out[f]
            c = DOT_COLORS[a.color]
            lines.append(f"  {_quote(a.src)} -> {_quote(a.dst)} [label={_quote(f)}, color={c}, fontcolor={c}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
