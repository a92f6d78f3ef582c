"""Line-oriented TDAG text format.

::

    # comment
    root <id>
    node <id> color=<red|yellow|green> [label=<atom>]
    arc <from-id> <feature> <to-id> color=<red|yellow|green>

Lines may come in any order; ``root`` must appear exactly once.  Arcs are
named ``<from-id>.<feature>``.
"""

from __future__ import annotations

from pathlib import Path as FsPath
from typing import Union

from tricolor.core import Arc, BuildError, Color, Node, Tdag, arc_id


class FormatError(ValueError):
    """A syntax or structure error, with the 1-based line number when known."""

    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        self.message = message
        self.line = line
        self.source = source
        where = f"{source or '<text>'}:{line}: " if line else (f"{source}: " if source else "")
        super().__init__(where + message)


def _options(fields: list[str], allowed: set[str], lineno: int) -> dict[str, str]:
    out: dict[str, str] = {}
    for f in fields:
        key, sep, value = f.partition("=")
        if not sep or not value:
            raise FormatError(f"expected key=value, got {f!r}", lineno)
        if key not in allowed:
            raise FormatError(f"unknown option {key!r}", lineno)
        if key in out:
            raise FormatError(f"option {key!r} given twice", lineno)
        out[key] = value
    return out


def _color(opts: dict[str, str], lineno: int) -> Color:
    if "color" not in opts:
        raise FormatError("missing color=", lineno)
    try:
        return Color.parse(opts["color"])
    except ValueError as e:
        raise FormatError(str(e), lineno) from None


def parse_tdag(text: str, source: str | None = None, *, allow_duplicate_features: bool = False) -> Tdag:
    root = None
    nodes: list[Node] = []
    arcs: list[Arc] = []
    where: dict[str, int] = {}
    try:
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            kw, *rest = line.split()
            if kw == "root":
                if len(rest) != 1:
                    raise FormatError("usage: root <id>", lineno)
                if root is not None:
                    raise FormatError("root given twice", lineno)
                root = rest[0]
            elif kw == "node":
                if not rest:
                    raise FormatError("usage: node <id> color=<c> [label=<atom>]", lineno)
                opts = _options(rest[1:], {"color", "label"}, lineno)
                nodes.append(Node(rest[0], _color(opts, lineno), opts.get("label")))
                where[rest[0]] = lineno
            elif kw == "arc":
                if len(rest) < 3:
                    raise FormatError("usage: arc <from> <feature> <to> color=<c>", lineno)
                src, feat, dst = rest[:3]
                opts = _options(rest[3:], {"color"}, lineno)
                aid = base = arc_id(src, feat)
                k = 1
                while aid in where:
                    aid = f"{base}~{k}"
                    k += 1
                arcs.append(Arc(aid, src, feat, dst, _color(opts, lineno)))
                where[aid] = lineno
            else:
                raise FormatError(f"unknown keyword {kw!r}", lineno)
    except FormatError as e:
        raise FormatError(e.message, e.line, source) from None
    if root is None:
        raise FormatError("no root line", None, source)
    try:
        return Tdag(nodes, arcs, root, allow_duplicate_features=allow_duplicate_features)
    except BuildError as e:
        raise FormatError(str(e), where.get(e.element), source) from None


def serialize_tdag(t: Tdag) -> str:
    """Canonical text: root, then nodes in breadth-first order, then their arcs."""
    order = t.topological_order()
    lines = [f"root {t.root}"]
    for nid in order:
        n = t.node(nid)
        lines.append(f"node {nid} color={n.color}" + (f" label={n.label}" if n.label is not None else ""))
    for nid in order:
        for f in sorted(t.out_arcs(nid)):
            a = t.out_arcs(nid)[f]
            lines.append(f"arc {a.src} {a.feature} {a.dst} color={a.color}")
    return "\n".join(lines) + "\n"


def load_tdag(path: Union[str, FsPath]) -> Tdag:
    p = FsPath(path)
    return parse_tdag(p.read_text(encoding="utf-8"), str(p))


def tdag_to_json(t: Tdag) -> dict:
    order = t.topological_order()
    nodes = [{"id": nid, "color": str(t.node(nid).color), "label": t.node(nid).label} for nid in order]
    arcs = [{"id": a.id, "src": a.src, "feature": a.feature, "dst": a.dst, "color": str(a.color)}
            for nid in order for _, a in sorted(t.out_arcs(nid).items())]
    return {"root": t.root, "nodes": nodes, "arcs": arcs}
