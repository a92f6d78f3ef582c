"""Semantic transfer: operations that relax or augment a TDAG.

Six operations exist.  Four add yellow or green structure; two are painter
calls that weaken one element a single step (red to yellow, yellow to
green).  Painting never changes structure.  A paint is legal only if the
result is still well-formed, so a red node cannot be weakened while it is
the only red connection to other red nodes.

Painting a node also weakens its incoming arcs that would otherwise be
stronger than the node, because a red arc must end in a red node (and a
yellow arc in a non-green one).  Without this a leaf reached by a single
arc could never be painted: weakening the node first breaks the arc's
endpoint condition and weakening the arc first strands the node.
"""

from __future__ import annotations

import heapq
import itertools
import re
from dataclasses import dataclass, field
from pathlib import Path as FsPath
from typing import Callable, Iterable, Optional, Sequence, Union

from tricolor.core import (Arc, BuildError, Color, Node, Tdag, arc_id, check_well_formed,
                           require_well_formed)


class TransferError(ValueError):
    """Base class for transfer errors."""


class CoordinateError(TransferError):
    """An op names an element that does not exist."""


class RejectedOp(TransferError):
    """An op's guard failed.  ``rule`` names the violated condition."""

    def __init__(self, rule: str, message: str):
        self.rule = rule
        super().__init__(f"{rule}: {message}")


# -- operations -----------------------------------------------------------


@dataclass(frozen=True)
class AddYellowNode:
    attach: str
    feature: str
    label: Optional[str] = None
    new_id: Optional[str] = None


@dataclass(frozen=True)
class AddYellowArc:
    src: str
    feature: str
    dst: str


@dataclass(frozen=True)
class AddGreenNode:
    attach: str
    feature: str
    label: Optional[str] = None
    new_id: Optional[str] = None


@dataclass(frozen=True)
class AddGreenArc:
    src: str
    feature: str
    dst: str


@dataclass(frozen=True)
class PaintRedToYellow:
    target: str


@dataclass(frozen=True)
class PaintYellowToGreen:
    target: str


TransferOp = Union[AddYellowNode, AddYellowArc, AddGreenNode, AddGreenArc, PaintRedToYellow, PaintYellowToGreen]
PAINTS = (PaintRedToYellow, PaintYellowToGreen)
ADDITIONS = (AddYellowNode, AddYellowArc, AddGreenNode, AddGreenArc)


def is_paint(op: TransferOp) -> bool:
    return isinstance(op, PAINTS)


def _paint_colors(op) -> tuple[Color, Color]:
    if isinstance(op, PaintRedToYellow):
        return Color.RED, Color.YELLOW
    return Color.YELLOW, Color.GREEN


def paint_op(t: Tdag, target: str) -> TransferOp:
    """The painter call that weakens ``target`` from its current color."""
    color = t.element(target).color
    if color == Color.RED:
        return PaintRedToYellow(target)
    if color == Color.YELLOW:
        return PaintYellowToGreen(target)
    raise RejectedOp("green", f"{target!r} is already green")


# -- painter --------------------------------------------------------------


def _painted(t: Tdag, target: str) -> Tdag:
    # one-step weakening of target; a node takes its too-strong incoming arcs along
    new = t.element(target).color.weaker()
    changes = {target: new}
    if t.is_node(target):
        for a in t.in_arcs(target):
            if a.color > new:
                changes[a.id] = new
    return t.recolor(changes)


def can_paint(t: Tdag, target: str) -> bool:
    """True iff weakening ``target`` one step keeps ``t`` well-formed."""
    if target not in t:
        raise CoordinateError(f"no element {target!r}")
    if target == t.root or t.element(target).color == Color.GREEN:
        return False
    return not check_well_formed(_painted(t, target))


def _resolve(t: Tdag, *ids: str) -> None:
    for i in ids:
        if i not in t:
            raise CoordinateError(f"no element {i!r}")


def _resolve_node(t: Tdag, nid: str) -> None:
    _resolve(t, nid)
    if not t.is_node(nid):
        raise CoordinateError(f"{nid!r} is an arc, not a node")


def apply_op(t: Tdag, op: TransferOp) -> Tdag:
    """Apply one op to a well-formed TDAG, returning a new well-formed TDAG."""
    require_well_formed(t)
    if isinstance(op, PAINTS):
        _resolve(t, op.target)
        want, _ = _paint_colors(op)
        have = t.element(op.target).color
        if op.target == t.root:
            raise RejectedOp("W1", "the root must stay red")
        if have != want:
            raise RejectedOp("color", f"{op.target!r} is {have}, not {want}")
        out = _painted(t, op.target)
        bad = check_well_formed(out)
        if bad:
            raise RejectedOp(bad[0].condition, f"painting {op.target!r} would break it ({bad[0]})")
        return out
    if isinstance(op, (AddYellowNode, AddGreenNode)):
        _resolve_node(t, op.attach)
        color = Color.YELLOW if isinstance(op, AddYellowNode) else Color.GREEN
        if color == Color.YELLOW and t.node(op.attach).color == Color.GREEN:
            raise RejectedOp("W5", f"a yellow arc cannot leave green node {op.attach!r}")
        _check_free(t, op.attach, op.feature)
        nid = op.new_id or t.fresh_id(op.feature)
        if nid in t:
            raise RejectedOp("id", f"element id {nid!r} already in use")
        return _extend(t, [Node(nid, color, op.label)],
                       [Arc(arc_id(op.attach, op.feature), op.attach, op.feature, nid, color)])
    if isinstance(op, (AddYellowArc, AddGreenArc)):
        _resolve_node(t, op.src)
        _resolve_node(t, op.dst)
        color = Color.YELLOW if isinstance(op, AddYellowArc) else Color.GREEN
        if color == Color.YELLOW:
            for end in (op.src, op.dst):
                if t.node(end).color == Color.GREEN:
                    raise RejectedOp("W5", f"a yellow arc must connect red or yellow nodes; {end!r} is green")
        _check_free(t, op.src, op.feature)
        return _extend(t, [], [Arc(arc_id(op.src, op.feature), op.src, op.feature, op.dst, color)])
    raise TypeError(f"not a transfer op: {op!r}")


def _check_free(t: Tdag, src: str, feature: str) -> None:
    if not feature or any(c.isspace() for c in feature):
        raise RejectedOp("feature", f"invalid feature name {feature!r}")
    if feature in t.out_arcs(src):
        raise RejectedOp("W6", f"{src!r} already has a {feature!r} arc")
    if arc_id(src, feature) in t:
        raise RejectedOp("id", f"element id {arc_id(src, feature)!r} already in use")


def _extend(t: Tdag, nodes: list, arcs: list) -> Tdag:
    try:
        out = t.extended(nodes, arcs)
    except BuildError as e:
        raise RejectedOp("acyclic", str(e)) from None
    bad = check_well_formed(out)
    if bad:
        raise RejectedOp(bad[0].condition, str(bad[0]))
    return out


# -- strategies -----------------------------------------------------------


@dataclass(frozen=True)
class Strategy:
    """Paint arcs whose feature fully matches ``pattern``.

    With ``shared`` only secondary arcs into a reentrant node qualify: arcs
    into a node with two or more incoming arcs that do not lie on the node's
    least root path.  When the arc itself cannot be painted, its target node
    is tried instead.
    """

    name: str
    pattern: str
    action: str  # "paint-yellow" or "paint-green"
    shared: bool = False

    def __post_init__(self):
        if self.action not in ("paint-yellow", "paint-green"):
            raise ValueError(f"unknown strategy action {self.action!r}")
        re.compile(self.pattern)

    def ops(self, t: Tdag) -> list[TransferOp]:
        rx = re.compile(self.pattern)
        want = Color.RED if self.action == "paint-yellow" else Color.YELLOW
        cpaths = t.canonical_paths()
        out: list[TransferOp] = []
        for a in sorted(t.arcs, key=lambda a: a.id):
            if not rx.fullmatch(a.feature):
                continue
            if self.shared:
                if len(t.in_arcs(a.dst)) < 2:
                    continue
                if cpaths[a.src] + (a.feature,) == cpaths[a.dst]:
                    continue
            if a.color == want and can_paint(t, a.id):
                out.append(paint_op(t, a.id))
            elif t.node(a.dst).color == want and can_paint(t, a.dst):
                out.append(paint_op(t, a.dst))
        return out


@dataclass(frozen=True)
class StrategyTable:
    entries: tuple[Strategy, ...] = ()

    def ops(self, t: Tdag) -> list[TransferOp]:
        out: list[TransferOp] = []
        for s in self.entries:
            out.extend(s.ops(t))
        return out


def parse_strategies(text: str) -> StrategyTable:
    entries = []
    names = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        kw, *rest = line.split()
        if kw != "strategy" or not rest:
            raise ValueError(f"line {lineno}: expected 'strategy <name> key=value...'")
        name, opts = rest[0], {}
        for f in rest[1:]:
            k, sep, v = f.partition("=")
            if not sep or k not in ("match-feature", "action", "shared"):
                raise ValueError(f"line {lineno}: bad option {f!r}")
            opts[k] = v
        if "match-feature" not in opts or "action" not in opts:
            raise ValueError(f"line {lineno}: match-feature= and action= are required")
        if name in names:
            raise ValueError(f"line {lineno}: duplicate strategy {name!r}")
        names.add(name)
        try:
            entries.append(Strategy(name, opts["match-feature"], opts["action"],
                                    opts.get("shared", "no") in ("yes", "true", "1")))
        except (ValueError, re.error) as e:
            raise ValueError(f"line {lineno}: {e}") from None
    return StrategyTable(tuple(entries))


def load_strategies(path: Union[str, FsPath]) -> StrategyTable:
    return parse_strategies(FsPath(path).read_text(encoding="utf-8"))


def enumerate_ops(t: Tdag, strategies: StrategyTable = StrategyTable()) -> list[TransferOp]:
    """Strategy ops in table order, then every legal paint by node id and then arc id."""
    require_well_formed(t)
    out = list(dict.fromkeys(strategies.ops(t)))
    seen = set(out)
    ids = sorted(n.id for n in t.nodes) + sorted(a.id for a in t.arcs)
    for eid in ids:
        if can_paint(t, eid):
            op = paint_op(t, eid)
            if op not in seen:
                seen.add(op)
                out.append(op)
    return out


# -- planning -------------------------------------------------------------


@dataclass
class TransferTrace:
    initial: Tdag
    steps: list = field(default_factory=list)  # (op, resulting Tdag)

    @property
    def ops(self) -> list[TransferOp]:
        return [op for op, _ in self.steps]

    @property
    def final(self) -> Tdag:
        return self.steps[-1][1] if self.steps else self.initial

    def __len__(self) -> int:
        return len(self.steps)


@dataclass(frozen=True)
class Exhausted:
    states_explored: int
    reason: str


@dataclass(frozen=True)
class PaintCosts:
    red_to_yellow: float = 1.0
    yellow_to_green: float = 1.0
    addition: float = 1.0

    def of(self, op: TransferOp) -> float:
        if isinstance(op, PaintRedToYellow):
            return self.red_to_yellow
        if isinstance(op, PaintYellowToGreen):
            return self.yellow_to_green
        return self.addition


def plan_transfer(t: Tdag, accept: Callable[[Tdag], bool], strategies: StrategyTable = StrategyTable(),
                  budget: int = 8, *, additions: Sequence[TransferOp] = (),
                  costs: PaintCosts = PaintCosts()) -> Union[TransferTrace, Exhausted]:
    """Best-first search for the cheapest op sequence whose result ``accept`` takes.

    Successors of a state are :func:`enumerate_ops` followed by whichever of
    ``additions`` apply.  Equal-cost sequences are ordered by the positions
    of their ops in those successor lists.  A sequence never grows past
    ``budget`` ops nor past the element count of the source TDAG plus the
    additions it has performed.
    """
    require_well_formed(t)
    if budget < 0:
        raise ValueError("budget must be non-negative")
    tie = itertools.count()
    frontier = [(0.0, (), next(tie), t, ())]
    best: dict[Tdag, float] = {t: 0.0}
    done: set[Tdag] = set()
    while frontier:
        cost, rank, _, state, path = heapq.heappop(frontier)
        if state in done:
            continue
        done.add(state)
        if accept(state):
            trace = TransferTrace(t)
            cur = t
            for op in path:
                cur = apply_op(cur, op)
                trace.steps.append((op, cur))
            return trace
        n_add = sum(1 for op in path if not is_paint(op))
        if len(path) >= min(budget, len(t) + n_add):
            continue
        succ = enumerate_ops(state, strategies)
        for op in additions:
            try:
                apply_op(state, op)
            except TransferError:
                continue
            succ.append(op)
        for k, op in enumerate(succ):
            nxt = apply_op(state, op)
            c = cost + costs.of(op)
            if nxt in done or best.get(nxt, float("inf")) < c:
                continue
            best[nxt] = c
            heapq.heappush(frontier, (c, rank + (k,), next(tie), nxt, path + (op,)))
    return Exhausted(len(done), f"no accepted TDAG within {budget} ops")


# -- trace text -----------------------------------------------------------


def format_op(t: Tdag, op: TransferOp) -> str:
    """One trace line; paints record the colors they change between."""
    if isinstance(op, PAINTS):
        a, b = _paint_colors(op)
        return f"paint {op.target} {a} {b}"
    if isinstance(op, (AddYellowNode, AddGreenNode)):
        color = "yellow" if isinstance(op, AddYellowNode) else "green"
        extra = (f" label={op.label}" if op.label else "") + (f" id={op.new_id}" if op.new_id else "")
        return f"add-node {color} {op.attach} {op.feature}{extra}"
    color = "yellow" if isinstance(op, AddYellowArc) else "green"
    return f"add-arc {color} {op.src} {op.feature} {op.dst}"


def format_trace(trace: TransferTrace) -> str:
    lines = []
    cur = trace.initial
    for op, nxt in trace.steps:
        lines.append(format_op(cur, op))
        cur = nxt
    return "\n".join(lines) + ("\n" if lines else "")


def parse_ops(text: str) -> list[TransferOp]:
    ops: list[TransferOp] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        kw, *rest = line.split()
        try:
            ops.append(_parse_op(kw, rest))
        except ValueError as e:
            raise ValueError(f"line {lineno}: {e}") from None
    return ops


def _parse_op(kw: str, rest: list[str]) -> TransferOp:
    if kw == "paint":
        if len(rest) != 3:
            raise ValueError("usage: paint <id> <from-color> <to-color>")
        a, b = Color.parse(rest[1]), Color.parse(rest[2])
        if (a, b) == (Color.RED, Color.YELLOW):
            return PaintRedToYellow(rest[0])
        if (a, b) == (Color.YELLOW, Color.GREEN):
            return PaintYellowToGreen(rest[0])
        raise ValueError(f"the painter cannot go from {a} to {b}")
    if kw == "add-node":
        if len(rest) < 3:
            raise ValueError("usage: add-node <yellow|green> <attach> <feature> [label=..] [id=..]")
        opts = {}
        for f in rest[3:]:
            k, sep, v = f.partition("=")
            if not sep or k not in ("label", "id"):
                raise ValueError(f"bad option {f!r}")
            opts[k] = v
        cls = {"yellow": AddYellowNode, "green": AddGreenNode}.get(rest[0])
        if cls is None:
            raise ValueError("added nodes are yellow or green")
        return cls(rest[1], rest[2], opts.get("label"), opts.get("id"))
    if kw == "add-arc":
        if len(rest) != 4:
            raise ValueError("usage: add-arc <yellow|green> <from> <feature> <to>")
        cls = {"yellow": AddYellowArc, "green": AddGreenArc}.get(rest[0])
        if cls is None:
            raise ValueError("added arcs are yellow or green")
        return cls(rest[1], rest[2], rest[3])
    raise ValueError(f"unknown op {kw!r}")


def replay(t: Tdag, ops: Iterable[TransferOp]) -> TransferTrace:
    trace = TransferTrace(t)
    cur = t
    for op in ops:
        cur = apply_op(cur, op)
        trace.steps.append((op, cur))
    return trace
