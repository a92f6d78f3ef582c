"""Sentence generation from a TDAG by top-down derivation search.

The search expands the leftmost open constituent with each rule in grammar
order, deepening the tree bound one level at a time.  The feature structure
it builds comes from the rules alone.  After every expansion its semantic
part (the root's ``pred`` arc and everything below it) must map into the
input TDAG: each derived arc must exist there in some color, derived atoms
must match, and two derived paths to one node must land on one node of the
input.  A complete derivation succeeds when, in addition, every red node
and arc of the input was derived and every red reentrancy was derived as
a reentrancy.  Yellow and green elements may be derived or left alone.
"""

from __future__ import annotations

import enum
import os
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Optional, Union

from tricolor.core import Arc, Color, Node, Tdag, arc_id, red_core, require_well_formed, saturate, subsumes
from tricolor.grammar import FeatureGraph, Grammar, Tree, category

DEFAULT_DEPTH = 12


def default_depth() -> int:
    """Depth budget from ``TRICOLOR_DEPTH``, else 12."""
    raw = os.environ.get("TRICOLOR_DEPTH", "").strip()
    if not raw:
        return DEFAULT_DEPTH
    value = int(raw)
    if value < 1:
        raise ValueError("TRICOLOR_DEPTH must be at least 1")
    return value


class Mark(enum.Enum):
    DERIVED_RED = "DerivedRed"
    LEFT_YELLOW = "LeftYellow"
    LEFT_GREEN = "LeftGreen"
    UNDERIVED = "Underived"  # a red element no derivation reached

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Derivation:
    tree: Tree
    surface: str
    derived: Tdag  # all red; node ids follow the input TDAG
    image: Mapping[str, str]  # derived element id -> input element id


@dataclass(frozen=True)
class TerminationReport:
    t1: bool
    t2: bool
    t3: bool
    underived: tuple = ()        # red input elements not derived
    invented: tuple = ()         # derived paths with no counterpart in the input
    split_reentrancies: tuple = ()  # (red node, paths) reached by more than one derived node

    @property
    def ok(self) -> bool:
        return self.t1 and self.t2 and self.t3


@dataclass(frozen=True)
class Success:
    derivation: Derivation
    kind = "success"


@dataclass(frozen=True)
class GenFailure:
    reason: str
    underived: tuple = ()
    kind = "failure"


@dataclass
class GenReport:
    outcome: Union[Success, GenFailure]
    coverage: dict = field(default_factory=dict)  # input element id -> Mark
    termination: Optional[TerminationReport] = None

    @property
    def ok(self) -> bool:
        return isinstance(self.outcome, Success)

    @property
    def derivation(self) -> Optional[Derivation]:
        return self.outcome.derivation if self.ok else None

    @property
    def surface(self) -> Optional[str]:
        return self.outcome.derivation.surface if self.ok else None


# -- embedding ------------------------------------------------------------


def _embed(g: FeatureGraph, root: int, t: Tdag):
    """Map the semantic region of ``root`` into ``t``.

    Returns (region, h, bfs order) or None when something derived has no counterpart.
    """
    region = g.semantic_region(root)
    if region is None:
        return None
    root = g.find(root)
    if g.atom(root) is not None and g.atom(root) != t.node(t.root).label:
        return None
    h = {root: t.root}
    order = [root]
    i = 0
    while i < len(order):
        x = order[i]
        i += 1
        out = t.out_arcs(h[x])
        for f, y in sorted(region[x].items()):
            a = out.get(f)
            if a is None:
                return None
            if y in h:
                if h[y] != a.dst:
                    return None
                continue
            lab = g.atom(y)
            if lab is not None and lab != t.node(a.dst).label:
                return None
            h[y] = a.dst
            order.append(y)
    return region, h, order


def _derived_tdag(g: FeatureGraph, region, h, order, t: Tdag) -> tuple[Tdag, dict[str, str]]:
    ids: dict[int, str] = {}
    used: dict[str, int] = {}
    image: dict[str, str] = {}
    for x in order:
        v = h[x]
        k = used.get(v, 0)
        used[v] = k + 1
        ids[x] = v if k == 0 else f"{v}~{k}"
        image[ids[x]] = v
    nodes = [Node(ids[x], Color.RED, g.atom(x)) for x in order]
    arcs = []
    for x in order:
        for f, y in sorted(region[x].items()):
            target = t.out_arcs(h[x])[f]
            aid = target.id if ids[x] == h[x] else arc_id(ids[x], f)
            image[aid] = target.id
            arcs.append(Arc(aid, ids[x], f, ids[y], Color.RED))
    return Tdag(nodes, arcs, ids[order[0]]), image


# -- termination conditions -----------------------------------------------


def _red_paths(t: Tdag) -> dict[str, list[tuple]]:
    paths: dict[str, list[tuple]] = {t.root: [()]}
    for nid in t.topological_order_strict():
        for f, a in sorted(t.out_arcs(nid).items()):
            if a.color == Color.RED and nid in paths:
                paths.setdefault(a.dst, []).extend(p + (f,) for p in paths[nid])
    return paths


def check_termination(t: Tdag, derivation: Derivation) -> TerminationReport:
    """Evaluate the three termination conditions independently.

    T1: every red node and arc of ``t`` was derived (a labeled node only
    counts once its atom was derived).  T2: nothing was derived that ``t``
    lacks in every color.  T3: every red reentrancy of ``t`` was derived.
    """
    d = derivation.derived
    h: dict[str, str] = {}
    invented = []
    arc_image: set[str] = set()
    if d.node(d.root).label not in (None, t.node(t.root).label):
        invented.append(())
    h[d.root] = t.root
    cpaths = d.canonical_paths()
    for nid in d.topological_order():
        if nid not in h:
            continue
        for f, a in sorted(d.out_arcs(nid).items()):
            ta = t.out_arcs(h[nid]).get(f)
            if ta is None:
                invented.append(cpaths[nid] + (f,))
                continue
            arc_image.add(ta.id)
            lab = d.node(a.dst).label
            if a.dst in h and h[a.dst] != ta.dst or lab is not None and lab != t.node(ta.dst).label:
                invented.append(cpaths[nid] + (f,))
                continue
            h.setdefault(a.dst, ta.dst)
    labeled = {h[n.id] for n in d.nodes if n.id in h and n.label is not None}
    underived = []
    for n in t.nodes:
        if n.color != Color.RED:
            continue
        if n.id not in h.values() or (n.label is not None and n.id not in labeled):
            underived.append(n.id)
    underived.extend(a.id for a in t.arcs if a.color == Color.RED and a.id not in arc_image)
    split = []
    for w, paths in _red_paths(t).items():
        if len(paths) < 2:
            continue
        ends = {d.walk(p) for p in paths}
        if len(ends) != 1 or None in ends:
            split.append((w, tuple(paths)))
    return TerminationReport(not underived, not invented, not split,
                             tuple(sorted(underived)), tuple(invented), tuple(split))


def verify_sandwich(t: Tdag, derivation: Derivation) -> bool:
    """red_core(t) subsumes the derived TDAG, which subsumes saturate(t)."""
    return subsumes(red_core(t), derivation.derived) and subsumes(derivation.derived, saturate(t))


def coverage(t: Tdag, derivation: Optional[Derivation]) -> dict[str, Mark]:
    derived = set(derivation.image.values()) if derivation else set()
    marks = {}
    for eid in t.element_ids():
        color = t.element(eid).color
        if eid in derived:
            marks[eid] = Mark.DERIVED_RED
        elif color == Color.RED:
            marks[eid] = Mark.UNDERIVED
        elif color == Color.YELLOW:
            marks[eid] = Mark.LEFT_YELLOW
        else:
            marks[eid] = Mark.LEFT_GREEN
    return marks


# -- search ---------------------------------------------------------------


def _tree(grammar: Grammar, seq: tuple[int, ...]) -> Tree:
    it = iter(seq)

    def build() -> Tree:
        r = grammar.rules[next(it)]
        if r.is_lexical:
            return Tree(r.name, (), r.word)
        return Tree(r.name, tuple(build() for _ in r.rhs))

    return build()


class _Search:
    def __init__(self, t: Tdag, grammar: Grammar):
        self.t = t
        self.grammar = grammar
        self.by_cat = {}
        for i, r in enumerate(grammar.rules):
            self.by_cat.setdefault(category(r.lhs), []).append((i, r))
        self.complete = 0
        self.cut_by_depth = False

    def derivations(self, max_depth: int) -> Iterator[tuple[Derivation, TerminationReport]]:
        """Every complete derivation within ``max_depth`` whose semantics maps into t."""
        g = FeatureGraph()
        root = g.new_node()
        yield from self._expand(g, root, [(root, self.grammar.start, 1)], (), max_depth)

    def _expand(self, g, root, agenda, seq, max_depth):
        if not agenda:
            emb = _embed(g, root, self.t)
            region, h, order = emb
            derived, image = _derived_tdag(g, region, h, order, self.t)
            tree = _tree(self.grammar, seq)
            d = Derivation(tree, " ".join(tree.words()), derived, image)
            self.complete += 1
            yield d, check_termination(self.t, d)
            return
        node, cat, depth = agenda[-1]
        rest = agenda[:-1]
        for idx, rule in self.by_cat.get(cat, ()):
            if not rule.is_lexical and depth >= max_depth:
                self.cut_by_depth = True
                continue
            g2 = g.copy()
            roots = {rule.lhs: node}
            kids = []
            for sym in rule.rhs:
                k = g2.new_node()
                roots[sym] = k
                kids.append((k, category(sym), depth + 1))
            if not g2.apply(rule.equations, roots):
                continue
            if _embed(g2, root, self.t) is None:
                continue
            yield from self._expand(g2, root, rest + kids[::-1], seq + (idx,), max_depth)


def iter_derivations(t: Tdag, grammar: Grammar, depth_budget: Optional[int] = None) -> Iterator[Derivation]:
    """Every successful derivation with tree depth at most ``depth_budget``."""
    require_well_formed(t)
    budget = default_depth() if depth_budget is None else depth_budget
    for d, rep in _Search(t, grammar).derivations(budget):
        if rep.ok:
            yield d


def generate(t: Tdag, grammar: Grammar, depth_budget: Optional[int] = None) -> GenReport:
    """Search for the shallowest derivation that satisfies the termination conditions."""
    require_well_formed(t)
    budget = default_depth() if depth_budget is None else depth_budget
    if budget < 1:
        raise ValueError("depth budget must be at least 1")
    search = _Search(t, grammar)
    best: Optional[TerminationReport] = None
    for limit in range(1, budget + 1):
        search.cut_by_depth = False
        for d, rep in search.derivations(limit):
            if rep.ok:
                return GenReport(Success(d), coverage(t, d), rep)
            if best is None or len(rep.underived) + len(rep.split_reentrancies) < \
                    len(best.underived) + len(best.split_reentrancies):
                best = rep
        if not search.cut_by_depth:
            break
    if best is None:
        return GenReport(GenFailure("depth"), coverage(t, None))
    if best.underived:
        reason = "T1: underived red elements " + ", ".join(best.underived)
    else:
        reason = "T3: underived reentrancies at " + ", ".join(w for w, _ in best.split_reentrancies)
    return GenReport(GenFailure(reason, best.underived), coverage(t, None), best)


def format_call_trace(grammar: Grammar, derivation: Derivation) -> str:
    """Call-structured log of a derivation, one call and one return per constituent."""
    lines: list[str] = []

    def visit(node: Tree, level: int) -> str:
        cat = category(grammar.rule(node.rule).lhs)
        pad = " " * level
        lines.append(f"{pad}{level}> {cat} called ;; {node.rule}")
        if node.word is not None:
            text = node.word
        else:
            text = " ".join(visit(c, level + 1) for c in node.children)
        lines.append(f'{pad}{level}< {cat} returns "{text}"')
        return text

    visit(derivation.tree, 0)
    return "\n".join(lines) + "\n"
