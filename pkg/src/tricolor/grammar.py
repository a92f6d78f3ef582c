"""PATR-style unification grammars.

A grammar is an ordered list of rules plus a start symbol.  Each rule has a
context-free skeleton (binary or unary phrasal, or lexical with a word form)
and path equations over its constituent symbols::

    rule wished V -> "wished"
      <V pred> = *WISH
      <V pred agent> = <V subj pred>
    rule s S -> NP VP
      <S pred> = <VP pred>
    start S

A symbol's category is the symbol with any ``_<digits>`` suffix removed, so
``NP_1`` is an NP.  Equations whose paths pass through ``pred`` are semantic:
the structure they build is what becomes a TDAG.  All other equations are
syntactic bindings.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path as FsPath
from typing import Optional, Sequence, Union

from tricolor.core import Arc, Color, Node, Tdag, arc_id

SEMANTIC_FEATURE = "pred"

_SYMBOL = re.compile(r"[A-Za-z][A-Za-z0-9]*(?:_[0-9]+)?")
_NAME = re.compile(r"\S+")


class GrammarError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None, source: Optional[str] = None):
        self.message = message
        self.line = line
        self.source = source
        where = f"{source or '<grammar>'}:{line}: " if line else (f"{source}: " if source else "")
        super().__init__(where + message)


class InstantiationError(ValueError):
    """Equations of a rule cannot all hold at once."""


class AnalysisError(ValueError):
    """No complete analysis of the input."""


def category(symbol: str) -> str:
    return re.sub(r"_[0-9]+$", "", symbol)


# -- rules ----------------------------------------------------------------

FeaturePath = tuple  # (symbol, feature, ...)


@dataclass(frozen=True)
class Equation:
    lhs: FeaturePath
    rhs: Union[FeaturePath, str]  # a path, or an atom

    @property
    def is_atomic(self) -> bool:
        return isinstance(self.rhs, str)

    @property
    def is_semantic(self) -> bool:
        paths = [self.lhs] if self.is_atomic else [self.lhs, self.rhs]
        return any(SEMANTIC_FEATURE in p[1:] for p in paths)

    def symbols(self) -> set[str]:
        return {self.lhs[0]} if self.is_atomic else {self.lhs[0], self.rhs[0]}

    def __str__(self) -> str:
        rhs = self.rhs if self.is_atomic else _fmt_path(self.rhs)
        return f"{_fmt_path(self.lhs)} = {rhs}"


def _fmt_path(p: FeaturePath) -> str:
    return "<" + " ".join(p) + ">"


@dataclass(frozen=True)
class Rule:
    name: str
    lhs: str
    rhs: tuple[str, ...] = ()   # phrasal constituents; empty for lexical rules
    word: Optional[str] = None  # word form of a lexical rule
    equations: tuple[Equation, ...] = ()

    @property
    def is_lexical(self) -> bool:
        return self.word is not None

    @property
    def symbols(self) -> tuple[str, ...]:
        return (self.lhs,) + self.rhs

    def semantic_equations(self) -> tuple[Equation, ...]:
        return tuple(e for e in self.equations if e.is_semantic)

    def syntactic_equations(self) -> tuple[Equation, ...]:
        return tuple(e for e in self.equations if not e.is_semantic)


@dataclass(frozen=True)
class Grammar:
    rules: tuple[Rule, ...]
    start: str

    def rules_for(self, cat: str) -> list[tuple[int, Rule]]:
        return [(i, r) for i, r in enumerate(self.rules) if category(r.lhs) == cat]

    def rule(self, name: str) -> Rule:
        for r in self.rules:
            if r.name == name:
                return r
        raise KeyError(name)

    def lexicon(self) -> set[str]:
        return {r.word for r in self.rules if r.is_lexical}


# -- grammar text ---------------------------------------------------------

_RULE_LINE = re.compile(r'^rule\s+(\S+)\s+(\S+)\s*->\s*(.*)$')
_EQUATION = re.compile(r'^<([^<>]*)>\s*=\s*(?:<([^<>]*)>|(\S+))$')


def parse_grammar(text: str, source: Optional[str] = None) -> Grammar:
    rules: list[Rule] = []
    start = None
    current = None  # (name, lhs, rhs, word, equations, lineno)

    def close():
        if current is not None:
            name, lhs, rhs, word, eqs, _ = current
            rules.append(Rule(name, lhs, rhs, word, tuple(eqs)))

    def fail(msg, lineno):
        raise GrammarError(msg, lineno, source)

    names: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        if line[0].isspace():
            if current is None:
                fail("equation outside a rule", lineno)
            eq = _parse_equation(line.strip(), lineno, source)
            for sym in eq.symbols():
                if sym not in (current[1],) + current[2]:
                    fail(f"unknown constituent symbol {sym!r} in rule {current[0]!r}", lineno)
            current[4].append(eq)
            continue
        close()
        current = None
        stripped = line.strip()
        if stripped.startswith("start"):
            parts = stripped.split()
            if len(parts) != 2 or parts[0] != "start":
                fail("usage: start <Symbol>", lineno)
            if start is not None:
                fail("start given twice", lineno)
            start = parts[1]
            continue
        m = _RULE_LINE.match(stripped)
        if not m:
            fail(f"expected 'rule', 'start' or an indented equation, got {stripped!r}", lineno)
        name, lhs, body = m.group(1), m.group(2), m.group(3).strip()
        if name in names:
            fail(f"duplicate rule name {name!r}", lineno)
        names.add(name)
        if not _SYMBOL.fullmatch(lhs):
            fail(f"bad symbol {lhs!r}", lineno)
        if body.startswith('"'):
            if len(body) < 3 or not body.endswith('"') or '"' in body[1:-1] or not body[1:-1].strip():
                fail(f"bad word form {body}", lineno)
            current = (name, lhs, (), body[1:-1], [], lineno)
        else:
            rhs = tuple(body.split())
            if len(rhs) not in (1, 2):
                fail("phrasal rules have one or two constituents", lineno)
            for sym in rhs:
                if not _SYMBOL.fullmatch(sym):
                    fail(f"bad symbol {sym!r}", lineno)
            if len(set((lhs,) + rhs)) != len(rhs) + 1:
                fail("constituent symbols of a rule must be distinct (use NP_1 etc.)", lineno)
            current = (name, lhs, rhs, None, [], lineno)
    close()
    if start is None:
        raise GrammarError("no start rule", None, source)
    if not any(category(r.lhs) == start for r in rules):
        raise GrammarError(f"no rule for start symbol {start!r}", None, source)
    return Grammar(tuple(rules), start)


def _parse_equation(text: str, lineno: int, source) -> Equation:
    m = _EQUATION.match(text)
    if not m:
        raise GrammarError(f"malformed equation {text!r}", lineno, source)
    lhs = tuple(m.group(1).split())
    if not lhs:
        raise GrammarError("empty path", lineno, source)
    if m.group(2) is not None:
        rhs = tuple(m.group(2).split())
        if not rhs:
            raise GrammarError("empty path", lineno, source)
        return Equation(lhs, rhs)
    return Equation(lhs, m.group(3))


def serialize_grammar(g: Grammar) -> str:
    lines = []
    for r in g.rules:
        body = f'"{r.word}"' if r.is_lexical else " ".join(r.rhs)
        lines.append(f"rule {r.name} {r.lhs} -> {body}")
        lines.extend(f"  {e}" for e in r.equations)
    lines.append(f"start {g.start}")
    return "\n".join(lines) + "\n"


def load_grammar(path: Union[str, FsPath]) -> Grammar:
    p = FsPath(path)
    return parse_grammar(p.read_text(encoding="utf-8"), str(p))


# -- feature graphs -------------------------------------------------------


class FeatureGraph:
    """Mutable feature graph with destructive unification (union-find).

    Nodes are integers.  Each class representative owns an arc table and an
    optional atom label.  Labels may sit on nodes that also have arcs, as in
    ``<V pred> = *WISH`` next to ``<V pred agent> = ...``.
    """

    __slots__ = ("parent", "arcs", "label")

    def __init__(self):
        self.parent: list[int] = []
        self.arcs: list[dict[str, int]] = []
        self.label: list[Optional[str]] = []

    def copy(self) -> "FeatureGraph":
        g = FeatureGraph()
        g.parent = list(self.parent)
        g.arcs = [dict(a) for a in self.arcs]
        g.label = list(self.label)
        return g

    def new_node(self) -> int:
        self.parent.append(len(self.parent))
        self.arcs.append({})
        self.label.append(None)
        return len(self.parent) - 1

    def absorb(self, other: "FeatureGraph") -> int:
        """Append a copy of ``other``'s nodes; returns the offset of its ids."""
        off = len(self.parent)
        self.parent.extend(p + off for p in other.parent)
        self.arcs.extend({f: t + off for f, t in a.items()} for a in other.arcs)
        self.label.extend(other.label)
        return off

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def child(self, x: int, feature: str) -> Optional[int]:
        t = self.arcs[self.find(x)].get(feature)
        return None if t is None else self.find(t)

    def out(self, x: int) -> dict[str, int]:
        return {f: self.find(t) for f, t in self.arcs[self.find(x)].items()}

    def atom(self, x: int) -> Optional[str]:
        return self.label[self.find(x)]

    def walk(self, x: int, path: Sequence[str]) -> Optional[int]:
        for f in path:
            x = self.child(x, f)
            if x is None:
                return None
        return self.find(x)

    def ensure(self, x: int, path: Sequence[str]) -> int:
        x = self.find(x)
        for f in path:
            t = self.arcs[x].get(f)
            if t is None:
                t = self.new_node()
                self.arcs[x][f] = t
            x = self.find(t)
        return x

    def set_atom(self, x: int, atom: str) -> bool:
        x = self.find(x)
        if self.label[x] is None:
            self.label[x] = atom
            return True
        return self.label[x] == atom

    def unify(self, x: int, y: int) -> bool:
        pending = [(x, y)]
        while pending:
            a, b = pending.pop()
            a, b = self.find(a), self.find(b)
            if a == b:
                continue
            if a > b:
                a, b = b, a
            la, lb = self.label[a], self.label[b]
            if la is not None and lb is not None and la != lb:
                return False
            self.parent[b] = a
            if la is None:
                self.label[a] = lb
            for f, tb in self.arcs[b].items():
                ta = self.arcs[a].get(f)
                if ta is None:
                    self.arcs[a][f] = tb
                else:
                    pending.append((ta, tb))
            self.arcs[b] = {}
        return True

    def apply(self, equations: Sequence[Equation], roots: dict[str, int]) -> bool:
        """Add every equation, with each constituent symbol rooted at ``roots``."""
        for e in equations:
            x = self.ensure(roots[e.lhs[0]], e.lhs[1:])
            if e.is_atomic:
                ok = self.set_atom(x, e.rhs)
            else:
                ok = self.unify(x, self.ensure(roots[e.rhs[0]], e.rhs[1:]))
            if not ok:
                return False
        return True

    def semantic_region(self, root: int) -> Optional[dict[int, dict[str, int]]]:
        """Out-arcs of the root's ``pred`` closure, keyed by node; None if it is cyclic.

        Only the ``pred`` arc is followed from the root; below it every arc is.
        """
        root = self.find(root)
        out: dict[int, dict[str, int]] = {root: {}}
        p = self.child(root, SEMANTIC_FEATURE)
        if p is None:
            return out
        out[root] = {SEMANTIC_FEATURE: p}
        state = {root: 2, p: 1}
        stack = [(p, iter(sorted(self.out(p).items())))]
        out[p] = self.out(p)
        while stack:
            x, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                state[x] = 2
                stack.pop()
                continue
            _, y = nxt
            s = state.get(y, 0)
            if s == 1:
                return None
            if s == 0:
                state[y] = 1
                out[y] = self.out(y)
                stack.append((y, iter(sorted(out[y].items()))))
        return out


def _node_ids(g: FeatureGraph, root: int, region: dict[int, dict[str, int]]) -> dict[int, str]:
    # breadth-first from the root; ids come from atom labels where possible
    order = [root]
    seen = {root}
    i = 0
    while i < len(order):
        for f, y in sorted(region[order[i]].items()):
            if y not in seen:
                seen.add(y)
                order.append(y)
        i += 1
    ids: dict[int, str] = {}
    used: set[str] = set()
    for k, x in enumerate(order):
        lab = g.atom(x)
        if x == root:
            base = "root"
        elif lab is not None:
            base = lab.lstrip("*") or f"n{k}"
        else:
            base = f"n{k}"
        nid, j = base, 2
        while nid in used:
            nid = f"{base}_{j}"
            j += 1
        used.add(nid)
        ids[x] = nid
    return ids


def graph_to_tdag(g: FeatureGraph, root: int, color: Color = Color.RED) -> Tdag:
    """The semantic region of ``root`` as a single-colored TDAG."""
    region = g.semantic_region(root)
    if region is None:
        raise InstantiationError("semantic structure is cyclic")
    ids = _node_ids(g, g.find(root), region)
    nodes = [Node(ids[x], color, g.atom(x)) for x in ids]
    arcs = [Arc(arc_id(ids[x], f), ids[x], f, ids[y], color)
            for x in ids for f, y in sorted(region[x].items())]
    return Tdag(nodes, arcs, ids[g.find(root)])


# -- lexical instantiation ------------------------------------------------


@dataclass(frozen=True)
class LexicalFragment:
    tdag: Tdag
    bindings: tuple[Equation, ...]  # syntactic equations, kept outside the TDAG
    anchors: dict  # equation path -> TDAG node id (None if outside the TDAG)


def instantiate_lexical(rule: Rule) -> LexicalFragment:
    """Red TDAG built from a lexical rule's semantic equations."""
    if not rule.is_lexical:
        raise ValueError(f"rule {rule.name!r} is not lexical")
    g = FeatureGraph()
    x = g.new_node()
    sem = rule.semantic_equations()
    if not g.apply(sem, {rule.lhs: x}):
        raise InstantiationError(f"equations of rule {rule.name!r} conflict")
    t = graph_to_tdag(g, x)
    region = g.semantic_region(x)
    ids = _node_ids(g, g.find(x), region)
    anchors = {}
    for e in sem:
        for p in ([e.lhs] if e.is_atomic else [e.lhs, e.rhs]):
            anchors[p] = ids.get(g.walk(x, p[1:]))
    return LexicalFragment(t, rule.syntactic_equations(), anchors)


# -- analysis -------------------------------------------------------------


@dataclass(frozen=True)
class Tree:
    rule: str
    children: tuple = ()
    word: Optional[str] = None

    def words(self) -> list[str]:
        if self.word is not None:
            return [self.word]
        return [w for c in self.children for w in c.words()]

    def depth(self) -> int:
        return 1 + max((c.depth() for c in self.children), default=0)

    def __str__(self) -> str:
        if self.word is not None:
            return f'({self.rule} "{self.word}")'
        return f"({self.rule} " + " ".join(str(c) for c in self.children) + ")"


@dataclass
class _Edge:
    cat: str
    start: int
    end: int
    graph: FeatureGraph
    node: int
    tree: Tree
    rank: tuple


@dataclass(frozen=True)
class Analysis:
    tdag: Tdag
    tree: Tree
    parses: int


def _combine(rule: Rule, idx: int, children: Sequence[_Edge]) -> Optional[_Edge]:
    g = children[0].graph.copy()
    nodes = [children[0].node]
    for c in children[1:]:
        nodes.append(c.node + g.absorb(c.graph))
    x = g.new_node()
    roots = {rule.lhs: x}
    roots.update(zip(rule.rhs, nodes))
    if not g.apply(rule.equations, roots):
        return None
    rank = (idx,) + tuple(r for c in children for r in c.rank)
    return _Edge(category(rule.lhs), children[0].start, children[-1].end, g, x,
                 Tree(rule.name, tuple(c.tree for c in children)), rank)


def _chart(tokens: Sequence[str], grammar: Grammar) -> dict[tuple[int, int], list[_Edge]]:
    n = len(tokens)
    chart: dict[tuple[int, int], list[_Edge]] = {}
    unary = [(i, r) for i, r in enumerate(grammar.rules) if not r.is_lexical and len(r.rhs) == 1]
    binary = [(i, r) for i, r in enumerate(grammar.rules) if len(r.rhs) == 2]
    max_unary = len({category(r.lhs) for r in grammar.rules}) + 1

    def close_unary(cell: list[_Edge]) -> None:
        frontier = list(cell)
        for _ in range(max_unary):
            new = []
            for e in frontier:
                for i, r in unary:
                    if category(r.rhs[0]) == e.cat:
                        ne = _combine(r, i, [e])
                        if ne is not None:
                            new.append(ne)
            cell.extend(new)
            frontier = new
            if not frontier:
                break

    for k, tok in enumerate(tokens):
        cell = []
        for i, r in enumerate(grammar.rules):
            if r.is_lexical and r.word == tok:
                g = FeatureGraph()
                x = g.new_node()
                if g.apply(r.equations, {r.lhs: x}):
                    cell.append(_Edge(category(r.lhs), k, k + 1, g, x, Tree(r.name, (), tok), (i,)))
        close_unary(cell)
        chart[(k, k + 1)] = cell
    for length in range(2, n + 1):
        for s in range(0, n - length + 1):
            e = s + length
            cell = []
            for i, r in binary:
                c1, c2 = category(r.rhs[0]), category(r.rhs[1])
                for m in range(s + 1, e):
                    for left in chart[(s, m)]:
                        if left.cat != c1:
                            continue
                        for right in chart[(m, e)]:
                            if right.cat == c2:
                                ne = _combine(r, i, [left, right])
                                if ne is not None:
                                    cell.append(ne)
            close_unary(cell)
            chart[(s, e)] = cell
    return chart


def analyze_all(tokens: Sequence[str], grammar: Grammar) -> list[tuple[Tree, Tdag]]:
    """Every complete analysis, first by rule order."""
    tokens = list(tokens)
    if not tokens:
        raise AnalysisError("empty input")
    unknown = [t for t in tokens if t not in grammar.lexicon()]
    if unknown:
        raise AnalysisError(f"unknown token {unknown[0]!r}")
    chart = _chart(tokens, grammar)
    full = sorted((e for e in chart[(0, len(tokens))] if e.cat == grammar.start), key=lambda e: e.rank)
    out = []
    for e in full:
        try:
            out.append((e.tree, graph_to_tdag(e.graph, e.node)))
        except InstantiationError:
            continue
    if not out:
        spans = [(k[1] - k[0], -k[0], e) for k, cell in chart.items() for e in cell]
        if spans:
            _, _, best = max(spans, key=lambda s: (s[0], s[1]))
            detail = f"longest chart edge: {best.cat} over tokens {best.start}..{best.end - 1} " \
                     f"({' '.join(tokens[best.start:best.end])})"
        else:
            detail = "no chart edges"
        raise AnalysisError(f"no complete {grammar.start} analysis; {detail}")
    return out


def analyze(tokens: Sequence[str], grammar: Grammar) -> Analysis:
    """TDAG of the first complete analysis, with the number of analyses found."""
    parses = analyze_all(tokens, grammar)
    tree, tdag = parses[0]
    return Analysis(tdag, tree, len(parses))

