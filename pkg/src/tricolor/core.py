"""Tricolor DAGs and their color-extended subsumption and unification.

A TDAG is a rooted, directed, acyclic graph whose nodes and arcs each carry a
constraint strength: red (essential), yellow (may be ignored but must not be
violated) or green (defeasible).  Arcs are labeled with feature names and
nodes may carry an atom label.

Values are immutable.  Node and arc ids share one namespace so that a transfer
operation can name either kind of element with a single id.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Optional, Union

import numpy as np

from tricolor import kernels


class Color(enum.IntEnum):
    """Constraint strength.  Larger values are stronger."""

    GREEN = 0
    YELLOW = 1
    RED = 2

    def __str__(self) -> str:
        return self.name.lower()

    @classmethod
    def parse(cls, text: Union[str, "Color"]) -> "Color":
        if isinstance(text, Color):
            return text
        try:
            return cls[text.strip().upper()]
        except KeyError:
            raise ValueError(f"unknown color {text!r}") from None

    def weaker(self) -> "Color":
        if self is Color.GREEN:
            raise ValueError("green cannot be weakened")
        return Color(self - 1)


def unify_colors(a: Color, b: Color) -> Color:
    """Color of a merged node or arc: the stronger of the two."""
    return Color(max(a, b))


def color_subsumes(general: Color, specific: Color) -> bool:
    """Red subsumes only red, yellow subsumes red and yellow, green subsumes all."""
    return general <= specific


@dataclass(frozen=True)
class Node:
    id: str
    color: Color
    label: Optional[str] = None


@dataclass(frozen=True)
class Arc:
    id: str
    src: str
    feature: str
    dst: str
    color: Color


Element = Union[Node, Arc]
Path = tuple  # tuple of feature names from the root


class TdagError(ValueError):
    """Base class for TDAG errors."""


class BuildError(TdagError):
    """Raised when nodes and arcs do not form a rooted DAG."""

    def __init__(self, message: str, element: Optional[str] = None):
        super().__init__(message)
        self.element = element


class IllFormedError(TdagError):
    """Raised when an operation that requires a well-formed TDAG receives one that is not."""

    def __init__(self, violations: list):
        self.violations = violations
        super().__init__("ill-formed TDAG: " + "; ".join(str(v) for v in violations))


def arc_id(src: str, feature: str) -> str:
    return f"{src}.{feature}"


class Tdag:
    """An immutable tricolor DAG.

    Construct with :func:`build`, which validates structure (endpoints,
    acyclicity, reachability, unique features) but not the color conditions;
    use :func:`check_well_formed` for those.
    """

    __slots__ = ("_nodes", "_arcs", "_root", "_out", "_in", "_hash", "_cache")

    def __init__(self, nodes: Iterable[Node], arcs: Iterable[Arc], root: str,
                 allow_duplicate_features: bool = False):
        self._nodes: dict[str, Node] = {}
        self._arcs: dict[str, Arc] = {}
        for n in nodes:
            if n.id in self._nodes:
                raise BuildError(f"duplicate node id {n.id!r}", n.id)
            if not n.id or any(c.isspace() for c in n.id):
                raise BuildError(f"invalid node id {n.id!r}", n.id)
            if n.label is not None and (not n.label or any(c.isspace() for c in n.label)):
                raise BuildError(f"invalid atom label {n.label!r} on node {n.id!r}", n.id)
            self._nodes[n.id] = n
        if root not in self._nodes:
            raise BuildError(f"root {root!r} is not a declared node", root)
        self._root = root
        self._out: dict[str, dict[str, Arc]] = {nid: {} for nid in self._nodes}
        self._in: dict[str, list[Arc]] = {nid: [] for nid in self._nodes}
        for a in arcs:
            if a.id in self._arcs or a.id in self._nodes:
                raise BuildError(f"duplicate element id {a.id!r}", a.id)
            if not a.feature or any(c.isspace() for c in a.feature):
                raise BuildError(f"arc {a.id!r} has an invalid feature name {a.feature!r}", a.id)
            for end in (a.src, a.dst):
                if end not in self._nodes:
                    raise BuildError(f"arc {a.id!r} has dangling endpoint {end!r}", a.id)
            if a.feature in self._out[a.src]:
                if not allow_duplicate_features:
                    raise BuildError(
                        f"arcs {self._out[a.src][a.feature].id!r} and {a.id!r} both leave "
                        f"{a.src!r} with feature {a.feature!r}", a.id)
            else:
                self._out[a.src][a.feature] = a
            self._in[a.dst].append(a)
            self._arcs[a.id] = a
        self._hash = None
        self._cache: dict = {}
        self._check_acyclic_and_rooted()

    def _check_acyclic_and_rooted(self) -> None:
        state: dict[str, int] = {}
        stack = [(self._root, iter(self._all_out(self._root)))]
        state[self._root] = 1
        while stack:
            nid, it = stack[-1]
            arc = next(it, None)
            if arc is None:
                state[nid] = 2
                stack.pop()
                continue
            s = state.get(arc.dst, 0)
            if s == 1:
                raise BuildError(f"cycle through arc {arc.id!r}", arc.id)
            if s == 0:
                state[arc.dst] = 1
                stack.append((arc.dst, iter(self._all_out(arc.dst))))
        for nid in self._nodes:
            if nid not in state:
                raise BuildError(f"node {nid!r} is not reachable from the root", nid)

    def _all_out(self, nid: str) -> list[Arc]:
        # includes duplicate-feature arcs, which _out does not index
        if "out_all" not in self._cache:
            out: dict[str, list[Arc]] = {n: [] for n in self._nodes}
            for a in self._arcs.values():
                out[a.src].append(a)
            self._cache["out_all"] = out
        return self._cache["out_all"][nid]

    # -- accessors -------------------------------------------------------

    @property
    def root(self) -> str:
        return self._root

    @property
    def nodes(self) -> tuple[Node, ...]:
        return tuple(self._nodes.values())

    @property
    def arcs(self) -> tuple[Arc, ...]:
        return tuple(self._arcs.values())

    def __len__(self) -> int:
        """Number of elements (nodes plus arcs)."""
        return len(self._nodes) + len(self._arcs)

    def __contains__(self, eid: str) -> bool:
        return eid in self._nodes or eid in self._arcs

    def node(self, nid: str) -> Node:
        return self._nodes[nid]

    def arc(self, aid: str) -> Arc:
        return self._arcs[aid]

    def is_node(self, eid: str) -> bool:
        return eid in self._nodes

    def element(self, eid: str) -> Element:
        if eid in self._nodes:
            return self._nodes[eid]
        if eid in self._arcs:
            return self._arcs[eid]
        raise KeyError(eid)

    def element_ids(self) -> list[str]:
        return list(self._nodes) + list(self._arcs)

    def out_arcs(self, nid: str) -> Mapping[str, Arc]:
        return self._out[nid]

    def in_arcs(self, nid: str) -> tuple[Arc, ...]:
        return tuple(self._in[nid])

    def child(self, nid: str, feature: str) -> Optional[str]:
        a = self._out[nid].get(feature)
        return a.dst if a is not None else None

    def walk(self, path: Iterable[str], start: Optional[str] = None) -> Optional[str]:
        """Node reached by following ``path`` from ``start`` (default: root)."""
        nid = self._root if start is None else start
        for f in path:
            nid = self.child(nid, f)
            if nid is None:
                return None
        return nid

    def features(self) -> set[str]:
        return {a.feature for a in self._arcs.values()}

    def labels(self) -> set[str]:
        return {n.label for n in self._nodes.values() if n.label is not None}

    # -- derived orders --------------------------------------------------

    def topological_order(self) -> list[str]:
        """Nodes in breadth-first order from the root, features taken in sorted order.

        Every non-root node appears after at least one of its parents.
        """
        if "bfs" not in self._cache:
            seen = {self._root}
            order = [self._root]
            q = deque([self._root])
            while q:
                nid = q.popleft()
                for f in sorted(self._out[nid]):
                    d = self._out[nid][f].dst
                    if d not in seen:
                        seen.add(d)
                        order.append(d)
                        q.append(d)
            self._cache["bfs"] = order
        return self._cache["bfs"]

    def canonical_paths(self) -> dict[str, Path]:
        """Lexicographically least root path of every node."""
        if "cpaths" not in self._cache:
            indeg = {nid: len(self._in[nid]) for nid in self._nodes}
            best: dict[str, Path] = {self._root: ()}
            ready = deque([self._root])
            while ready:
                nid = ready.popleft()
                for f, a in self._out[nid].items():
                    cand = best[nid] + (f,)
                    if a.dst not in best or cand < best[a.dst]:
                        best[a.dst] = cand
                    indeg[a.dst] -= 1
                    if indeg[a.dst] == 0:
                        ready.append(a.dst)
            self._cache["cpaths"] = best
        return self._cache["cpaths"]

    def all_paths(self) -> dict[str, list[Path]]:
        """Every root path of every node, sorted."""
        if "apaths" not in self._cache:
            paths: dict[str, list[Path]] = {nid: [] for nid in self._nodes}
            paths[self._root].append(())
            for nid in self.topological_order_strict():
                for f, a in self._out[nid].items():
                    paths[a.dst].extend(p + (f,) for p in paths[nid])
            for v in paths.values():
                v.sort()
            self._cache["apaths"] = paths
        return self._cache["apaths"]

    def topological_order_strict(self) -> list[str]:
        """A topological order (every parent precedes every child)."""
        if "topo" not in self._cache:
            indeg = {nid: len(self._in[nid]) for nid in self._nodes}
            order = []
            ready = deque([self._root])
            while ready:
                nid = ready.popleft()
                order.append(nid)
                for f in sorted(self._out[nid]):
                    d = self._out[nid][f].dst
                    indeg[d] -= 1
                    if indeg[d] == 0:
                        ready.append(d)
            self._cache["topo"] = order
        return self._cache["topo"]

    # -- derivation ------------------------------------------------------

    def recolor(self, colors: Mapping[str, Color]) -> "Tdag":
        """Copy with the given elements repainted.  Structure is unchanged."""
        for eid in colors:
            if eid not in self:
                raise KeyError(eid)
        nodes = [Node(n.id, Color(colors.get(n.id, n.color)), n.label) for n in self._nodes.values()]
        arcs = [Arc(a.id, a.src, a.feature, a.dst, Color(colors.get(a.id, a.color)))
                for a in self._arcs.values()]
        return Tdag(nodes, arcs, self._root)

    def extended(self, nodes: Iterable[Node] = (), arcs: Iterable[Arc] = ()) -> "Tdag":
        """Copy with extra nodes and arcs appended."""
        return Tdag(list(self._nodes.values()) + list(nodes),
                    list(self._arcs.values()) + list(arcs), self._root)

    def fresh_id(self, stem: str) -> str:
        k = 0
        while f"{stem}{k}" in self:
            k += 1
        return f"{stem}{k}"

    # -- identity --------------------------------------------------------

    def _key(self):
        return (self._root, frozenset(self._nodes.values()), frozenset(self._arcs.values()))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Tdag):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self._key())
        return self._hash

    def __repr__(self) -> str:
        return f"<Tdag root={self._root!r} nodes={len(self._nodes)} arcs={len(self._arcs)}>"


def _as_node(spec) -> Node:
    if isinstance(spec, Node):
        return spec
    nid, color, *rest = spec
    return Node(nid, Color.parse(color), rest[0] if rest else None)


def _as_arc(spec) -> Arc:
    if isinstance(spec, Arc):
        return spec
    if len(spec) == 4:
        src, feature, dst, color = spec
        return Arc(arc_id(src, feature), src, feature, dst, Color.parse(color))
    aid, src, feature, dst, color = spec
    return Arc(aid, src, feature, dst, Color.parse(color))


def build(nodes, arcs, root: str, *, allow_duplicate_features: bool = False) -> Tdag:
    """Build a TDAG from node and arc specs.

    Nodes are :class:`Node` objects or ``(id, color[, label])`` tuples; arcs
    are :class:`Arc` objects or ``(src, feature, dst, color)`` tuples, whose
    id defaults to ``src.feature``.  Colors may be given by name.

    Structural errors raise :class:`BuildError`.  Well-formedness is not
    checked here.  ``allow_duplicate_features`` exists only so that a
    condition-6 violation can be constructed and reported by
    :func:`check_well_formed`.
    """
    return Tdag([_as_node(n) for n in nodes], [_as_arc(a) for a in arcs], root,
                allow_duplicate_features=allow_duplicate_features)


# -- well-formedness ------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    condition: str  # "W1" .. "W6"
    element: str
    message: str

    def __str__(self) -> str:
        return f"{self.condition} {self.element}: {self.message}"


def _reach(t: Tdag, min_color: Color) -> set[str]:
    seen = {t.root}
    stack = [t.root]
    while stack:
        nid = stack.pop()
        for a in t._all_out(nid):
            if a.color >= min_color and t.node(a.dst).color >= min_color and a.dst not in seen:
                seen.add(a.dst)
                stack.append(a.dst)
    return seen


def check_well_formed(t: Tdag) -> list[Violation]:
    """All violations of the six well-formedness conditions, in condition order."""
    if "violations" in t._cache:
        return list(t._cache["violations"])
    out: list[Violation] = []
    if t.node(t.root).color != Color.RED:
        out.append(Violation("W1", t.root, "root is not red"))
    for a in t.arcs:
        if a.color == Color.RED:
            for end in (a.src, a.dst):
                if t.node(end).color != Color.RED:
                    out.append(Violation("W2", a.id, f"red arc touches {t.node(end).color} node {end!r}"))
                    break
    red = _reach(t, Color.RED)
    for n in t.nodes:
        if n.color == Color.RED and n.id != t.root and n.id not in red:
            out.append(Violation("W3", n.id, "red node not reachable through red arcs and nodes"))
    ry = _reach(t, Color.YELLOW)
    for n in t.nodes:
        if n.color == Color.YELLOW and n.id != t.root and n.id not in ry:
            out.append(Violation("W4", n.id, "yellow node not reachable through red/yellow arcs and nodes"))
    for a in t.arcs:
        if a.color == Color.YELLOW:
            for end in (a.src, a.dst):
                if t.node(end).color == Color.GREEN:
                    out.append(Violation("W5", a.id, f"yellow arc touches green node {end!r}"))
                    break
    seen: dict[tuple[str, str], str] = {}
    for a in t.arcs:
        key = (a.src, a.feature)
        if key in seen:
            out.append(Violation("W6", a.id, f"feature {a.feature!r} already leaves {a.src!r} via {seen[key]!r}"))
        else:
            seen[key] = a.id
    t._cache["violations"] = tuple(out)
    return out


def is_well_formed(t: Tdag) -> bool:
    return not check_well_formed(t)


def require_well_formed(*tdags: Tdag) -> None:
    for t in tdags:
        v = check_well_formed(t)
        if v:
            raise IllFormedError(v)


# -- array encoding -------------------------------------------------------


@dataclass
class Encoded:
    order: list[str]  # node ids by encoded index
    tgt: np.ndarray
    acol: np.ndarray
    ncol: np.ndarray
    lab: np.ndarray


def encode(t: Tdag, features: Mapping[str, int], labels: Mapping[str, int]) -> Encoded:
    """Encode ``t`` into kernel arrays over the given feature and label vocabularies."""
    order = t.topological_order()
    pos = {nid: i for i, nid in enumerate(order)}
    n, nf = len(order), len(features)
    tgt = np.full((n, nf), -1, dtype=np.int32)
    acol = np.zeros((n, nf), dtype=np.int8)
    ncol = np.empty(n, dtype=np.int8)
    lab = np.full(n, -1, dtype=np.int32)
    for i, nid in enumerate(order):
        node = t.node(nid)
        ncol[i] = node.color
        if node.label is not None:
            lab[i] = labels[node.label]
        for f, a in t.out_arcs(nid).items():
            tgt[i, features[f]] = pos[a.dst]
            acol[i, features[f]] = a.color
    return Encoded(order, tgt, acol, ncol, lab)


def _vocab(*tdags: Tdag) -> tuple[dict[str, int], dict[str, int], list[str], list[str]]:
    feats = sorted(set().union(*(t.features() for t in tdags))) or ["_"]
    labs = sorted(set().union(*(t.labels() for t in tdags)))
    return {f: i for i, f in enumerate(feats)}, {l: i for i, l in enumerate(labs)}, feats, labs


# -- subsumption ----------------------------------------------------------


def pack(*tdags: Tdag):
    """Encode TDAGs into one kernel batch.  Returns the arrays plus the node orders and vocabularies."""
    fidx, lidx, feats, labs = _vocab(*tdags)
    encs = [encode(t, fidx, lidx) for t in tdags]
    m = max(len(e.order) for e in encs)
    nf = len(feats)
    tgt = np.full((len(encs), m, nf), -1, dtype=np.int32)
    acol = np.zeros((len(encs), m, nf), dtype=np.int8)
    ncol = np.zeros((len(encs), m), dtype=np.int8)
    lab = np.full((len(encs), m), -1, dtype=np.int32)
    nn = np.zeros(len(encs), dtype=np.int32)
    for k, e in enumerate(encs):
        n = len(e.order)
        nn[k] = n
        tgt[k, :n], acol[k, :n], ncol[k, :n], lab[k, :n] = e.tgt, e.acol, e.ncol, e.lab
    return (tgt, acol, ncol, lab, nn), [e.order for e in encs], feats, labs


def subsumes(a: Tdag, b: Tdag) -> bool:
    """True iff ``a`` is at least as general as ``b``.

    There must be a root-preserving map from a's nodes to b's nodes that
    respects features, atom labels and reentrancies, and never maps an element
    onto a weaker color.
    """
    require_well_formed(a, b)
    arrays, _, _, _ = pack(a, b)
    h = np.empty(arrays[0].shape[1], dtype=np.int32)
    return bool(kernels.subsumes_at(*arrays, 0, 1, h))


def iso_equal(a: Tdag, b: Tdag) -> bool:
    """Isomorphism preserving root, features, labels, colors and reentrancies."""
    if len(a.nodes) != len(b.nodes) or len(a.arcs) != len(b.arcs):
        return False
    h = {a.root: b.root}
    used = {b.root}
    stack = [a.root]
    while stack:
        x = stack.pop()
        y = h[x]
        nx, ny = a.node(x), b.node(y)
        if nx.color != ny.color or nx.label != ny.label:
            return False
        ox, oy = a.out_arcs(x), b.out_arcs(y)
        if ox.keys() != oy.keys():
            return False
        for f, ax in ox.items():
            ay = oy[f]
            if ax.color != ay.color:
                return False
            if ax.dst in h:
                if h[ax.dst] != ay.dst:
                    return False
            else:
                if ay.dst in used:
                    return False
                h[ax.dst] = ay.dst
                used.add(ay.dst)
                stack.append(ax.dst)
    return len(h) == len(a.nodes)


# -- unification ----------------------------------------------------------


@dataclass(frozen=True)
class Unified:
    tdag: Tdag
    kind = "unified"


@dataclass(frozen=True)
class Indefinite:
    """Two conflicting green atoms met; the unification should be postponed."""

    atoms: tuple[str, str]
    path: Path
    kind = "indefinite"


@dataclass(frozen=True)
class Failure:
    reason: str
    path: Path = field(default=())
    kind = "failure"


UnifyOutcome = Union[Unified, Indefinite, Failure]


def unify(a: Tdag, b: Tdag) -> UnifyOutcome:
    """Color-extended unification of two well-formed TDAGs at their roots.

    Merged elements take the stronger color.  Conflicting atoms fail unless
    the merged node is green, in which case the outcome is indefinite.
    """
    require_well_formed(a, b)
    arrays, (order_a, order_b), feats, labs = pack(a, b)
    ws = kernels.make_workspace(arrays[0].shape[1], len(feats))
    status = kernels.unify_at(*arrays, 0, 1, ws)
    rep, ftab, fcol, ncol, lab, clash = ws[0], ws[1], ws[2], ws[3], ws[4], ws[5]
    na = len(order_a)
    n = na + len(order_b)
    reps = sorted({int(rep[v]) for v in range(n)})

    def edges(r):
        for f in range(len(feats)):
            t = ftab[r, f]
            if t >= 0:
                yield feats[f], int(rep[t])

    if status == kernels.CYCLE:
        return Failure("cycle", _cycle_path(0, edges))
    paths = _least_paths(0, edges)
    if status in (kernels.LABEL_CLASH, kernels.INDEFINITE):
        want_green = status == kernels.INDEFINITE
        sites = sorted((paths.get(r, ()), r) for r in reps
                       if clash[r] >= 0 and (ncol[r] == Color.GREEN) == want_green)
        path, r = sites[0]
        pair = tuple(sorted((labs[lab[r]], labs[clash[r]])))
        if want_green:
            return Indefinite(pair, path)
        return Failure(f"atom clash {pair[0]} vs {pair[1]}", path)

    ids: dict[int, str] = {}
    used: set[str] = set()
    for r in sorted(reps, key=lambda r: paths[r]):
        base = order_a[r] if r < na else order_b[r - na]
        nid, k = base, 1
        while nid in used:
            nid = f"{base}~{k}"
            k += 1
        used.add(nid)
        ids[r] = nid
    nodes = [Node(ids[r], Color(int(ncol[r])), labs[lab[r]] if lab[r] >= 0 else None) for r in ids]
    arcs = []
    for r in ids:
        for f in range(len(feats)):
            t = ftab[r, f]
            if t >= 0:
                arcs.append(Arc(arc_id(ids[r], feats[f]), ids[r], feats[f], ids[int(rep[t])],
                                Color(int(fcol[r, f]))))
    return Unified(Tdag(nodes, arcs, ids[0]))


def _least_paths(root, edges) -> dict:
    # lexicographically least path to every reachable node; going round a
    # cycle only extends a path, so this terminates on cyclic input too
    best = {root: ()}
    stack = [root]
    while stack:
        x = stack.pop()
        for f, y in edges(x):
            cand = best[x] + (f,)
            if y not in best or cand < best[y]:
                best[y] = cand
                stack.append(y)
    return best


def _cycle_path(root, edges) -> Path:
    state = {root: 1}
    stack = [(root, iter(list(edges(root))), ())]
    while stack:
        x, it, p = stack[-1]
        nxt = next(it, None)
        if nxt is None:
            state[x] = 2
            stack.pop()
            continue
        f, y = nxt
        if state.get(y) == 1:
            return p + (f,)
        if y not in state:
            state[y] = 1
            stack.append((y, iter(list(edges(y))), p + (f,)))
    return ()


# -- cores ----------------------------------------------------------------


def red_core(t: Tdag) -> Tdag:
    """The red nodes and red arcs of ``t`` (t_min)."""
    require_well_formed(t)
    nodes = [n for n in t.nodes if n.color == Color.RED]
    arcs = [a for a in t.arcs if a.color == Color.RED]
    return Tdag(nodes, arcs, t.root)


def saturate(t: Tdag) -> Tdag:
    """``t`` with every node and arc painted red (t_max)."""
    require_well_formed(t)
    return t.recolor({eid: Color.RED for eid in t.element_ids()})


def relabel_canonical(t: Tdag) -> Tdag:
    """Rename nodes ``n0, n1, ...`` in breadth-first order; arcs become ``src.feature``."""
    order = t.topological_order()
    ren = {nid: f"n{i}" for i, nid in enumerate(order)}
    nodes = [Node(ren[nid], t.node(nid).color, t.node(nid).label) for nid in order]
    arcs = [Arc(arc_id(ren[a.src], a.feature), ren[a.src], a.feature, ren[a.dst], a.color)
            for nid in order for f, a in sorted(t.out_arcs(nid).items())]
    return Tdag(nodes, arcs, ren[t.root])


def iter_elements(t: Tdag) -> Iterator[Element]:
    yield from t.nodes
    yield from t.arcs
