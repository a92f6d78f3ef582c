"""Exhaustive enumeration of small well-formed TDAGs.

Used for lattice-law checks and benchmarks.  Shapes are enumerated up to
isomorphism (a rooted graph with functional features has no nontrivial
automorphisms, so distinct colorings of one canonical shape are distinct
TDAGs).
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from tricolor.core import Arc, Color, Node, Tdag, arc_id, encode

Shape = tuple  # sorted tuple of (src, feature, dst) over nodes 0..n-1


def enumerate_shapes(max_nodes: int, features: Sequence[str] = ("f", "g")) -> list[tuple[int, Shape]]:
    """All rooted DAG shapes with at most ``max_nodes`` nodes, numbered in BFS order."""
    features = sorted(features)
    out: list[tuple[int, Shape]] = []
    for n in range(1, max_nodes + 1):
        seen: set[Shape] = set()
        slots = [(i, f) for i in range(n) for f in features]
        for targets in itertools.product(range(-1, n), repeat=len(slots)):
            arcs = [(i, f, t) for (i, f), t in zip(slots, targets) if t >= 0]
            if any(i == t for i, _, t in arcs):
                continue
            adj: dict[int, list] = {i: [] for i in range(n)}
            for i, f, t in arcs:
                adj[i].append((f, t))
            idx = {0: 0}
            q = deque([0])
            while q:
                x = q.popleft()
                for f, t in sorted(adj[x]):
                    if t not in idx:
                        idx[t] = len(idx)
                        q.append(t)
            if len(idx) != n or not _acyclic(n, adj):
                continue
            key = tuple(sorted((idx[i], f, idx[t]) for i, f, t in arcs))
            if key not in seen:
                seen.add(key)
                out.append((n, key))
    return out


def _acyclic(n: int, adj) -> bool:
    indeg = [0] * n
    for i in adj:
        for _, t in adj[i]:
            indeg[t] += 1
    ready = [i for i in range(n) if indeg[i] == 0]
    done = 0
    while ready:
        x = ready.pop()
        done += 1
        for _, t in adj[x]:
            indeg[t] -= 1
            if indeg[t] == 0:
                ready.append(t)
    return done == n


def _colorings(n: int, shape: Shape):
    """Well-formed (node colors, arc colors) assignments for one shape."""
    for rest in itertools.product((0, 1, 2), repeat=n - 1):
        nc = (2,) + rest
        choices = []
        for i, _, t in shape:
            lo = min(nc[i], nc[t])
            # red arcs need red ends, yellow arcs need non-green ends
            choices.append(range(lo + 1))
        for ac in itertools.product(*choices):
            if _reachable_ok(n, shape, nc, ac):
                yield nc, ac


def _reachable_ok(n, shape, nc, ac) -> bool:
    for level in (2, 1):
        reach = {0}
        changed = True
        while changed:
            changed = False
            for k, (i, _, t) in enumerate(shape):
                if i in reach and t not in reach and ac[k] >= level and nc[t] >= level:
                    reach.add(t)
                    changed = True
        for v in range(n):
            if nc[v] == level and v not in reach:
                return False
    return True


def enumerate_tdags(max_nodes: int, features: Sequence[str] = ("f", "g"),
                    atoms: Sequence[str] = ("A", "B"), labels_on: str = "leaves") -> Iterator[Tdag]:
    """Every well-formed TDAG up to isomorphism within the given bounds.

    ``labels_on`` is ``"leaves"`` (atoms only on nodes without outgoing arcs)
    or ``"all"``.
    """
    if labels_on not in ("leaves", "all"):
        raise ValueError("labels_on must be 'leaves' or 'all'")
    for n, shape in enumerate_shapes(max_nodes, features):
        inner = {i for i, _, _ in shape}
        slots = [((None,) + tuple(atoms)) if (labels_on == "all" or v not in inner) else (None,)
                 for v in range(n)]
        for nc, ac in _colorings(n, shape):
            for labels in itertools.product(*slots):
                nodes = [Node(f"n{v}", Color(nc[v]), labels[v]) for v in range(n)]
                arcs = [Arc(arc_id(f"n{i}", f), f"n{i}", f, f"n{t}", Color(ac[k]))
                        for k, (i, f, t) in enumerate(shape)]
                yield Tdag(nodes, arcs, "n0")


@dataclass
class Batch:
    """Padded kernel arrays for a list of TDAGs over a shared vocabulary."""

    tdags: list
    features: list
    atoms: list
    tgt: np.ndarray   # int32[N, max_nodes, F]
    acol: np.ndarray  # int8[N, max_nodes, F]
    ncol: np.ndarray  # int8[N, max_nodes]
    lab: np.ndarray   # int32[N, max_nodes]
    nn: np.ndarray    # int32[N] node counts


def encode_batch(tdags: Sequence[Tdag]) -> Batch:
    tdags = list(tdags)
    feats = sorted(set().union(*(t.features() for t in tdags))) or ["_"]
    atoms = sorted(set().union(*(t.labels() for t in tdags)))
    fidx = {f: i for i, f in enumerate(feats)}
    lidx = {a: i for i, a in enumerate(atoms)}
    m = max(len(t.nodes) for t in tdags)
    N = len(tdags)
    tgt = np.full((N, m, len(feats)), -1, dtype=np.int32)
    acol = np.zeros((N, m, len(feats)), dtype=np.int8)
    ncol = np.zeros((N, m), dtype=np.int8)
    lab = np.full((N, m), -1, dtype=np.int32)
    nn = np.zeros(N, dtype=np.int32)
    for k, t in enumerate(tdags):
        e = encode(t, fidx, lidx)
        n = len(e.order)
        nn[k] = n
        tgt[k, :n] = e.tgt
        acol[k, :n] = e.acol
        ncol[k, :n] = e.ncol
        lab[k, :n] = e.lab
    return Batch(tdags, feats, atoms, tgt, acol, ncol, lab, nn)
