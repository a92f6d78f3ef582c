"""Constraint sets of TDAGs and the source/target partition.

A TDAG is read as a set of constraints, each anchored at canonical root
paths:

* ``arc``: the node at path p has an arc with feature f;
* ``atom``: the node at path p carries atom X;
* ``reentrancy``: paths p and q reach one node (every pair of distinct
  root paths, each written as given, not canonicalized).

Comparing a source against a target sorts every source constraint into
C0 (the target has it too, in any color), C- (the target binds the same
path to another atom) or C+ (absent from the target but not contradicted).
Target constraints the source lacks form C_new.

Membership is decided on interned bitsets by the same kernel that checks
the partition laws over whole enumerations.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from tricolor import kernels
from tricolor.core import Color, Tdag, require_well_formed

Path = tuple[str, ...]

ARC = "arc"
ATOM = "atom"
REENTRANCY = "reentrancy"


@dataclass(frozen=True, order=True)
class Constraint:
    kind: str
    anchor: tuple[Path, ...]
    payload: Optional[str]
    strength: Color

    @property
    def key(self) -> tuple:
        """Identity for set membership; strength does not count."""
        return (self.kind, self.anchor, self.payload)

    def __str__(self) -> str:
        paths = " = ".join(_fmt(p) for p in self.anchor)
        tail = f" {self.payload}" if self.payload is not None else ""
        return f"{self.kind} {paths}{tail} [{self.strength}]"

    def to_json(self) -> dict:
        return {"kind": self.kind, "anchor": [list(p) for p in self.anchor],
                "payload": self.payload, "strength": str(self.strength)}


def _fmt(p: Path) -> str:
    return "<" + " ".join(p) + ">"


class Verdict(enum.Enum):
    FULLY_INTERLINGUAL = "FullyInterlingual"
    UNDER_GENERATED = "UnderGenerated"
    OVER_GENERATED = "OverGenerated"
    INCONSISTENT = "Inconsistent"
    MIXED = "Mixed"

    def __str__(self) -> str:
        return self.value


_VERDICTS = {
    kernels.VERDICT_FULL: Verdict.FULLY_INTERLINGUAL,
    kernels.VERDICT_UNDER: Verdict.UNDER_GENERATED,
    kernels.VERDICT_OVER: Verdict.OVER_GENERATED,
    kernels.VERDICT_INCONSISTENT: Verdict.INCONSISTENT,
    kernels.VERDICT_MIXED: Verdict.MIXED,
}


def verdict_for(c_minus: int, c_plus: int, c_new: int) -> Verdict:
    return _VERDICTS[kernels.verdict_code(bool(c_minus), bool(c_plus), bool(c_new))]


@dataclass(frozen=True)
class PartitionReport:
    c0: frozenset
    c_plus: frozenset
    c_minus: frozenset
    c_new: frozenset
    verdict: Verdict

    def to_json(self) -> dict:
        def dump(cs):
            return [c.to_json() for c in sorted(cs)]
        return {"verdict": str(self.verdict), "c0": dump(self.c0), "c_plus": dump(self.c_plus),
                "c_minus": dump(self.c_minus), "c_new": dump(self.c_new)}

    def format(self) -> str:
        lines = [f"verdict: {self.verdict}"]
        for name, cs in (("C0", self.c0), ("C+", self.c_plus), ("C-", self.c_minus), ("C_new", self.c_new)):
            lines.append(f"{name} ({len(cs)})")
            lines.extend(f"  {c}" for c in sorted(cs))
        return "\n".join(lines) + "\n"


def extract_constraints(t: Tdag) -> frozenset[Constraint]:
    """Arc, atom and reentrancy constraints of ``t``."""
    require_well_formed(t)
    return _extract(t)


def _extract(t: Tdag) -> frozenset[Constraint]:
    cpaths = t.canonical_paths()
    apaths = t.all_paths()
    out = []
    for n in t.nodes:
        p = cpaths[n.id]
        if n.label is not None:
            out.append(Constraint(ATOM, (p,), n.label, n.color))
        ps = apaths[n.id]
        for i in range(len(ps)):
            for j in range(i + 1, len(ps)):
                out.append(Constraint(REENTRANCY, (ps[i], ps[j]), None, n.color))
    for a in t.arcs:
        out.append(Constraint(ARC, (cpaths[a.src],), a.feature, a.color))
    return frozenset(out)


class ConstraintIndex:
    """Interns constraint keys as bit positions."""

    def __init__(self, keys: Iterable[tuple]):
        self.keys = sorted(set(keys))
        self.position = {k: i for i, k in enumerate(self.keys)}
        self.words = max(1, (len(self.keys) + 63) // 64)
        self._atoms_at: dict[Path, list[tuple[str, int]]] = {}
        for k, i in self.position.items():
            if k[0] == ATOM:
                self._atoms_at.setdefault(k[1][0], []).append((k[2], i))

    def bits(self, keys: Iterable[tuple]) -> np.ndarray:
        out = np.zeros(self.words, dtype=np.uint64)
        for k in keys:
            i = self.position[k]
            out[i >> 6] |= np.uint64(1 << (i & 63))
        return out

    def violations(self, t: Tdag) -> np.ndarray:
        """Atom bindings in the index that ``t`` contradicts at some root path."""
        out = np.zeros(self.words, dtype=np.uint64)
        for nid, paths in t.all_paths().items():
            label = t.node(nid).label
            if label is None:
                continue
            for p in paths:
                for atom, i in self._atoms_at.get(p, ()):
                    if atom != label:
                        out[i >> 6] |= np.uint64(1 << (i & 63))
        return out

    def decode(self, mask: np.ndarray) -> list[tuple]:
        return [k for i, k in enumerate(self.keys) if int(mask[i >> 6]) >> (i & 63) & 1]


def classify(source: Tdag, target: Tdag) -> PartitionReport:
    cs = extract_constraints(source)
    ct = extract_constraints(target)
    index = ConstraintIndex([c.key for c in cs] + [c.key for c in ct])
    out = np.zeros((4, index.words), dtype=np.uint64)
    kernels.partition_masks(index.bits(c.key for c in cs), index.violations(target),
                            index.bits(c.key for c in ct), out)
    sets = [set(index.decode(out[r])) for r in range(4)]
    c0 = frozenset(c for c in cs if c.key in sets[0])
    c_minus = frozenset(c for c in cs if c.key in sets[1])
    c_plus = frozenset(c for c in cs if c.key in sets[2])
    c_new = frozenset(c for c in ct if c.key in sets[3])
    return PartitionReport(c0, c_plus, c_minus, c_new, verdict_for(len(c_minus), len(c_plus), len(c_new)))


def score(report: PartitionReport) -> tuple[int, int, int]:
    """Cost tuple, smaller is better: inconsistency, then under-, then over-generation."""
    return (len(report.c_minus), len(report.c_plus), len(report.c_new))


@dataclass(frozen=True)
class PartitionLawReport:
    pairs: int
    verdicts: dict
    overlaps: int
    union_failures: int
    target_failures: int
    self_failures: int
    first_failure: Optional[tuple]
    seconds: float

    @property
    def ok(self) -> bool:
        return not (self.overlaps or self.union_failures or self.target_failures or self.self_failures)


def constraint_bitsets(tdags: Sequence[Tdag]) -> tuple[ConstraintIndex, np.ndarray, np.ndarray]:
    """Shared index plus constraint and violation bitsets for every TDAG."""
    keysets = [[c.key for c in _extract(t)] for t in tdags]
    index = ConstraintIndex(k for ks in keysets for k in ks)
    S = np.zeros((len(tdags), index.words), dtype=np.uint64)
    V = np.zeros_like(S)
    for i, (t, ks) in enumerate(zip(tdags, keysets)):
        S[i] = index.bits(ks)
        V[i] = index.violations(t)
    return index, S, V


def check_partition_laws(S: np.ndarray, V: np.ndarray, sources: Optional[tuple[int, int]] = None) -> PartitionLawReport:
    """Partition laws over every ordered (source, target) pair of the bitset rows."""
    import time

    start = time.perf_counter()
    lo, hi = sources or (0, S.shape[0])
    verdicts = np.zeros(5, dtype=np.int64)
    failures = np.zeros(4, dtype=np.int64)
    first = np.full(3, -1, dtype=np.int64)
    kernels.partition_laws(S, V, lo, hi, verdicts, failures, first)
    ff = tuple(int(x) for x in first) if failures.sum() else None
    return PartitionLawReport(int(verdicts.sum()), {str(_VERDICTS[k]): int(v) for k, v in enumerate(verdicts)},
                              int(failures[0]), int(failures[1]), int(failures[2]), int(failures[3]),
                              ff, time.perf_counter() - start)
