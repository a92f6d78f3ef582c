"""Exhaustive checks of the subsumption order and of unification as join.

Everything here runs over a :class:`~tricolor.universe.Batch` of pairwise
non-isomorphic TDAGs, normally the full enumeration of small well-formed
TDAGs.  The subsumption relation is held as a bit matrix (bit ``j`` of row
``i`` set iff item ``i`` subsumes item ``j``), so each row is the set of upper
bounds of an item.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from tricolor import kernels
from tricolor.universe import Batch

JOIN_FAILURES = {
    kernels.JOIN_NOT_UPPER: "unifier does not subsume-above both inputs",
    kernels.JOIN_NOT_LEAST: "an upper bound exists that the unifier does not subsume",
    kernels.JOIN_MISSED_BOUND: "unification failed although an upper bound exists",
    kernels.JOIN_ILL_FORMED: "unifier is ill-formed",
    kernels.JOIN_COMPARABLE_MISMATCH: "unifier of comparable inputs is not the larger input",
}


def _arrays(batch: Batch):
    return batch.tgt, batch.acol, batch.ncol, batch.lab, batch.nn


def subsumption_matrix(batch: Batch) -> np.ndarray:
    n = len(batch.nn)
    rows = np.zeros((n, (n + 63) // 64), dtype=np.uint64)
    kernels.subsumption_bits(*_arrays(batch), rows)
    return rows


def bit(rows: np.ndarray, i: int, j: int) -> bool:
    j = int(j)
    return bool((int(rows[i, j >> 6]) >> (j & 63)) & 1)


def upper_bound_lists(rows: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = rows.shape[0]
    total = int(np.unpackbits(rows.view(np.uint8)).sum())
    indptr = np.zeros(n + 1, dtype=np.int64)
    indices = np.empty(total, dtype=np.int32)
    kernels.bits_to_lists(rows, n, indptr, indices)
    return indptr, indices


def batch_keys(batch: Batch, max_nodes: int) -> np.ndarray:
    """Injective integer key per item, so items can be looked up by structure."""
    n_labels = len(batch.atoms)
    nf = batch.tgt.shape[2]
    radix = 3 * (n_labels + 1) * ((max_nodes + 1) * 3) ** nf
    if (max_nodes + 1) * radix ** max_nodes >= 2 ** 63:
        raise ValueError("universe too large for 63-bit structure keys")
    keys = np.empty(len(batch.nn), dtype=np.int64)
    kernels.batch_keys(*_arrays(batch), max_nodes, n_labels, keys)
    return keys


@dataclass
class OrderReport:
    size: int
    non_reflexive: int
    antisymmetry_failures: int
    transitivity_failures: int
    duplicate_items: int
    seconds: float

    @property
    def ok(self) -> bool:
        return not (self.non_reflexive or self.antisymmetry_failures
                    or self.transitivity_failures or self.duplicate_items)


def check_order_laws(batch: Batch, rows: np.ndarray, max_nodes: int) -> OrderReport:
    """Reflexivity, antisymmetry and transitivity of ``rows``.

    Items are pairwise non-isomorphic (checked through their structure keys),
    so any mutual pair i != j is an antisymmetry failure.
    """
    start = time.perf_counter()
    n = rows.shape[0]
    keys = batch_keys(batch, max_nodes)
    dup = n - len(np.unique(keys))
    indptr, indices = upper_bound_lists(rows)
    out = np.zeros(3, dtype=np.int64)
    kernels.order_law_violations(rows, n, indptr, indices, out)
    return OrderReport(n, int(out[0]), int(out[1]), int(out[2]), dup, time.perf_counter() - start)


@dataclass
class JoinReport:
    pairs: int
    unified: int
    indefinite: int
    clashes: int
    cycles: int
    failures: int
    first_failure: tuple | None
    seconds: float
    notes: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.failures == 0


def check_joins(batch: Batch, rows: np.ndarray, max_nodes: int, rows_range: tuple | None = None) -> JoinReport:
    """Unification is the least upper bound, for every unordered pair of items.

    Failed and indefinite unifications must have no upper bound in the
    batch.  A unifier outside the batch (more nodes, or an atom on an inner
    node) is checked directly against every common upper bound.
    """
    start = time.perf_counter()
    n = rows.shape[0]
    keys = batch_keys(batch, max_nodes)
    order = np.argsort(keys, kind="stable")
    indptr, indices = upper_bound_lists(rows)
    lo, hi = rows_range or (0, n)
    counts = np.zeros(5, dtype=np.int64)
    first = np.full(3, -1, dtype=np.int64)
    kernels.check_joins(*_arrays(batch), keys[order], order.astype(np.int64), rows, indptr, indices,
                        max_nodes, len(batch.atoms), lo, hi, counts, first)
    ff = None
    if counts[4]:
        ff = (int(first[0]), int(first[1]), JOIN_FAILURES[int(first[2])])
    return JoinReport(int(counts[:4].sum()), int(counts[0]), int(counts[1]), int(counts[2]),
                      int(counts[3]), int(counts[4]), ff, time.perf_counter() - start)
