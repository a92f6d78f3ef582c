"""Exhaustive lattice checks on the small universe; the <=4 run lives in the acceptance suite."""

import numpy as np
import pytest

from oracles import fact_subsumes
from tricolor import lattice
from tricolor.core import iso_equal, is_well_formed
from tricolor.universe import encode_batch, enumerate_shapes, enumerate_tdags


@pytest.fixture(scope="module")
def small():
    tdags = list(enumerate_tdags(3))
    batch = encode_batch(tdags)
    return tdags, batch, lattice.subsumption_matrix(batch)


def test_small_universe_by_hand():
    assert sorted(s for _, s in enumerate_shapes(2)) == sorted([
        (), ((0, "f", 1),), ((0, "g", 1),), ((0, "f", 1), (0, "g", 1))])
    # 1 node: 3 labels.  One arc: 3 colorings x 3 leaf labels, per feature.
    # Two arcs to one child: red child 5 (at least one red arc), yellow 3 (arcs
    # yellow/green, at least one yellow), green 1; x 3 labels.
    assert len(list(enumerate_tdags(2))) == 3 + 2 * 9 + 9 * 3


def test_all_well_formed_and_distinct(small):
    tdags, _, _ = small
    assert len(tdags) == 1059
    assert all(is_well_formed(t) for t in tdags)
    for i in range(0, len(tdags), 37):
        for j in range(len(tdags)):
            if i != j:
                assert not iso_equal(tdags[i], tdags[j])


def test_matrix_matches_fact_oracle(small):
    tdags, _, rows = small
    rng = np.random.default_rng(7)
    for i, j in rng.integers(0, len(tdags), size=(3000, 2)):
        assert lattice.bit(rows, i, j) == fact_subsumes(tdags[i], tdags[j])


def test_order_laws(small):
    _, batch, rows = small
    rep = lattice.check_order_laws(batch, rows, 3)
    assert rep.ok, rep


def test_unification_is_least_upper_bound(small):
    _, batch, rows = small
    rep = lattice.check_joins(batch, rows, 3)
    assert rep.ok, rep
    assert rep.pairs == 1059 * 1060 // 2
    assert rep.unified and rep.indefinite and rep.clashes and rep.cycles
