import itertools

import pytest
from hypothesis import given, settings

from oracles import fact_subsumes
from tdag_strategies import tdags
from tricolor.core import (
    BuildError, Color, Failure, IllFormedError, Indefinite, Unified, build, check_well_formed, color_subsumes,
    is_well_formed, iso_equal, red_core, relabel_canonical, saturate, subsumes, unify, unify_colors,
)

R, Y, G = Color.RED, Color.YELLOW, Color.GREEN


def chain(*colors_labels, feature="agent"):
    """Red root with a pred arc to a red head, then one arc per (node color, label, arc color)."""
    nodes = [("r", "red"), ("h", "red", "*CALL")]
    arcs = [("r", "pred", "h", "red")]
    for k, (nc, lab, ac) in enumerate(colors_labels):
        nodes.append((f"x{k}", nc, lab))
        arcs.append(("h", f"{feature}{k}" if k else feature, f"x{k}", ac))
    return build(nodes, arcs, "r")


class TestColors:
    def test_parse_and_str(self):
        assert Color.parse("Red") is R
        assert str(Y) == "yellow"
        with pytest.raises(ValueError):
            Color.parse("blue")

    def test_weaker(self):
        assert R.weaker() is Y and Y.weaker() is G
        with pytest.raises(ValueError):
            G.weaker()

    def test_unify_table_is_max(self):
        for a, b in itertools.product(Color, repeat=2):
            assert unify_colors(a, b) == unify_colors(b, a) == max(a, b)

    def test_subsumption_table(self):
        allowed = {G: {G, Y, R}, Y: {Y, R}, R: {R}}
        for a, b in itertools.product(Color, repeat=2):
            assert color_subsumes(a, b) == (b in allowed[a])


class TestBuild:
    def test_single_root(self):
        t = build([("r", "red")], [], "r")
        assert len(t.nodes) == 1 and not t.arcs and is_well_formed(t)

    def test_duplicate_feature(self):
        with pytest.raises(BuildError) as e:
            build([("r", "red"), ("w", "red"), ("x", "red")],
                  [("r.pred", "r", "pred", "w", "red"), ("r.pred2", "r", "pred", "x", "red")], "r")
        assert e.value.element == "r.pred2"

    def test_dangling(self):
        with pytest.raises(BuildError) as e:
            build([("r", "red")], [("r", "pred", "ghost", "red")], "r")
        assert e.value.element == "r.pred"

    def test_cycle(self):
        with pytest.raises(BuildError, match="cycle"):
            build([("r", "red"), ("a", "red"), ("b", "red")],
                  [("r", "f", "a", "red"), ("a", "g", "b", "red"), ("b", "h", "a", "red")], "r")

    def test_unreachable(self):
        with pytest.raises(BuildError):
            build([("r", "red"), ("a", "red")], [], "r")

    def test_labeled_node_may_have_arcs(self, wish):
        wish_node = wish.node(wish.child(wish.root, "pred"))
        assert wish_node.label == "*WISH" and wish.out_arcs(wish_node.id)


class TestWellFormed:
    def test_clean(self):
        t = build([("r", "red"), ("w", "red", "*WISH")], [("r", "pred", "w", "red")], "r")
        assert check_well_formed(t) == []

    def test_red_arc_to_yellow_node(self):
        t = build([("r", "red"), ("w", "yellow")], [("r", "pred", "w", "red")], "r")
        assert [(v.condition, v.element) for v in check_well_formed(t)] == [("W2", "r.pred")]

    def test_yellow_node_behind_green_arc(self):
        t = build([("r", "red"), ("w", "yellow")], [("r", "pred", "w", "green")], "r")
        assert [(v.condition, v.element) for v in check_well_formed(t)] == [("W4", "w")]

    def test_require(self):
        t = build([("r", "green")], [], "r")
        with pytest.raises(IllFormedError):
            subsumes(t, t)


class TestSubsumption:
    def test_green_subsumes_red(self):
        a = chain(("green", "*JOHN", "green"))
        b = chain(("red", "*JOHN", "red"))
        assert subsumes(a, b) and not subsumes(b, a)

    def test_red_does_not_subsume_yellow(self):
        a = chain(("red", "*JOHN", "red"))
        b = chain(("yellow", "*JOHN", "yellow"))
        assert not subsumes(a, b) and subsumes(b, a)

    def test_reentrancy_matters(self):
        shared = build([("r", "red"), ("x", "red", "*J")], [("r", "f", "x", "red"), ("r", "g", "x", "red")], "r")
        split = build([("r", "red"), ("x", "red", "*J"), ("y", "red", "*J")],
                      [("r", "f", "x", "red"), ("r", "g", "y", "red")], "r")
        assert subsumes(split, shared) and not subsumes(shared, split)

    @settings(max_examples=300, deadline=None)
    @given(tdags(max_nodes=5), tdags(max_nodes=5))
    def test_matches_path_fact_oracle(self, a, b):
        assert subsumes(a, b) == fact_subsumes(a, b)

    @settings(max_examples=200, deadline=None)
    @given(tdags())
    def test_reflexive_and_cores(self, t):
        assert subsumes(t, t)
        assert subsumes(red_core(t), t)
        assert subsumes(t, saturate(t))


class TestUnify:
    def test_red_wins(self):
        a = chain(("red", "*JOHN", "red"))
        b = chain(("green", "*JOHN", "green"))
        u = unify(a, b)
        assert isinstance(u, Unified) and iso_equal(u.tdag, a)

    def test_yellow_with_green(self):
        a = chain(("yellow", "singular", "yellow"), feature="num")
        b = chain(("green", "singular", "green"), feature="num")
        u = unify(a, b)
        assert isinstance(u, Unified)
        x = u.tdag.walk(["pred", "num"])
        assert u.tdag.node(x).color is Y

    def test_green_clash_is_indefinite(self):
        a = chain(("green", "*SINGULAR", "green"), feature="num")
        b = chain(("green", "*PLURAL", "green"), feature="num")
        u = unify(a, b)
        assert isinstance(u, Indefinite)
        assert u.atoms == ("*PLURAL", "*SINGULAR") and u.path == ("pred", "num")

    @pytest.mark.parametrize("other", ["yellow", "red"])
    def test_clash_with_stronger_side_fails(self, other):
        a = chain(("green", "*SINGULAR", "green"), feature="num")
        b = chain((other, "*PLURAL", other), feature="num")
        u = unify(a, b)
        assert isinstance(u, Failure) and u.path == ("pred", "num")

    def test_cycle_failure(self):
        a = build([("r", "red"), ("x", "red")], [("r", "f", "x", "red")], "r")
        b = build([("r", "red"), ("x", "red"), ("y", "red")],
                  [("r", "f", "x", "red"), ("r", "h", "y", "red"), ("y", "k", "x", "red")], "r")
        c = build([("r", "red"), ("x", "red"), ("y", "red")],
                  [("r", "f", "y", "red"), ("r", "h", "y", "red"), ("y", "k", "x", "red")], "r")
        assert isinstance(unify(a, b), Unified)
        u = unify(b, c)
        assert isinstance(u, Failure) and u.reason == "cycle"

    @settings(max_examples=200, deadline=None)
    @given(tdags(max_nodes=4), tdags(max_nodes=4))
    def test_upper_bound_commutative_well_formed(self, a, b):
        u, v = unify(a, b), unify(b, a)
        assert type(u) is type(v)
        if isinstance(u, Unified):
            assert is_well_formed(u.tdag)
            assert iso_equal(u.tdag, v.tdag)
            assert subsumes(a, u.tdag) and subsumes(b, u.tdag)

    @settings(max_examples=150, deadline=None)
    @given(tdags(max_nodes=4))
    def test_unify_with_subsumer_is_identity(self, t):
        core = red_core(t)
        u = unify(core, t)
        assert isinstance(u, Unified) and iso_equal(u.tdag, t)


class TestCoresAndIso:
    def test_red_core_of_green_child(self):
        t = build([("r", "red"), ("x", "green")], [("r", "f", "x", "green")], "r")
        assert len(red_core(t).nodes) == 1

    def test_saturate_fixed_point(self, wish):
        assert iso_equal(saturate(wish), wish)
        assert iso_equal(saturate(red_core(wish)), red_core(wish))

    def test_boston_red_core(self, boston):
        core = red_core(boston)
        labels = {n.label for n in core.nodes}
        assert labels == {None, "*CALL", "*OFFICE", "*BOSTON", "*PAST"}
        assert {a.feature for a in core.arcs} == {"pred", "agent", "tense", "mod"}

    def test_renaming_and_recoloring(self, wish):
        assert iso_equal(wish, relabel_canonical(wish))
        arc = next(a for a in wish.arcs if a.color is R and a.dst != wish.root)
        changed = wish.recolor({wish.root: R, arc.id: G})
        assert not iso_equal(wish, changed)
