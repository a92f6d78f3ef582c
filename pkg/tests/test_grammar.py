import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import oracle_parses, path_signature, tdag_of_tree
from tricolor.core import Color, is_well_formed
from tricolor.grammar import (
    AnalysisError, GrammarError, InstantiationError, analyze, analyze_all, instantiate_lexical, parse_grammar,
    serialize_grammar,
)

WISHED = """\
rule wished V -> "wished"
  <V cat> = v
  <V form> = past
  <V subj cat> = np
  <V obj cat> = v
  <V obj form> = infinitival
  <V pred> = *WISH
  <V pred agent> = <V subj pred>
  <V pred theme> = <V obj pred>
  <V pred theme agent> = <V subj pred>
start V
"""


class TestParse:
    def test_wished_rule(self):
        g = parse_grammar(WISHED)
        (r,) = g.rules
        assert r.is_lexical and r.word == "wished" and len(r.equations) == 9
        sem = [str(e) for e in r.semantic_equations()]
        assert sem == ["<V pred> = *WISH", "<V pred agent> = <V subj pred>",
                       "<V pred theme> = <V obj pred>", "<V pred theme agent> = <V subj pred>"]

    def test_empty_file(self):
        with pytest.raises(GrammarError, match="no start rule"):
            parse_grammar("")

    def test_unknown_symbol_named(self):
        with pytest.raises(GrammarError, match="'X'") as e:
            parse_grammar('rule a V -> "a"\n  <X pred> = *A\nstart V\n')
        assert e.value.line == 2

    @pytest.mark.parametrize("text,line,needle", [
        ('rule a V -> "a"\n  <V pred = *A\nstart V\n', 2, "malformed"),
        ('rule a V -> "a"\nrule a V -> "b"\nstart V\n', 2, "duplicate"),
        ('rule s S -> A B C\nstart S\n', 1, "one or two"),
        ('  <S a> = b\n', 1, "outside"),
        ('rule s S -> NP NP\nstart S\n', 1, "distinct"),
        ('rule a V -> "a"\nstart V\nstart V\n', 3, "twice"),
    ])
    def test_errors_carry_line(self, text, line, needle):
        with pytest.raises(GrammarError, match=needle) as e:
            parse_grammar(text, "g.patr")
        assert e.value.line == line and str(e.value).startswith(f"g.patr:{line}:")

    def test_start_needs_a_rule(self):
        with pytest.raises(GrammarError, match="start symbol"):
            parse_grammar('rule a V -> "a"\nstart S\n')

    def test_comments_and_blank_lines(self):
        g = parse_grammar('# c\n\nrule a V -> "a"  # word\n  <V pred> = *A # atom\n\nstart V\n')
        assert str(g.rules[0].equations[0]) == "<V pred> = *A"

    def test_round_trip_fixtures(self, en, ja):
        for g in (en, ja, parse_grammar(WISHED)):
            assert parse_grammar(serialize_grammar(g)) == g


_sym = st.sampled_from(["A", "B", "C"])
_feat = st.sampled_from(["pred", "f", "g"])


@st.composite
def grammars(draw):
    rules = []
    for k in range(draw(st.integers(1, 4))):
        lhs = draw(_sym)
        if draw(st.booleans()):
            syms, body = (lhs,), '"w%d"' % k
        else:
            rhs = tuple(f"{draw(_sym)}_{j + 1}" for j in range(draw(st.integers(1, 2))))
            syms, body = (lhs,) + rhs, " ".join(rhs)
        eqs = []
        for _ in range(draw(st.integers(0, 3))):
            lp = (draw(st.sampled_from(syms)),) + tuple(draw(st.lists(_feat, min_size=1, max_size=3)))
            if draw(st.booleans()):
                eqs.append(f"  <{' '.join(lp)}> = *{draw(st.sampled_from('XY'))}")
            else:
                rp = (draw(st.sampled_from(syms)),) + tuple(draw(st.lists(_feat, max_size=2)))
                eqs.append(f"  <{' '.join(lp)}> = <{' '.join(rp)}>")
        rules.append(f"rule r{k} {lhs} -> {body}\n" + "".join(e + "\n" for e in eqs))
    start = draw(st.sampled_from(sorted({r.split()[2] for r in rules})))
    return "".join(rules) + f"start {start}\n"


@settings(max_examples=200, deadline=None)
@given(grammars())
def test_serialize_round_trip(text):
    g = parse_grammar(text)
    assert parse_grammar(serialize_grammar(g)) == g


class TestInstantiate:
    def test_wished_fragment(self):
        frag = instantiate_lexical(parse_grammar(WISHED).rules[0])
        t = frag.tdag
        assert all(e.color is Color.RED for e in list(t.nodes) + list(t.arcs))
        w = t.walk(["pred"])
        assert t.node(w).label == "*WISH"
        assert t.walk(["pred", "agent"]) == t.walk(["pred", "theme", "agent"])
        assert len(frag.bindings) == 5
        assert frag.anchors[("V", "pred", "agent")] == frag.anchors[("V", "subj", "pred")]

    def test_conflict(self):
        g = parse_grammar('rule a V -> "a"\n  <V pred> = *A\n  <V pred> = *B\nstart V\n')
        with pytest.raises(InstantiationError):
            instantiate_lexical(g.rules[0])

    def test_no_semantics(self):
        frag = instantiate_lexical(parse_grammar('rule a V -> "a"\n  <V cat> = v\nstart V\n').rules[0])
        assert len(frag.tdag.nodes) == 1 and not frag.tdag.arcs

    def test_phrasal_rejected(self, en):
        with pytest.raises(ValueError):
            instantiate_lexical(en.rule("s"))

    def test_all_fixture_lexicon(self, en, ja):
        for g in (en, ja):
            for r in g.rules:
                if not r.is_lexical:
                    continue
                frag = instantiate_lexical(r)
                t = frag.tdag
                assert is_well_formed(t)
                assert all(e.color is Color.RED for e in list(t.nodes) + list(t.arcs))
                for e in r.semantic_equations():
                    if not e.is_atomic:
                        assert frag.anchors[e.lhs] == frag.anchors[e.rhs] is not None


class TestAnalyze:
    def test_wish(self, en, wish):
        a = analyze("John wished to walk".split(), en)
        t = a.tdag
        assert t.walk(["pred", "agent"]) == t.walk(["pred", "theme", "agent"])
        assert path_signature(t) == path_signature(wish)
        assert a.parses == 1

    def test_boston_red(self, en):
        a = analyze("The Boston office called".split(), en)
        assert a.tdag.node(a.tdag.walk(["pred"])).label == "*CALL"
        assert all(e.color is Color.RED for e in list(a.tdag.nodes) + list(a.tdag.arcs))

    def test_unknown_token(self, en):
        with pytest.raises(AnalysisError, match="unknown token 'Mary'"):
            analyze(["Mary", "called"], en)

    def test_no_parse_names_longest_edge(self, en):
        with pytest.raises(AnalysisError, match="longest chart edge"):
            analyze("called John".split(), en)

    def test_empty(self, en):
        with pytest.raises(AnalysisError):
            analyze([], en)

    def test_ambiguity_count_and_order(self):
        g = parse_grammar(
            'rule s S -> A B\n  <S pred> = <A pred>\n'
            'rule s2 S -> A B\n  <S pred> = <B pred>\n'
            'rule a A -> "a"\n  <A pred> = *A\n'
            'rule b B -> "b"\n  <B pred> = *B\n'
            'start S\n')
        a = analyze(["a", "b"], g)
        assert a.parses == 2 and a.tree.rule == "s"
        assert a.tdag.node(a.tdag.walk(["pred"])).label == "*A"

    @pytest.mark.parametrize("sentence", ["John wished to walk", "The Boston office called",
                                          "the office called", "John called", "Boston called"])
    def test_parses_match_exhaustive_enumeration(self, en, sentence):
        tokens = sentence.split()
        oracle = oracle_parses(tokens, en, 7)
        try:
            found = analyze_all(tokens, en)
        except AnalysisError:
            found = []
        assert {tr for tr, _ in found} == set(oracle)
        for tr, t in found:
            assert path_signature(t) == tdag_of_tree(tr, en)
