import pytest
from hypothesis import given, settings, strategies as st

from amalgam.dsl import parse_equation, parse_sentence, parse_theory
from amalgam.errors import ArityMismatch, DslSyntaxError, UnknownSymbol
from amalgam.logic import PropertyAtom, classify_axiom, is_linear


def test_poset_theory_slash_separated():
    th = parse_theory("relation le : 2 / property transitive(le) reflexive(le) antisymmetric(le)")
    assert {a.kind for a in th.atoms} == {"transitive", "reflexive", "antisymmetric"}
    assert dict(th.signature.relations) == {"le": 2}


def test_maltsev_equations_are_linear(maltsev_th):
    assert len(maltsev_th.equations) == 2
    assert all(is_linear(e) for e in maltsev_th.equations)
    assert not maltsev_th.sentences


def test_two_universal_variables_parse_as_general_universal():
    th = parse_theory("relation R : 1\nrelation S : 1\naxiom forall x y . R(x) -> S(y)")
    (ax,) = th.sentences
    assert not ax.is_form_41
    assert classify_axiom(ax).tag == "general-universal"


def test_theory_header_and_comments():
    th = parse_theory("theory demo  # a name\n# only a comment\nconstant k\nfunction f : 1\n"
                      "axiom forall x . f(x) = k")
    assert th.name == "demo"
    assert th.signature.constants == frozenset({"k"})


def test_nonlinear_equation_becomes_sentence():
    th = parse_theory("function f : 1\nfunction g : 1\nequation f(g(x)) = x")
    assert not th.equations and len(th.sentences) == 1


@pytest.mark.parametrize("text,line,col", [
    ("relation le : 2\naxiom forall x . le(x x)", 2, 23),
    ("relation le 2", 1, 13),
    ("function f : 1\nequation f(x) = = x", 2, 17),
])
def test_syntax_errors_carry_position(text, line, col):
    with pytest.raises(DslSyntaxError) as info:
        parse_theory(text)
    assert (info.value.line, info.value.col) == (line, col)


def test_unknown_symbol():
    with pytest.raises(UnknownSymbol):
        parse_theory("relation le : 2\naxiom forall x . lt(x, x)")


def test_arity_mismatch():
    with pytest.raises(ArityMismatch):
        parse_theory("relation le : 2\naxiom forall x . le(x)")
    with pytest.raises(ArityMismatch):
        parse_theory("relation U : 1\nproperty transitive(U)")


def test_property_arguments():
    th = parse_theory("relation U : 1\nproperty count_leq(U, !U), card_lt(3)")
    assert th.atoms == (PropertyAtom("count_leq", ("U", "!U")), PropertyAtom("card_lt", (3,)))


def test_precedence():
    th = parse_theory("relation P : 1\nrelation Q : 1\nrelation R : 1\n"
                      "axiom forall x . P(x) | Q(x) & !R(x) -> P(x) <-> Q(x)")
    assert str(th.sentences[0].matrix) == "((P(x) | (Q(x) & !R(x))) -> P(x)) <-> Q(x)"


def test_parse_helpers(maltsev_th):
    eq = parse_equation("m(x, y, y) = x", maltsev_th.signature)
    assert eq.variables == ["x", "y"]
    s = parse_sentence("forall x . exists y . m(x, y, y) = x", maltsev_th.signature)
    assert s.is_form_41


THEORIES = [
    "relation le : 2\nproperty reflexive(le), transitive(le)\naxiom forall x . exists y . le(x, y) & !(x = y)",
    "function m : 3\nconstant e\nequation m(x, e, y) = m(y, e, x)\naxiom forall x . m(x, x, x) = x",
    "relation R : 2\nrelation S : 2\naxiom forall x y z . R(x, y) & R(y, z) -> S(x, z)",
    "relation E : 2\nfunction f : 1\nproperty preserves(f, E), bijective(f)\naxiom exists y . E(y, y) | f(y) = y",
]


@pytest.mark.parametrize("text", THEORIES)
def test_print_then_parse_is_identity(text):
    th = parse_theory(text)
    assert parse_theory(str(th)) == th


@pytest.mark.parametrize("text", THEORIES)
def test_classification_stable_under_reparsing(text):
    th = parse_theory(text)
    again = parse_theory(str(th))
    for a, b in zip(th.axioms, again.axioms):
        assert classify_axiom(a, th) == classify_axiom(b, again)


names = st.sampled_from(["x", "y", "z"])


@st.composite
def formulas(draw, depth=0):
    if depth > 2 or draw(st.booleans()):
        kind = draw(st.sampled_from(["rel", "eq"]))
        if kind == "rel":
            return f"R({draw(names)}, {draw(names)})"
        return f"f({draw(names)}) = {draw(names)}"
    op = draw(st.sampled_from(["&", "|", "->", "<->"]))
    left, right = draw(formulas(depth + 1)), draw(formulas(depth + 1))
    neg = "!" if draw(st.booleans()) else ""
    return f"{neg}({left} {op} {right})"


@given(formulas())
@settings(max_examples=80, deadline=None)
def test_random_formulas_roundtrip(matrix):
    th = parse_theory(f"relation R : 2\nfunction f : 1\naxiom forall x y z . {matrix}")
    assert parse_theory(str(th)) == th
