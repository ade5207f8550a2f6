import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from amalgam.dsl import parse_sentence, parse_theory
from amalgam.errors import SignatureMismatch
from amalgam.logic import (
    PropertyAtom, Sentence, Theory, atom_as_sentences, check_atom, classify_axiom, eligibility,
    eval_sentence, eval_sentence_naive, satisfies, verify_equations,
)
from amalgam.structures import Signature, restrict
from oracles import mk, refl

RF = Signature({"R": 2}, {"f": 1})


def test_chain_is_poset(poset_th):
    s = mk(poset_th.signature, "ab", {"le": refl("ab") | {("a", "b")}})
    assert satisfies(s, poset_th)


def test_two_cycle_not_antisymmetric():
    th = parse_theory("relation R : 2\nproperty antisymmetric(R)")
    v = satisfies(mk(th.signature, "ab", {"R": {("a", "b"), ("b", "a")}}), th)
    assert not v
    assert v.witness == ("a", "b")
    assert str(v.axiom) == "antisymmetric(R)"


def test_xor_is_maltsev(maltsev_th):
    els = ["0", "1"]
    tab = {k: str(sum(map(int, k)) % 2) for k in itertools.product(els, repeat=3)}
    z2 = mk(maltsev_th.signature, els, {}, {"m": tab})
    assert satisfies(z2, maltsev_th)
    assert verify_equations(z2, maltsev_th.equations)


def test_signature_mismatch(poset_th, graph_th):
    with pytest.raises(SignatureMismatch):
        satisfies(mk(graph_th.signature, "a", {"E": set()}), poset_th)


@pytest.mark.parametrize("text,tag,eligible", [
    ("forall x . exists y . R(x, y)", "form-4-1", True),
    ("forall x y . R(x, y) -> R(y, x)", "general-universal", False),
    ("exists y z . R(y, z)", "form-4-1", True),
    ("forall x . R(x, f(x))", "form-4-1", True),
    ("exists y . forall x . R(x, y)", "general", False),
])
def test_classify(text, tag, eligible):
    c = classify_axiom(parse_sentence(text, RF))
    assert (c.tag, c.eligible) == (tag, eligible)


def test_classify_builtins(poset_th):
    assert all(classify_axiom(a, poset_th).tag == "builtin-property" for a in poset_th.atoms)
    lin = classify_axiom(PropertyAtom("linear", ("le",)))
    assert not lin.eligible


def test_shared_nontransitive_coarsening_hazard():
    th = parse_theory("""relation S : 2
relation le1 : 2
relation le2 : 2
property antisymmetric(S)
property reflexive(le1), antisymmetric(le1), transitive(le1)
property reflexive(le2), antisymmetric(le2), transitive(le2)
property coarser(S, le1), coarser(S, le2)""")
    rep = eligibility(th)
    assert any(h.startswith("shared-nontransitive-coarsening") for h in rep.hazards)
    assert not rep


def test_poset_eligible(poset_th):
    rep = eligibility(poset_th)
    assert rep and rep.transitive == frozenset({"le"})


@pytest.mark.parametrize("kind,arg,sizes", [
    ("card_lt", 3, {0: True, 2: True, 3: False}),
    ("card_leq", 2, {2: True, 3: False}),
    ("card_not", 3, {2: True, 3: False, 4: True}),
    ("card_odd_or_leq", 2, {1: True, 2: True, 3: True, 4: False, 5: True}),
    ("card_even_or_leq", 2, {2: True, 3: False, 4: True}),
])
def test_cardinality_atoms(kind, arg, sizes):
    sig = Signature()
    for n, ok in sizes.items():
        s = mk(sig, [f"e{i}" for i in range(n)])
        assert (check_atom(PropertyAtom(kind, (arg,)), s) is None) == ok


def test_count_leq():
    sig = Signature({"U": 1})
    atom = PropertyAtom("count_leq", ("U", "!U"))
    assert check_atom(atom, mk(sig, "ab", {"U": {("a",)}})) is None
    assert check_atom(atom, mk(sig, "ab", {"U": {("a",), ("b",)}})) is not None


SENTENCES = [
    "forall x . exists y . R(x, y) & !(x = y)",
    "forall x . R(x, f(x)) | f(x) = x",
    "exists y z . R(y, z) & !R(z, y)",
    "forall x . exists y . f(y) = x",
    "forall x . R(f(x), x) -> f(f(x)) = x",
    "exists y . forall x . R(x, y)",
    "forall x y . R(x, y) -> R(f(x), f(y))",
]


def random_structure(rng, n):
    els = [f"e{i}" for i in range(n)]
    rel = {(x, y) for x in els for y in els if rng.random() < 0.35}
    return mk(RF, els, {"R": rel}, {"f": {(x,): rng.choice(els) for x in els}})


@pytest.mark.parametrize("text", SENTENCES)
@given(seed=st.integers(0, 100_000), n=st.integers(1, 4))
@settings(max_examples=40, deadline=None)
def test_fast_evaluator_matches_naive(text, seed, n):
    sent = parse_sentence(text, RF)
    s = random_structure(random.Random(seed), n)
    general = Sentence(sent.quantifiers, sent.matrix, general=True)
    assert (eval_sentence(sent, s) is None) == (eval_sentence_naive(general, s) is None)


FORM_41 = [t for t in SENTENCES if classify_axiom(parse_sentence(t, RF)).tag == "form-4-1"]


@pytest.mark.parametrize("text", FORM_41)
@given(seed=st.integers(0, 100_000))
@settings(max_examples=60, deadline=None)
def test_union_stability(text, seed):
    """D on A | B with A, B substructures satisfying a one-universal sentence satisfies it too."""
    rng = random.Random(seed)
    d = random_structure(rng, 5)
    els = list(d.elements)
    f = d.fn("f")

    def closure(xs):
        xs = set(xs)
        while True:
            more = {f[(x,)] for x in xs} - xs
            if not more:
                return xs
            xs |= more

    a = closure(rng.sample(els, rng.randint(1, 5)))
    b = closure(set(els) - a) | closure(rng.sample(els, 1))
    th = Theory(RF, sentences=[parse_sentence(text, RF)])
    if satisfies(restrict(d, a), th) and satisfies(restrict(d, b), th):
        assert satisfies(d, th)


ATOMS = [
    ("transitive", ("R",)), ("reflexive", ("R",)), ("symmetric", ("R",)),
    ("antireflexive", ("R",)), ("antisymmetric", ("R",)), ("linear", ("R",)),
    ("coarser", ("S", "R")), ("preserves", ("f", "R")), ("reverses", ("f", "R")),
    ("strictly_preserves", ("f", "R")), ("strictly_reverses", ("f", "R")),
    ("bijective", ("f",)), ("surjective", ("f",)),
]
RSF = Signature({"R": 2, "S": 2}, {"f": 1})


@pytest.mark.parametrize("kind,args", ATOMS)
@given(seed=st.integers(0, 100_000), n=st.integers(1, 4))
@settings(max_examples=40, deadline=None)
def test_builtin_atoms_match_their_sentences(kind, args, seed, n):
    rng = random.Random(seed)
    els = [f"e{i}" for i in range(n)]
    dens = rng.random()
    r = {(x, y) for x in els for y in els if rng.random() < dens}
    s_rel = {(x, y) for x in els for y in els if rng.random() < 0.5}
    s = mk(RSF, els, {"R": r, "S": s_rel}, {"f": {(x,): rng.choice(els) for x in els}})
    atom = PropertyAtom(kind, args)
    direct = check_atom(atom, s) is None
    expanded = all(eval_sentence_naive(x, s) is None for x in atom_as_sentences(atom, RSF))
    assert direct == expanded
