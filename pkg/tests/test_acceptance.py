"""The twelve acceptance criteria, one test each.

Every test prints a ``PASS``/``FAIL`` line (visible with ``pytest -s`` or when
the module is run as a script) before reporting its outcome to pytest.
"""
import itertools
import random
import sys
import time

import pytest

from amalgam.algebraize import algebraize, dealgebraize, order_algebra_to_poset, poset_to_order_algebra
from amalgam.construct import amalgamate_4_10, check_super_witness, merge_shared_transitive
from amalgam.dsl import load_theory, parse_theory
from amalgam.errors import SharedNotTransitive
from amalgam.fraisse import GrowthSchedule, extension_check, grow_chain
from amalgam.io import load_triple
from amalgam.linear import amalgamate_linear, verify_equations
from amalgam.logic import classify_axiom, eligibility, satisfies
from amalgam.search import (
    SearchBudget, decide_bounded, decide_into_union, enumerate_structures, enumerate_triples,
    search_counterexample,
)
from amalgam.structures import Morphism, Signature, check_morphism, validate_tba
from conftest import GRAPH, POSET, corpus_file
from oracles import all_binary_relations, is_poset, labeled_posets, mk, refl

CRITERIA = {}


def criterion(num, title):
    def wrap(fn):
        CRITERIA[num] = (title, fn)
        return fn
    return wrap


def thy(name):
    return load_theory(corpus_file(name))


def triple(name):
    return load_triple(corpus_file(name))


def decide(th, t, prop, extra=None):
    if prop in ("sapu", "apu"):
        return decide_into_union(t, th, strong=prop == "sapu")
    return decide_bounded(t, th, strong=prop == "sap", budget=SearchBudget(max_extra_elements=extra))


def chain_rel(els):
    return {(x, y) for i, x in enumerate(els) for y in els[i:]}


@criterion(1, "union construction is sound on all poset triples with |A|, |B| <= 4")
def poset_soundness():
    th = parse_theory(POSET)
    count = 0
    for t in enumerate_triples(th, 4, 4):
        res = amalgamate_4_10(t, th)
        d = res.d
        assert set(d.elements) == set(t.union)
        assert is_poset(set(d.rel("le")), d.elements)
        assert check_morphism(res.embed_a) and check_morphism(res.embed_b)
        assert check_super_witness(t, d, "le")
        count += 1
    assert count > 4000


@criterion(2, "monotone binary operation on chains: no amalgam within 2 extra elements")
def monotone_chains():
    t = triple("monotone_binary_chains.json")
    f = t.a.fn("f")
    assert f[("a", "c")] == "c" and f[("c", "a")] == f[("a", "a")] == "a"
    dec = decide(thy("linear_monotone_binary.thy"), t, "ap", 2)
    assert str(dec) == "NoUpToBound(2)"


@criterion(3, "projection triple has no amalgam on the union")
def projections():
    t = triple("projections.json")
    assert all(v == k[0] for k, v in t.a.fn("f").items())
    assert str(decide(thy("poset_monotone_binary.thy"), t, "apu")) == "ExhaustedNo"


@criterion(4, "above/below posets: 3-chain witness, none with fewer than 3 elements")
def above_below():
    t = triple("poset_above_below.json")
    dec = decide(thy("poset.thy"), t, "apu")
    assert str(dec) == "Witness"
    d = dec.witness.d
    assert d.size == 3 and set(d.rel("le")) == chain_rel(["b", "c", "a"])
    assert str(decide(thy("poset_small.thy"), t, "apu")) == "ExhaustedNo"


@criterion(5, "R(x) -> S(y): no amalgam within 2 extra elements, axiom flagged ineligible")
def unary_implication():
    th = thy("unary_implication.thy")
    assert str(decide(th, triple("unary_implication.json"), "ap", 2)) == "NoUpToBound(2)"
    (ax,) = th.sentences
    assert not classify_axiom(ax, th).eligible
    assert not eligibility(th)


@criterion(6, "counted abelian groups: no strong amalgam within 4 extras, witness without sigma")
def counted_groups():
    t = triple("two_z2.json")
    dec = decide(thy("abelian_counted.thy"), t, "sap", 4)
    assert str(dec) == "NoUpToBound(4)"
    free = thy("abelian_counted_free.thy")
    dec = decide(free, t, "sap", 4)
    assert str(dec) == "Witness" and dec.witness.d.size >= 4
    assert satisfies(dec.witness.d, free)


@criterion(7, "Maltsev triple: linear-variety amalgam and an independent search witness")
def maltsev():
    th = thy("maltsev.thy")
    t = triple("maltsev_z2.json")
    res = amalgamate_linear(t, th.equations)
    assert verify_equations(res.d, th.equations)
    assert check_morphism(res.embed_a) and check_morphism(res.embed_b)
    dec = decide_into_union(t, th, strong=True)
    assert dec.witness is not None and verify_equations(dec.witness.d, th.equations)


@criterion(8, "order algebra and selection-operation roundtrips, embedding transfer")
def roundtrips():
    le = Signature({"le": 2})
    for n in range(1, 5):
        els = [f"e{i}" for i in range(n)]
        for rel in labeled_posets(els):
            p = mk(le, els, {"le": rel})
            assert order_algebra_to_poset(poset_to_order_algebra(p)) == p
    r = Signature({"R": 2})
    by_size = {}
    for n in range(1, 4):
        els = [f"e{i}" for i in range(n)]
        by_size[n] = [mk(r, els, {"R": rel}) for rel in all_binary_relations(els)
                      if refl(els) <= rel]
        for s in by_size[n]:
            assert dealgebraize(algebraize(s)) == s
    alg = {s: algebraize(s).base for ss in by_size.values() for s in ss}
    for n, m in itertools.product(by_size, repeat=2):
        if n > m:
            continue
        for s, t in itertools.product(by_size[n], by_size[m]):
            for img in itertools.permutations(t.elements, n):
                mp = dict(zip(s.elements, img))
                assert check_morphism(Morphism(s, t, mp)) == check_morphism(
                    Morphism(alg[s], alg[t], mp))


@criterion(9, "bounded search rediscovers both counterexamples and finds none for posets")
def rediscovery():
    budget = SearchBudget(max_extra_elements=2)
    for name in ("two_orders_antisymmetric.thy", "chain_two_monotone.thy"):
        got = search_counterexample(thy(name), 2, 3, budget)
        assert got is not None
        t, dec = got
        assert str(dec) == "NoUpToBound(2)"
    assert search_counterexample(parse_theory(POSET), 2, 3, budget) is None


def random_theory(rng):
    lines = [POSET]
    if rng.random() < 0.5:
        lines += ["relation R : 2", "property transitive(R), coarser(R, le)"]
    op = rng.choice([None, "preserves", "reverses"])
    if op:
        lines += ["function f : 1", f"property {op}(f, le)"]
        extra = rng.choice([None, "involution"] + (["closure"] if op == "preserves" else []))
        if extra == "closure":
            lines += ["axiom forall x . le(x, f(x))", "axiom forall x . f(f(x)) = f(x)"]
        elif extra == "involution":
            lines += ["axiom forall x . f(f(x)) = x"]
    if rng.random() < 0.4:
        lines += ["constant top", "axiom forall x . le(x, top)"]
    return "\n".join(lines)


@criterion(10, "200 random eligible theories and triples: the union amalgam is a model")
def preservation():
    rng = random.Random(20240601)
    cache = {}
    kinds = set()
    for _ in range(200):
        text = random_theory(rng)
        if text not in cache:
            th = parse_theory(text)
            assert eligibility(th)
            cache[text] = (th, list(enumerate_triples(th, 2, 3)))
        th, triples = cache[text]
        t = rng.choice(triples)
        res = amalgamate_4_10(t, th)
        assert satisfies(res.d, th)
        assert check_morphism(res.embed_a) and check_morphism(res.embed_b)
        kinds.add(text)
    assert len(kinds) >= 10


@criterion(11, "shared relation gate: reject non-transitive S, accept two posets sharing le")
def shared_gate():
    parts = [thy(f"shared_part{i}.thy") for i in (1, 2)]
    with pytest.raises(SharedNotTransitive):
        merge_shared_transitive(triple("two_orders_counterexample.json"),
                                [(p.signature, p) for p in parts], "S")
    th_a, th_b = thy("monotone_unary_a.thy"), thy("monotone_unary_b.thy")
    sig = Signature({"le": 2}, {"f": 1, "g": 1})
    c = mk(sig, "c", {"le": refl("c")}, {"f": {("c",): "c"}, "g": {("c",): "c"}})
    a = mk(sig, "ac", {"le": chain_rel(["c", "a"])},
           {"f": {("a",): "a", ("c",): "c"}, "g": {("a",): "c", ("c",): "c"}})
    b = mk(sig, "bc", {"le": chain_rel(["b", "c"])},
           {"f": {("b",): "c", ("c",): "c"}, "g": {("b",): "b", ("c",): "c"}})
    res = merge_shared_transitive(validate_tba(a, b, c),
                                  [(th_a.signature, th_a), (th_b.signature, th_b)], "le")
    assert satisfies(res.d, th_a.with_signature(sig).extended(th_b.atoms))
    assert check_morphism(res.embed_a) and check_morphism(res.embed_b)


@criterion(12, "20-step graph growth realizes every 1-point extension, same result per seed")
def fraisse_audit():
    th = parse_theory(GRAPH)
    start = next(iter(enumerate_structures(th.signature, 1, th, ["v"])))
    m = grow_chain(start, th, GrowthSchedule(20, seed=0))
    assert extension_check(m, th, 1).fraction == 1.0
    assert grow_chain(start, th, GrowthSchedule(20, seed=0)) == m
    rnd = GrowthSchedule(20, seed=7, strategy="random")
    assert grow_chain(start, th, rnd) == grow_chain(start, th, rnd)


def run_criterion(num):
    title, fn = CRITERIA[num]
    start = time.perf_counter()
    try:
        fn()
    except BaseException as exc:
        return False, f"FAIL  criterion {num:>2}: {title} ({type(exc).__name__}: {exc})"
    secs = time.perf_counter() - start
    return True, f"PASS  criterion {num:>2}: {title} [{secs:.1f}s]"


@pytest.mark.parametrize("num", sorted(CRITERIA))
def test_criterion(num, capsys):
    ok, line = run_criterion(num)
    with capsys.disabled():
        print("\n" + line)
    if not ok:
        CRITERIA[num][1]()


if __name__ == "__main__":
    results = [run_criterion(n) for n in sorted(CRITERIA)]
    for _ok, line in results:
        print(line)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
