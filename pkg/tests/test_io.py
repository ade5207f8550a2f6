import json

import pytest
from hypothesis import given, settings, strategies as st

from amalgam.errors import DuplicateTuple, StructureError
from amalgam.io import (
    dump_structure, load_structure, load_triple, parse_structure, save_structure, save_triple,
)
from amalgam.structures import Signature
from conftest import corpus_file
from oracles import mk, refl

CHAIN_FILE = {
    "signature": {"relations": {"le": 2}, "functions": {}, "constants": []},
    "elements": ["b", "a"],
    "relations": {"le": [["b", "b"], ["a", "b"], ["a", "a"]]},
    "functions": {},
    "constants": {},
}


def test_parse_chain():
    s = parse_structure(json.dumps(CHAIN_FILE))
    assert s.elements == ("a", "b")
    assert set(s.rel("le")) == {("a", "a"), ("a", "b"), ("b", "b")}


def test_duplicate_tuple_rejected():
    bad = dict(CHAIN_FILE, relations={"le": [["a", "a"], ["a", "a"]]})
    with pytest.raises(DuplicateTuple):
        parse_structure(json.dumps(bad))


def test_duplicate_function_row_rejected():
    obj = {"signature": {"relations": {}, "functions": {"f": 1}, "constants": []},
           "elements": ["a"], "relations": {}, "functions": {"f": [["a", "a"], ["a", "a"]]},
           "constants": {}}
    with pytest.raises(DuplicateTuple):
        parse_structure(json.dumps(obj))


def test_binary_operation_file_roundtrips_bytewise():
    t = load_triple(corpus_file("monotone_binary_chains.json"))
    text = dump_structure(t.a)
    again = dump_structure(parse_structure(text))
    assert text == again
    assert parse_structure(text) == t.a
    assert t.a.apply("f", "a", "c") == "c"


def test_save_and_load(tmp_path, poset_triple):
    p = tmp_path / "a.json"
    save_structure(poset_triple.a, p)
    assert load_structure(p) == poset_triple.a
    q = tmp_path / "t.json"
    save_triple(poset_triple, q)
    t = load_triple(q)
    assert (t.a, t.b, t.c) == (poset_triple.a, poset_triple.b, poset_triple.c)


def test_triple_file_needs_three_keys(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"a": CHAIN_FILE}))
    with pytest.raises(StructureError):
        load_triple(p)


def test_method_annotation_kept():
    sig = Signature({"le": 2})
    s = mk(sig, "ab", {"le": refl("ab")}).with_annotations(method="case-b")
    assert parse_structure(dump_structure(s)).annotations["method"] == "case-b"


@given(st.sets(st.tuples(st.sampled_from("abc"), st.sampled_from("abc"))),
       st.dictionaries(st.sampled_from("abc"), st.sampled_from("abc"), min_size=3))
@settings(max_examples=60, deadline=None)
def test_roundtrip(pairs, f):
    sig = Signature({"R": 2}, {"f": 1}, {"k"})
    s = mk(sig, "abc", {"R": pairs}, {"f": {(x,): y for x, y in f.items()}}, {"k": "b"})
    assert parse_structure(dump_structure(s)) == s
