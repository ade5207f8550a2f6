import json

import pytest

from amalgam.cli import main
from amalgam.dsl import load_theory
from amalgam.io import load_triple, save_structure
from conftest import corpus_file
from oracles import mk, refl


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def poset_a(tmp_path):
    path = tmp_path / "a.json"
    save_structure(load_triple(corpus_file("poset_above_below.json")).a, str(path))
    return str(path)


def test_check_theory(capsys):
    code, out, _ = run(capsys, "check", "--theory", corpus_file("poset.thy"))
    assert code == 0 and "3 axioms" in out


def test_check_model(capsys, poset_a):
    code, out, _ = run(capsys, "check", "--theory", corpus_file("poset.thy"), "--a", poset_a)
    assert code == 0 and out.strip() == "model"
    code, out, _ = run(capsys, "check", "--theory", corpus_file("poset_small.thy"), "--a", poset_a)
    assert code == 0


def test_check_non_model(capsys, tmp_path):
    th = load_theory(corpus_file("poset.thy"))
    s = mk(th.signature, "abc", {"le": refl("abc") | {("a", "b"), ("b", "c")}})
    save_structure(s, str(tmp_path / "s.json"))
    code, out, _ = run(capsys, "check", "--theory", corpus_file("poset.thy"),
                       "--a", str(tmp_path / "s.json"))
    assert code == 1 and out.startswith("not a model: transitive(le)")


@pytest.mark.parametrize("theory,triple,prop,code,tag", [
    ("poset.thy", "poset_above_below.json", "sapu", 0, "Witness"),
    ("poset_monotone_binary.thy", "projections.json", "apu", 1, "ExhaustedNo"),
    ("linear_monotone_binary.thy", "monotone_binary_chains.json", "ap", 3, "NoUpToBound(2)"),
])
def test_decide_exit_codes(capsys, theory, triple, prop, code, tag):
    got, out, err = run(capsys, "decide", "--theory", corpus_file(theory),
                        "--triple", corpus_file(triple), "--property", prop, "--extra", "2")
    assert got == code
    assert err.strip() == tag
    assert json.loads(out)["property"] == prop.upper()


def test_decide_budget_is_inconclusive(capsys, tmp_path):
    th = load_theory(corpus_file("poset.thy"))
    g = mk(th.signature, ["x", "y", "z"], {"le": {(e, e) for e in "xyz"}})
    save_structure(g, str(tmp_path / "g.json"))
    code, _, err = run(capsys, "decide", "--theory", corpus_file("poset.thy"),
                       "--a", str(tmp_path / "g.json"), "--b", str(tmp_path / "g.json"),
                       "--property", "djepu", "--max-candidates", "1")
    assert code == 3 and "inconclusive" in err


def test_amalgamate_writes_file(capsys, tmp_path):
    out = tmp_path / "d.json"
    code, _, _ = run(capsys, "amalgamate", "--theory", corpus_file("poset.thy"),
                     "--triple", corpus_file("poset_above_below.json"), "--method", "case-b",
                     "--out", str(out))
    assert code == 0
    report = json.loads(out.read_text())
    assert report["method"] == "case-b"
    assert ["b", "a"] in report["amalgam"]["relations"]["le"]


def test_amalgamate_ineligible(capsys):
    code, _, err = run(capsys, "amalgamate", "--theory", corpus_file("unary_implication.thy"),
                       "--triple", corpus_file("unary_implication.json"), "--method", "thm-4-10")
    assert code == 1 and "IneligibleTheory" in err


@pytest.mark.parametrize("argv", [
    ["check", "--theory", "/nonexistent.thy"],
    ["decide", "--theory", "POSET", "--property", "ap"],
    ["algebraize", "--a", "/nonexistent.json"],
])
def test_input_errors(capsys, argv):
    argv = [corpus_file("poset.thy") if a == "POSET" else a for a in argv]
    code, _, err = run(capsys, *argv)
    assert code == 2 and "input error" in err


def test_malformed_theory(capsys, tmp_path):
    bad = tmp_path / "bad.thy"
    bad.write_text("relation le : two\n")
    code, _, _ = run(capsys, "check", "--theory", str(bad))
    assert code == 2


def test_algebraize_roundtrip(capsys, tmp_path, poset_a):
    alg = tmp_path / "alg.json"
    back = tmp_path / "back.json"
    assert main(["algebraize", "--a", poset_a, "--out", str(alg)]) == 0
    assert "f_le" in json.loads(alg.read_text())["functions"]
    assert main(["algebraize", "--a", str(alg), "--reverse", "--out", str(back)]) == 0
    assert json.loads(back.read_text())["relations"] == json.loads(open(poset_a).read())["relations"]


def test_search_exit_codes(capsys):
    code, out, _ = run(capsys, "search", "--theory", corpus_file("unary_implication.thy"),
                       "--max-c", "1", "--max-side", "2", "--extra", "1")
    assert code == 1 and json.loads(out)["counterexample"] is not None
    code, out, _ = run(capsys, "search", "--theory", corpus_file("poset.thy"),
                       "--max-c", "1", "--max-side", "2", "--extra", "1")
    assert code == 3 and json.loads(out)["counterexample"] is None


def test_fraisse(capsys):
    code, out, _ = run(capsys, "fraisse", "--theory", corpus_file("poset.thy"), "--steps", "0",
                       "--check-k", "1")
    assert code == 1
    assert json.loads(out)["structure"]["elements"] == ["v"]
    code, out, _ = run(capsys, "fraisse", "--theory", corpus_file("poset.thy"), "--steps", "2",
                       "--check-k", "0")
    assert code == 0 and json.loads(out)["audit"]["fraction"] == 1.0


def test_corpus_run(capsys):
    code, out, _ = run(capsys, "corpus", "run", "--filter", "7.11")
    assert code == 0
    assert out.splitlines()[-1] == "1/1 entries passed"
