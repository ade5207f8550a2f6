import os

import pytest

from amalgam.corpus import data_dir
from amalgam.dsl import parse_theory
from amalgam.io import load_triple

POSET = """relation le : 2
property reflexive(le), antisymmetric(le), transitive(le)"""
LINEAR = POSET + "\nproperty linear(le)"
GRAPH = """relation E : 2
property symmetric(E), antireflexive(E)"""
MALTSEV = """function m : 3
equation m(x, x, y) = y
equation m(y, x, x) = y"""


def corpus_file(name):
    return os.path.join(data_dir(), name)


@pytest.fixture(scope="session")
def poset_th():
    return parse_theory(POSET)


@pytest.fixture(scope="session")
def linear_th():
    return parse_theory(LINEAR)


@pytest.fixture(scope="session")
def graph_th():
    return parse_theory(GRAPH)


@pytest.fixture(scope="session")
def maltsev_th():
    return parse_theory(MALTSEV)


@pytest.fixture(scope="session")
def poset_triple():
    """C = {c}, c < a in A, b < c in B."""
    return load_triple(corpus_file("poset_above_below.json"))
