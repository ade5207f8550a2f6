"""Encoding relations as argument-selecting operations.

Each relation R whose diagonal always holds is replaced by an operation f_R of
the same arity: ``f_R(a1, ..., an)`` is ``a1`` when ``R(a1, ..., an)`` holds
and otherwise the first argument different from ``a1``.  For a poset this is
the usual order algebra, ``ab = a`` iff ``a <= b``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping

from .errors import (
    DiagonalConditionViolated, InconsistentTable, NotAPoset, NotAnOrderAlgebra, StructureError,
)
from .logic import eval_term
from .structures import Signature, Structure

PREFIX = "f_"


@dataclass(frozen=True)
class AlgebraizedStructure:
    base: Structure
    origin: Signature
    names: Mapping[str, str] = field(default_factory=dict)

    def origin_block(self):
        return {"relations": dict(self.origin.relations), "map": dict(self.names)}


def _select(args, holds):
    first = args[0]
    if holds:
        return first
    for x in args[1:]:
        if x != first:
            return x
    return first


def _is_poset(rel, els):
    for x in els:
        if (x, x) not in rel:
            return False
    for (x, y) in rel:
        if x != y and (y, x) in rel:
            return False
    for (x, y) in rel:
        for z in els:
            if (y, z) in rel and (x, z) not in rel:
                return False
    return True


def _only_binary_relation(p):
    rels = [r for r, k in p.signature.relations.items() if k == 2]
    if len(rels) != 1 or p.signature.functions or len(p.signature.relations) != 1:
        raise NotAPoset("expected exactly one binary relation and nothing else")
    return rels[0]


def poset_to_order_algebra(p):
    r = _only_binary_relation(p)
    rel = p.rel(r)
    if not _is_poset(rel, p.elements):
        raise NotAPoset(f"{r} is not a partial order")
    sig = Signature({}, {PREFIX + r: 2}, p.signature.constants)
    tab = {(a, b): (a if (a, b) in rel else b) for a in p.elements for b in p.elements}
    return Structure.build(sig, p.elements, {}, {PREFIX + r: tab}, dict(p.constants))


def order_algebra_to_poset(g):
    funs = [f for f, k in g.signature.functions.items() if k == 2]
    if len(funs) != 1 or g.signature.relations or len(g.signature.functions) != 1:
        raise NotAnOrderAlgebra("expected exactly one binary operation")
    f = funs[0]
    r = f[len(PREFIX):] if f.startswith(PREFIX) and len(f) > len(PREFIX) else "le"
    tab = g.fn(f)
    rel = {(a, b) for (a, b), v in tab.items() if v == a}
    if not _is_poset(rel, g.elements):
        raise NotAnOrderAlgebra("the induced relation is not a partial order")
    p = Structure.build(Signature({r: 2}, {}, g.signature.constants), g.elements, {r: rel}, {},
                        dict(g.constants))
    back = poset_to_order_algebra(p)
    if dict(back.fn(PREFIX + r)) != dict(tab):
        raise NotAnOrderAlgebra("the operation is not the product of its induced order")
    return p


def algebraize(s):
    sig = s.signature
    names = {}
    for r in sig.relations:
        name = PREFIX + r
        if sig.kind(name) is not None:
            raise StructureError(f"{name} already names a symbol")
        names[r] = name
    for r, k in sig.relations.items():
        rel = s.rel(r)
        for x in s.elements:
            if (x,) * k not in rel:
                raise DiagonalConditionViolated(r, x)
    funs = {f: dict(s.fn(f)) for f in sig.functions}
    fsig = dict(sig.functions)
    for r, k in sig.relations.items():
        rel = s.rel(r)
        fsig[names[r]] = k
        funs[names[r]] = {args: _select(args, args in rel)
                          for args in itertools.product(s.elements, repeat=k)}
    new_sig = Signature({}, fsig, sig.constants)
    origin = Signature(dict(sig.relations), {}, frozenset())
    block = {"relations": dict(sig.relations), "map": names}
    base = Structure.build(new_sig, s.elements, {}, funs, dict(s.constants), {"origin": block})
    return AlgebraizedStructure(base, origin, names)


def dealgebraize(a):
    base = a.base
    sig = base.signature
    rels = {}
    for r, fname in a.names.items():
        k = a.origin.relations[r]
        if sig.functions.get(fname) != k:
            raise InconsistentTable(f"{fname} is missing or has the wrong arity")
        tab = base.fn(fname)
        rel = set()
        for args, v in tab.items():
            if all(x == args[0] for x in args):
                if v != args[0]:
                    raise InconsistentTable(f"{fname}{args} = {v} breaks the diagonal")
                rel.add(args)
            elif v == args[0]:
                rel.add(args)
            elif v != _select(args, False):
                raise InconsistentTable(f"{fname}{args} = {v} is not a selected argument")
        rels[r] = rel
    kept = {f: k for f, k in sig.functions.items() if f not in set(a.names.values())}
    new_sig = Signature(dict(a.origin.relations), kept, sig.constants)
    return Structure.build(new_sig, base.elements, rels, {f: dict(base.fn(f)) for f in kept},
                           dict(base.constants))


def is_conservative(s):
    for f in s.signature.functions:
        for args, v in s.fn(f).items():
            if v not in args:
                return False
    return True


def is_conservative_up_to_terms(s, terms, var="x"):
    """Every value is ``t(a_i)`` for one of the given unary terms ``t`` (in ``var``)."""
    images = {}
    for e in s.elements:
        images[e] = {eval_term(t, s, {var: e}) for t in terms}
    for f in s.signature.functions:
        for args, v in s.fn(f).items():
            if not any(v in images[a] for a in args):
                return False
    return True


def from_annotated(s):
    """Rebuild the algebraized view of a structure carrying an ``origin`` block."""
    block = s.annotations.get("origin")
    if not isinstance(block, dict) or "relations" not in block or "map" not in block:
        raise InconsistentTable("no origin block: the structure was not produced by algebraize")
    origin = Signature(dict(block["relations"]), {}, frozenset())
    return AlgebraizedStructure(s, origin, dict(block["map"]))
