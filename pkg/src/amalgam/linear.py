"""Union amalgamation for varieties axiomatized by linear equations.

Starting from the tables of A and B, every instance of an equation over
``A | B`` whose one side already has a value forces the value of the other
side (when that side is a single operation application).  The least fixpoint
is computed with a worklist; entries still undetermined afterwards all get the
same default element, which makes every remaining instance read ``d = d``.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

from .errors import ClashReport, NonLinearEquation, PostVerificationFailed
from .logic import Const, Var, is_linear, verify_equations
from .structures import Structure, check_morphism, inclusion

__all__ = ["ForcingTable", "force_values", "amalgamate_linear", "verify_equations", "is_linear"]


@dataclass
class ForcingTable:
    """Partial function tables over A | B with the reason for every entry.

    Keys are ``(symbol, args)``; values are ``(value, justification)`` where
    the justification is ``("from-A",)``, ``("from-B",)`` or
    ``("identity", equation text, substitution, source)``.
    """

    entries: dict = field(default_factory=dict)

    def value(self, fn, args):
        got = self.entries.get((fn, tuple(args)))
        return None if got is None else got[0]

    def table(self, fn):
        return {args: v for (f, args), (v, _) in self.entries.items() if f == fn}

    def values_only(self):
        return {k: v for k, (v, _) in self.entries.items()}

    def chain(self, key):
        """Replay the derivation of an entry back to the input tables."""
        out = []
        seen = set()
        while key is not None and key not in seen:
            seen.add(key)
            value, why = self.entries[key]
            out.append((key, value, why))
            key = why[3][1] if why[0] == "identity" and why[3][0] == "entry" else None
        return out


def _side(term, env, consts, table):
    """(value or None, entry key or None, source description)."""
    if isinstance(term, Var):
        return env[term.name], None, ("var", term.name)
    if isinstance(term, Const):
        return consts[term.name], None, ("const", term.name)
    args = []
    for a in term.args:
        if isinstance(a, Var):
            args.append(env[a.name])
        else:
            args.append(consts[a.name])
    key = (term.fn, tuple(args))
    got = table.get(key)
    return (None if got is None else got[0]), key, ("entry", key)


def force_values(t, eqs, seed=None):
    """Least fixpoint of the forcing rules; raises ClashReport on a conflict."""
    for eq in eqs:
        if not is_linear(eq):
            raise NonLinearEquation(f"{eq} has more than one operation on a side")
    a, b = t.a, t.b
    table = {}
    for name, src in (("from-A", a), ("from-B", b)):
        for f in src.signature.functions:
            for args, v in src.fn(f).items():
                table.setdefault((f, args), (v, (name,)))
    consts = dict(t.c.constants)
    domain = t.union
    instances = []
    for i, eq in enumerate(eqs):
        vs = eq.variables
        for xs in itertools.product(domain, repeat=len(vs)):
            instances.append((i, eq, dict(zip(vs, xs))))
    if seed is not None:
        random.Random(seed).shuffle(instances)

    changed = True
    while changed:
        changed = False
        for _i, eq, env in instances:
            lv, lkey, lsrc = _side(eq.left, env, consts, table)
            rv, rkey, rsrc = _side(eq.right, env, consts, table)
            if lv is not None and rv is not None:
                if lv != rv:
                    key = lkey or rkey
                    d1 = _describe(table, lkey, lsrc, lv)
                    d2 = _describe(table, rkey, rsrc, rv)
                    raise ClashReport(key, d1, d2)
                continue
            if lv is not None and rkey is not None:
                table[rkey] = (lv, ("identity", str(eq), dict(env), lsrc))
                changed = True
            elif rv is not None and lkey is not None:
                table[lkey] = (rv, ("identity", str(eq), dict(env), rsrc))
                changed = True
    return ForcingTable(table)


def _describe(table, key, src, value):
    if key is None:
        return [(src, value)]
    return ForcingTable(table).chain(key)


def default_element(t):
    return min(t.union)


def build_union(t, relations, functions, method, annotations=None):
    """Structure on A | B from explicit tables; constants come from C."""
    notes = {"method": method}
    notes.update(annotations or {})
    return Structure.build(t.signature, t.union, relations, functions, dict(t.c.constants), notes)


def fill_functions(t, forced, dbar=None):
    dbar = default_element(t) if dbar is None else dbar
    out = {}
    for f, k in t.signature.functions.items():
        tab = {}
        for args in itertools.product(t.union, repeat=k):
            v = forced.get((f, args))
            tab[args] = dbar if v is None else v
        out[f] = tab
    return out


def verify_inclusions(t, d):
    for name, part in (("A", t.a), ("B", t.b)):
        if not check_morphism(inclusion(part, d)):
            raise PostVerificationFailed(f"inclusion of {name}", None)


def amalgamate_linear(t, eqs):
    from .construct import AmalgamResult

    table = force_values(t, eqs)
    funcs = fill_functions(t, table.values_only())
    rels = {r: t.a.rel(r) | t.b.rel(r) for r in t.signature.relations}
    d = build_union(t, rels, funcs, "linear-variety")
    verdict = verify_equations(d, eqs)
    if not verdict:
        raise PostVerificationFailed(verdict.axiom, verdict.witness)
    verify_inclusions(t, d)
    return AmalgamResult.of(t, d, "linear-variety")
