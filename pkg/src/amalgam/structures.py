"""Finite structures, morphisms, substructures and triples to be amalgamated.

Elements are identified by their (string) names.  Two structures that share a
name share the element, which is what makes ``C = A & B`` a literal set
intersection when validating triples.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping

from .errors import (
    ArityMismatch,
    ConstantInEmptyDomain,
    ConstantOutsideSubset,
    EmptyCWithConstants,
    EmptyDomain,
    ForeignElement,
    IntersectionMismatch,
    MissingFunctionRow,
    NotClosedUnderFunctions,
    NotSubstructure,
    SignatureMismatch,
    StructureError,
    UnknownSymbol,
)

__all__ = [
    "Signature",
    "Structure",
    "Morphism",
    "TbaTriple",
    "AdjacencySpec",
    "validate_structure",
    "check_morphism",
    "restrict",
    "reduct",
    "find_isomorphism",
    "is_connected",
    "validate_tba",
    "inclusion",
    "union_signature",
]


def _frozen_map(items):
    return MappingProxyType(dict(sorted(items)))


@dataclass(frozen=True)
class Signature:
    """Relation and function symbols with arities, plus constant symbols."""

    relations: Mapping[str, int] = field(default_factory=dict)
    functions: Mapping[str, int] = field(default_factory=dict)
    constants: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "relations", _frozen_map(dict(self.relations).items()))
        object.__setattr__(self, "functions", _frozen_map(dict(self.functions).items()))
        object.__setattr__(self, "constants", frozenset(self.constants))
        seen = set()
        for name in itertools.chain(self.relations, self.functions, self.constants):
            if name in seen:
                raise StructureError(f"symbol {name!r} declared twice")
            seen.add(name)
        for name, arity in itertools.chain(self.relations.items(), self.functions.items()):
            if not isinstance(arity, int) or arity < 1:
                raise ArityMismatch(f"{name}: arity must be a positive integer, got {arity!r}")

    def __hash__(self):
        return hash((tuple(self.relations.items()), tuple(self.functions.items()), self.constants))

    def __eq__(self, other):
        if not isinstance(other, Signature):
            return NotImplemented
        return (dict(self.relations) == dict(other.relations)
                and dict(self.functions) == dict(other.functions)
                and self.constants == other.constants)

    def __reduce__(self):
        return (Signature, (dict(self.relations), dict(self.functions), self.constants))

    @property
    def symbols(self):
        return set(self.relations) | set(self.functions) | set(self.constants)

    def kind(self, name):
        if name in self.relations:
            return "relation"
        if name in self.functions:
            return "function"
        if name in self.constants:
            return "constant"
        return None

    def binary_relations(self):
        return [r for r, k in self.relations.items() if k == 2]

    def unary_functions(self):
        return [f for f, k in self.functions.items() if k == 1]

    def restricted_to(self, names):
        names = set(names)
        return Signature(
            {r: k for r, k in self.relations.items() if r in names},
            {f: k for f, k in self.functions.items() if f in names},
            {c for c in self.constants if c in names},
        )

    def to_json(self):
        return {
            "relations": dict(self.relations),
            "functions": dict(self.functions),
            "constants": sorted(self.constants),
        }

    def __repr__(self):
        parts = [f"{r}/{k}" for r, k in self.relations.items()]
        parts += [f"{f}()/{k}" for f, k in self.functions.items()]
        parts += sorted(self.constants)
        return f"Signature({', '.join(parts)})"


def union_signature(*sigs):
    rel, fun, con = {}, {}, set()
    for s in sigs:
        for name, k in s.relations.items():
            if rel.setdefault(name, k) != k:
                raise ArityMismatch(f"{name} used with arities {rel[name]} and {k}")
        for name, k in s.functions.items():
            if fun.setdefault(name, k) != k:
                raise ArityMismatch(f"{name} used with arities {fun[name]} and {k}")
        con |= set(s.constants)
    return Signature(rel, fun, con)


@dataclass(frozen=True, eq=False)
class Structure:
    """A finite normal model.

    Relation tables are frozensets of tuples, function tables map argument
    tuples to values, constants map symbols to elements.  Instances are frozen;
    build them through :meth:`build` (or :func:`validate_structure`) to get the
    invariants checked and the elements put in canonical order.
    """

    signature: Signature
    elements: tuple
    relations: Mapping[str, frozenset] = field(default_factory=dict)
    functions: Mapping[str, Mapping[tuple, str]] = field(default_factory=dict)
    constants: Mapping[str, str] = field(default_factory=dict)
    annotations: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        rels = {r: frozenset(tuple(t) for t in tab) for r, tab in dict(self.relations).items()}
        funs = {f: MappingProxyType({tuple(k): v for k, v in dict(tab).items()})
                for f, tab in dict(self.functions).items()}
        object.__setattr__(self, "relations", _frozen_map(rels.items()))
        object.__setattr__(self, "functions", _frozen_map(funs.items()))
        object.__setattr__(self, "constants", _frozen_map(dict(self.constants).items()))
        object.__setattr__(self, "annotations", MappingProxyType(dict(self.annotations)))

    @classmethod
    def build(cls, signature, elements, relations=None, functions=None, constants=None,
              annotations=None):
        raw = cls(signature, tuple(elements), relations or {}, functions or {},
                  constants or {}, annotations or {})
        return validate_structure(raw)

    def __reduce__(self):
        return (Structure, (self.signature, self.elements, dict(self.relations),
                            {f: dict(t) for f, t in self.functions.items()},
                            dict(self.constants), dict(self.annotations)))

    # -- convenience ------------------------------------------------------

    @property
    def size(self):
        return len(self.elements)

    @property
    def element_set(self):
        return frozenset(self.elements)

    def rel(self, name):
        return self.relations.get(name, frozenset())

    def fn(self, name):
        return self.functions.get(name, MappingProxyType({}))

    def holds(self, name, *args):
        return tuple(args) in self.rel(name)

    def apply(self, name, *args):
        return self.functions[name][tuple(args)]

    def key(self):
        """Hashable canonical content (annotations excluded)."""
        return (
            self.signature,
            tuple(sorted(self.elements)),
            tuple((r, tuple(sorted(self.rel(r)))) for r in self.signature.relations),
            tuple((f, tuple(sorted(self.fn(f).items()))) for f in self.signature.functions),
            tuple(sorted(self.constants.items())),
        )

    def __eq__(self, other):
        if not isinstance(other, Structure):
            return NotImplemented
        return self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def with_annotations(self, **extra):
        notes = dict(self.annotations)
        notes.update(extra)
        return Structure(self.signature, self.elements, self.relations, self.functions,
                         self.constants, notes)

    def renamed(self, mapping):
        """Copy with elements renamed through ``mapping`` (must be injective)."""
        m = {e: mapping.get(e, e) for e in self.elements}
        if len(set(m.values())) != len(m):
            raise StructureError("renaming is not injective")
        return Structure.build(
            self.signature,
            [m[e] for e in self.elements],
            {r: {tuple(m[x] for x in t) for t in tab} for r, tab in self.relations.items()},
            {f: {tuple(m[x] for x in k): m[v] for k, v in tab.items()}
             for f, tab in self.functions.items()},
            {c: m[v] for c, v in self.constants.items()},
        )

    def __repr__(self):
        bits = [",".join(self.elements)]
        for r in self.signature.relations:
            bits.append(f"{r}={sorted(self.rel(r))}")
        for f in self.signature.functions:
            bits.append(f"{f}={dict(sorted(self.fn(f).items()))}")
        if self.constants:
            bits.append(f"const={dict(self.constants)}")
        return f"Structure({'; '.join(bits)})"


def validate_structure(raw):
    """Check every structure invariant and return a canonically ordered copy."""
    sig = raw.signature
    elements = list(raw.elements)
    if len(set(elements)) != len(elements):
        raise StructureError("duplicate element names")
    for e in elements:
        if not isinstance(e, str):
            raise StructureError(f"element names must be strings, got {e!r}")
    domain = set(elements)
    if not domain and sig.constants:
        raise ConstantInEmptyDomain("a signature with constants needs a nonempty domain")

    for name in raw.relations:
        if name not in sig.relations:
            raise UnknownSymbol(f"relation table for undeclared symbol {name!r}")
    for name in raw.functions:
        if name not in sig.functions:
            raise UnknownSymbol(f"function table for undeclared symbol {name!r}")
    for name in raw.constants:
        if name not in sig.constants:
            raise UnknownSymbol(f"assignment for undeclared constant {name!r}")

    rels = {}
    for name, arity in sig.relations.items():
        tab = raw.relations.get(name, frozenset())
        for t in tab:
            if len(t) != arity:
                raise ArityMismatch(f"{name}: tuple {t} has length {len(t)}, expected {arity}")
            for x in t:
                if x not in domain:
                    raise ForeignElement(f"{name}: tuple {t} mentions unknown element {x!r}")
        rels[name] = frozenset(tab)

    funs = {}
    for name, arity in sig.functions.items():
        tab = raw.functions.get(name, {})
        for args, value in tab.items():
            if len(args) != arity:
                raise ArityMismatch(f"{name}: row {args} has length {len(args)}, expected {arity}")
            for x in itertools.chain(args, (value,)):
                if x not in domain:
                    raise ForeignElement(f"{name}: row {args}->{value} mentions unknown element {x!r}")
        for args in itertools.product(elements, repeat=arity):
            if args not in tab:
                raise MissingFunctionRow(f"{name}: no value for {args}")
        funs[name] = dict(tab)

    consts = {}
    for name in sig.constants:
        if name not in raw.constants:
            raise ConstantInEmptyDomain(f"constant {name!r} has no interpretation")
        value = raw.constants[name]
        if value not in domain:
            raise ForeignElement(f"constant {name!r} interpreted by unknown element {value!r}")
        consts[name] = value

    return Structure(sig, tuple(sorted(elements)), rels, funs, consts, raw.annotations)


@dataclass(frozen=True)
class Morphism:
    source: Structure
    target: Structure
    map: Mapping[str, str]
    mode: str = "embedding"

    def __post_init__(self):
        if self.mode not in ("homomorphism", "embedding"):
            raise ValueError(f"unknown morphism mode {self.mode!r}")
        object.__setattr__(self, "map", MappingProxyType(dict(self.map)))

    def __reduce__(self):
        return (Morphism, (self.source, self.target, dict(self.map), self.mode))

    def __call__(self, x):
        return self.map[x]


def inclusion(small, big, mode="embedding"):
    return Morphism(small, big, {e: e for e in small.elements}, mode)


def check_morphism(m):
    """True iff ``m`` is a homomorphism (resp. embedding) in its declared mode."""
    src, tgt, h = m.source, m.target, m.map
    if src.signature != tgt.signature:
        raise SignatureMismatch("source and target have different signatures")
    tgt_dom = tgt.element_set
    for e in src.elements:
        if e not in h or h[e] not in tgt_dom:
            return False
    embedding = m.mode == "embedding"
    if embedding and len({h[e] for e in src.elements}) != src.size:
        return False
    for c, v in src.constants.items():
        if h[v] != tgt.constants[c]:
            return False
    for f in src.signature.functions:
        src_tab, tgt_tab = src.fn(f), tgt.fn(f)
        for args, v in src_tab.items():
            if tgt_tab[tuple(h[x] for x in args)] != h[v]:
                return False
    for r, arity in src.signature.relations.items():
        src_tab, tgt_tab = src.rel(r), tgt.rel(r)
        for t in src_tab:
            if tuple(h[x] for x in t) not in tgt_tab:
                return False
        if embedding:
            # reflect: every target tuple over the image must come from the source
            inv = {h[e]: e for e in src.elements}
            for t in tgt_tab:
                if all(x in inv for x in t) and tuple(inv[x] for x in t) not in src_tab:
                    return False
    return True


def restrict(d, subset):
    """Induced substructure on ``subset``."""
    sub = set(subset)
    if not sub <= d.element_set:
        raise StructureError("subset contains elements outside the structure")
    for c, v in d.constants.items():
        if v not in sub:
            raise ConstantOutsideSubset(f"constant {c} = {v!r} lies outside the subset")
    funs = {}
    for f, arity in d.signature.functions.items():
        tab = {}
        for args in itertools.product(sorted(sub), repeat=arity):
            v = d.fn(f)[args]
            if v not in sub:
                raise NotClosedUnderFunctions(f"{f}{args} = {v!r} leaves the subset")
            tab[args] = v
        funs[f] = tab
    rels = {r: {t for t in d.rel(r) if all(x in sub for x in t)} for r in d.signature.relations}
    return Structure.build(d.signature, sorted(sub), rels, funs, dict(d.constants))


def reduct(a, sub):
    """Forget every symbol not listed in ``sub``."""
    for name, k in sub.relations.items():
        if name not in a.signature.relations:
            raise UnknownSymbol(f"relation {name!r} not in the signature")
        if a.signature.relations[name] != k:
            raise ArityMismatch(f"relation {name}: arity {k} vs {a.signature.relations[name]}")
    for name, k in sub.functions.items():
        if name not in a.signature.functions:
            raise UnknownSymbol(f"function {name!r} not in the signature")
        if a.signature.functions[name] != k:
            raise ArityMismatch(f"function {name}: arity {k} vs {a.signature.functions[name]}")
    for name in sub.constants:
        if name not in a.signature.constants:
            raise UnknownSymbol(f"constant {name!r} not in the signature")
    return Structure.build(
        sub,
        a.elements,
        {r: a.rel(r) for r in sub.relations},
        {f: a.fn(f) for f in sub.functions},
        {c: a.constants[c] for c in sub.constants},
    )


def _same_profile(a, b):
    if a.size != b.size:
        return False
    for r in a.signature.relations:
        if len(a.rel(r)) != len(b.rel(r)):
            return False
    return True


def find_isomorphism(a, b):
    """First isomorphism ``a -> b`` in lexicographic backtracking order, or None."""
    if a.signature != b.signature:
        raise SignatureMismatch("structures have different signatures")
    if not _same_profile(a, b):
        return None
    fixed = {}
    for c, v in a.constants.items():
        w = b.constants[c]
        if fixed.setdefault(v, w) != w:
            return None
    if len(set(fixed.values())) != len(fixed):
        return None

    src = list(a.elements)
    tgt = list(b.elements)
    # per element invariant: how often it occurs at each position of each relation
    def profile(s, e):
        out = []
        for r, k in s.signature.relations.items():
            tab = s.rel(r)
            for i in range(k):
                out.append(sum(1 for t in tab if t[i] == e))
            out.append(sum(1 for t in tab if all(x == e for x in t)))
        for f, k in s.signature.functions.items():
            out.append(sum(1 for v in s.fn(f).values() if v == e))
        return tuple(out)

    prof_b = {e: profile(b, e) for e in tgt}
    prof_a = {e: profile(a, e) for e in src}

    rel_items = list(a.signature.relations.items())
    fun_items = list(a.signature.functions.items())

    def consistent(h, new):
        for r, _ in rel_items:
            ta, tb = a.rel(r), b.rel(r)
            for t in ta:
                if new in t and all(x in h for x in t):
                    if tuple(h[x] for x in t) not in tb:
                        return False
        # reflected tuples: count check over the assigned part
        for r, k in rel_items:
            ta, tb = a.rel(r), b.rel(r)
            dom = set(h)
            img = {h[x] for x in dom}
            na = sum(1 for t in ta if all(x in dom for x in t))
            nb = sum(1 for t in tb if all(x in img for x in t))
            if na != nb:
                return False
        for f, _ in fun_items:
            fa, fb = a.fn(f), b.fn(f)
            for args, v in fa.items():
                if v in h and all(x in h for x in args) and (new == v or new in args):
                    if fb[tuple(h[x] for x in args)] != h[v]:
                        return False
        return True

    order = [e for e in src if e not in fixed]
    h = dict(fixed)
    if not all(consistent(h, e) for e in list(h)):
        return None
    used = set(h.values())

    def extend(i):
        if i == len(order):
            return True
        e = order[i]
        for w in tgt:
            if w in used or prof_a[e] != prof_b[w]:
                continue
            h[e] = w
            used.add(w)
            if consistent(h, e) and extend(i + 1):
                return True
            del h[e]
            used.discard(w)
        return False

    if not extend(0):
        return None
    m = Morphism(a, b, h, "embedding")
    if not check_morphism(m):
        return None
    return m


@dataclass(frozen=True)
class AdjacencySpec:
    """Directed adjacency triples ``(symbol, m, n)`` with 1-based positions."""

    triples: frozenset
    include_functions: bool = False

    def __post_init__(self):
        object.__setattr__(self, "triples", frozenset(tuple(t) for t in self.triples))


def _edges(a, spec):
    edges = set()
    for sym, m, n in spec.triples:
        if sym in a.signature.relations:
            arity = a.signature.relations[sym]
            tuples = a.rel(sym)
        elif spec.include_functions and sym in a.signature.functions:
            arity = a.signature.functions[sym] + 1
            tuples = [args + (v,) for args, v in a.fn(sym).items()]
        else:
            raise UnknownSymbol(f"adjacency symbol {sym!r} not usable here")
        if m == n or not (1 <= m <= arity and 1 <= n <= arity):
            raise ArityMismatch(f"bad positions ({m}, {n}) for {sym}/{arity}")
        for t in tuples:
            edges.add((t[m - 1], t[n - 1]))
    return edges


def is_connected(a, spec):
    """Every ordered pair of elements is joined by a directed path of spec-edges."""
    if a.size == 0:
        raise EmptyDomain("connectedness is undefined on the empty structure")
    succ = {e: set() for e in a.elements}
    for x, y in _edges(a, spec):
        succ[x].add(y)
    for start in a.elements:
        seen = {start}
        stack = [start]
        while stack:
            x = stack.pop()
            for y in succ[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        if len(seen) != a.size:
            return False
    return True


@dataclass(frozen=True)
class TbaTriple:
    a: Structure
    b: Structure
    c: Structure

    @property
    def signature(self):
        return self.c.signature

    @property
    def union(self):
        return sorted(self.a.element_set | self.b.element_set)

    @property
    def a_only(self):
        return sorted(self.a.element_set - self.b.element_set)

    @property
    def b_only(self):
        return sorted(self.b.element_set - self.a.element_set)


def validate_tba(a, b, c):
    if not (a.signature == b.signature == c.signature):
        raise SignatureMismatch("triple members have different signatures")
    if c.size == 0 and c.signature.constants:
        raise EmptyCWithConstants("C may be empty only when there are no constants")
    if c.element_set != a.element_set & b.element_set:
        raise IntersectionMismatch(
            f"C = {sorted(c.element_set)} but A & B = {sorted(a.element_set & b.element_set)}")
    for name, big in (("A", a), ("B", b)):
        if not check_morphism(inclusion(c, big)):
            raise NotSubstructure(f"C is not a substructure of {name}")
    return TbaTriple(a, b, c)


def all_tuples(elements: Iterable[str], arity: int):
    return itertools.product(elements, repeat=arity)
