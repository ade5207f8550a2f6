"""Explicit amalgams on the union ``A | B`` of a triple.

Binary relations are merged either as a plain union or, for transitive
relations, with the cross pairs ``d R c R e`` mediated by an element ``c`` of
C added in both directions.  Unary operations are the union of the two
tables.  Operations of higher arity take their values from the linear forcing
fixpoint, with the default element (least name of ``A | B``) everywhere else.
Every result is re-checked against the theory and the two inclusions before it
is returned.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

from .errors import (
    ConstantsPresent, IneligibleTheory, NotBinary, NotDisjoint, NotPartialOrder,
    NotUnionDomain, OverlapNotSingleton, OverlappingSignatures, PartFailed,
    PostVerificationFailed, PreconditionViolated, SharedNotTransitive, SharedTablesDiffer,
    AmalgamError,
)
from .linear import build_union, fill_functions, force_values, verify_inclusions, amalgamate_linear
from .logic import (
    And, Implies, RelAtom, Sentence, Theory, Var, declared, eligibility, is_linear, satisfies,
)
from .structures import (
    Morphism, Structure, TbaTriple, reduct, validate_tba,
)


@dataclass(frozen=True)
class AmalgamResult:
    d: Structure
    embed_a: Morphism
    embed_b: Morphism
    method: str
    super_witness_relations: frozenset = frozenset()

    @classmethod
    def of(cls, t, d, method, maps=None):
        ma, mb = maps or ({e: e for e in t.a.elements}, {e: e for e in t.b.elements})
        d = d.with_annotations(method=method)
        sup = frozenset()
        if maps is None:
            sup = frozenset(r for r in t.signature.binary_relations() if check_super_witness(t, d, r))
        return cls(d, Morphism(t.a, d, ma), Morphism(t.b, d, mb), method, sup)


@dataclass(frozen=True)
class CoarsenessMap:
    """Pairs ``(finer, coarser)`` of binary relation symbols."""

    pairs: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "pairs", frozenset(tuple(p) for p in self.pairs))


# ---------------------------------------------------------------- relations


def amalgamate_relation(t, r, transitive):
    if t.signature.relations.get(r) != 2:
        raise NotBinary(f"{r} is not a binary relation")
    ra, rb = t.a.rel(r), t.b.rel(r)
    out = set(ra) | set(rb)
    if transitive and t.c.size:
        cs = t.c.element_set
        a_only, b_only = t.a_only, t.b_only
        for d in a_only:
            for e in b_only:
                if any((d, c) in ra and (c, e) in rb for c in cs):
                    out.add((d, e))
                if any((e, c) in rb and (c, d) in ra for c in cs):
                    out.add((e, d))
    return frozenset(out)


def check_super_witness(t, d, r):
    if d.element_set != t.a.element_set | t.b.element_set:
        raise NotUnionDomain("D is not the union of A and B")
    rd, ra, rb = d.rel(r), t.a.rel(r), t.b.rel(r)
    cs = t.c.elements
    for a in t.a_only:
        for b in t.b_only:
            if (a, b) in rd and not any((a, c) in ra and (c, b) in rb for c in cs):
                return False
            if (b, a) in rd and not any((b, c) in rb and (c, a) in ra for c in cs):
                return False
    return True


def _union_relation(t, r):
    return t.a.rel(r) | t.b.rel(r)


def _post_verify(t, d, th):
    verdict = satisfies(d, th)
    if not verdict:
        raise PostVerificationFailed(verdict.axiom, verdict.witness)
    verify_inclusions(t, d)


def _functions_by_forcing(t, th):
    eqs = [e for e in th.equations if is_linear(e)]
    return fill_functions(t, force_values(t, eqs).values_only())


def amalgamate_cases(t, th, transitive, method):
    """Merge every binary relation with the given rule, no eligibility check."""
    rels = {}
    for r, k in t.signature.relations.items():
        if k == 2 and r in transitive:
            rels[r] = amalgamate_relation(t, r, True)
        else:
            rels[r] = _union_relation(t, r)
    d = build_union(t, rels, _functions_by_forcing(t, th), method)
    _post_verify(t, d, th)
    return AmalgamResult.of(t, d, method)


def amalgamate_4_10(t, th):
    report = eligibility(th)
    if not report:
        raise IneligibleTheory("; ".join(report.reasons))
    return amalgamate_cases(t, th, report.transitive, "thm-4-10")


# ---------------------------------------------------------------- multiposets


def linearize(order, domain):
    """Total order extending ``order``: repeatedly emit the least minimal element."""
    domain = sorted(domain)
    strict = {(x, y) for (x, y) in order if x != y}
    for (x, y) in strict:
        if (y, x) in strict:
            raise NotPartialOrder(f"{x} and {y} are related both ways")
    preds = {e: set() for e in domain}
    for (x, y) in strict:
        if x not in preds or y not in preds:
            raise NotPartialOrder(f"pair {(x, y)} leaves the domain")
        preds[y].add(x)
    placed = []
    left = set(domain)
    while left:
        ready = [e for e in sorted(left) if not (preds[e] & left)]
        if not ready:
            raise NotPartialOrder("the relation has a cycle")
        e = ready[0]
        placed.append(e)
        left.discard(e)
    out = set()
    for i, x in enumerate(placed):
        for y in placed[i:]:
            out.add((x, y))
    return frozenset(out)


def _is_partial_order(rel, els):
    for x in els:
        if (x, x) not in rel:
            return False
    for (x, y) in rel:
        if x != y and (y, x) in rel:
            return False
        for z in els:
            if (y, z) in rel and (x, z) not in rel:
                return False
    return True


def _is_total(rel, els):
    return all((x, y) in rel or (y, x) in rel for x in els for y in els)


def _closure(rel):
    rel = set(rel)
    changed = True
    while changed:
        changed = False
        succ = {}
        for (x, y) in rel:
            succ.setdefault(x, set()).add(y)
        for (x, y) in list(rel):
            for z in succ.get(y, ()):
                if (x, z) not in rel:
                    rel.add((x, z))
                    changed = True
    return rel


def amalgamate_multiposet(t, coarseness, linear, orders=None):
    sig = t.signature
    pairs = set(coarseness.pairs)
    linear = set(linear)
    orders = set(orders) if orders is not None else set(linear) | {s for p in pairs for s in p}
    orders |= linear | {s for p in pairs for s in p}
    for r in sorted(orders):
        if sig.relations.get(r) != 2:
            raise PreconditionViolated(r, "not a binary relation")
        for name, s in (("A", t.a), ("B", t.b), ("C", t.c)):
            if not _is_partial_order(s.rel(r), s.elements):
                raise PreconditionViolated(r, f"not a partial order in {name}")
            if r in linear and not _is_total(s.rel(r), s.elements):
                raise PreconditionViolated(r, f"not total in {name}")
    for fine, coarse in sorted(pairs):
        for name, s in (("A", t.a), ("B", t.b), ("C", t.c)):
            if not s.rel(fine) <= s.rel(coarse):
                raise PreconditionViolated(coarse, f"not coarser than {fine} in {name}")
        if fine in linear and coarse not in linear:
            raise PreconditionViolated(coarse, f"coarser than the linear order {fine} but not linear")

    tables = {r: amalgamate_relation(t, r, True) for r in sorted(orders)}

    # linear orders tied by coarseness must coincide; give each group one linearization
    parent = {r: r for r in linear}

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    for fine, coarse in pairs:
        if fine in linear and coarse in linear:
            a, b = sorted((find(fine), find(coarse)))
            parent[b] = a
    groups = {}
    for r in sorted(linear):
        groups.setdefault(find(r), []).append(r)

    def below(r, seen):
        out = {r}
        for fine, coarse in pairs:
            if coarse == r and fine not in seen:
                seen.add(fine)
                out |= below(fine, seen)
        return out

    for members in groups.values():
        base = set()
        for r in members:
            for s in below(r, set(members)):
                base |= tables[s]
        lin = linearize(_closure(base), t.union)
        for r in members:
            tables[r] = lin

    rels = {r: (tables[r] if r in tables else _union_relation(t, r)) for r in sig.relations}
    funcs = fill_functions(t, force_values(t, []).values_only())
    d = build_union(t, rels, funcs, "multiposet")
    els = d.elements
    for r in orders:
        if not _is_partial_order(d.rel(r), els) or (r in linear and not _is_total(d.rel(r), els)):
            raise PostVerificationFailed(f"order {r}")
    for fine, coarse in pairs:
        if not d.rel(fine) <= d.rel(coarse):
            raise PostVerificationFailed(f"coarser({coarse}, {fine})")
    verify_inclusions(t, d)
    return AmalgamResult.of(t, d, "multiposet")


def multiposet_shape(th):
    """(orders, coarseness, linear) when ``th`` only speaks about orders, else None."""
    if th.sentences or th.equations:
        return None
    allowed = {"transitive", "reflexive", "antisymmetric", "linear", "coarser"}
    if any(a.kind not in allowed for a in th.atoms):
        return None
    orders = {r for r, k in th.signature.relations.items()
              if k == 2 and all(declared(th, kind, r)
                                for kind in ("transitive", "reflexive", "antisymmetric"))}
    for a in th.atoms:
        if any(x not in orders for x in a.args):
            return None
    pairs = {(a.args[1], a.args[0]) for a in th.atoms if a.kind == "coarser"}
    linear = {a.args[0] for a in th.atoms if a.kind == "linear"}
    return orders, CoarsenessMap(pairs), linear


# ---------------------------------------------------------------- merges


def _triple_reduct(t, sig):
    return validate_tba(reduct(t.a, sig), reduct(t.b, sig), reduct(t.c, sig))


def _join(t, results, method):
    rels, funcs = {}, {}
    for res in results:
        d = res.d
        for r in d.signature.relations:
            rels[r] = d.rel(r)
        for f in d.signature.functions:
            funcs[f] = dict(d.fn(f))
    d = build_union(t, rels, funcs, method)
    verify_inclusions(t, d)
    return d


def merge_disjoint(t, parts):
    seen = {}
    for i, (sig, _th) in enumerate(parts):
        for s in sig.symbols:
            if s in seen:
                raise OverlappingSignatures(f"{s} occurs in parts {seen[s]} and {i}")
            seen[s] = i
    if set(seen) != t.signature.symbols:
        raise PreconditionViolated("parts", "the part signatures do not cover the triple's signature")
    results = []
    for i, (sig, th) in enumerate(parts):
        try:
            results.append(amalgamate(_triple_reduct(t, sig), th.with_signature(sig)
                                      if th.signature != sig else th))
        except AmalgamError as exc:
            raise PartFailed(i, exc) from exc
    d = _join(t, results, "merge-disjoint")
    full = Theory(t.signature, [a for _, th in parts for a in th.atoms],
                  [s for _, th in parts for s in th.sentences],
                  [e for _, th in parts for e in th.equations])
    _post_verify(t, d, full)
    return AmalgamResult.of(t, d, "merge-disjoint")


def merge_shared_transitive(t, parts, shared):
    for i, (sig, th) in enumerate(parts):
        if shared not in sig.relations or sig.relations[shared] != 2:
            raise PreconditionViolated(shared, f"not a binary relation of part {i}")
    for (i, (s1, _)), (j, (s2, _)) in itertools.combinations(enumerate(parts), 2):
        common = s1.symbols & s2.symbols
        if common != {shared}:
            raise OverlapNotSingleton(f"parts {i} and {j} share {sorted(common)}")
    for i, (_sig, th) in enumerate(parts):
        if not declared(th, "transitive", shared):
            raise SharedNotTransitive(f"part {i} does not declare {shared} transitive")
    covered = set().union(*(sig.symbols for sig, _ in parts)) if parts else set()
    if covered != t.signature.symbols:
        raise PreconditionViolated("parts", "the part signatures do not cover the triple's signature")
    results = []
    for i, (sig, th) in enumerate(parts):
        sub = _triple_reduct(t, sig)
        try:
            res = amalgamate_4_10(sub, th)
        except AmalgamError as exc:
            raise PartFailed(i, exc) from exc
        if shared not in res.super_witness_relations:
            raise PartFailed(i, f"{shared} is not super-witnessed")
        results.append(res)
    tables = {res.d.rel(shared) for res in results}
    if len(tables) > 1:
        raise SharedTablesDiffer(f"parts disagree on {shared}")
    d = _join(t, results, "merge-shared-transitive")
    full = Theory(t.signature, [a for _, th in parts for a in th.atoms],
                  [s for _, th in parts for s in th.sentences],
                  [e for _, th in parts for e in th.equations])
    _post_verify(t, d, full)
    return AmalgamResult.of(t, d, "merge-shared-transitive")


# ---------------------------------------------------------------- R;R implies S


def _r_implies_s_theory(sig, r, s):
    x, y, z = Var("x"), Var("y"), Var("z")
    body = Implies(And((RelAtom(r, (x, y)), RelAtom(r, (y, z)))), RelAtom(s, (x, z)))
    return Theory(sig, sentences=[Sentence((("forall", "x"), ("forall", "y"), ("forall", "z")),
                                           body, general=True)])


def amalgamate_r_implies_s(t, r="R", s="S"):
    sig = t.signature
    for sym in (r, s):
        if sig.relations.get(sym) != 2:
            raise PreconditionViolated(sym, "not a binary relation")
    th = _r_implies_s_theory(sig, r, s)
    for name, part in (("A", t.a), ("B", t.b), ("C", t.c)):
        verdict = satisfies(part, th)
        if not verdict:
            raise PreconditionViolated(s, f"{name} violates {r};{r} => {s} at {verdict.witness}")
    rd = _union_relation(t, r)
    succ = {}
    for (x, y) in rd:
        succ.setdefault(x, set()).add(y)
    sd = set(_union_relation(t, s))
    for (x, f) in rd:
        for y in succ.get(f, ()):
            sd.add((x, y))
    rels = {q: _union_relation(t, q) for q in sig.relations}
    rels[r], rels[s] = rd, frozenset(sd)
    d = build_union(t, rels, _functions_by_forcing(t, Theory(sig)), "r-implies-s")
    _post_verify(t, d, th)
    return AmalgamResult.of(t, d, "r-implies-s")


# ---------------------------------------------------------------- joint embeddings


def jep_construct(a, b, th, variant="DJEPU"):
    sig = a.signature
    if sig.constants:
        raise ConstantsPresent("disjoint joint embeddings are impossible with constants")
    if a.element_set & b.element_set:
        raise NotDisjoint(f"shared elements {sorted(a.element_set & b.element_set)}")
    if variant not in ("DJEPU", "JEPU-linear"):
        raise ValueError(f"unknown variant {variant!r}")
    empty = Structure.build(sig, [])
    t = TbaTriple(a, b, empty)
    rels = {r: _union_relation(t, r) for r in sig.relations}
    if variant == "JEPU-linear":
        for atom in th.atoms:
            if atom.kind == "linear":
                r = atom.args[0]
                rels[r] = rels[r] | {(x, y) for x in a.elements for y in b.elements}
    d = build_union(t, rels, _functions_by_forcing(t, th), variant)
    _post_verify(t, d, th)
    return AmalgamResult.of(t, d, variant)


# ---------------------------------------------------------------- dispatch

METHODS = ("auto", "case-a", "case-b", "thm-4-10", "multiposet", "linear-variety",
           "r-implies-s", "jep")


def amalgamate(t, th, method="auto"):
    """Run one of the union constructions on a validated triple."""
    if method == "auto":
        if eligibility(th):
            return amalgamate_4_10(t, th)
        shape = multiposet_shape(th)
        if shape is not None:
            orders, cmap, linear = shape
            res = amalgamate_multiposet(t, cmap, linear, orders)
            _post_verify(t, res.d, th)
            return res
        if not th.atoms and not th.sentences and th.equations:
            return amalgamate_linear(t, th.equations)
        raise IneligibleTheory("; ".join(eligibility(th).reasons) or "no union method applies")
    if method == "case-a":
        return amalgamate_cases(t, th, set(), "case-a")
    if method == "case-b":
        return amalgamate_cases(t, th, set(t.signature.binary_relations()), "case-b")
    if method == "thm-4-10":
        return amalgamate_4_10(t, th)
    if method == "multiposet":
        shape = multiposet_shape(th)
        if shape is None:
            raise IneligibleTheory("the theory is not a multiposet theory")
        orders, cmap, linear = shape
        res = amalgamate_multiposet(t, cmap, linear, orders)
        _post_verify(t, res.d, th)
        return res
    if method == "linear-variety":
        if th.atoms or th.sentences:
            raise IneligibleTheory("only equations are allowed for the linear-variety method")
        return amalgamate_linear(t, th.equations)
    if method == "r-implies-s":
        return amalgamate_r_implies_s(t)
    if method == "jep":
        if t.c.size:
            raise NotDisjoint("the jep method needs an empty C")
        variant = "JEPU-linear" if any(a.kind == "linear" for a in th.atoms) else "DJEPU"
        return jep_construct(t.a, t.b, th, variant)
    raise ValueError(f"unknown method {method!r}")
