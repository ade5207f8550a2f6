"""Exhaustive decisions of amalgamation and joint embedding properties.

Union variants are exact: the candidate amalgams live on ``A | B`` (or on a
quotient of it identifying some elements of ``A - C`` with some of ``B - C``),
a finite space that is searched completely.  The unrestricted variants allow
up to a bounded number of extra elements and answer ``NoUpToBound`` when
nothing is found.
"""
from __future__ import annotations

import itertools
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

from .construct import AmalgamResult
from .engine import Search, SearchStats, fixed_cells_from, layout_for, merge_fixed
from .errors import ConstantsPresent, PostVerificationFailed, SignatureMismatch
from .io import structure_to_json
from .logic import satisfies
from .structures import Morphism, Structure, TbaTriple, check_morphism, find_isomorphism

WITNESS, EXHAUSTED, NO_UP_TO_BOUND = "Witness", "ExhaustedNo", "NoUpToBound"


@dataclass(frozen=True)
class SearchBudget:
    max_extra_elements: Optional[int] = None
    max_candidates: Optional[int] = None
    identifications_allowed: bool = True


@dataclass
class Decision:
    verdict: str
    witness: Optional[AmalgamResult] = None
    bound: Optional[int] = None
    stats: SearchStats = field(default_factory=SearchStats)
    kind: str = ""

    @property
    def tag(self):
        return self.verdict

    def __str__(self):
        if self.verdict == NO_UP_TO_BOUND:
            return f"NoUpToBound({self.bound})"
        return self.verdict

    def to_json(self, witness_ref=None):
        out = {"property": self.kind, "verdict": self.verdict,
               "statistics": self.stats.as_dict()}
        if self.bound is not None:
            out["bound"] = self.bound
        if self.verdict == NO_UP_TO_BOUND:
            out["certificate"] = f"exhausted <= {self.bound} extra elements"
        if self.witness is not None:
            if witness_ref is not None:
                out["witness"] = witness_ref
            else:
                out["witness"] = structure_to_json(self.witness.d)
            out["embed_a"] = dict(self.witness.embed_a.map)
            out["embed_b"] = dict(self.witness.embed_b.map)
        return out


# ---------------------------------------------------------------- helpers


def _fresh_names(taken, k):
    out = []
    i = 1
    while len(out) < k:
        name = f"_{i}"
        if name not in taken:
            out.append(name)
        i += 1
    return out


def identifications(t):
    """Partial injective maps ``A - C -> B - C``: by size, then lexicographic."""
    a_only, b_only = t.a_only, t.b_only
    out = []
    for size in range(min(len(a_only), len(b_only)) + 1):
        for xs in itertools.combinations(a_only, size):
            for ys in itertools.permutations(b_only, size):
                out.append(tuple(zip(xs, ys)))
    return out


def _remaining(budget, stats):
    if budget is None or budget.max_candidates is None:
        return None
    return budget.max_candidates - stats.decisions


def _attempt(t, th, ident, k, stats, budget, strong):
    """Search one candidate shape; return an AmalgamResult or None."""
    onto = {y: x for x, y in ident}
    b_map = {e: onto.get(e, e) for e in t.b.elements}
    core = sorted(set(t.a.elements) | set(b_map.values()))
    fresh = _fresh_names(set(core), k)
    names = core + fresh
    index = {e: i for i, e in enumerate(names)}
    layout = layout_for(th, len(names))
    fixed = merge_fixed(fixed_cells_from(layout, index, t.a),
                        fixed_cells_from(layout, index, t.b, b_map))
    if fixed is None:
        return None
    remaining = _remaining(budget, stats)
    search = Search(th, names, fixed, fresh=[index[e] for e in fresh],
                    max_candidates=remaining)
    try:
        d = None
        for d in search.solutions():
            break
    finally:
        stats.add(search.stats)
    if d is None:
        return None
    a_map = {e: e for e in t.a.elements}
    method = "search"
    if k == 0 and not ident:
        res = AmalgamResult.of(t, d, method)
    else:
        res = AmalgamResult.of(t, d, method, maps=(a_map, b_map))
    _verify_witness(t, th, res, strong, union=(k == 0))
    return res


def _verify_witness(t, th, res, strong, union):
    d = res.d
    verdict = satisfies(d, th)
    if not verdict:
        raise PostVerificationFailed(verdict.axiom, verdict.witness)
    for m in (res.embed_a, res.embed_b):
        if not check_morphism(m):
            raise PostVerificationFailed("embedding check of a witness map")
    for c in t.c.elements:
        if res.embed_a.map[c] != res.embed_b.map[c]:
            raise PostVerificationFailed(f"maps disagree on {c}")
    img_a = set(res.embed_a.map.values())
    img_b = set(res.embed_b.map.values())
    if strong and img_a & img_b != {res.embed_a.map[c] for c in t.c.elements}:
        raise PostVerificationFailed("images meet outside the image of C")
    if union and img_a | img_b != d.element_set:
        raise PostVerificationFailed("D is not the union of the images")


def _check_sig(t, th):
    if not (t.a.signature == t.b.signature == t.c.signature == th.signature):
        raise SignatureMismatch("triple and theory have different signatures")


def _first(items, fn, workers):
    """First item (in order) for which ``fn`` returns a non-None value."""
    if workers is None or workers <= 1:
        for item in items:
            got = fn(item)
            if got is not None:
                return item, got
        return None
    items = list(items)
    chunk = max(1, workers * 2)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for start in range(0, len(items), chunk):
            batch = items[start:start + chunk]
            for item, got in zip(batch, pool.map(fn, batch)):
                if got is not None:
                    return item, got
    return None


class _Job:
    """Picklable search job over identification maps."""

    def __init__(self, t, th, k, strong):
        self.t, self.th, self.k, self.strong = t, th, k, strong

    def __call__(self, ident):
        stats = SearchStats()
        res = _attempt(self.t, self.th, ident, self.k, stats, None, self.strong)
        return res


# ---------------------------------------------------------------- decisions


def decide_into_union(t, th, strong, workers=1, budget=None):
    """Exact (S)APU decision on one triple."""
    _check_sig(t, th)
    stats = SearchStats()
    start = time.perf_counter()
    prop = "SAPU" if strong else "APU"
    idents = [()] if strong else identifications(t)
    found = _search_idents(t, th, idents, 0, strong, stats, budget, workers)
    stats.seconds = time.perf_counter() - start
    if found is not None:
        return Decision(WITNESS, found, None, stats, prop)
    return Decision(EXHAUSTED, None, None, stats, prop)


def _search_idents(t, th, idents, k, strong, stats, budget, workers):
    if workers and workers > 1 and len(idents) > 1 and budget is None:
        got = _first(idents, _Job(t, th, k, strong), workers)
        return None if got is None else got[1]
    for ident in idents:
        res = _attempt(t, th, ident, k, stats, budget, strong)
        if res is not None:
            return res
    return None


def default_extra(t):
    return len(t.a_only) + len(t.b_only)


def decide_bounded(t, th, strong, budget=None, workers=1):
    """(S)AP up to ``budget.max_extra_elements`` elements beyond ``A | B``."""
    _check_sig(t, th)
    budget = budget or SearchBudget()
    bound = budget.max_extra_elements
    if bound is None:
        bound = default_extra(t)
    stats = SearchStats()
    start = time.perf_counter()
    prop = "SAP" if strong else "AP"
    use_idents = not strong and budget.identifications_allowed
    idents = identifications(t) if use_idents else [()]
    for k in range(bound + 1):
        found = _search_idents(t, th, idents, k, strong, stats, budget, workers)
        if found is not None:
            stats.seconds = time.perf_counter() - start
            return Decision(WITNESS, found, bound, stats, prop)
    stats.seconds = time.perf_counter() - start
    return Decision(NO_UP_TO_BOUND, None, bound, stats, prop)


def _rename_apart(a, b):
    taken = set(a.elements)
    mapping = {}
    for e in b.elements:
        new = e
        while new in taken:
            new = new + "'"
        taken.add(new)
        mapping[e] = new
    return mapping


JEP_VARIANTS = ("JEP", "DJEP", "JEPU", "DJEPU")


def decide_jep(a, b, th, variant, budget=None, workers=1):
    if variant not in JEP_VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    if not (a.signature == b.signature == th.signature):
        raise SignatureMismatch("structures and theory have different signatures")
    disjoint = variant.startswith("D")
    if disjoint and a.signature.constants:
        raise ConstantsPresent("disjoint joint embeddings are impossible with constants")
    mapping = _rename_apart(a, b)
    b2 = b.renamed(mapping)
    empty = Structure(a.signature, (), {}, {}, {})
    t = TbaTriple(a, b2, empty)
    if variant.endswith("U"):
        dec = decide_into_union(t, th, strong=disjoint, workers=workers, budget=budget)
    else:
        dec = decide_bounded(t, th, strong=disjoint, budget=budget, workers=workers)
    dec.kind = variant
    if dec.witness is not None:
        w = dec.witness
        back = {e: w.embed_b.map[mapping[e]] for e in b.elements}
        dec.witness = AmalgamResult(w.d, w.embed_a, Morphism(b, w.d, back), w.method,
                                    w.super_witness_relations)
    return dec


# ---------------------------------------------------------------- enumeration


def _table_key(s, rename):
    out = []
    for r in s.signature.relations:
        out.append(tuple(sorted(tuple(rename[x] for x in t) for t in s.rel(r))))
    for f in s.signature.functions:
        out.append(tuple(sorted((tuple(rename[x] for x in k), rename[v])
                                for k, v in s.fn(f).items())))
    out.append(tuple(sorted((c, rename[v]) for c, v in s.constants.items())))
    return tuple(out)


def canonical_key(s, fixed=(), movable=None):
    """Least table key over all renamings that fix ``fixed`` pointwise."""
    fixed = list(fixed)
    movable = sorted(movable if movable is not None else (set(s.elements) - set(fixed)))
    slots = list(range(len(movable)))
    best = None
    for perm in itertools.permutations(slots):
        rename = {e: (0, e) for e in fixed}
        rename.update({movable[i]: (1, perm[i]) for i in slots})
        key = _table_key(s, rename)
        if best is None or key < best:
            best = key
    return best


def _invariant(s):
    prof = []
    for e in s.elements:
        row = []
        for r, k in s.signature.relations.items():
            tab = s.rel(r)
            row.extend(sum(1 for t in tab if t[i] == e) for i in range(k))
        for f in s.signature.functions:
            row.append(sum(1 for v in s.fn(f).values() if v == e))
        row.append(tuple(sorted(c for c, v in s.constants.items() if v == e)))
        prof.append(tuple(row))
    return tuple(sorted(prof))


def enumerate_structures(sig, size, th, names=None):
    """Models of ``th`` with ``size`` elements, one per isomorphism class."""
    if th.signature != sig:
        raise SignatureMismatch("theory signature differs")
    names = names or [f"e{i}" for i in range(size)]
    search = Search(th, names, fresh=range(size))
    reps = {}
    for s in search.solutions():
        inv = _invariant(s)
        bucket = reps.setdefault(inv, [])
        if any(find_isomorphism(s, r) is not None for r in bucket):
            continue
        bucket.append(s)
        yield s


def extensions(base, th, new_names):
    """Models on ``base | new_names`` extending ``base``, up to isomorphism over ``base``."""
    names = list(base.elements) + list(new_names)
    index = {e: i for i, e in enumerate(names)}
    layout = layout_for(th, len(names))
    fixed = fixed_cells_from(layout, index, base)
    search = Search(th, names, fixed, fresh=[index[e] for e in new_names])
    seen = set()
    out = []
    for s in search.solutions():
        key = canonical_key(s, base.elements, new_names)
        if key in seen:
            continue
        seen.add(key)
        out.append(s)
    return out


def enumerate_triples(th, max_c, max_side):
    sig = th.signature
    for nc in range(max_c + 1):
        c_names = [f"c{i}" for i in range(1, nc + 1)]
        for c in enumerate_structures(sig, nc, th, c_names):
            exts_a, exts_b = {}, {}
            for m in range(1, max_side - nc + 1):
                exts_a[m] = extensions(c, th, [f"a{i}" for i in range(1, m + 1)])
                exts_b[m] = [e.renamed({f"a{i}": f"b{i}" for i in range(1, m + 1)})
                             for e in exts_a[m]]
            for ma in sorted(exts_a):
                for mb in sorted(exts_b):
                    if mb < ma:
                        continue
                    for i, a in enumerate(exts_a[ma]):
                        for j, b in enumerate(exts_b[mb]):
                            if ma == mb and j < i:
                                continue
                            yield TbaTriple(a, b, c)


class _CounterJob:
    def __init__(self, th, budget):
        self.th, self.budget = th, budget

    def __call__(self, t):
        dec = decide_bounded(t, self.th, strong=False, budget=self.budget)
        return dec if dec.verdict == NO_UP_TO_BOUND else None


def search_counterexample(th, max_c, max_side, budget=None, workers=1):
    """First triple (in enumeration order) whose bounded AP search fails."""
    budget = budget or SearchBudget(max_extra_elements=2)
    got = _first(enumerate_triples(th, max_c, max_side), _CounterJob(th, budget), workers)
    if got is None:
        return None
    return got


def count_triples(th, max_c, max_side):
    return sum(1 for _ in enumerate_triples(th, max_c, max_side))
