"""Brute-force reference implementations used to check the library.

Nothing here imports the search engine or the formula evaluator: models are
recognized by plain Python predicates and candidate spaces are enumerated
without pruning.
"""
import itertools

from amalgam.structures import Structure


def refl(els):
    return {(x, x) for x in els}


def mk(sig, els, rels=None, funs=None, consts=None):
    return Structure.build(sig, list(els), rels or {}, funs or {}, consts or {})


def is_poset(rel, els):
    if any((x, x) not in rel for x in els):
        return False
    if any(x != y and (y, x) in rel for x, y in rel):
        return False
    return all((x, z) in rel for x, y in rel for y2, z in rel if y == y2)


def is_total(rel, els):
    return all((x, y) in rel or (y, x) in rel for x in els for y in els)


def is_graph(rel, els):
    return all((y, x) in rel and x != y for x, y in rel)


def all_binary_relations(els):
    pairs = [(x, y) for x in els for y in els]
    for bits in itertools.product((False, True), repeat=len(pairs)):
        yield {p for p, b in zip(pairs, bits) if b}


def labeled_posets(els):
    """All partial orders on ``els`` (reflexive pairs forced, rest enumerated)."""
    off = [(x, y) for x in els for y in els if x != y]
    out = []
    for bits in itertools.product((False, True), repeat=len(off)):
        rel = refl(els) | {p for p, b in zip(off, bits) if b}
        if is_poset(rel, els):
            out.append(frozenset(rel))
    return out


def same_tables(a, b, perm):
    """Does the bijection ``perm`` carry every table of a onto b?"""
    for r in a.signature.relations:
        if {tuple(perm[x] for x in t) for t in a.rel(r)} != set(b.rel(r)):
            return False
    for f in a.signature.functions:
        fb = b.fn(f)
        if any(fb[tuple(perm[x] for x in k)] != perm[v] for k, v in a.fn(f).items()):
            return False
    return all(perm[a.constants[c]] == b.constants[c] for c in a.signature.constants)


def brute_isomorphic(a, b):
    if a.size != b.size:
        return False
    for p in itertools.permutations(b.elements):
        if same_tables(a, b, dict(zip(a.elements, p))):
            return True
    return False


def iso_classes(structures):
    reps = []
    for s in structures:
        if not any(brute_isomorphic(s, r) for r in reps):
            reps.append(s)
    return reps


def connected_by_closure(els, edges):
    """Warshall closure on an adjacency matrix; all pairs of distinct elements reachable."""
    idx = {e: i for i, e in enumerate(els)}
    n = len(els)
    m = [[False] * n for _ in range(n)]
    for x, y in edges:
        m[idx[x]][idx[y]] = True
    for k in range(n):
        for i in range(n):
            if m[i][k]:
                for j in range(n):
                    if m[k][j]:
                        m[i][j] = True
    return all(m[i][j] for i in range(n) for j in range(n) if i != j)


def transitive_closure(rel):
    rel = set(rel)
    while True:
        extra = {(x, z) for x, y in rel for y2, z in rel if y == y2} - rel
        if not extra:
            return rel
        rel |= extra


def union_candidates(t):
    """Every structure on A | B whose restrictions to A and B are A and B.

    Only for signatures made of binary relations and unary functions; the
    free positions are the mixed pairs and nothing else.
    """
    sig = t.signature
    els = sorted(set(t.a.elements) | set(t.b.elements))
    a_set, b_set = set(t.a.elements), set(t.b.elements)
    mixed = [(x, y) for x in els for y in els
             if not ({x, y} <= a_set or {x, y} <= b_set)]
    rel_choices = []
    for r in sig.relations:
        base = set(t.a.rel(r)) | set(t.b.rel(r))
        options = []
        for bits in itertools.product((False, True), repeat=len(mixed)):
            options.append(frozenset(base | {p for p, b in zip(mixed, bits) if b}))
        rel_choices.append(options)
    fun_tables = []
    for f in sig.functions:
        tab = dict(t.a.fn(f))
        tab.update(t.b.fn(f))
        fun_tables.append(tab)
    for rels in itertools.product(*rel_choices):
        yield mk(sig, els, dict(zip(sig.relations, rels)), dict(zip(sig.functions, fun_tables)),
                 dict(t.c.constants))
