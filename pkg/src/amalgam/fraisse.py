"""Finite approximations of Fraisse limits.

A chain ``M_0 <= M_1 <= ...`` is grown one element at a time: each round picks
a pending extension request ``(S, E)`` (a small substructure S of the current
M and a one-point extension E of S not yet realized in M over S) and
amalgamates M with E over S on the union of their domains.  The round-robin
strategy serves requests first come, first served; requests that appear in
the same round are queued in the canonical request order.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

from .construct import amalgamate, multiposet_shape
from .errors import AmalgamError, AmalgamationFailed, IneligibleTheory
from .logic import eligibility
from .search import canonical_key, decide_into_union, extensions
from .structures import check_morphism, inclusion, restrict, validate_tba

STRATEGIES = ("round-robin", "random")


@dataclass(frozen=True)
class GrowthSchedule:
    steps: int
    seed: int = 0
    strategy: str = "round-robin"
    max_k: int = 2

    def __post_init__(self):
        if self.steps < 0:
            raise ValueError("steps must be nonnegative")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")


def _new_name(taken, stem="n"):
    i = 1
    while f"{stem}{i}" in taken:
        i += 1
    return f"{stem}{i}"


_EXT_CACHE = {}


def one_point_extensions(a, th, name=None):
    """Models on ``a`` plus one new element extending ``a``, up to isomorphism over ``a``."""
    name = name or _new_name(set(a.elements))
    key = (a, th, name)
    got = _EXT_CACHE.get(key)
    if got is None:
        if len(_EXT_CACHE) > 4096:
            _EXT_CACHE.clear()
        got = _EXT_CACHE[key] = extensions(a, th, [name])
    return list(got)


def substructures(m, k):
    """Subsets of size <= k closed under the operations and holding the constants."""
    consts = set(m.constants.values())
    out = []
    for size in range(k + 1):
        for sub in itertools.combinations(m.elements, size):
            if not consts <= set(sub):
                continue
            try:
                out.append(restrict(m, sub))
            except AmalgamError:
                continue
    return out


def _realizes(m, s, e, new, x):
    """Does ``new -> x`` (identity on S) embed E into M?"""
    if x in s.element_set:
        return False
    rename = {v: v for v in s.elements}
    rename[new] = x
    els = list(e.elements)
    for r, k in e.signature.relations.items():
        er, mr = e.rel(r), m.rel(r)
        for t in itertools.product(els, repeat=k):
            if new in t and ((t in er) != (tuple(rename[v] for v in t) in mr)):
                return False
    for f, k in e.signature.functions.items():
        ef, mf = e.fn(f), m.fn(f)
        for t in itertools.product(els, repeat=k):
            if new in t and mf[tuple(rename[v] for v in t)] != rename[ef[t]]:
                return False
    return True


def realized(m, s, e, new):
    return any(_realizes(m, s, e, new, x) for x in m.elements)


def _requests(m, th, k, with_ids=False):
    """All (S, E, new name, realized flag), in the canonical request order.

    With ``with_ids`` each item also carries a name-independent request id.
    """
    new = _new_name(set(m.elements))
    out = []
    for s in substructures(m, k):
        skey = canonical_key(s)
        for e in one_point_extensions(s, th, new):
            ekey = canonical_key(e, s.elements, [new])
            order = (s.size, skey, ekey, tuple(s.elements))
            out.append((order, s, e, new))
    out.sort(key=lambda item: item[0])
    if with_ids:
        return [(s, e, new, realized(m, s, e, new), (o[3], o[2])) for o, s, e, new in out]
    return [(s, e, new, realized(m, s, e, new)) for _o, s, e, new in out]


def _union_method_available(th):
    return bool(eligibility(th)) or multiposet_shape(th) is not None or (
        not th.atoms and not th.sentences and th.equations)


def grow_chain(start, th, sched):
    if not _union_method_available(th):
        raise IneligibleTheory("no union amalgamation method is registered for this theory")
    rng = random.Random(sched.seed)
    first_seen = {}
    m = start
    for round_no in range(1, sched.steps + 1):
        pending = []
        for s, e, new, ok, rid in _requests(m, th, sched.max_k, with_ids=True):
            if not ok:
                first_seen.setdefault(rid, (round_no, len(first_seen)))
                pending.append((first_seen[rid], s, e, new))
        if not pending:
            continue
        if sched.strategy == "round-robin":
            _age, s, e, new = min(pending, key=lambda item: item[0])
        else:
            _age, s, e, new = pending[rng.randrange(len(pending))]
        try:
            t = validate_tba(m, e, s)
        except AmalgamError as exc:
            raise AmalgamationFailed(round_no, str(exc)) from exc
        try:
            d = amalgamate(t, th).d
        except AmalgamError:
            dec = decide_into_union(t, th, strong=True)
            if dec.witness is None:
                raise AmalgamationFailed(round_no, "no strong union amalgam exists")
            d = dec.witness.d
        if not check_morphism(inclusion(m, d)) or d.size > m.size + 1:
            raise AmalgamationFailed(round_no, "the chain step is not an extension by one point")
        m = d.with_annotations(method="fraisse")
    return m


@dataclass
class ExtensionReport:
    k: int
    total: int
    realized: int
    missing: list = field(default_factory=list)

    @property
    def fraction(self):
        return 1.0 if self.total == 0 else self.realized / self.total

    def to_json(self):
        return {"k": self.k, "total": self.total, "realized": self.realized,
                "fraction": self.fraction,
                "missing": [{"substructure": list(s), "extension": e} for s, e in self.missing]}


def _describe_extension(e, new):
    parts = []
    for r in e.signature.relations:
        parts.extend(f"{r}{t}" for t in sorted(e.rel(r)) if new in t)
    for f in e.signature.functions:
        parts.extend(f"{f}{k}={v}" for k, v in sorted(e.fn(f).items()) if new in k or v == new)
    return ", ".join(parts) or "(no relations)"


def extension_check(m, th, k):
    reqs = _requests(m, th, k)
    missing = [(s.elements, _describe_extension(e, new)) for s, e, new, ok in reqs if not ok]
    return ExtensionReport(k, len(reqs), len(reqs) - len(missing), missing)
