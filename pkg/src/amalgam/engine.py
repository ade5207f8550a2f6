"""Finite model search over relation and function tables.

Every table entry is a *cell*.  A theory is compiled, for a given domain size,
into ground constraints:

* universal sentences become CNF clauses, one instance per assignment of the
  clause's variables;
* sentences with existential quantifiers are evaluated in three-valued logic
  per assignment of their leading universal block;
* ``count_leq`` atoms become global counting constraints, cardinality atoms
  are decided before the search starts.

Each constraint instance is re-examined only when a cell it read while
undecided gets a value (the value of an instance cannot change otherwise).
Clauses with a single undecided, directly assignable literal propagate that
literal.  Search is a depth-first walk over cells in a fixed order with values
tried in increasing order, so the first solution is the lexicographically
least one in that order; propagation never changes which solution comes
first.  Elements marked as *fresh* are interchangeable, and function values
among the fresh elements not yet mentioned anywhere are restricted to the
least such element.
"""
from __future__ import annotations

import itertools
import time
from dataclasses import dataclass

from .errors import BudgetExceeded
from .logic import (
    And, App, CARD_KINDS, Const, Eq, Iff, Implies, Not, Or, RelAtom, Var,
    atom_as_sentences, card_ok,
)
from .structures import Structure

TRUE, FALSE, UNKNOWN = 1, 0, -1


@dataclass
class SearchStats:
    decisions: int = 0
    propagations: int = 0
    conflicts: int = 0
    solutions: int = 0
    seconds: float = 0.0

    def add(self, other):
        self.decisions += other.decisions
        self.propagations += other.propagations
        self.conflicts += other.conflicts
        self.solutions += other.solutions
        self.seconds += other.seconds

    def as_dict(self):
        return {"decisions": self.decisions, "propagations": self.propagations,
                "conflicts": self.conflicts, "solutions": self.solutions,
                "seconds": round(self.seconds, 3)}


# ---------------------------------------------------------------- cell layout


class Layout:
    """Numbering of the cells of a signature over ``n`` elements."""

    def __init__(self, sig, n):
        self.sig, self.n = sig, n
        self.base = {}
        self.arity = {}
        self.kind = []
        self.symbol = []
        self.args = []
        pos = 0
        for c in sorted(sig.constants):
            self.base[c] = pos
            self.arity[c] = 0
            self.kind.append("c")
            self.symbol.append(c)
            self.args.append(())
            pos += 1
        for kind, table in (("r", sig.relations), ("f", sig.functions)):
            for name, k in table.items():
                self.base[name] = pos
                self.arity[name] = k
                for args in itertools.product(range(n), repeat=k):
                    self.kind.append(kind)
                    self.symbol.append(name)
                    self.args.append(args)
                pos += n ** k
        self.size = pos

    def cell(self, name, args=()):
        off = 0
        for a in args:
            off = off * self.n + a
        return self.base[name] + off

    def order_key(self, cid):
        args = self.args[cid]
        kind = self.kind[cid]
        rank = {"c": 0, "r": 1, "f": 2}[kind]
        return (max(args) if args else -1, rank, self.symbol[cid], args)


# ---------------------------------------------------------------- compilation


def _nnf(f, pos=True):
    if isinstance(f, (RelAtom, Eq)):
        return ("lit", pos, f)
    if isinstance(f, Not):
        return _nnf(f.body, not pos)
    if isinstance(f, And):
        return ("and" if pos else "or", [_nnf(p, pos) for p in f.parts])
    if isinstance(f, Or):
        return ("or" if pos else "and", [_nnf(p, pos) for p in f.parts])
    if isinstance(f, Implies):
        return _nnf(Or((Not(f.left), f.right)), pos)
    if isinstance(f, Iff):
        both = And((Implies(f.left, f.right), Implies(f.right, f.left)))
        return _nnf(both, pos)
    raise TypeError(f)


def _cnf(node):
    """List of clauses, each a list of (sign, atom)."""
    tag = node[0]
    if tag == "lit":
        return [[(node[1], node[2])]]
    if tag == "and":
        out = []
        for p in node[1]:
            out.extend(_cnf(p))
        return out
    result = [[]]
    for p in node[1]:
        sub = _cnf(p)
        result = [a + b for a in result for b in sub]
        if len(result) > 4096:
            raise ValueError("clause expansion too large")
    return result


def _lit_vars(lit):
    out = []
    _sign, atom = lit
    terms = atom.args if isinstance(atom, RelAtom) else (atom.left, atom.right)
    for t in terms:
        _collect_vars(t, out)
    return out


def _collect_vars(t, out):
    if isinstance(t, Var):
        if t.name not in out:
            out.append(t.name)
    elif isinstance(t, App):
        for a in t.args:
            _collect_vars(a, out)


class _Compiler:
    def __init__(self, layout):
        self.L = layout
        self.n = layout.n

    def term(self, t, varpos):
        """Closure (val, env, unk) -> element index or -1."""
        if isinstance(t, Var):
            i = varpos[t.name]
            return lambda val, env, unk: env[i]
        if isinstance(t, Const):
            cid = self.L.base[t.name]

            def const(val, env, unk):
                v = val[cid]
                if v < 0:
                    unk.append(cid)
                return v
            return const
        base, n = self.L.base[t.fn], self.n
        subs = [self.term(a, varpos) for a in t.args]
        if len(subs) == 1:
            s0 = subs[0]

            def app1(val, env, unk):
                a = s0(val, env, unk)
                if a < 0:
                    return -1
                cid = base + a
                v = val[cid]
                if v < 0:
                    unk.append(cid)
                return v
            return app1
        if len(subs) == 2:
            s0, s1 = subs

            def app2(val, env, unk):
                a = s0(val, env, unk)
                b = s1(val, env, unk)
                if a < 0 or b < 0:
                    return -1
                cid = base + a * n + b
                v = val[cid]
                if v < 0:
                    unk.append(cid)
                return v
            return app2

        def appn(val, env, unk):
            off = 0
            ok = True
            for s in subs:
                a = s(val, env, unk)
                if a < 0:
                    ok = False
                off = off * n + a
            if not ok:
                return -1
            cid = base + off
            v = val[cid]
            if v < 0:
                unk.append(cid)
            return v
        return appn

    def top_cell(self, t, varpos):
        """Closure giving the cell id of a top-level application (or constant)."""
        if isinstance(t, Const):
            cid = self.L.base[t.name]
            return lambda val, env: cid
        if not isinstance(t, App):
            return None
        base, n = self.L.base[t.fn], self.n
        subs = [self.term(a, varpos) for a in t.args]
        scratch = []

        def top(val, env):
            off = 0
            for s in subs:
                a = s(val, env, scratch)
                if a < 0:
                    scratch.clear()
                    return -1
                off = off * n + a
            scratch.clear()
            return base + off
        return top

    def literal(self, sign, atom, varpos):
        """Closure (val, env, unk) -> (status, assignable cell, value)."""
        if isinstance(atom, RelAtom):
            base, n = self.L.base[atom.rel], self.n
            subs = [self.term(a, varpos) for a in atom.args]
            want = 1 if sign else 0

            def rel(val, env, unk):
                off = 0
                ok = True
                for s in subs:
                    a = s(val, env, unk)
                    if a < 0:
                        ok = False
                    off = off * n + a
                if not ok:
                    return UNKNOWN, -1, 0
                cid = base + off
                v = val[cid]
                if v < 0:
                    unk.append(cid)
                    return UNKNOWN, cid, want
                return (TRUE if v == want else FALSE), -1, 0
            return rel
        L = self.term(atom.left, varpos)
        R = self.term(atom.right, varpos)
        ltop = self.top_cell(atom.left, varpos) if sign else None
        rtop = self.top_cell(atom.right, varpos) if sign else None

        def eq(val, env, unk):
            a = L(val, env, unk)
            b = R(val, env, unk)
            if a >= 0 and b >= 0:
                return (TRUE if (a == b) == sign else FALSE), -1, 0
            if sign:
                if a >= 0 and rtop is not None:
                    cid = rtop(val, env)
                    if cid >= 0 and val[cid] < 0:
                        return UNKNOWN, cid, a
                elif b >= 0 and ltop is not None:
                    cid = ltop(val, env)
                    if cid >= 0 and val[cid] < 0:
                        return UNKNOWN, cid, b
            return UNKNOWN, -1, 0
        return eq

    def formula(self, f, varpos):
        """Closure (val, env, unk) -> TRUE/FALSE/UNKNOWN for a quantifier-free formula."""
        if isinstance(f, (RelAtom, Eq)):
            lit = self.literal(True, f, varpos)
            return lambda val, env, unk: lit(val, env, unk)[0]
        if isinstance(f, Not):
            g = self.formula(f.body, varpos)

            def neg(val, env, unk):
                v = g(val, env, unk)
                return v if v == UNKNOWN else 1 - v
            return neg
        if isinstance(f, (And, Or)):
            parts = [self.formula(p, varpos) for p in f.parts]
            stop = FALSE if isinstance(f, And) else TRUE

            def junction(val, env, unk):
                res = 1 - stop
                for p in parts:
                    v = p(val, env, unk)
                    if v == stop:
                        return stop
                    if v == UNKNOWN:
                        res = UNKNOWN
                return res
            return junction
        if isinstance(f, Implies):
            return self.formula(Or((Not(f.left), f.right)), varpos)
        if isinstance(f, Iff):
            a, b = self.formula(f.left, varpos), self.formula(f.right, varpos)

            def iff(val, env, unk):
                x, y = a(val, env, unk), b(val, env, unk)
                if x == UNKNOWN or y == UNKNOWN:
                    return UNKNOWN
                return TRUE if x == y else FALSE
            return iff
        raise TypeError(f)


class _Clause:
    __slots__ = ("lits", "label")

    def __init__(self, lits, label):
        self.lits = lits
        self.label = label


class _Quantified:
    """Three-valued evaluation of a prenex sentence below its universal head."""

    __slots__ = ("quants", "body", "n", "nvars", "label")

    def __init__(self, quants, body, n, nvars, label):
        self.quants, self.body, self.n, self.nvars, self.label = quants, body, n, nvars, label

    def evaluate(self, val, env, unk):
        return self._eval(0, val, list(env) + [0] * (self.nvars - len(env)), unk)

    def _eval(self, i, val, env, unk):
        if i == len(self.quants):
            return self.body(val, env, unk)
        q, pos = self.quants[i]
        res = TRUE if q == "forall" else FALSE
        for e in range(self.n):
            env[pos] = e
            v = self._eval(i + 1, val, env, unk)
            if q == "forall":
                if v == FALSE:
                    return FALSE
                if v == UNKNOWN:
                    res = UNKNOWN
            else:
                if v == TRUE:
                    return TRUE
                if v == UNKNOWN:
                    res = UNKNOWN
        return res


class _Counter:
    __slots__ = ("cells1", "pos1", "cells2", "pos2", "label")

    def __init__(self, cells1, pos1, cells2, pos2, label):
        self.cells1, self.pos1, self.cells2, self.pos2, self.label = cells1, pos1, cells2, pos2, label

    def evaluate(self, val, unk):
        sure1 = 0
        for c in self.cells1:
            v = val[c]
            if v < 0:
                unk.append(c)
            elif v == self.pos1:
                sure1 += 1
        maybe2 = 0
        open2 = False
        for c in self.cells2:
            v = val[c]
            if v < 0:
                unk.append(c)
                maybe2 += 1
                open2 = True
            elif v == self.pos2:
                maybe2 += 1
        if sure1 > maybe2:
            return FALSE
        if unk or open2:
            return UNKNOWN
        return TRUE


class Compiled:
    """Ground constraint instances of a theory over ``n`` elements."""

    def __init__(self, theory, n):
        self.layout = L = Layout(theory.signature, n)
        self.unsat = False
        self.kinds = []     # "clause" | "quant" | "count"
        self.objs = []
        self.envs = []
        comp = _Compiler(L)
        sig = theory.signature
        sentences = []
        for a in theory.atoms:
            if a.kind in CARD_KINDS:
                if not card_ok(a.kind, a.args[0], n):
                    self.unsat = True
            elif a.kind == "count_leq":
                l1, l2 = a.args
                r1, r2 = l1.lstrip("!"), l2.lstrip("!")
                cells1 = [L.cell(r1, (x,)) for x in range(n)]
                cells2 = [L.cell(r2, (x,)) for x in range(n)]
                cnt = _Counter(cells1, 0 if l1.startswith("!") else 1,
                               cells2, 0 if l2.startswith("!") else 1, str(a))
                self.kinds.append("count")
                self.objs.append(cnt)
                self.envs.append(())
            else:
                sentences.extend((s, str(a)) for s in atom_as_sentences(a, sig))
        sentences.extend((s, str(s)) for s in theory.sentences)
        sentences.extend((e.as_sentence(), str(e)) for e in theory.equations)

        for sent, label in sentences:
            if sent.is_universal:
                for clause in _cnf(_nnf(sent.matrix)):
                    names = []
                    for lit in clause:
                        for v in _lit_vars(lit):
                            if v not in names:
                                names.append(v)
                    varpos = {v: i for i, v in enumerate(names)}
                    lits = [comp.literal(sign, atom, varpos) for sign, atom in clause]
                    cl = _Clause(lits, label)
                    for env in itertools.product(range(n), repeat=len(names)):
                        self.kinds.append("clause")
                        self.objs.append(cl)
                        self.envs.append(env)
            else:
                qs = list(sent.quantifiers)
                head = []
                while qs and qs[0][0] == "forall":
                    head.append(qs.pop(0)[1])
                names = head + [v for _, v in qs]
                varpos = {v: i for i, v in enumerate(names)}
                body = comp.formula(sent.matrix, varpos)
                quants = [(q, varpos[v]) for q, v in qs]
                obj = _Quantified(quants, body, n, len(names), label)
                for env in itertools.product(range(n), repeat=len(head)):
                    self.kinds.append("quant")
                    self.objs.append(obj)
                    self.envs.append(env)


_CACHE = {}


def compile_theory(theory, n):
    key = (theory, n)
    got = _CACHE.get(key)
    if got is None:
        if len(_CACHE) > 256:
            _CACHE.clear()
        got = _CACHE[key] = Compiled(theory, n)
    return got


# ---------------------------------------------------------------- search


class Conflict(Exception):
    pass


class Search:
    """Enumerate models of ``theory`` on the given element names.

    ``fixed`` maps cell ids to values; ``fresh`` lists indices of
    interchangeable elements.  Cells not fixed are searched.
    """

    def __init__(self, theory, names, fixed=None, fresh=(), max_candidates=None, symmetry=True):
        self.theory = theory
        self.names = list(names)
        self.n = len(self.names)
        self.comp = compile_theory(theory, self.n)
        self.L = self.comp.layout
        self.fixed = dict(fixed or {})
        self.fresh = frozenset(fresh) if symmetry else frozenset()
        self.max_candidates = max_candidates
        self.stats = SearchStats()

    # assignment bookkeeping

    def _assign(self, cid, v):
        self.val[cid] = v
        self.trail.append(cid)
        self.queue.append(cid)
        m = self.mention
        for a in self.L.args[cid]:
            m[a] += 1
        if self.L.kind[cid] != "r":
            m[v] += 1

    def _undo(self, mark):
        val, trail, m, L = self.val, self.trail, self.mention, self.L
        while len(trail) > mark:
            cid = trail.pop()
            for a in L.args[cid]:
                m[a] -= 1
            if L.kind[cid] != "r":
                m[val[cid]] -= 1
            val[cid] = -1
        self.queue.clear()

    def _check(self, i):
        """Evaluate instance ``i``; raise Conflict or propagate."""
        kind = self.comp.kinds[i]
        obj = self.comp.objs[i]
        val = self.val
        unk = []
        if kind == "clause":
            env = self.comp.envs[i]
            nunk = 0
            unit_cid, unit_v = -1, 0
            for lit in obj.lits:
                st, cid, v = lit(val, env, unk)
                if st == TRUE:
                    return
                if st == UNKNOWN:
                    nunk += 1
                    unit_cid, unit_v = cid, v
            if nunk == 0:
                raise Conflict(i)
            if nunk == 1 and unit_cid >= 0:
                if val[unit_cid] < 0:
                    self.stats.propagations += 1
                    self._assign(unit_cid, unit_v)
                    return
        elif kind == "quant":
            st = obj.evaluate(val, self.comp.envs[i], unk)
            if st == TRUE:
                return
            if st == FALSE:
                raise Conflict(i)
        else:
            st = obj.evaluate(val, unk)
            if st == TRUE:
                return
            if st == FALSE:
                raise Conflict(i)
        ws, wl = self.wset, self.watch
        for c in unk:
            s = ws[c]
            if i not in s:
                s.add(i)
                wl[c].append(i)

    def _propagate(self):
        q = self.queue
        watch = self.watch
        while q:
            cid = q.pop()
            for i in watch[cid]:
                self._check(i)

    def _values(self, cid):
        kind = self.L.kind[cid]
        if kind == "r":
            return (0, 1)
        if not self.fresh:
            return range(self.n)
        args = self.L.args[cid]
        out = []
        spare = None
        for e in range(self.n):
            if e not in self.fresh or self.mention[e] > 0 or e in args:
                out.append(e)
            elif spare is None:
                spare = e
                out.append(e)
        return out

    def _structure(self):
        L, names, val = self.L, self.names, self.val
        sig = self.theory.signature
        rels = {r: set() for r in sig.relations}
        funs = {f: {} for f in sig.functions}
        consts = {}
        for cid in range(L.size):
            k, s, args = L.kind[cid], L.symbol[cid], L.args[cid]
            if k == "r":
                if val[cid] == 1:
                    rels[s].add(tuple(names[a] for a in args))
            elif k == "f":
                funs[s][tuple(names[a] for a in args)] = names[val[cid]]
            else:
                consts[s] = names[val[cid]]
        return Structure.build(sig, names, rels, funs, consts)

    def solutions(self):
        """Yield every solution (as a Structure) in search order."""
        start = time.perf_counter()
        try:
            yield from self._run()
        finally:
            self.stats.seconds += time.perf_counter() - start

    def _run(self):
        comp, L = self.comp, self.L
        if comp.unsat:
            return
        nins = len(comp.kinds)
        self.val = [-1] * L.size
        self.trail, self.queue = [], []
        self.mention = [0] * self.n
        self.watch = [[] for _ in range(L.size)]
        self.wset = [set() for _ in range(L.size)]
        for cid, v in sorted(self.fixed.items()):
            if self.val[cid] >= 0:
                if self.val[cid] != v:
                    return
                continue
            self._assign(cid, v)
        self.queue.clear()
        try:
            for i in range(nins):
                self._check(i)
            self._propagate()
        except Conflict:
            self.stats.conflicts += 1
            return

        order = sorted((c for c in range(L.size) if c not in self.fixed), key=L.order_key)
        val = self.val
        # frames: [position in order, values, next index, trail mark]
        stack = []
        pos = 0
        while True:
            while pos < len(order) and val[order[pos]] >= 0:
                pos += 1
            if pos == len(order):
                self.stats.solutions += 1
                yield self._structure()
                frame_ok = False
            else:
                cid = order[pos]
                stack.append([pos, list(self._values(cid)), 0, len(self.trail)])
                frame_ok = False
            # advance: try next value of the top frame, backtracking as needed
            while stack:
                frame = stack[-1]
                fpos, values, idx, mark = frame
                self._undo(mark)
                if idx >= len(values):
                    stack.pop()
                    continue
                frame[2] = idx + 1
                self.stats.decisions += 1
                if self.max_candidates is not None and self.stats.decisions > self.max_candidates:
                    raise BudgetExceeded(self.max_candidates)
                self._assign(order[fpos], values[idx])
                try:
                    self._propagate()
                except Conflict:
                    self.stats.conflicts += 1
                    continue
                pos = fpos + 1
                frame_ok = True
                break
            if not frame_ok:
                return


# ---------------------------------------------------------------- helpers


def fixed_cells_from(layout, index, structure, rename=None):
    """Cells pinned by a structure whose elements (after ``rename``) are in ``index``."""
    rename = rename or {}
    out = {}
    ids = {e: index[rename.get(e, e)] for e in structure.elements}
    els = list(structure.elements)
    for r, k in structure.signature.relations.items():
        tab = structure.rel(r)
        for args in itertools.product(els, repeat=k):
            out[layout.cell(r, tuple(ids[a] for a in args))] = 1 if args in tab else 0
    for f, k in structure.signature.functions.items():
        for args, v in structure.fn(f).items():
            out[layout.cell(f, tuple(ids[a] for a in args))] = ids[v]
    for c, v in structure.constants.items():
        out[layout.cell(c)] = ids[v]
    return out


def merge_fixed(*parts):
    """Union of cell assignments; None when two parts disagree."""
    out = {}
    for p in parts:
        for c, v in p.items():
            if out.setdefault(c, v) != v:
                return None
    return out


def layout_for(theory, n):
    return compile_theory(theory, n).layout


def first_solution(search):
    for s in search.solutions():
        return s
    return None
