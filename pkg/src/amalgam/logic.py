"""First-order syntax, theories, satisfaction on finite structures and the
syntactic classification of axioms used to decide which construction applies.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

from .errors import ArityMismatch, SignatureMismatch, UnknownSymbol
from .structures import Signature

# ---------------------------------------------------------------- terms


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Const:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class App:
    fn: str
    args: tuple

    def __str__(self):
        return f"{self.fn}({', '.join(map(str, self.args))})"


def term_vars(t):
    if isinstance(t, Var):
        return {t.name}
    if isinstance(t, App):
        out = set()
        for a in t.args:
            out |= term_vars(a)
        return out
    return set()


def op_count(t):
    """Number of operation-symbol occurrences; constants do not count."""
    if isinstance(t, App):
        return 1 + sum(op_count(a) for a in t.args)
    return 0


# ---------------------------------------------------------------- formulas


@dataclass(frozen=True)
class RelAtom:
    rel: str
    args: tuple

    def __str__(self):
        return f"{self.rel}({', '.join(map(str, self.args))})"


@dataclass(frozen=True)
class Eq:
    left: object
    right: object

    def __str__(self):
        return f"{self.left} = {self.right}"


@dataclass(frozen=True)
class Not:
    body: object

    def __str__(self):
        if isinstance(self.body, Eq):
            return f"{self.body.left} != {self.body.right}"
        return f"!{_wrap(self.body)}"


@dataclass(frozen=True)
class And:
    parts: tuple

    def __str__(self):
        return " & ".join(_wrap(p) for p in self.parts)


@dataclass(frozen=True)
class Or:
    parts: tuple

    def __str__(self):
        return " | ".join(_wrap(p) for p in self.parts)


@dataclass(frozen=True)
class Implies:
    left: object
    right: object

    def __str__(self):
        return f"{_wrap(self.left)} -> {_wrap(self.right)}"


@dataclass(frozen=True)
class Iff:
    left: object
    right: object

    def __str__(self):
        return f"{_wrap(self.left)} <-> {_wrap(self.right)}"


def _wrap(f):
    if isinstance(f, (RelAtom, Not)):
        return str(f)
    return f"({f})"


def formula_atoms(f):
    if isinstance(f, (RelAtom, Eq)):
        yield f
    elif isinstance(f, Not):
        yield from formula_atoms(f.body)
    elif isinstance(f, (And, Or)):
        for p in f.parts:
            yield from formula_atoms(p)
    elif isinstance(f, (Implies, Iff)):
        yield from formula_atoms(f.left)
        yield from formula_atoms(f.right)


def formula_terms(f):
    for atom in formula_atoms(f):
        if isinstance(atom, RelAtom):
            yield from atom.args
        else:
            yield atom.left
            yield atom.right


def subterms(t):
    yield t
    if isinstance(t, App):
        for a in t.args:
            yield from subterms(a)


def formula_symbols(f):
    out = set()
    for atom in formula_atoms(f):
        if isinstance(atom, RelAtom):
            out.add(atom.rel)
    for t in formula_terms(f):
        for s in subterms(t):
            if isinstance(s, App):
                out.add(s.fn)
            elif isinstance(s, Const):
                out.add(s.name)
    return out


# ---------------------------------------------------------------- axioms

BINARY_KINDS = {"transitive", "reflexive", "symmetric", "antireflexive", "antisymmetric", "linear"}
ORDER_OP_KINDS = {"preserves", "reverses", "strictly_preserves", "strictly_reverses"}
FUNCTION_KINDS = {"bijective", "surjective"}
CARD_KINDS = {"card_lt", "card_leq", "card_not", "card_odd_or_leq", "card_even_or_leq"}
PROPERTY_KINDS = (BINARY_KINDS | ORDER_OP_KINDS | FUNCTION_KINDS | CARD_KINDS
                  | {"coarser", "count_leq"})


@dataclass(frozen=True)
class PropertyAtom:
    """Built-in property.  ``coarser(S, R)`` says R is contained in S.

    ``count_leq(P, Q)`` compares the number of elements satisfying the unary
    literals P and Q (each a unary relation, optionally prefixed by ``!``).
    The ``card_*`` kinds take a single integer argument.
    """

    kind: str
    args: tuple

    def __str__(self):
        return f"{self.kind}({', '.join(map(str, self.args))})"


@dataclass(frozen=True)
class Sentence:
    """Prenex sentence.  ``quantifiers`` is a tuple of ("forall"|"exists", var)."""

    quantifiers: tuple
    matrix: object
    general: bool = False

    def __str__(self):
        blocks = []
        for q, group in itertools.groupby(self.quantifiers, key=lambda p: p[0]):
            blocks.append(q + " " + " ".join(v for _, v in group))
        if not blocks:
            return f". {self.matrix}"
        return " . ".join(blocks) + f" . {self.matrix}"

    @property
    def universal_vars(self):
        return [v for q, v in self.quantifiers if q == "forall"]

    @property
    def is_universal(self):
        return all(q == "forall" for q, _ in self.quantifiers)

    @property
    def is_form_41(self):
        """At most one leading universal variable, then only existentials."""
        qs = [q for q, _ in self.quantifiers]
        if qs and qs[0] == "forall":
            qs = qs[1:]
        return all(q == "exists" for q in qs)


@dataclass(frozen=True)
class Equation:
    left: object
    right: object

    def __str__(self):
        return f"{self.left} = {self.right}"

    @property
    def variables(self):
        return sorted(term_vars(self.left) | term_vars(self.right))

    def as_sentence(self):
        qs = tuple(("forall", v) for v in self.variables)
        return Sentence(qs, Eq(self.left, self.right), general=len(qs) > 1)


def is_linear(eq):
    return op_count(eq.left) <= 1 and op_count(eq.right) <= 1


@dataclass(frozen=True)
class Theory:
    signature: Signature
    atoms: tuple = ()
    sentences: tuple = ()
    equations: tuple = ()
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(self.atoms))
        object.__setattr__(self, "sentences", tuple(self.sentences))
        object.__setattr__(self, "equations", tuple(self.equations))
        check_theory(self)

    @property
    def axioms(self):
        return list(self.atoms) + list(self.sentences) + list(self.equations)

    def extended(self, atoms=(), sentences=(), equations=(), name=None):
        return Theory(self.signature, self.atoms + tuple(atoms), self.sentences + tuple(sentences),
                      self.equations + tuple(equations), self.name if name is None else name)

    def with_signature(self, sig):
        return Theory(sig, self.atoms, self.sentences, self.equations, self.name)

    def restricted_to(self, sig):
        """Axioms that only mention symbols of ``sig``."""
        names = sig.symbols
        atoms = [a for a in self.atoms if atom_symbols(a) <= names]
        sents = [s for s in self.sentences if formula_symbols(s.matrix) <= names]
        eqs = [e for e in self.equations if formula_symbols(Eq(e.left, e.right)) <= names]
        return Theory(sig, atoms, sents, eqs, self.name)

    def __str__(self):
        return theory_to_text(self)


def atom_symbols(a):
    if a.kind in CARD_KINDS:
        return set()
    if a.kind == "count_leq":
        return {x.lstrip("!") for x in a.args}
    return set(a.args)


def theory_to_text(th):
    lines = []
    if th.name:
        lines.append(f"theory {th.name}")
    sig = th.signature
    for r, k in sig.relations.items():
        lines.append(f"relation {r} : {k}")
    for f, k in sig.functions.items():
        lines.append(f"function {f} : {k}")
    for c in sorted(sig.constants):
        lines.append(f"constant {c}")
    for a in th.atoms:
        lines.append(f"property {a}")
    for s in th.sentences:
        lines.append(f"axiom {s}")
    for e in th.equations:
        lines.append(f"equation {e}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- well-formedness


def _check_term(t, sig, bound):
    if isinstance(t, Var):
        if bound is not None and t.name not in bound:
            raise UnknownSymbol(f"unbound variable {t.name!r}")
    elif isinstance(t, Const):
        if t.name not in sig.constants:
            raise UnknownSymbol(f"unknown constant {t.name!r}")
    elif isinstance(t, App):
        if t.fn not in sig.functions:
            raise UnknownSymbol(f"unknown function {t.fn!r}")
        if sig.functions[t.fn] != len(t.args):
            raise ArityMismatch(f"{t.fn} expects {sig.functions[t.fn]} arguments, got {len(t.args)}")
        for a in t.args:
            _check_term(a, sig, bound)


def _check_formula(f, sig, bound):
    for atom in formula_atoms(f):
        if isinstance(atom, RelAtom):
            if atom.rel not in sig.relations:
                raise UnknownSymbol(f"unknown relation {atom.rel!r}")
            if sig.relations[atom.rel] != len(atom.args):
                raise ArityMismatch(
                    f"{atom.rel} expects {sig.relations[atom.rel]} arguments, got {len(atom.args)}")
            for t in atom.args:
                _check_term(t, sig, bound)
        else:
            _check_term(atom.left, sig, bound)
            _check_term(atom.right, sig, bound)


def _check_atom(a, sig):
    k = a.kind
    if k not in PROPERTY_KINDS:
        raise UnknownSymbol(f"unknown property kind {k!r}")

    def need_rel(name, arity=2):
        if name not in sig.relations:
            raise UnknownSymbol(f"{k}: {name!r} is not a relation")
        if sig.relations[name] != arity:
            raise ArityMismatch(f"{k}: relation {name} must have arity {arity}")

    def need_fn(name, arity=None):
        if name not in sig.functions:
            raise UnknownSymbol(f"{k}: {name!r} is not a function")
        if arity is not None and sig.functions[name] != arity:
            raise ArityMismatch(f"{k}: function {name} must have arity {arity}")

    if k in BINARY_KINDS:
        _argc(a, 1)
        need_rel(a.args[0])
    elif k == "coarser":
        _argc(a, 2)
        need_rel(a.args[0])
        need_rel(a.args[1])
    elif k in ORDER_OP_KINDS:
        _argc(a, 2)
        need_fn(a.args[0])
        need_rel(a.args[1])
    elif k in FUNCTION_KINDS:
        _argc(a, 1)
        need_fn(a.args[0], 1)
    elif k == "count_leq":
        _argc(a, 2)
        for lit in a.args:
            need_rel(lit.lstrip("!"), 1)
    elif k in CARD_KINDS:
        _argc(a, 1)
        if not isinstance(a.args[0], int) or a.args[0] < 0:
            raise ArityMismatch(f"{k}: argument must be a nonnegative integer")


def _argc(a, n):
    if len(a.args) != n:
        raise ArityMismatch(f"{a.kind} takes {n} argument(s), got {len(a.args)}")


def check_theory(th):
    sig = th.signature
    for a in th.atoms:
        _check_atom(a, sig)
    for s in th.sentences:
        names = [v for _, v in s.quantifiers]
        _check_formula(s.matrix, sig, set(names))
    for e in th.equations:
        _check_formula(Eq(e.left, e.right), sig, None)


# ---------------------------------------------------------------- evaluation


def eval_term(t, s, env):
    if isinstance(t, Var):
        return env[t.name]
    if isinstance(t, Const):
        return s.constants[t.name]
    return s.functions[t.fn][tuple(eval_term(a, s, env) for a in t.args)]


def eval_formula(f, s, env):
    if isinstance(f, RelAtom):
        return tuple(eval_term(a, s, env) for a in f.args) in s.relations[f.rel]
    if isinstance(f, Eq):
        return eval_term(f.left, s, env) == eval_term(f.right, s, env)
    if isinstance(f, Not):
        return not eval_formula(f.body, s, env)
    if isinstance(f, And):
        return all(eval_formula(p, s, env) for p in f.parts)
    if isinstance(f, Or):
        return any(eval_formula(p, s, env) for p in f.parts)
    if isinstance(f, Implies):
        return (not eval_formula(f.left, s, env)) or eval_formula(f.right, s, env)
    if isinstance(f, Iff):
        return eval_formula(f.left, s, env) == eval_formula(f.right, s, env)
    raise TypeError(f"not a formula: {f!r}")


def _eval_prefix(quants, matrix, s, env):
    """Evaluate a prenex formula; returns (truth, assignment at the failure)."""
    if not quants:
        return eval_formula(matrix, s, env), dict(env)
    (q, v), rest = quants[0], quants[1:]
    if q == "forall":
        for e in s.elements:
            env[v] = e
            ok, w = _eval_prefix(rest, matrix, s, env)
            if not ok:
                del env[v]
                return False, w
        env.pop(v, None)
        return True, None
    for e in s.elements:
        env[v] = e
        ok, _ = _eval_prefix(rest, matrix, s, env)
        if ok:
            del env[v]
            return True, None
    env.pop(v, None)
    return False, dict(env)


def eval_sentence(sent, s):
    """Return None if the sentence holds, else a witness dict (universal vars)."""
    if not sent.general and sent.is_form_41:
        return _eval_form_41(sent, s)
    ok, witness = _eval_prefix(list(sent.quantifiers), sent.matrix, s, {})
    if ok:
        return None
    return _universal_witness(sent, witness)


def _universal_witness(sent, env):
    env = env or {}
    return {v: env[v] for q, v in sent.quantifiers if q == "forall" and v in env}


def _eval_form_41(sent, s):
    quants = list(sent.quantifiers)
    head = []
    if quants and quants[0][0] == "forall":
        head = [quants[0][1]]
        quants = quants[1:]
    exvars = [v for _, v in quants]
    for xs in itertools.product(s.elements, repeat=len(head)):
        env = dict(zip(head, xs))
        found = False
        for ys in itertools.product(s.elements, repeat=len(exvars)):
            env.update(zip(exvars, ys))
            if eval_formula(sent.matrix, s, env):
                found = True
                break
        if not found:
            return dict(zip(head, xs))
    return None


def eval_sentence_naive(sent, s):
    """Reference evaluator: straight recursion over the prefix."""
    ok, witness = _eval_prefix(list(sent.quantifiers), sent.matrix, s, {})
    return None if ok else _universal_witness(sent, witness)


def check_atom(a, s):
    """Return None if the property holds in ``s``, else a witness tuple."""
    k, args = a.kind, a.args
    els = s.elements
    if k in CARD_KINDS:
        return None if card_ok(k, args[0], s.size) else (s.size,)
    if k == "count_leq":
        n1 = sum(1 for x in els if literal_holds(args[0], s, x))
        n2 = sum(1 for x in els if literal_holds(args[1], s, x))
        return None if n1 <= n2 else (n1, n2)
    if k in FUNCTION_KINDS:
        tab = s.fn(args[0])
        seen = {}
        for x in els:
            y = tab[(x,)]
            if y in seen:
                return (seen[y], x)
            seen[y] = x
        return None
    if k == "coarser":
        big, small = s.rel(args[0]), s.rel(args[1])
        for t in sorted(small):
            if t not in big:
                return t
        return None
    if k in ORDER_OP_KINDS:
        f, r = args
        tab, rel = s.fn(f), s.rel(r)
        n = s.signature.functions[f]
        strict = k.startswith("strictly")
        rev = k.endswith("reverses")
        pairs = [(x, y) for x in els for y in els if (x, y) in rel]
        for combo in itertools.product(pairs, repeat=n):
            xs = tuple(p[0] for p in combo)
            ys = tuple(p[1] for p in combo)
            if strict and xs == ys:
                continue
            fx, fy = tab[xs], tab[ys]
            lo, hi = (fy, fx) if rev else (fx, fy)
            if (lo, hi) not in rel or (strict and fx == fy):
                return xs + ys
        return None
    rel = s.rel(args[0])
    if k == "reflexive":
        for x in els:
            if (x, x) not in rel:
                return (x,)
    elif k == "antireflexive":
        for x in els:
            if (x, x) in rel:
                return (x,)
    elif k == "symmetric":
        for (x, y) in sorted(rel):
            if (y, x) not in rel:
                return (x, y)
    elif k == "antisymmetric":
        for (x, y) in sorted(rel):
            if x != y and (y, x) in rel:
                return (x, y)
    elif k == "transitive":
        succ = {}
        for (x, y) in rel:
            succ.setdefault(x, set()).add(y)
        for (x, y) in sorted(rel):
            for z in sorted(succ.get(y, ())):
                if (x, z) not in rel:
                    return (x, y, z)
    elif k == "linear":
        for x in els:
            for y in els:
                if x != y and (x, y) not in rel and (y, x) not in rel:
                    return (x, y)
    return None


def literal_holds(lit, s, x):
    if lit.startswith("!"):
        return (x,) not in s.rel(lit[1:])
    return (x,) in s.rel(lit)


def card_ok(kind, n, size):
    if kind == "card_lt":
        return size < n
    if kind == "card_leq":
        return size <= n
    if kind == "card_not":
        return size != n
    if kind == "card_odd_or_leq":
        return size % 2 == 1 or size <= n
    if kind == "card_even_or_leq":
        return size % 2 == 0 or size <= n
    raise ValueError(kind)


def check_equation(eq, s):
    vs = eq.variables
    for xs in itertools.product(s.elements, repeat=len(vs)):
        env = dict(zip(vs, xs))
        if eval_term(eq.left, s, env) != eval_term(eq.right, s, env):
            return env
    return None


@dataclass(frozen=True)
class Verdict:
    holds: bool
    axiom: Optional[object] = None
    witness: Optional[object] = None

    def __bool__(self):
        return self.holds

    def __str__(self):
        if self.holds:
            return "holds"
        return f"fails: {self.axiom} at {self.witness}"


def satisfies(s, th):
    if s.signature != th.signature:
        raise SignatureMismatch("structure and theory have different signatures")
    for a in th.atoms:
        w = check_atom(a, s)
        if w is not None:
            return Verdict(False, a, w)
    for sent in th.sentences:
        w = eval_sentence(sent, s)
        if w is not None:
            return Verdict(False, sent, w)
    for eq in th.equations:
        w = check_equation(eq, s)
        if w is not None:
            return Verdict(False, eq, w)
    return Verdict(True)


def verify_equations(s, eqs):
    for eq in eqs:
        w = check_equation(eq, s)
        if w is not None:
            return Verdict(False, eq, w)
    return Verdict(True)


# ---------------------------------------------------------------- builtin expansion

_X, _Y, _Z = Var("x"), Var("y"), Var("z")


def _forall(names, matrix):
    return Sentence(tuple(("forall", n) for n in names), matrix, general=len(names) > 1)


def atom_as_sentences(a, sig):
    """First-order rendering of a builtin (None for global counting kinds)."""
    k, args = a.kind, a.args
    if k in CARD_KINDS or k == "count_leq":
        return None
    if k in BINARY_KINDS:
        r = args[0]
        R = lambda u, v: RelAtom(r, (u, v))
        if k == "transitive":
            return [_forall("xyz", Implies(And((R(_X, _Y), R(_Y, _Z))), R(_X, _Z)))]
        if k == "reflexive":
            return [_forall("x", R(_X, _X))]
        if k == "antireflexive":
            return [_forall("x", Not(R(_X, _X)))]
        if k == "symmetric":
            return [_forall("xy", Implies(R(_X, _Y), R(_Y, _X)))]
        if k == "antisymmetric":
            return [_forall("xy", Implies(And((R(_X, _Y), R(_Y, _X))), Eq(_X, _Y)))]
        if k == "linear":
            return [_forall("xy", Or((Eq(_X, _Y), R(_X, _Y), R(_Y, _X))))]
    if k == "coarser":
        big, small = args
        return [_forall("xy", Implies(RelAtom(small, (_X, _Y)), RelAtom(big, (_X, _Y))))]
    if k in FUNCTION_KINDS:
        f = args[0]
        return [_forall("xy", Implies(Eq(App(f, (_X,)), App(f, (_Y,))), Eq(_X, _Y)))]
    if k in ORDER_OP_KINDS:
        f, r = args
        n = sig.functions[f]
        xs = tuple(Var(f"x{i}") for i in range(n))
        ys = tuple(Var(f"y{i}") for i in range(n))
        hyp = [RelAtom(r, (x, y)) for x, y in zip(xs, ys)]
        fx, fy = App(f, xs), App(f, ys)
        concl = RelAtom(r, (fy, fx)) if k.endswith("reverses") else RelAtom(r, (fx, fy))
        if k.startswith("strictly"):
            distinct = Or(tuple(Not(Eq(x, y)) for x, y in zip(xs, ys)))
            body = Implies(And(tuple(hyp) + (distinct,)), And((concl, Not(Eq(fx, fy)))))
        else:
            body = Implies(And(tuple(hyp)) if len(hyp) > 1 else hyp[0], concl)
        names = [v.name for v in xs + ys]
        return [Sentence(tuple(("forall", v) for v in names), body, general=True)]
    raise ValueError(k)


# ---------------------------------------------------------------- classification


@dataclass(frozen=True)
class AxiomClass:
    tag: str
    requires_transitive: frozenset = frozenset()
    eligible: bool = True
    reason: str = ""


def classify_axiom(ax, th=None):
    """Purely syntactic tag of one axiom.

    ``eligible`` tells whether the axiom on its own is acceptable for the
    general union construction; relation-level interactions are checked by
    :func:`eligibility`.
    """
    if isinstance(ax, PropertyAtom):
        k = ax.kind
        if k in ("linear", "count_leq") or k in CARD_KINDS:
            return AxiomClass("builtin-property", eligible=False,
                              reason=f"{k} is not preserved by union constructions")
        if k in ORDER_OP_KINDS and th is not None and th.signature.functions[ax.args[0]] != 1:
            return AxiomClass("builtin-property", eligible=False,
                              reason=f"{k}({ax.args[0]}, ...) needs a unary operation")
        if k.startswith("strictly"):
            return AxiomClass("builtin-property", frozenset({ax.args[1]}))
        return AxiomClass("builtin-property")
    if isinstance(ax, Equation):
        if is_linear(ax):
            return AxiomClass("linear")
        return classify_axiom(ax.as_sentence(), th)
    if isinstance(ax, Sentence):
        if not ax.general and ax.is_form_41:
            return AxiomClass("form-4-1")
        if ax.is_universal:
            if len(ax.quantifiers) <= 1:
                return AxiomClass("form-4-1")
            return AxiomClass("general-universal", eligible=False,
                              reason=f"'{ax}' binds more than one universal variable")
        if ax.is_form_41:
            return AxiomClass("form-4-1")
        return AxiomClass("general", eligible=False,
                          reason=f"'{ax}' is not of the one-universal-then-existential shape")
    raise TypeError(f"not an axiom: {ax!r}")


@dataclass
class EligibilityReport:
    eligible: bool
    reasons: list = field(default_factory=list)
    hazards: list = field(default_factory=list)
    transitive: frozenset = frozenset()

    def __bool__(self):
        return self.eligible


def declared(th, kind, rel):
    return any(a.kind == kind and a.args[0] == rel for a in th.atoms)


def eligibility(th):
    """Decide whether the union construction is guaranteed to work for ``th``."""
    reasons, hazards = [], []
    trans = frozenset(a.args[0] for a in th.atoms if a.kind == "transitive")
    for ax in th.axioms:
        cls = classify_axiom(ax, th)
        if not cls.eligible:
            reasons.append(cls.reason)
    for a in th.atoms:
        if a.kind.startswith("strictly"):
            r = a.args[1]
            if not all(declared(th, k, r) for k in ("reflexive", "antisymmetric", "transitive")):
                reasons.append(f"{a} requires {r} to be declared a partial order")
    finer = {}
    for a in th.atoms:
        if a.kind == "coarser":
            big, small = a.args
            finer.setdefault(big, set()).add(small)
            if big not in trans and small in trans:
                reasons.append(f"{a}: {big} is not declared transitive but {small} is")
    for big, smalls in sorted(finer.items()):
        if big not in trans and len(smalls & trans) >= 2:
            hazards.append(f"shared-nontransitive-coarsening: {big} lies above "
                           f"transitive {', '.join(sorted(smalls & trans))}")
    return EligibilityReport(not reasons, reasons, hazards, trans)
