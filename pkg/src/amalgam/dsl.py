"""Recursive-descent parser for the theory language.

A theory file is a list of declarations, one per line (``/`` also separates
declarations, and ``#`` starts a comment)::

    theory posets_with_closure
    relation le : 2
    function f : 1
    property transitive(le), reflexive(le) antisymmetric(le)
    property preserves(f, le)
    axiom forall x . le(x, f(x))
    axiom forall x . f(f(x)) = f(x)
    equation m(x, x, y) = y

Symbols are collected in a first pass, so declarations may come in any order.
"""
import re

from .errors import AmalgamError, ArityMismatch, DslSyntaxError, UnknownSymbol
from .logic import (
    And, App, Const, Eq, Equation, Iff, Implies, Not, Or, PropertyAtom, RelAtom, Sentence,
    Theory, Var, is_linear, PROPERTY_KINDS,
)
from .structures import Signature

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
  | (?P<nl>\n|/)
  | (?P<op><->|->|!=|[()!&|,:.=])
  | (?P<int>\d+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_']*)
""", re.VERBOSE)

QUANTIFIERS = ("forall", "exists")


class Token:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind, text, line, col):
        self.kind, self.text, self.line, self.col = kind, text, line, col

    def __repr__(self):
        return f"Token({self.kind}, {self.text!r}, {self.line}:{self.col})"


def tokenize(text):
    """Split into logical lines of tokens."""
    lines, cur = [], []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise DslSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        col = pos - line_start + 1
        if kind == "nl":
            if cur:
                lines.append(cur)
                cur = []
            if m.group() == "\n":
                line += 1
                line_start = m.end()
        elif kind not in ("ws", "comment"):
            cur.append(Token(kind, m.group(), line, col))
        pos = m.end()
    if cur:
        lines.append(cur)
    return lines


class _Cursor:
    def __init__(self, tokens):
        self.toks = tokens
        self.i = 0

    def peek(self, k=0):
        j = self.i + k
        return self.toks[j] if j < len(self.toks) else None

    def at(self, text):
        t = self.peek()
        return t is not None and t.text == text

    def next(self):
        t = self.peek()
        if t is None:
            last = self.toks[-1]
            raise DslSyntaxError("unexpected end of line", last.line, last.col + len(last.text))
        self.i += 1
        return t

    def expect(self, text=None, kind=None):
        t = self.next()
        if (text is not None and t.text != text) or (kind is not None and t.kind != kind):
            want = text if text is not None else kind
            raise DslSyntaxError(f"expected {want!r}, found {t.text!r}", t.line, t.col)
        return t

    def done(self):
        return self.i >= len(self.toks)

    def end(self):
        if not self.done():
            t = self.peek()
            raise DslSyntaxError(f"unexpected {t.text!r}", t.line, t.col)


def _err(tok, msg, cls=DslSyntaxError):
    if cls is DslSyntaxError:
        return DslSyntaxError(msg, tok.line, tok.col)
    return cls(f"line {tok.line}, col {tok.col}: {msg}")


class _Parser:
    def __init__(self, sig):
        self.sig = sig

    # terms ---------------------------------------------------------------

    def term(self, cur, bound, free_vars):
        tok = cur.expect(kind="name")
        name = tok.text
        if cur.at("("):
            if name not in self.sig.functions:
                raise _err(tok, f"unknown function {name!r}", UnknownSymbol)
            cur.next()
            args = []
            if not cur.at(")"):
                args.append(self.term(cur, bound, free_vars))
                while cur.at(","):
                    cur.next()
                    args.append(self.term(cur, bound, free_vars))
            cur.expect(")")
            if len(args) != self.sig.functions[name]:
                raise _err(tok, f"{name} expects {self.sig.functions[name]} arguments, "
                           f"got {len(args)}", ArityMismatch)
            return App(name, tuple(args))
        if bound is not None and name in bound:
            return Var(name)
        if name in self.sig.constants:
            return Const(name)
        if free_vars and self.sig.kind(name) is None:
            return Var(name)
        if self.sig.kind(name) is not None:
            raise _err(tok, f"{name!r} is not a term here", ArityMismatch)
        raise _err(tok, f"unbound name {name!r}", UnknownSymbol)

    # formulas ------------------------------------------------------------

    def formula(self, cur, bound):
        left = self.implication(cur, bound)
        if cur.at("<->"):
            cur.next()
            return Iff(left, self.formula(cur, bound))
        return left

    def implication(self, cur, bound):
        left = self.disjunction(cur, bound)
        if cur.at("->"):
            cur.next()
            return Implies(left, self.implication(cur, bound))
        return left

    def disjunction(self, cur, bound):
        parts = [self.conjunction(cur, bound)]
        while cur.at("|"):
            cur.next()
            parts.append(self.conjunction(cur, bound))
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def conjunction(self, cur, bound):
        parts = [self.unary(cur, bound)]
        while cur.at("&"):
            cur.next()
            parts.append(self.unary(cur, bound))
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def unary(self, cur, bound):
        if cur.at("!"):
            cur.next()
            return Not(self.unary(cur, bound))
        if cur.at("("):
            cur.next()
            f = self.formula(cur, bound)
            cur.expect(")")
            return f
        tok = cur.peek()
        if tok is not None and tok.kind == "name" and tok.text in self.sig.relations:
            cur.next()
            cur.expect("(")
            args = [self.term(cur, bound, False)]
            while cur.at(","):
                cur.next()
                args.append(self.term(cur, bound, False))
            cur.expect(")")
            if len(args) != self.sig.relations[tok.text]:
                raise _err(tok, f"{tok.text} expects {self.sig.relations[tok.text]} arguments, "
                           f"got {len(args)}", ArityMismatch)
            return RelAtom(tok.text, tuple(args))
        if tok is not None and tok.kind == "name" and cur.peek(1) is not None \
                and cur.peek(1).text == "(" and tok.text not in self.sig.functions:
            raise _err(tok, f"unknown relation {tok.text!r}", UnknownSymbol)
        left = self.term(cur, bound, False)
        op = cur.next()
        if op.text not in ("=", "!="):
            raise _err(op, f"expected '=' or '!=', found {op.text!r}")
        right = self.term(cur, bound, False)
        return Eq(left, right) if op.text == "=" else Not(Eq(left, right))

    # declarations --------------------------------------------------------

    def sentence(self, cur):
        quants = []
        while cur.peek() is not None and cur.peek().text in QUANTIFIERS:
            q = cur.next().text
            names = []
            while cur.peek() is not None and cur.peek().kind == "name" \
                    and cur.peek().text not in QUANTIFIERS:
                tok = cur.next()
                if self.sig.kind(tok.text) is not None:
                    raise _err(tok, f"variable {tok.text!r} clashes with a symbol")
                names.append(tok.text)
            if not names:
                t = cur.peek() or cur.toks[-1]
                raise _err(t, f"'{q}' needs at least one variable")
            quants.extend((q, v) for v in names)
            if cur.at("."):
                cur.next()
        if not quants and cur.at("."):
            cur.next()
        bound = {v for _, v in quants}
        matrix = self.formula(cur, bound)
        cur.end()
        probe = Sentence(tuple(quants), matrix)
        return Sentence(tuple(quants), matrix, general=not probe.is_form_41)

    def atom(self, cur):
        tok = cur.expect(kind="name")
        if tok.text not in PROPERTY_KINDS:
            raise _err(tok, f"unknown property kind {tok.text!r}", UnknownSymbol)
        cur.expect("(")
        args = [self.atom_arg(cur)]
        while cur.at(","):
            cur.next()
            args.append(self.atom_arg(cur))
        cur.expect(")")
        return tok, PropertyAtom(tok.text, tuple(args))

    def atom_arg(self, cur):
        if cur.at("!"):
            cur.next()
            return "!" + cur.expect(kind="name").text
        t = cur.next()
        if t.kind == "int":
            return int(t.text)
        if t.kind != "name":
            raise _err(t, f"unexpected {t.text!r} in property arguments")
        return t.text


def _declare(lines):
    rel, fun, con, name = {}, {}, set(), ""
    seen = {}
    for toks in lines:
        head = toks[0]
        if head.text == "theory":
            cur = _Cursor(toks[1:] or toks)
            if len(toks) != 2 or toks[1].kind != "name":
                raise _err(head, "expected 'theory NAME'")
            name = toks[1].text
        elif head.text in ("relation", "function"):
            cur = _Cursor(toks)
            cur.next()
            ntok = cur.expect(kind="name")
            cur.expect(":")
            k = cur.expect(kind="int")
            cur.end()
            if int(k.text) < 1:
                raise _err(k, "arity must be positive", ArityMismatch)
            if ntok.text in seen:
                raise _err(ntok, f"symbol {ntok.text!r} declared twice")
            seen[ntok.text] = head.text
            (rel if head.text == "relation" else fun)[ntok.text] = int(k.text)
        elif head.text == "constant":
            cur = _Cursor(toks)
            cur.next()
            ntok = cur.expect(kind="name")
            cur.end()
            if ntok.text in seen:
                raise _err(ntok, f"symbol {ntok.text!r} declared twice")
            seen[ntok.text] = "constant"
            con.add(ntok.text)
        elif head.text not in ("property", "axiom", "equation"):
            raise _err(head, f"unknown declaration {head.text!r}")
    return Signature(rel, fun, con), name


def parse_theory(text):
    lines = tokenize(text)
    sig, name = _declare(lines)
    p = _Parser(sig)
    atoms, sentences, equations = [], [], []
    for toks in lines:
        head = toks[0].text
        cur = _Cursor(toks)
        cur.next()
        if head == "property":
            while True:
                tok, a = p.atom(cur)
                atoms.append((tok, a))
                if cur.done():
                    break
                if cur.at(","):
                    cur.next()
        elif head == "axiom":
            sentences.append(p.sentence(cur))
        elif head == "equation":
            left = p.term(cur, None, True)
            cur.expect("=")
            right = p.term(cur, None, True)
            cur.end()
            eq = Equation(left, right)
            if is_linear(eq):
                equations.append(eq)
            else:
                sentences.append(eq.as_sentence())
    checked = []
    for tok, a in atoms:
        try:
            Theory(sig, [a])
        except AmalgamError as exc:
            raise type(exc)(f"line {tok.line}, col {tok.col}: {exc}") from None
        checked.append(a)
    return Theory(sig, checked, sentences, equations, name)


def parse_sentence(text, sig):
    lines = tokenize(text)
    if len(lines) != 1:
        raise DslSyntaxError("expected a single sentence", 1, 1)
    return _Parser(sig).sentence(_Cursor(lines[0]))


def parse_equation(text, sig):
    lines = tokenize(text)
    cur = _Cursor(lines[0])
    p = _Parser(sig)
    left = p.term(cur, None, True)
    cur.expect("=")
    right = p.term(cur, None, True)
    cur.end()
    return Equation(left, right)


def load_theory(path):
    with open(path, encoding="utf-8") as fh:
        return parse_theory(fh.read())
