"""Formula syntax: a small parenthesized prefix language.

Grammar (tokens separated by whitespace or parentheses):

    formula := (NAME var ...)            relation atom
             | (= term term)             equality atom
             | (not f) | (and f ...) | (or f ...) | (-> f g) | (<-> f g)
             | (E var f) | (A var f)                 first-order quantifiers
             | (E2FAM relvar f) | (A2FAM relvar f)   second-order quantifiers

FAM is a family specifier glued to the quantifier token, e.g. E2mon:2,
A2inj<=:3, E2mon (no constraint), E2iso:NAME (resolved against an
environment of named relations).  First-order variables and relation names
are plain identifiers; whether a name denotes a variable or a relation is
determined by position.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import FormulaParseError, RangeError
from .families import QuantifierFamily, parse_family_spec


class Formula:
    """Base class for AST nodes; instances are immutable and hashable."""


@dataclass(frozen=True)
class RelAtom(Formula):
    name: str
    args: tuple


@dataclass(frozen=True)
class EqAtom(Formula):
    left: str
    right: str


@dataclass(frozen=True)
class Not(Formula):
    sub: Formula


@dataclass(frozen=True)
class And(Formula):
    subs: tuple


@dataclass(frozen=True)
class Or(Formula):
    subs: tuple


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Iff(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Exists(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class Forall(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class SOExists(Formula):
    var: str
    family: QuantifierFamily
    body: Formula


@dataclass(frozen=True)
class SOForall(Formula):
    var: str
    family: QuantifierFamily
    body: Formula


def make_and(subs) -> Formula:
    subs = tuple(subs)
    if not subs:
        raise RangeError("empty conjunction")
    return subs[0] if len(subs) == 1 else And(subs)


def make_or(subs) -> Formula:
    subs = tuple(subs)
    if not subs:
        raise RangeError("empty disjunction")
    return subs[0] if len(subs) == 1 else Or(subs)


def all_distinct(vars_) -> Formula:
    """Conjunction stating that the listed variables take distinct values."""
    vars_ = list(vars_)
    clauses = [Not(EqAtom(vars_[i], vars_[j]))
               for i in range(len(vars_)) for j in range(i + 1, len(vars_))]
    if not clauses:
        return EqAtom(vars_[0], vars_[0]) if vars_ else And(())
    return make_and(clauses)


# ---------------------------------------------------------------------------
# variable bookkeeping


def free_variables(phi: Formula):
    """(free first-order variables, free relation names), each a frozenset."""
    fo: set = set()
    rel: set = set()

    def walk(node, bound_fo, bound_rel):
        if isinstance(node, RelAtom):
            if node.name not in bound_rel:
                rel.add(node.name)
            for a in node.args:
                if a not in bound_fo:
                    fo.add(a)
        elif isinstance(node, EqAtom):
            for a in (node.left, node.right):
                if a not in bound_fo:
                    fo.add(a)
        elif isinstance(node, Not):
            walk(node.sub, bound_fo, bound_rel)
        elif isinstance(node, (And, Or)):
            for s in node.subs:
                walk(s, bound_fo, bound_rel)
        elif isinstance(node, (Implies, Iff)):
            walk(node.left, bound_fo, bound_rel)
            walk(node.right, bound_fo, bound_rel)
        elif isinstance(node, (Exists, Forall)):
            walk(node.body, bound_fo | {node.var}, bound_rel)
        elif isinstance(node, (SOExists, SOForall)):
            walk(node.body, bound_fo, bound_rel | {node.var})
        else:
            raise RangeError(f"unknown formula node {node!r}")

    walk(phi, frozenset(), frozenset())
    return frozenset(fo), frozenset(rel)


def is_first_order(phi: Formula) -> bool:
    if isinstance(phi, (RelAtom, EqAtom)):
        return True
    if isinstance(phi, Not):
        return is_first_order(phi.sub)
    if isinstance(phi, (And, Or)):
        return all(is_first_order(s) for s in phi.subs)
    if isinstance(phi, (Implies, Iff)):
        return is_first_order(phi.left) and is_first_order(phi.right)
    if isinstance(phi, (Exists, Forall)):
        return is_first_order(phi.body)
    return False


_FRESH = "b_"


def _map_formula(phi, fn_atom, fn_quant_var):
    """Structural map over atoms and quantified-variable introduction."""
    if isinstance(phi, (RelAtom, EqAtom)):
        return fn_atom(phi)
    if isinstance(phi, Not):
        return Not(_map_formula(phi.sub, fn_atom, fn_quant_var))
    if isinstance(phi, And):
        return And(tuple(_map_formula(s, fn_atom, fn_quant_var) for s in phi.subs))
    if isinstance(phi, Or):
        return Or(tuple(_map_formula(s, fn_atom, fn_quant_var) for s in phi.subs))
    if isinstance(phi, Implies):
        return Implies(_map_formula(phi.left, fn_atom, fn_quant_var),
                       _map_formula(phi.right, fn_atom, fn_quant_var))
    if isinstance(phi, Iff):
        return Iff(_map_formula(phi.left, fn_atom, fn_quant_var),
                   _map_formula(phi.right, fn_atom, fn_quant_var))
    if isinstance(phi, (Exists, Forall, SOExists, SOForall)):
        return fn_quant_var(phi)
    raise RangeError(f"unknown formula node {phi!r}")


def rename_apart(phi: Formula, counter=None) -> Formula:
    """Rename every bound first-order variable to a fresh b_<k> name."""
    if counter is None:
        counter = [0]

    def rename(node, mapping):
        def atom(a):
            if isinstance(a, RelAtom):
                return RelAtom(a.name, tuple(mapping.get(v, v) for v in a.args))
            return EqAtom(mapping.get(a.left, a.left), mapping.get(a.right, a.right))

        def quant(q):
            if isinstance(q, (SOExists, SOForall)):
                return type(q)(q.var, q.family, rename(q.body, mapping))
            fresh = f"{_FRESH}{counter[0]}"
            counter[0] += 1
            inner = dict(mapping)
            inner[q.var] = fresh
            return type(q)(fresh, rename(q.body, inner))

        return _map_formula(node, atom, quant)

    return rename(phi, {})


def substitute(phi: Formula, fo_map: dict | None = None,
               rel_map: dict | None = None) -> Formula:
    """Replace free first-order variables and/or atoms of named relations.

    `fo_map` maps variable names to variable names.  `rel_map` maps a
    relation name to a callable taking the atom's argument tuple and
    returning a replacement formula.  Bound variables of `phi` are renamed
    apart first, so substitution is capture-avoiding.
    """
    fo_map = fo_map or {}
    rel_map = rel_map or {}
    phi = rename_apart(phi)

    def walk(node):
        def atom(a):
            if isinstance(a, RelAtom):
                args = tuple(fo_map.get(v, v) for v in a.args)
                if a.name in rel_map:
                    return rel_map[a.name](args)
                return RelAtom(a.name, args)
            return EqAtom(fo_map.get(a.left, a.left), fo_map.get(a.right, a.right))

        def quant(q):
            if isinstance(q, (SOExists, SOForall)):
                return type(q)(q.var, q.family, walk(q.body))
            return type(q)(q.var, walk(q.body))  # bound vars are fresh already

        return _map_formula(node, atom, quant)

    return walk(phi)


# ---------------------------------------------------------------------------
# parsing and formatting


_TOKEN = re.compile(r"\(|\)|[^\s()]+")
_NAME = re.compile(r"^[A-Za-z_][A-Za-z0-9_.'-]*$")


def _tokenize(text):
    pos = 0
    tokens = []
    for m in _TOKEN.finditer(text):
        tokens.append((m.group(), m.start()))
    return tokens


class _Parser:
    def __init__(self, text, env=None):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self.env = env or {}

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, len(self.text))

    def next(self):
        tok = self.peek()
        if tok[0] is None:
            raise FormulaParseError("unexpected end of input", tok[1])
        self.i += 1
        return tok

    def expect(self, what):
        tok, pos = self.next()
        if tok != what:
            raise FormulaParseError(f"expected {what!r}, got {tok!r}", pos)

    def name(self, kind="name"):
        tok, pos = self.next()
        if tok in ("(", ")") or not _NAME.match(tok):
            raise FormulaParseError(f"expected {kind}, got {tok!r}", pos)
        return tok

    def formula(self) -> Formula:
        tok, pos = self.next()
        if tok != "(":
            raise FormulaParseError(f"expected '(', got {tok!r}", pos)
        head, hpos = self.next()
        if head == "not":
            out = Not(self.formula())
        elif head in ("and", "or"):
            subs = []
            while self.peek()[0] != ")":
                subs.append(self.formula())
            if not subs:
                raise FormulaParseError(f"empty {head}", hpos)
            out = (And if head == "and" else Or)(tuple(subs))
            self.expect(")")
            return out
        elif head == "->":
            out = Implies(self.formula(), self.formula())
        elif head == "<->":
            out = Iff(self.formula(), self.formula())
        elif head == "=":
            out = EqAtom(self.name("variable"), self.name("variable"))
        elif head in ("E", "A"):
            var = self.name("variable")
            out = (Exists if head == "E" else Forall)(var, self.formula())
        elif head is not None and (head.startswith("E2") or head.startswith("A2")):
            try:
                family = parse_family_spec(head[2:] or "mon", self.env)
            except RangeError as e:
                raise FormulaParseError(str(e), hpos) from None
            var = self.name("relation variable")
            body = self.formula()
            out = (SOExists if head.startswith("E2") else SOForall)(var, family, body)
        elif head is not None and _NAME.match(head):
            args = []
            while self.peek()[0] != ")":
                args.append(self.name("variable"))
            out = RelAtom(head, tuple(args))
            self.expect(")")
            return out
        else:
            raise FormulaParseError(f"unexpected token {head!r}", hpos)
        self.expect(")")
        return out


def parse_formula(text: str, env: dict | None = None) -> Formula:
    """Parse formula text; `env` resolves iso:NAME family specifiers."""
    p = _Parser(text, env)
    phi = p.formula()
    tok, pos = p.peek()
    if tok is not None:
        raise FormulaParseError(f"trailing input {tok!r}", pos)
    return phi


def format_formula(phi: Formula) -> str:
    if isinstance(phi, RelAtom):
        return "(" + " ".join((phi.name,) + phi.args) + ")"
    if isinstance(phi, EqAtom):
        return f"(= {phi.left} {phi.right})"
    if isinstance(phi, Not):
        return f"(not {format_formula(phi.sub)})"
    if isinstance(phi, And):
        return "(and " + " ".join(format_formula(s) for s in phi.subs) + ")"
    if isinstance(phi, Or):
        return "(or " + " ".join(format_formula(s) for s in phi.subs) + ")"
    if isinstance(phi, Implies):
        return f"(-> {format_formula(phi.left)} {format_formula(phi.right)})"
    if isinstance(phi, Iff):
        return f"(<-> {format_formula(phi.left)} {format_formula(phi.right)})"
    if isinstance(phi, Exists):
        return f"(E {phi.var} {format_formula(phi.body)})"
    if isinstance(phi, Forall):
        return f"(A {phi.var} {format_formula(phi.body)})"
    if isinstance(phi, SOExists):
        return f"(E2{phi.family.spec()} {phi.var} {format_formula(phi.body)})"
    if isinstance(phi, SOForall):
        return f"(A2{phi.family.spec()} {phi.var} {format_formula(phi.body)})"
    raise RangeError(f"unknown formula node {phi!r}")
