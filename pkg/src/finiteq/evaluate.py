"""Formula evaluation over a finite universe.

The environment maps first-order variable names to elements and relation
names to Relation objects.  Second-order quantifier nodes range over their
family's members; enumeration is budgeted.
"""

from __future__ import annotations

import itertools

from .core import Relation, Universe
from .errors import ArityError, RangeError, UnboundVariableError
from .formulas import (And, EqAtom, Exists, Forall, Formula, Iff, Implies, Not,
                       Or, RelAtom, SOExists, SOForall)


def eval_formula(phi: Formula, universe: Universe, env: dict,
                 max_family: int = 200000) -> bool:
    """Truth value of `phi` under the given bindings."""

    def lookup_fo(name, env):
        v = env.get(name)
        if not isinstance(v, int):
            raise UnboundVariableError(f"first-order variable {name!r} is unbound")
        return v

    def ev(node, env):
        if isinstance(node, RelAtom):
            rel = env.get(node.name)
            if not isinstance(rel, Relation):
                raise UnboundVariableError(f"relation {node.name!r} is unbound")
            if len(node.args) != rel.arity:
                raise ArityError(
                    f"{node.name} applied to {len(node.args)} arguments, arity {rel.arity}")
            return tuple(lookup_fo(a, env) for a in node.args) in rel.tuples
        if isinstance(node, EqAtom):
            return lookup_fo(node.left, env) == lookup_fo(node.right, env)
        if isinstance(node, Not):
            return not ev(node.sub, env)
        if isinstance(node, And):
            return all(ev(s, env) for s in node.subs)
        if isinstance(node, Or):
            return any(ev(s, env) for s in node.subs)
        if isinstance(node, Implies):
            return (not ev(node.left, env)) or ev(node.right, env)
        if isinstance(node, Iff):
            return ev(node.left, env) == ev(node.right, env)
        if isinstance(node, (Exists, Forall)):
            want = isinstance(node, Exists)
            for x in universe.elements:
                child = dict(env)
                child[node.var] = x
                if ev(node.body, child) == want:
                    return want
            return not want
        if isinstance(node, (SOExists, SOForall)):
            want = isinstance(node, SOExists)
            for rel in node.family.members(universe, max_family):
                child = dict(env)
                child[node.var] = rel
                if ev(node.body, child) == want:
                    return want
            return not want
        raise RangeError(f"unknown formula node {node!r}")

    return ev(phi, env)


class _FastPathUnsupported(Exception):
    pass


def _mask_eval(node, universe, env, var, full):
    """Bitmask over values of `var`; only quantifier-free unary shapes."""
    if isinstance(node, RelAtom):
        rel = env.get(node.name)
        if not isinstance(rel, Relation):
            raise UnboundVariableError(f"relation {node.name!r} is unbound")
        if rel.arity != 1 or node.args != (var,):
            raise _FastPathUnsupported
        return rel.bitset()
    if isinstance(node, EqAtom):
        if node.left == var and node.right == var:
            return full
        if var in (node.left, node.right):
            other = node.right if node.left == var else node.left
            v = env.get(other)
            if not isinstance(v, int):
                raise UnboundVariableError(f"first-order variable {other!r} is unbound")
            return 1 << v
        raise _FastPathUnsupported
    if isinstance(node, Not):
        return full & ~_mask_eval(node.sub, universe, env, var, full)
    if isinstance(node, And):
        m = full
        for s in node.subs:
            m &= _mask_eval(s, universe, env, var, full)
        return m
    if isinstance(node, Or):
        m = 0
        for s in node.subs:
            m |= _mask_eval(s, universe, env, var, full)
        return m
    if isinstance(node, Implies):
        return (full & ~_mask_eval(node.left, universe, env, var, full)) \
            | _mask_eval(node.right, universe, env, var, full)
    if isinstance(node, Iff):
        l = _mask_eval(node.left, universe, env, var, full)
        r = _mask_eval(node.right, universe, env, var, full)
        return full & ~(l ^ r)
    raise _FastPathUnsupported


def defined_set(phi: Formula, universe: Universe, env: dict, variables,
                max_family: int = 200000) -> frozenset:
    """The set of variable tuples satisfying `phi` under `env`.

    `variables` lists the free first-order variable names acting as the
    tuple slots.  Quantifier-free unary formulas go through a bitmask fast
    path; everything else is evaluated pointwise.
    """
    variables = tuple(variables)
    if len(variables) == 1:
        try:
            full = (1 << universe.size) - 1
            mask = _mask_eval(phi, universe, env, variables[0], full)
            return frozenset((i,) for i in universe.elements if (mask >> i) & 1)
        except _FastPathUnsupported:
            pass
    out = []
    for xs in itertools.product(universe.elements, repeat=len(variables)):
        child = dict(env)
        child.update(zip(variables, xs))
        if eval_formula(phi, universe, child, max_family):
            out.append(xs)
    return frozenset(out)


def defines_relation(phi: Formula, universe: Universe, env: dict, variables,
                     relation: Relation, max_family: int = 200000) -> bool:
    """Whether `phi` defines exactly `relation` on the listed variables."""
    variables = tuple(variables)
    if len(variables) != relation.arity:
        raise ArityError("variable list length differs from the relation arity")
    if len(variables) == 1:
        try:
            full = (1 << universe.size) - 1
            mask = _mask_eval(phi, universe, env, variables[0], full)
            return mask == relation.bitset()
        except _FastPathUnsupported:
            pass
    for xs in itertools.product(universe.elements, repeat=len(variables)):
        child = dict(env)
        child.update(zip(variables, xs))
        if eval_formula(phi, universe, child, max_family) != (xs in relation.tuples):
            return False
    return True
