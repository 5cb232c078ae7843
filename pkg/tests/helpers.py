"""Shared generators and brute-force oracles for the test suite.

The oracles recompute invariants straight from their definitions (no vertex
covers, no domain restrictions, no single-flip shortcut) so the production
implementations can be checked against an independent reading.
"""

import itertools
import random

from finiteq import (EquivalenceRelation, Relation, Universe, equality_pattern)


def random_relation(universe, arity, rng, density=0.5, elements=None):
    pool = elements if elements is not None else universe.elements
    tuples = frozenset(t for t in itertools.product(pool, repeat=arity)
                       if rng.random() < density)
    return Relation(universe, arity, tuples)


def all_partial_equivalences(universe):
    """Every equivalence relation on every subset of the universe."""

    def partitions(items):
        if not items:
            yield []
            return
        first, rest = items[0], items[1:]
        for part in partitions(rest):
            for i in range(len(part)):
                yield part[:i] + [part[i] + [first]] + part[i + 1:]
            yield part + [[first]]

    elements = list(universe.elements)
    for k in range(len(elements) + 1):
        for domain in itertools.combinations(elements, k):
            for blocks in partitions(list(domain)):
                yield EquivalenceRelation.make(universe, map(set, blocks))


# --- definitional support oracle -------------------------------------------


def approx_pairs(universe, arity, a_set):
    """All pairs of tuples equivalent over a_set: same fixed coordinates on
    a_set, same membership pattern in a_set, same equality pattern."""
    a_set = frozenset(a_set)
    for b in itertools.product(universe.elements, repeat=arity):
        for c in itertools.product(universe.elements, repeat=arity):
            if equality_pattern(b) != equality_pattern(c):
                continue
            ok = all((x == y) if (x in a_set or y in a_set) else True
                     for x, y in zip(b, c))
            if ok and all((x in a_set) == (y in a_set) for x, y in zip(b, c)):
                yield b, c


def oracle_is_support(a_set, relation):
    for b, c in approx_pairs(relation.universe, relation.arity, a_set):
        if (b in relation.tuples) != (c in relation.tuples):
            return False
    return True


def oracle_lambda0_prime(relation):
    elements = list(relation.universe.elements)
    for size in range(len(elements) + 1):
        for a_set in itertools.combinations(elements, size):
            if oracle_is_support(frozenset(a_set), relation):
                return size
    raise AssertionError("the full universe is always a support")


def oracle_type(relation, b, a_set):
    """The atomic type of b over a_set, read off the definition directly."""
    atoms = []
    a_list = sorted(a_set)
    for pattern in itertools.product(range(len(a_list) + 1),
                                     repeat=relation.arity):
        if 0 not in pattern:
            continue
        syms = [b] + a_list
        atoms.append(tuple(syms[s] for s in pattern) in relation.tuples)
    return tuple(atoms)


def oracle_lambda1(relation):
    """Max number of distinct 1-types outside A, over ALL subsets A."""
    elements = list(relation.universe.elements)
    best = 0
    for size in range(len(elements) + 1):
        for a_set in itertools.combinations(elements, size):
            outside = [x for x in elements if x not in a_set]
            types = {oracle_type(relation, b, a_set) for b in outside}
            best = max(best, len(types))
    return best


def interchangeable_blocks(eq):
    """Maximal sets of mutually renameable elements of an equivalence."""
    singles = [sorted(b)[0] for b in eq.blocks if len(b) == 1]
    outside = [x for x in eq.universe.elements if x not in eq.domain()]
    blocks = [set(b) for b in eq.blocks if len(b) >= 2]
    if singles:
        blocks.append(set(singles))
    if outside:
        blocks.append(set(outside))
    return blocks
