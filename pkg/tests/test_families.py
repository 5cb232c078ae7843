import itertools
import math
import random

import pytest

from finiteq import (BudgetExceededError, EqFamily, EquivalenceRelation,
                     ExplicitFamily, InjFamily, MonFamily, NAryFamily,
                     OrdFamily, PartialInjection, RangeError, Relation,
                     SizeConstraint, TrivialFamily, Universe,
                     parse_family_spec)

U5 = Universe(5)
U6 = Universe(6)


def test_trivial_family_is_singletons():
    fam = TrivialFamily()
    members = list(fam.members(U5))
    assert len(members) == 5
    assert all(len(m) == 1 and m.arity == 1 for m in members)


def test_mon_family_counts():
    assert MonFamily(SizeConstraint("exact", 2)).count(U6) == math.comb(6, 2)
    assert MonFamily(SizeConstraint("le", 2)).count(U6) == 1 + 6 + 15
    assert MonFamily(SizeConstraint("any")).count(U6) == 64
    half = MonFamily(SizeConstraint("exact", "half"))
    assert half.count(U6) == math.comb(6, 3)


def test_inj_family_count_matches_enumeration():
    fam = InjFamily(SizeConstraint("exact", 2))
    members = list(fam.members(U5))
    assert len(members) == len(set(members)) == fam.count(U5)
    # oracle: ordered pairs of 2 distinct sources to 2 distinct targets
    oracle = 0
    for src in itertools.permutations(range(5), 2):
        for dst in itertools.permutations(range(5), 2):
            if src[0] < src[1]:
                oracle += 1
    assert len(members) == oracle


def test_eq_family_constraints():
    fam = parse_family_spec("eq:<=2")
    members = list(fam.members(U5))
    for m in members:
        eq = EquivalenceRelation.from_relation(m)
        assert len(eq.blocks) <= 2
    assert members, "family must be nonempty"


def test_ord_family_is_linear_orders():
    fam = OrdFamily(SizeConstraint("exact", 3))
    members = list(fam.members(U5))
    assert len(members) == math.comb(5, 3) * math.factorial(3)
    for m in members:
        assert m.arity == 2 and len(m.domain()) == 3


def test_nary_family():
    fam = parse_family_spec("nary:2,2")
    members = list(fam.members(U5))
    for m in members:
        assert m.arity == 2 and len(m.domain()) <= 2
    # every relation on a fixed 2-element domain appears
    assert any(m.tuples == {(0, 1), (1, 0)} for m in members)


def test_families_are_permutation_closed():
    rng = random.Random(3)
    for spec in ("mon:2", "inj:2", "eq:<=2", "ord:3", "nary:2,2", "tr"):
        fam = parse_family_spec(spec)
        members = list(fam.members(U5))
        sigma = list(range(5))
        rng.shuffle(sigma)
        moved = {m.permuted(tuple(sigma)) for m in members}
        assert moved == set(members), spec


def test_contains_agrees_with_membership():
    rng = random.Random(4)
    for spec in ("mon:2", "inj:2", "ord:3"):
        fam = parse_family_spec(spec)
        members = set(fam.members(U5))
        for m in members:
            assert fam.contains(m)
        for _ in range(20):
            t = frozenset((rng.randrange(5), rng.randrange(5))
                          for _ in range(3))
            r = Relation(U5, 2, t)
            assert fam.contains(r) == (r in members)


def test_explicit_family():
    empty = Relation.make(U5, 1, [])
    fam = ExplicitFamily((empty,))
    assert list(fam.members(U5)) == [empty]
    assert fam.contains(empty)


def test_spec_round_trip():
    for spec in ("tr", "mon:2", "mon<=:2", "mon:half", "inj:3",
                 "eq:2,<=3", "ord:4", "nary:2,3", "mon"):
        fam = parse_family_spec(spec)
        again = parse_family_spec(fam.spec())
        assert fam.spec() == again.spec()


def test_spec_errors():
    with pytest.raises(RangeError):
        parse_family_spec("bogus:7")
    with pytest.raises(RangeError):
        parse_family_spec("iso:MISSING")


def test_iso_closure_family():
    base = Relation.make(U5, 2, [(0, 1), (1, 2)])  # a path
    fam = parse_family_spec("iso:P", {"P": base})
    members = list(fam.members(U5))
    assert base in members
    assert all(len(m) == 2 for m in members)
    assert fam.contains(base.permuted((4, 3, 2, 1, 0)))


def test_member_budget():
    fam = MonFamily(SizeConstraint("any"))
    with pytest.raises(BudgetExceededError):
        list(fam.members(Universe(20), max_members=100))
