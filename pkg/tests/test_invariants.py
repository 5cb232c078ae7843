import itertools
import random

import pytest

from finiteq import (EquivalenceRelation, Relation, Universe, greedy_type_set,
                     is_support, lambda0, lambda0_K, lambda0_prime, lambda1,
                     lambda1_K, mu_K, nu_ge, uq, MonFamily, SizeConstraint)
from finiteq.invariants import is_support_definitional

from helpers import (oracle_is_support, oracle_lambda0_prime, oracle_lambda1,
                     random_relation)


def test_unary_minimum_support_closed_form():
    u = Universe(6)
    for bits in range(64):
        members = frozenset((i,) for i in range(6) if bits >> i & 1)
        r = Relation(u, 1, members)
        assert lambda0_prime(r).value == min(len(members), 6 - len(members))


def test_is_support_agrees_with_definition_randomized():
    rng = random.Random(0)
    u = Universe(5)
    for _ in range(30):
        r = random_relation(u, 2, rng)
        for size in range(4):
            a = frozenset(rng.sample(range(5), size))
            assert is_support(a, r) == oracle_is_support(a, r)


def test_lambda0_prime_matches_oracle_randomized():
    rng = random.Random(1)
    u = Universe(5)
    for _ in range(40):
        r = random_relation(u, 2, rng, density=rng.choice([0.2, 0.5, 0.8]))
        w = lambda0_prime(r)
        assert w.value == oracle_lambda0_prime(r)
        assert is_support_definitional(w.a_set, r)


def test_lambda0_caps_at_half():
    u = Universe(6)
    r = Relation(u, 2, frozenset((i, j) for i in range(6) for j in range(6)
                                 if (i + j) % 3 == 0))
    assert lambda0(r) == min(3, lambda0_prime(r).value)


def test_support_witness_is_lex_least():
    u = Universe(6)
    # support {2} and {4} both work; the witness must be {2}
    r = Relation(u, 1, frozenset({(2,), (4,)}))
    # supports of size 2: lex-least is reported
    w = lambda0_prime(r)
    allsets = [frozenset(c) for size in range(7)
               for c in itertools.combinations(range(6), size)
               if oracle_is_support(frozenset(c), r)]
    best = min((s for s in allsets if len(s) == w.value), key=sorted)
    assert w.a_set == best


def test_lambda1_matches_oracle_small():
    rng = random.Random(2)
    u = Universe(4)
    for _ in range(40):
        r = random_relation(u, 2, rng)
        assert lambda1(r).value == oracle_lambda1(r)


def test_lambda1_le_lambda0_prime_plus_one_spot():
    rng = random.Random(3)
    u = Universe(6)
    for _ in range(50):
        r = random_relation(u, 2, rng)
        assert lambda1(r).value <= lambda0_prime(r).value + 1


def test_greedy_type_set_is_a_lower_bound():
    rng = random.Random(4)
    u = Universe(6)
    for _ in range(20):
        r = random_relation(u, 2, rng)
        exact = lambda1(r).value
        greedy = greedy_type_set(r, exact)
        assert greedy.value <= exact


def test_nu_and_uq():
    u = Universe(8)
    eq = EquivalenceRelation.make(u, [{0, 1, 2}, {3, 4}, {5}])
    assert nu_ge(eq, 2) == 2
    assert nu_ge(eq, 3) == 1
    assert nu_ge(eq, 1) == 3
    assert uq(eq, 1, max_work=10**6) >= nu_ge(eq, 2)


def test_family_invariants():
    u = Universe(5)
    fam = MonFamily(SizeConstraint("exact", 2))
    # every 2-set has minimum support 2, lambda1 = 2, so family value is 3
    assert lambda0_K(fam, u) == 3
    assert lambda1_K(fam, u) == 1 + max(
        lambda1(m).value for m in fam.members(u))
    assert mu_K(fam, u) >= 1


def test_subadditivity_spot():
    rng = random.Random(5)
    u = Universe(5)
    for _ in range(20):
        a = random_relation(u, 2, rng)
        b = random_relation(u, 2, rng)
        union = Relation(u, 2, a.tuples | b.tuples)
        inter = Relation(u, 2, a.tuples & b.tuples)
        bound = lambda0_prime(a).value + lambda0_prime(b).value
        assert lambda0_prime(union).value <= bound
        assert lambda0_prime(inter).value <= bound
