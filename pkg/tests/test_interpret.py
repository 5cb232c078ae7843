import random

import pytest

from finiteq import (BudgetExceededError, ExplicitFamily, MonFamily,
                     RangeError, Relation, SizeConstraint, TrivialFamily,
                     Universe, check_definable, check_expressibility,
                     check_interpretation, compose_interpretations,
                     parse_family_spec, parse_formula, search_interpretation)

U4 = Universe(4)
U6 = Universe(6)

SINGLETON = parse_formula(
    "(and (E x (S x)) (A x (A y (-> (and (S x) (S y)) (= x y)))))")


def test_check_definable_examples():
    assert check_definable(MonFamily(SizeConstraint("exact", 1)),
                           SINGLETON, U4) == (True, None)
    ok, ce = check_definable(MonFamily(SizeConstraint("exact", 2)),
                             SINGLETON, U4)
    assert not ok and ce is not None
    empty = Relation.make(U4, 1, [])
    assert check_definable(ExplicitFamily((empty,)),
                           parse_formula("(A x (not (S x)))"), U4) == (True, None)


def test_check_interpretation_intersection_example():
    phi = parse_formula("(and (S0 x0) (S1 x0))")
    k1 = parse_family_spec("mon:1")
    k2 = parse_family_spec("mon:2")
    result = check_interpretation(phi, k1, k2, U6)
    assert result.ok
    assert result.certificate.verify()
    # every singleton got two 2-set witnesses
    assert len(result.certificate.witnesses) == 6


def test_check_interpretation_counterexample():
    phi = parse_formula("(S0 x0)")
    result = check_interpretation(phi, parse_family_spec("mon:2"),
                                  parse_family_spec("mon:1"), U6)
    assert not result.ok
    assert len(result.counterexample) == 2  # a 2-set has no 1-set equal to it


def test_check_interpretation_m_zero():
    full = Relation.make(U4, 1, [(i,) for i in range(4)])
    result = check_interpretation(parse_formula("(= x0 x0)"),
                                  ExplicitFamily((full,)), [], U4)
    assert result.ok


def test_check_interpretation_rejects_second_order():
    phi = parse_formula("(E2mon T (and (S0 x0) (E y (T y))))")
    with pytest.raises(RangeError):
        check_interpretation(phi, parse_family_spec("mon:1"),
                             parse_family_spec("mon:2"), U6)


def test_check_expressibility_accepts_fo_certificates():
    # a first-order interpretation is in particular an expressibility witness
    phi = parse_formula("(and (S0 x0) (S1 x0))")
    k1 = parse_family_spec("mon:1")
    k2 = parse_family_spec("mon:2")
    r_int = check_interpretation(phi, k1, k2, U6)
    r_exp = check_expressibility(phi, k1, k2, U6)
    assert r_int.ok == r_exp.ok is True


def test_check_expressibility_with_quantifier_node():
    # membership in the witness set, stated through a second-order node
    phi = parse_formula("(E2mon:2 T (and (A y (<-> (T y) (S0 y))) (S0 x0)))")
    result = check_expressibility(phi, parse_family_spec("mon:2"),
                                  parse_family_spec("mon:2"), U6)
    assert result.ok


def test_budget_gate():
    phi = parse_formula("(and (S0 x0) (S1 x0))")
    with pytest.raises(BudgetExceededError):
        check_interpretation(phi, parse_family_spec("mon:1"),
                             parse_family_spec("mon:2"), U6, max_work=10)


def test_search_finds_intersection_formula():
    found = search_interpretation(parse_family_spec("mon:1"),
                                  parse_family_spec("mon:2"), U6,
                                  max_m=2, max_size=3, max_depth=0)
    assert found.found
    assert found.result.certificate.verify()


def test_search_exhausts_impossible_target():
    # 2-sets cannot be defined from 1-sets by a quantifier-free formula in m<=1
    found = search_interpretation(parse_family_spec("mon:2"),
                                  parse_family_spec("mon:1"), U6,
                                  max_m=1, max_size=3, max_depth=0)
    assert not found.found and found.exhausted


def test_search_m_zero_is_exhausted():
    found = search_interpretation(parse_family_spec("mon:1"),
                                  parse_family_spec("mon:2"), U6,
                                  max_m=0, max_size=3, max_depth=0)
    assert not found.found


def test_compose_identity():
    k2 = parse_family_spec("mon:2")
    phi = parse_formula("(and (S0 x0) (S1 x0))")
    c12 = check_interpretation(phi, parse_family_spec("mon:1"), k2, U6).certificate
    ident = check_interpretation(parse_formula("(S0 x0)"), k2, k2, U6).certificate
    composed = compose_interpretations(c12, ident)
    assert composed.verify()
    assert composed.k1_spec == c12.k1_spec


def test_compose_chain_through_middle_family():
    u = Universe(8)
    inter = parse_formula("(and (S0 x0) (S1 x0))")
    c12 = check_interpretation(inter, parse_family_spec("mon:1"),
                               parse_family_spec("mon:2"), u).certificate
    c23 = check_interpretation(inter, parse_family_spec("mon:2"),
                               parse_family_spec("mon:3"), u).certificate
    composed = compose_interpretations(c12, c23)
    assert composed.verify()


def test_random_composable_pairs_reverify():
    rng = random.Random(0)
    u = Universe(6)
    inter = parse_formula("(and (S0 x0) (S1 x0))")
    union = parse_formula("(or (S0 x0) (S1 x0))")
    steps = {}
    for phi, a, b in ((inter, "mon:1", "mon:2"), (inter, "mon:2", "mon:3"),
                      (union, "mon:2", "mon:1"), (union, "mon:3", "mon:2")):
        r = check_interpretation(phi, parse_family_spec(a),
                                 parse_family_spec(b), u)
        assert r.ok
        steps[(a, b)] = r.certificate
    chains = [(("mon:1", "mon:2"), ("mon:2", "mon:3")),
              (("mon:1", "mon:2"), ("mon:2", "mon:1")),
              (("mon:2", "mon:3"), ("mon:3", "mon:2")),
              (("mon:3", "mon:2"), ("mon:2", "mon:1")),
              (("mon:3", "mon:2"), ("mon:2", "mon:3"))]
    for first, second in chains:
        composed = compose_interpretations(steps[first], steps[second])
        assert composed.verify()
