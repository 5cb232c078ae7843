"""Definability and interpretation checks between quantifier families.

An interpretation of family K1 in family K2 is a single first-order formula
phi(x0..x{n-1}, S0..S{m-1}) such that every member R of K1 equals the set
defined by phi for some tuple of members of K2 substituted for the S's.
Certificates record one witness tuple per member and re-verify by direct
evaluation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .core import Relation, Universe
from .errors import ArityError, BudgetExceededError, RangeError
from .evaluate import defines_relation, eval_formula
from .families import QuantifierFamily
from .formulas import (And, EqAtom, Exists, Forall, Formula, Iff, Implies, Not,
                       Or, RelAtom, free_variables, is_first_order, substitute)


def fo_slots(phi: Formula, expected: int | None = None):
    """The tuple-slot variables x0..x{n-1}; validates the naming convention."""
    fo, _ = free_variables(phi)
    n = len(fo) if expected is None else expected
    slots = tuple(f"x{i}" for i in range(n))
    extra = fo - set(slots)
    if extra:
        raise RangeError(
            f"free first-order variables must be x0..x{n-1}, found {sorted(extra)}")
    return slots


def rel_slots(phi: Formula, params=()):
    """Free relation names other than fixed parameters, in S-index order."""
    _, rels = free_variables(phi)
    names = sorted(rels - set(params))
    for i, name in enumerate(names):
        if name != f"S{i}":
            raise RangeError(
                f"free relation variables must be S0..S{{m-1}}, found {names}")
    return tuple(names)


def check_definable(family: QuantifierFamily, phi: Formula, universe: Universe,
                    max_relations: int = 1 << 17, max_family: int = 200000):
    """Whether phi (one free relation variable, no free x's) defines the family.

    Checks that for every relation R of the family's arity, binding the free
    relation variable to R makes phi true exactly when R belongs to the
    family.  Returns (True, None) or (False, counterexample relation).
    """
    fo, rels = free_variables(phi)
    if fo:
        raise RangeError(f"definability formula must be a sentence, free: {sorted(fo)}")
    if len(rels) != 1:
        raise RangeError(f"need exactly one free relation variable, found {sorted(rels)}")
    (name,) = rels
    arity = family.arity(universe)
    total = 2 ** (universe.size ** arity)
    if total > max_relations:
        raise BudgetExceededError(
            f"definability check over {total} relations", estimate=total,
            budget=max_relations)
    for tuples in _all_relation_tuple_sets(universe, arity):
        r = Relation(universe, arity, tuples)
        holds = eval_formula(phi, universe, {name: r}, max_family)
        if holds != family.contains(r):
            return False, r
    return True, None


def _all_relation_tuple_sets(universe, arity):
    base = list(itertools.product(universe.elements, repeat=arity))
    for bits in range(2 ** len(base)):
        yield frozenset(t for i, t in enumerate(base) if (bits >> i) & 1)


def _rel_key(relation: Relation):
    return tuple(sorted(relation.tuples))


@dataclass(frozen=True)
class InterpretationCertificate:
    """A verified interpretation: formula plus one witness tuple per member."""

    universe: Universe
    phi: Formula
    k1_spec: str
    k2_specs: tuple
    slots: tuple           # free first-order variables, in order
    rel_vars: tuple        # free relation variables, in order
    witnesses: tuple       # ((member, (witness, ...)), ...) in family order
    params: tuple = ()     # ((name, relation), ...) fixed bindings

    def witness_for(self, relation: Relation):
        key = _rel_key(relation)
        for member, ws in self.witnesses:
            if _rel_key(member) == key:
                return ws
        return None

    def verify(self, max_family: int = 200000) -> bool:
        env_base = dict(self.params)
        for member, ws in self.witnesses:
            env = dict(env_base)
            env.update(zip(self.rel_vars, ws))
            if not defines_relation(self.phi, self.universe, env, self.slots,
                                    member, max_family):
                return False
        return True


@dataclass(frozen=True)
class InterpretationResult:
    ok: bool
    certificate: InterpretationCertificate | None = None
    counterexample: Relation | None = None


def check_interpretation(phi: Formula, k1: QuantifierFamily, k2,
                         universe: Universe, params: dict | None = None,
                         max_work: int = 50_000_000,
                         max_members: int = 200000) -> InterpretationResult:
    """Search witness tuples in k2 making phi define each member of k1.

    `k2` may be a single family or one family per relation variable.  `params`
    are fixed named relation bindings.  Witnesses are tried in enumeration
    order, so certificates are deterministic.  Refuses with an estimate when
    the worst-case work |K1| * prod|K2| * N^n exceeds `max_work`.
    """
    params = dict(params or {})
    if not is_first_order(phi):
        raise RangeError("interpretation formulas must be first-order; "
                         "use check_expressibility for quantifier nodes")
    rel_vars = rel_slots(phi, params)
    n1 = k1.arity(universe)
    slots = fo_slots(phi, n1)
    k2s = list(k2) if isinstance(k2, (list, tuple)) else [k2] * len(rel_vars)
    if len(k2s) != len(rel_vars):
        raise RangeError(f"{len(rel_vars)} relation variables but {len(k2s)} families")
    counts = [f.count(universe) for f in k2s]
    estimate = k1.count(universe) * (universe.size ** n1)
    for c in counts:
        estimate *= max(c, 1)
    if estimate > max_work:
        raise BudgetExceededError(
            f"interpretation search estimated at {estimate} evaluations",
            estimate=estimate, budget=max_work)
    pools = [list(f.members(universe, max_members)) for f in k2s]
    witnesses = []
    for member in k1.members(universe, max_members):
        found = None
        for ws in itertools.product(*pools):
            env = dict(params)
            env.update(zip(rel_vars, ws))
            if defines_relation(phi, universe, env, slots, member):
                found = ws
                break
        if found is None:
            return InterpretationResult(False, counterexample=member)
        witnesses.append((member, found))
    cert = InterpretationCertificate(
        universe, phi, k1.spec(), tuple(f.spec() for f in k2s), slots,
        rel_vars, tuple(witnesses), tuple(sorted(params.items())))
    return InterpretationResult(True, certificate=cert)


def check_expressibility(phi: Formula, k1: QuantifierFamily, k2,
                         universe: Universe, params: dict | None = None,
                         max_work: int = 50_000_000,
                         max_members: int = 200000) -> InterpretationResult:
    """Like check_interpretation, but phi may use second-order quantifier nodes."""
    params = dict(params or {})
    rel_vars = rel_slots(phi, params)
    n1 = k1.arity(universe)
    slots = fo_slots(phi, n1)
    k2s = list(k2) if isinstance(k2, (list, tuple)) else [k2] * len(rel_vars)
    if len(k2s) != len(rel_vars):
        raise RangeError(f"{len(rel_vars)} relation variables but {len(k2s)} families")
    estimate = k1.count(universe) * (universe.size ** n1)
    for f in k2s:
        estimate *= max(f.count(universe), 1)
    if estimate > max_work:
        raise BudgetExceededError(
            f"expressibility search estimated at {estimate} evaluations",
            estimate=estimate, budget=max_work)
    pools = [list(f.members(universe, max_members)) for f in k2s]
    witnesses = []
    for member in k1.members(universe, max_members):
        found = None
        for ws in itertools.product(*pools):
            env = dict(params)
            env.update(zip(rel_vars, ws))
            if defines_relation(phi, universe, env, slots, member, max_members):
                found = ws
                break
        if found is None:
            return InterpretationResult(False, counterexample=member)
        witnesses.append((member, found))
    cert = InterpretationCertificate(
        universe, phi, k1.spec(), tuple(f.spec() for f in k2s), slots,
        rel_vars, tuple(witnesses), tuple(sorted(params.items())))
    return InterpretationResult(True, certificate=cert)


# ---------------------------------------------------------------------------
# formula search


def _enumerate_formulas(size, fo_vars, rel_sigs, depth, next_bound):
    """All formulas with exactly `size` nodes, deterministically ordered.

    `rel_sigs` is a tuple of (name, arity).  Quantifiers introduce variables
    y<next_bound> and consume depth.
    """
    if size < 1:
        return
    if size == 1:
        for name, arity in rel_sigs:
            for args in itertools.product(fo_vars, repeat=arity):
                yield RelAtom(name, args)
        for i, l in enumerate(fo_vars):
            for r in fo_vars[i + 1:]:
                yield EqAtom(l, r)
        return
    for sub in _enumerate_formulas(size - 1, fo_vars, rel_sigs, depth, next_bound):
        yield Not(sub)
    for lsize in range(1, size - 1):
        rsize = size - 1 - lsize
        for l in _enumerate_formulas(lsize, fo_vars, rel_sigs, depth, next_bound):
            for r in _enumerate_formulas(rsize, fo_vars, rel_sigs, depth, next_bound):
                yield And((l, r))
                yield Or((l, r))
                yield Implies(l, r)
                yield Iff(l, r)
    if depth > 0:
        var = f"y{next_bound}"
        inner = fo_vars + (var,)
        for sub in _enumerate_formulas(size - 1, inner, rel_sigs, depth - 1,
                                       next_bound + 1):
            yield Exists(var, sub)
            yield Forall(var, sub)


@dataclass(frozen=True)
class SearchResult:
    found: bool
    result: InterpretationResult | None = None
    candidates_tried: int = 0
    exhausted: bool = False


def search_interpretation(k1: QuantifierFamily, k2: QuantifierFamily,
                          universe: Universe, max_m: int = 2,
                          max_size: int = 5, max_depth: int = 1,
                          max_candidates: int = 20000,
                          max_work: int = 50_000_000) -> SearchResult:
    """Enumerate candidate formulas by size and try each as an interpretation.

    Candidates are ordered by witness count m, then node count, then a fixed
    constructor order, so the first hit is deterministic.  Returns an
    exhausted=True result when the bounded space contains no interpretation.
    """
    n1 = k1.arity(universe)
    n2 = k2.arity(universe)
    fo_vars = tuple(f"x{i}" for i in range(n1))
    tried = 0
    for m in range(1, max_m + 1):
        rel_sigs = tuple((f"S{j}", n2) for j in range(m))
        for size in range(1, max_size + 1):
            for phi in _enumerate_formulas(size, fo_vars, rel_sigs, max_depth, 0):
                _, rels = free_variables(phi)
                if rels != frozenset(name for name, _ in rel_sigs):
                    continue
                fo, _ = free_variables(phi)
                if fo != frozenset(fo_vars):
                    continue
                tried += 1
                if tried > max_candidates:
                    raise BudgetExceededError(
                        f"formula search exceeded {max_candidates} candidates",
                        budget=max_candidates)
                res = check_interpretation(phi, k1, k2, universe,
                                           max_work=max_work)
                if res.ok:
                    return SearchResult(True, res, tried)
    return SearchResult(False, None, tried, exhausted=True)


# ---------------------------------------------------------------------------
# composition


def compose_interpretations(c12: InterpretationCertificate,
                            c23: InterpretationCertificate,
                            max_family: int = 200000) -> InterpretationCertificate:
    """Chain two certificates into one for K1 in K3 and re-verify it.

    Each atom S_j(t...) of the first formula is replaced by the second
    formula with its tuple slots substituted and its relation variables
    renamed apart; witnesses are the concatenated witness chains.
    """
    if c12.universe != c23.universe:
        raise RangeError("certificates must share a universe")
    if c12.params or c23.params:
        raise RangeError("composition of certificates with fixed parameters "
                         "is not supported")
    universe = c12.universe
    m12, m23 = len(c12.rel_vars), len(c23.rel_vars)
    new_vars = tuple(f"S{j * m23 + k}" for j in range(m12) for k in range(m23))

    def replace(j):
        def build(args):
            if len(args) != len(c23.slots):
                raise ArityError("witness arity mismatch during composition")
            fo_map = dict(zip(c23.slots, args))
            rel_map = {
                c23.rel_vars[k]: (lambda a, name=f"S{j * m23 + k}": RelAtom(name, a))
                for k in range(m23)
            }
            return substitute(c23.phi, fo_map, rel_map)
        return build

    rel_map = {c12.rel_vars[j]: replace(j) for j in range(m12)}
    phi13 = substitute(c12.phi, rel_map=rel_map)

    witnesses = []
    for member, mid_ws in c12.witnesses:
        chain = []
        for mid in mid_ws:
            inner = c23.witness_for(mid)
            if inner is None:
                raise RangeError(
                    "second certificate has no witness for an intermediate relation")
            chain.extend(inner)
        witnesses.append((member, tuple(chain)))
    cert = InterpretationCertificate(
        universe, phi13, c12.k1_spec, tuple(c23.k2_specs) * m12, c12.slots,
        new_vars, tuple(witnesses))
    if not cert.verify(max_family):
        raise RangeError("composed certificate failed re-verification")
    return cert
