"""Support sets and the cardinality invariants of relations.

A set A supports a relation R when any two tuples that are equivalent over A
agree on membership in R.  The central computation reduces minimum supports
to a minimum vertex cover: a single-flip violation is a pair of tuples that
differ by renaming one value block v to a fresh value w and disagree on
membership; A supports R exactly when A meets every such violating pair
{v, w}, provided |A| <= N - arity - 1 (a routing argument turns any violating
pair of equivalent tuples into a chain of single flips through fresh values,
which needs at least arity+1 values outside A).  For larger A the definition
is checked directly, which is cheap because few values remain outside A.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

from .core import EquivalenceRelation, Relation, Universe
from .errors import BudgetExceededError, RangeError


# ---------------------------------------------------------------------------
# violation graph and minimum vertex cover


@lru_cache(maxsize=512)
def violation_adjacency(relation: Relation) -> tuple:
    """Adjacency bitmasks of the single-flip violation graph.

    Vertices are universe elements; {v, w} is an edge when renaming the value
    block v of some tuple to the fresh value w changes membership in the
    relation.
    """
    n = relation.universe.size
    arity = relation.arity
    tuples = relation.tuples
    adj = [0] * n
    for b in itertools.product(range(n), repeat=arity):
        in_r = b in tuples
        values = set(b)
        for v in values:
            for w in range(n):
                if w in values:
                    continue
                c = tuple(w if x == v else x for x in b)
                if (c in tuples) != in_r:
                    adj[v] |= 1 << w
                    adj[w] |= 1 << v
    return tuple(adj)


def _cover_size(adj, active, memo):
    """Size of a minimum vertex cover of the subgraph induced by `active`."""
    cached = memo.get(active)
    if cached is not None:
        return cached
    best_v, best_deg = -1, 0
    a = active
    while a:
        v = (a & -a).bit_length() - 1
        a &= a - 1
        deg = (adj[v] & active).bit_count()
        if deg > best_deg:
            best_v, best_deg = v, deg
    if best_deg == 0:
        result = 0
    elif best_deg == 1:
        # only a matching remains: one endpoint per edge
        edges = 0
        a = active
        while a:
            v = (a & -a).bit_length() - 1
            a &= a - 1
            edges += (adj[v] & active).bit_count()
        result = edges // 2
    else:
        nb = adj[best_v] & active
        result = min(
            1 + _cover_size(adj, active & ~(1 << best_v), memo),
            nb.bit_count() + _cover_size(adj, active & ~(1 << best_v) & ~nb, memo),
        )
    memo[active] = result
    return result


def min_vertex_cover(adj, n: int):
    """Minimum vertex cover size and its lexicographically least witness."""
    memo = {}
    active = 0
    for v in range(n):
        if adj[v]:
            active |= 1 << v
    size = _cover_size(adj, active, memo)
    cover = []
    remaining = size
    for v in range(n):
        if remaining == 0:
            break
        if not (active >> v) & 1:
            continue
        if _cover_size(adj, active & ~(1 << v), memo) == remaining - 1:
            cover.append(v)
            active &= ~(1 << v)
            remaining -= 1
    return size, frozenset(cover)


def _covers(adj, a_set) -> bool:
    mask = 0
    for v in a_set:
        mask |= 1 << v
    for v in range(len(adj)):
        if not (mask >> v) & 1 and adj[v] & ~mask:
            return False
    return True


# ---------------------------------------------------------------------------
# support predicate


def _is_support_structured(a_set, relation) -> bool:
    """Definition-level check, organized for small complements of A.

    For each tuple, every equivalent tuple arises by injectively reassigning
    its non-A value blocks to values outside A; this enumerates them all.
    """
    n = relation.universe.size
    arity = relation.arity
    tuples = relation.tuples
    outside = [x for x in range(n) if x not in a_set]
    for b in itertools.product(range(n), repeat=arity):
        in_r = b in tuples
        blocks = []
        for x in b:
            if x not in a_set and x not in blocks:
                blocks.append(x)
        for image in itertools.permutations(outside, len(blocks)):
            assign = dict(zip(blocks, image))
            c = tuple(assign.get(x, x) for x in b)
            if (c in tuples) != in_r:
                return False
    return True


def is_support_definitional(a_set, relation, max_work: int = 5_000_000) -> bool:
    """Naive check over all pairs of equivalent tuples (test oracle)."""
    from .core import approx_eq

    n = relation.universe.size
    arity = relation.arity
    work = n ** (2 * arity)
    if work > max_work:
        raise BudgetExceededError(
            f"definitional support check needs {work} pairs", estimate=work,
            budget=max_work)
    all_tuples = list(itertools.product(range(n), repeat=arity))
    for b in all_tuples:
        for c in all_tuples:
            if approx_eq(b, c, a_set) and ((b in relation.tuples) != (c in relation.tuples)):
                return False
    return True


def is_support(a_set, relation) -> bool:
    """Whether `a_set` supports the relation (exact, fast for all sizes)."""
    a_set = frozenset(a_set)
    n = relation.universe.size
    for x in a_set:
        if not 0 <= x < n:
            raise RangeError(f"element {x} outside universe of size {n}")
    if len(a_set) <= n - relation.arity - 1:
        return _covers(violation_adjacency(relation), a_set)
    return _is_support_structured(a_set, relation)


# ---------------------------------------------------------------------------
# the invariants


@dataclass(frozen=True)
class SupportWitness:
    """A minimum support with the search metadata needed to audit it."""

    a_set: frozenset
    value: int
    exact: bool = True
    note: str = ""


def lambda0_prime(relation: Relation) -> SupportWitness:
    """Least cardinality of a support, with a lexicographically least witness."""
    n = relation.universe.size
    arity = relation.arity
    adj = violation_adjacency(relation)
    size, cover = min_vertex_cover(adj, n)
    if size <= n - arity - 1:
        return SupportWitness(cover, size)
    # every support is a cover, so scan upward from the cover size; supports
    # this large are checked structurally (few values remain outside)
    for s in range(size, n + 1):
        for combo in itertools.combinations(range(n), s):
            if _covers(adj, combo) and _is_support_structured(frozenset(combo), relation):
                return SupportWitness(frozenset(combo), s, note="fallback-scan")
    return SupportWitness(frozenset(range(n)), n, note="fallback-scan")


def lambda0(relation: Relation) -> int:
    """Support size capped at half the universe."""
    return min(relation.universe.half(), lambda0_prime(relation).value)


def _type_signature(relation, a, params):
    """Truth values of all atoms about `a` with parameters from `params`.

    Equality atoms never distinguish elements outside the parameter set, so
    they are omitted from the signature.
    """
    tuples = relation.tuples
    arity = relation.arity
    if arity == 1:
        return ((a,) in tuples,)
    if arity == 2:
        sig = [(a, a) in tuples]
        for p in params:
            sig.append((a, p) in tuples)
            sig.append((p, a) in tuples)
        return tuple(sig)
    terms = (a,) + tuple(params)
    sig = []
    for pattern in itertools.product(range(len(terms)), repeat=arity):
        if 0 in pattern:
            sig.append(tuple(terms[i] for i in pattern) in tuples)
    return tuple(sig)


@dataclass(frozen=True)
class TypeCountWitness:
    a_set: frozenset
    value: int


def count_types_outside(relation: Relation, a_set) -> int:
    """Number of distinct basic types over `a_set` among elements outside it."""
    params = tuple(sorted(a_set))
    return len({_type_signature(relation, a, params)
                for a in relation.universe.elements if a not in a_set})


def lambda1(relation: Relation, restrict_to_domain: bool = True,
            max_subsets: int = 1 << 20) -> TypeCountWitness:
    """Maximum, over parameter sets A, of the type count outside A.

    Parameters outside the domain never help (their atoms are uniformly
    false outside A, and removing them can only free up a realizing
    element), so the search runs over subsets of the domain by default.
    """
    if restrict_to_domain:
        pool = sorted(relation.domain())
    else:
        pool = list(relation.universe.elements)
    if 2 ** len(pool) > max_subsets:
        raise BudgetExceededError(
            f"type-count search over 2^{len(pool)} parameter sets",
            estimate=2 ** len(pool), budget=max_subsets)
    best = TypeCountWitness(frozenset(), count_types_outside(relation, frozenset()))
    for k in range(1, len(pool) + 1):
        for combo in itertools.combinations(pool, k):
            count = count_types_outside(relation, combo)
            if count > best.value:
                best = TypeCountWitness(frozenset(combo), count)
    return best


def greedy_type_set(relation: Relation, target: int, max_rounds: int = 4):
    """Greedily grow a parameter set whose outside type count reaches `target`.

    Returns a TypeCountWitness whose value is a lower bound for lambda1;
    stops early once `target` is reached.
    """
    dom = sorted(relation.domain())
    a_set: list = []
    best = count_types_outside(relation, a_set)
    for _ in range(max_rounds):
        if best >= target:
            break
        improved = False
        for x in dom:
            if x in a_set:
                continue
            count = count_types_outside(relation, a_set + [x])
            if count > best:
                a_set.append(x)
                best = count
                improved = True
                if best >= target:
                    break
        if not improved:
            break
    return TypeCountWitness(frozenset(a_set), best)


# ---------------------------------------------------------------------------
# equivalence-relation counting invariants


def nu_ge(eq: EquivalenceRelation, k: int) -> int:
    """Number of classes with at least k elements."""
    if k < 1:
        raise RangeError("class-size threshold must be >= 1")
    return sum(1 for b in eq.blocks if len(b) >= k)


def _distinguished(b, c, copies) -> bool:
    for e in copies:
        b_in = e.block_of(b) is not None
        c_in = e.block_of(c) is not None
        if b_in != c_in:
            return True
        if b_in and c_in and not e.related(b, c):
            return True
    return False


def uq(eq: EquivalenceRelation, k: int, max_work: int = 2_000_000) -> int:
    """Largest set pairwise distinguished by k isomorphic copies of `eq`.

    An element pair is distinguished by a copy when exactly one member lies in
    its domain, or both do but in different classes.
    """
    from .families import IsoClosureFamily

    universe = eq.universe
    n = universe.size
    copies = [EquivalenceRelation.from_relation(r)
              for r in IsoClosureFamily(eq.to_relation()).members(universe)]
    work = len(copies) ** k * (2 ** n)
    if work > max_work:
        raise BudgetExceededError(
            f"uq search over {work} configurations", estimate=work, budget=max_work)
    best = 1  # a single element is always pairwise distinguished, vacuously
    for chosen in itertools.product(copies, repeat=k):
        pairs = {(b, c) for b in range(n) for c in range(b + 1, n)
                 if _distinguished(b, c, chosen)}
        # greedy-free exact maximum over subsets
        for mask in range(2 ** n):
            if mask.bit_count() <= best:
                continue
            members = [v for v in range(n) if (mask >> v) & 1]
            if all((b, c) in pairs
                   for i, b in enumerate(members) for c in members[i + 1:]):
                best = mask.bit_count()
    return best


# ---------------------------------------------------------------------------
# family-level invariants


def lambda0_K(family, universe: Universe, max_members: int = 200000) -> int:
    """Least bound strictly above the capped support size of every member."""
    best = -1
    for r in family.members(universe, max_members):
        best = max(best, lambda0(r))
    return best + 1


def lambda1_K(family, universe: Universe, max_members: int = 200000) -> int:
    """Least bound strictly above the type-count invariant of every member."""
    best = -1
    for r in family.members(universe, max_members):
        best = max(best, lambda1(r).value)
    return best + 1


def mu_K(family, universe: Universe, max_members: int = 200000) -> int:
    """Least bound strictly above the domain size of every member."""
    best = -1
    for r in family.members(universe, max_members):
        best = max(best, len(r.domain()))
    return best + 1
