"""Finite universes, relations over them, and the atomic-type machinery.

Elements of a universe of size N are the integers 0..N-1.  A relation is a
finite set of equal-length tuples of elements; its domain is the set of
elements occurring in some tuple.  Equivalence relations and partial
injections are thin wrappers over binary relations.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .errors import ArityError, BudgetExceededError, RangeError


@dataclass(frozen=True, order=True)
class Universe:
    """The carrier set {0, ..., size-1}."""

    size: int

    def __post_init__(self):
        if self.size < 1:
            raise RangeError(f"universe size must be >= 1, got {self.size}")

    @property
    def elements(self) -> range:
        return range(self.size)

    def half(self) -> int:
        return self.size // 2


def _check_tuple(t, arity, size):
    if len(t) != arity:
        raise ArityError(f"tuple {t} has length {len(t)}, expected {arity}")
    for x in t:
        if not (isinstance(x, int) and 0 <= x < size):
            raise RangeError(f"element {x!r} outside universe of size {size}")


@dataclass(frozen=True)
class Relation:
    """An arity-ary relation: a frozenset of tuples over the universe."""

    universe: Universe
    arity: int
    tuples: frozenset

    def __post_init__(self):
        if self.arity < 1:
            raise ArityError(f"arity must be >= 1, got {self.arity}")
        if not isinstance(self.tuples, frozenset):
            object.__setattr__(self, "tuples", frozenset(self.tuples))
        for t in self.tuples:
            _check_tuple(t, self.arity, self.universe.size)

    @classmethod
    def make(cls, universe: Universe, arity: int, tuples) -> "Relation":
        return cls(universe, arity, frozenset(tuple(t) for t in tuples))

    def __contains__(self, t) -> bool:
        return tuple(t) in self.tuples

    def __len__(self) -> int:
        return len(self.tuples)

    def domain(self) -> frozenset:
        return frozenset(x for t in self.tuples for x in t)

    def sorted_tuples(self) -> list:
        return sorted(self.tuples)

    def permuted(self, sigma) -> "Relation":
        """Image under a permutation of the universe (sigma[i] = image of i)."""
        if sorted(sigma) != list(self.universe.elements):
            raise RangeError("sigma is not a permutation of the universe")
        return Relation(
            self.universe,
            self.arity,
            frozenset(tuple(sigma[x] for x in t) for t in self.tuples),
        )

    def restricted(self, keep) -> "Relation":
        """Sub-relation of tuples all of whose coordinates lie in `keep`."""
        keep = frozenset(keep)
        return Relation(
            self.universe,
            self.arity,
            frozenset(t for t in self.tuples if all(x in keep for x in t)),
        )

    def complement(self) -> "Relation":
        full = itertools.product(self.universe.elements, repeat=self.arity)
        return Relation(self.universe, self.arity,
                        frozenset(t for t in full if t not in self.tuples))

    def bitset(self) -> int:
        """Packed-bit view for arity <= 2; bit index of (a, b) is a*N + b."""
        if self.arity > 2:
            raise ArityError("bitset view is only provided for arity <= 2")
        n = self.universe.size
        mask = 0
        if self.arity == 1:
            for (a,) in self.tuples:
                mask |= 1 << a
        else:
            for a, b in self.tuples:
                mask |= 1 << (a * n + b)
        return mask

    @classmethod
    def from_bitset(cls, universe: Universe, arity: int, mask: int) -> "Relation":
        if arity > 2:
            raise ArityError("bitset view is only provided for arity <= 2")
        n = universe.size
        tuples = []
        i = 0
        while mask >> i:
            if (mask >> i) & 1:
                tuples.append((i,) if arity == 1 else divmod(i, n))
            i += 1
        return cls(universe, arity, frozenset(tuples))


def sum_relations(relations) -> Relation:
    """Concatenation product: tuples are concatenations, one factor per slot."""
    relations = list(relations)
    if not relations:
        raise ArityError("sum of relations needs at least one factor")
    u = relations[0].universe
    for r in relations:
        if r.universe != u:
            raise RangeError("sum factors must share a universe")
    arity = sum(r.arity for r in relations)
    tuples = frozenset(
        sum(parts, ())
        for parts in itertools.product(*(r.tuples for r in relations))
    )
    return Relation(u, arity, tuples)


# ---------------------------------------------------------------------------
# tuple equivalence over a parameter set


def approx_eq(b, c, a_set) -> bool:
    """Tuple equivalence over the parameter set `a_set`.

    Holds when (a) corresponding coordinates agree on membership in the set,
    (b) coordinates inside the set are equal, and (c) the two tuples have the
    same equality pattern.
    """
    b, c = tuple(b), tuple(c)
    if len(b) != len(c):
        raise ArityError("tuples of different length are never equivalent")
    a_set = frozenset(a_set)
    m = len(b)
    for i in range(m):
        bi_in, ci_in = b[i] in a_set, c[i] in a_set
        if bi_in != ci_in:
            return False
        if bi_in and b[i] != c[i]:
            return False
    for i in range(m):
        for j in range(i + 1, m):
            if (b[i] == b[j]) != (c[i] == c[j]):
                return False
    return True


def equality_pattern(t) -> tuple:
    """Partition of positions by value, as a tuple of first-occurrence indices."""
    first = {}
    out = []
    for i, x in enumerate(t):
        out.append(first.setdefault(x, i))
    return tuple(out)


# ---------------------------------------------------------------------------
# basic types

# Atom term encoding: ("v", i) for the i-th free variable, ("c", a) for the
# parameter a.  Atom keys:
#   ("rel", r, pattern)  -- membership of the substituted tuple in relation r
#   ("eq", t1, t2)       -- equality of two terms (variable/variable or
#                           variable/parameter; t1 < t2 in term order)


def _term_value(term, b):
    return b[term[1]] if term[0] == "v" else term[1]


def _atom_universe(m, params, arities):
    terms = [("v", i) for i in range(m)] + [("c", a) for a in params]
    for r, n in enumerate(arities):
        for pattern in itertools.product(terms, repeat=n):
            yield ("rel", r, pattern)
    for i in range(m):
        for j in range(i + 1, m):
            yield ("eq", ("v", i), ("v", j))
        for a in params:
            yield ("eq", ("v", i), ("c", a))


@dataclass(frozen=True)
class BasicType:
    """The signed set of atomic facts a tuple satisfies over a parameter set.

    Stored as the set of satisfied atom keys; since every atomic pattern gets
    exactly one sign, the negative part is the complement within
    `atom_keys()`.
    """

    length: int
    params: tuple
    arities: tuple
    positive: frozenset

    def atom_keys(self):
        return _atom_universe(self.length, self.params, self.arities)

    def atoms(self):
        """All atomic instances with their signs."""
        for key in self.atom_keys():
            yield key, key in self.positive

    def relabeled(self, sigma) -> "BasicType":
        """Image of the type under a permutation of the universe."""
        def map_term(t):
            return t if t[0] == "v" else ("c", sigma[t[1]])

        def map_key(k):
            if k[0] == "rel":
                return ("rel", k[1], tuple(map_term(t) for t in k[2]))
            return ("eq", map_term(k[1]), map_term(k[2]))

        return BasicType(
            self.length,
            tuple(sorted(sigma[a] for a in self.params)),
            self.arities,
            frozenset(map_key(k) for k in self.positive),
        )


def tp_bs(b, a_set, relations) -> BasicType:
    """Basic type of the tuple `b` over parameter set `a_set`.

    `relations` is a sequence of Relation; atoms are all substitution
    instances of each relation symbol by tuple variables and parameters,
    plus equality atoms among variables and between variables and
    parameters.
    """
    b = tuple(b)
    relations = list(relations)
    if relations:
        size = relations[0].universe.size
        for x in b:
            if not 0 <= x < size:
                raise RangeError(f"element {x} outside universe of size {size}")
    params = tuple(sorted(a_set))
    arities = tuple(r.arity for r in relations)
    m = len(b)
    positive = set()
    for key in _atom_universe(m, params, arities):
        if key[0] == "rel":
            values = tuple(_term_value(t, b) for t in key[2])
            if values in relations[key[1]].tuples:
                positive.add(key)
        else:
            if _term_value(key[1], b) == _term_value(key[2], b):
                positive.add(key)
    return BasicType(m, params, arities, frozenset(positive))


def type_space(m, a_set, relations, universe=None, max_tuples: int = 200000):
    """All basic types of length-m tuples over `a_set`: a set of BasicType."""
    relations = list(relations)
    if universe is None:
        if not relations:
            raise RangeError("type_space needs a universe or at least one relation")
        universe = relations[0].universe
    total = universe.size ** m
    if total > max_tuples:
        raise BudgetExceededError(
            f"type space over {total} tuples exceeds budget {max_tuples}",
            estimate=total, budget=max_tuples)
    return {tp_bs(t, a_set, relations)
            for t in itertools.product(universe.elements, repeat=m)}


# ---------------------------------------------------------------------------
# canonical forms


def _encode(tuples):
    return sorted(tuples)


def canonical_form(relation: Relation, max_domain: int = 8):
    """Lexicographically least isomorphic image, with a witnessing permutation.

    The minimum is taken over all permutations of the universe, comparing the
    sorted tuple lists of the images.  Only permutations of the domain matter,
    and the least image uses the labels 0..|domain|-1, so the search is over
    orderings of the domain; a budget guard rejects domains that are too large.
    """
    dom = sorted(relation.domain())
    if len(dom) > max_domain:
        raise BudgetExceededError(
            f"canonical form over domain of size {len(dom)} exceeds budget {max_domain}",
            estimate=len(dom), budget=max_domain)
    n = relation.universe.size
    best = None
    best_assign = None
    for ordering in itertools.permutations(dom):
        assign = {x: i for i, x in enumerate(ordering)}
        enc = _encode(tuple(assign[x] for x in t) for t in relation.tuples)
        if best is None or enc < best:
            best, best_assign = enc, assign
    if best is None:  # empty relation
        best, best_assign = [], {}
    sigma = [None] * n
    for x, i in best_assign.items():
        sigma[x] = i
    free_labels = iter(i for i in range(n) if i not in set(best_assign.values()))
    for x in range(n):
        if sigma[x] is None:
            sigma[x] = next(free_labels)
    canon = Relation(relation.universe, relation.arity,
                     frozenset(tuple(t) for t in best))
    return canon, tuple(sigma)


def isomorphic(r1: Relation, r2: Relation, max_domain: int = 8) -> bool:
    """Whether some universe permutation maps r1 onto r2."""
    if r1.universe != r2.universe or r1.arity != r2.arity:
        return False
    if len(r1.tuples) != len(r2.tuples):
        return False
    return (canonical_form(r1, max_domain)[0].tuples
            == canonical_form(r2, max_domain)[0].tuples)


# ---------------------------------------------------------------------------
# equivalence relations and partial injections (sugar over binary relations)


@dataclass(frozen=True)
class EquivalenceRelation:
    """An equivalence relation on a subset of the universe, given by blocks."""

    universe: Universe
    blocks: tuple  # tuple of frozensets, canonically ordered by min element

    def __post_init__(self):
        seen = set()
        for b in self.blocks:
            if not b:
                raise RangeError("empty block in equivalence relation")
            for x in b:
                if not (isinstance(x, int) and 0 <= x < self.universe.size):
                    raise RangeError(f"element {x!r} outside universe")
                if x in seen:
                    raise RangeError(f"element {x} occurs in two blocks")
                seen.add(x)
        canon = tuple(sorted((frozenset(b) for b in self.blocks),
                             key=lambda b: min(b)))
        object.__setattr__(self, "blocks", canon)

    @classmethod
    def make(cls, universe: Universe, blocks) -> "EquivalenceRelation":
        return cls(universe, tuple(frozenset(b) for b in blocks))

    def domain(self) -> frozenset:
        return frozenset(x for b in self.blocks for x in b)

    def block_of(self, x):
        for b in self.blocks:
            if x in b:
                return b
        return None

    def related(self, x, y) -> bool:
        b = self.block_of(x)
        return b is not None and y in b

    def to_relation(self) -> Relation:
        tuples = frozenset((x, y) for b in self.blocks for x in b for y in b)
        return Relation(self.universe, 2, tuples)

    @classmethod
    def from_relation(cls, relation: Relation) -> "EquivalenceRelation":
        if relation.arity != 2:
            raise ArityError("an equivalence relation must be binary")
        dom = relation.domain()
        parent = {x: x for x in dom}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for x, y in relation.tuples:
            parent[find(x)] = find(y)
        blocks = {}
        for x in dom:
            blocks.setdefault(find(x), set()).add(x)
        eq = cls.make(relation.universe, blocks.values())
        if eq.to_relation().tuples != relation.tuples:
            raise RangeError("relation is not reflexive-symmetric-transitive on its domain")
        return eq


@dataclass(frozen=True)
class PartialInjection:
    """A one-to-one partial map on the universe, as a set of (source, target) pairs."""

    universe: Universe
    pairs: frozenset

    def __post_init__(self):
        if not isinstance(self.pairs, frozenset):
            object.__setattr__(self, "pairs", frozenset(tuple(p) for p in self.pairs))
        sources, targets = set(), set()
        for p in self.pairs:
            _check_tuple(p, 2, self.universe.size)
            s, t = p
            if s in sources or t in targets:
                raise RangeError("pairs do not form a one-to-one partial map")
            sources.add(s)
            targets.add(t)

    @classmethod
    def make(cls, universe: Universe, pairs) -> "PartialInjection":
        return cls(universe, frozenset(tuple(p) for p in pairs))

    def mapping(self) -> dict:
        return dict(sorted(self.pairs))

    def domain(self) -> frozenset:
        return frozenset(s for s, _ in self.pairs)

    def to_relation(self) -> Relation:
        return Relation(self.universe, 2, self.pairs)

    @classmethod
    def from_relation(cls, relation: Relation) -> "PartialInjection":
        if relation.arity != 2:
            raise ArityError("a partial injection must be binary")
        return cls(relation.universe, relation.tuples)


def identity_extension(universe: Universe, partial: dict) -> tuple:
    """Extend an injective partial map to a permutation, deterministically.

    Unassigned sources are mapped to the unused targets in increasing order.
    """
    n = universe.size
    used_targets = set(partial.values())
    if len(used_targets) != len(partial):
        raise RangeError("partial map is not injective")
    free = iter(t for t in range(n) if t not in used_targets)
    sigma = []
    for x in range(n):
        sigma.append(partial[x] if x in partial else next(free))
    return tuple(sigma)


def swap_permutation(universe: Universe, swaps) -> tuple:
    """Permutation exchanging b and c for each pair (b, c), identity elsewhere."""
    sigma = list(universe.elements)
    for b, c in swaps:
        sigma[b], sigma[c] = c, b
    return tuple(sigma)
