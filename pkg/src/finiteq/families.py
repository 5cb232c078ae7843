"""Families of relations used as second-order quantifier ranges.

Each family is a set of relations over a given universe, closed under
permutations of the universe.  Size bounds may be given as plain integers,
as the token "half" (meaning floor(N/2) on a universe of size N), or as a
callable of N.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from .core import EquivalenceRelation, Relation, Universe, canonical_form, sum_relations
from .errors import ArityError, BudgetExceededError, RangeError

MODES = ("exact", "le", "lt", "any")


@dataclass(frozen=True)
class SizeConstraint:
    """A cardinality constraint: mode in {exact, le, lt, any} plus a bound."""

    mode: str = "any"
    bound: object = None  # int, "half", or callable of N

    def __post_init__(self):
        if self.mode not in MODES:
            raise RangeError(f"unknown constraint mode {self.mode!r}")
        if self.mode != "any" and self.bound is None:
            raise RangeError(f"mode {self.mode!r} needs a bound")

    def resolve(self, n: int) -> int | None:
        if self.mode == "any":
            return None
        b = self.bound
        if b == "half":
            return n // 2
        if callable(b):
            return int(b(n))
        return int(b)

    def admits(self, value: int, n: int) -> bool:
        b = self.resolve(n)
        if b is None:
            return True
        if self.mode == "exact":
            return value == b
        if self.mode == "le":
            return value <= b
        return value < b

    def admitted_values(self, n: int, limit: int):
        """Admitted cardinalities within 0..limit, ascending."""
        return [v for v in range(limit + 1) if self.admits(v, n)]

    def spec_suffix(self) -> str:
        if self.mode == "any":
            return "*"
        op = {"exact": "", "le": "<=", "lt": "<"}[self.mode]
        b = self.bound if not callable(self.bound) else "<fn>"
        return f"{op}{b}"


class QuantifierFamily:
    """Base class: a permutation-closed set of same-arity relations."""

    def arity(self, universe: Universe) -> int:
        raise NotImplementedError

    def members(self, universe: Universe, max_members: int = 200000):
        """Deterministic enumeration; raises BudgetExceededError past the cap."""
        count = 0
        for r in self._members(universe):
            count += 1
            if count > max_members:
                raise BudgetExceededError(
                    f"family {self.spec()} enumeration exceeds budget {max_members}",
                    budget=max_members)
            yield r

    def _members(self, universe: Universe):
        raise NotImplementedError

    def contains(self, relation: Relation) -> bool:
        raise NotImplementedError

    def count(self, universe: Universe) -> int:
        """Number of members; exact, possibly via enumeration."""
        return sum(1 for _ in self.members(universe))

    def spec(self) -> str:
        raise NotImplementedError

    def __repr__(self):
        return f"<family {self.spec()}>"


def _subsets(elements, size):
    return itertools.combinations(elements, size)


@dataclass(frozen=True)
class TrivialFamily(QuantifierFamily):
    """All singleton subsets, as unary relations."""

    def arity(self, universe):
        return 1

    def _members(self, universe):
        for a in universe.elements:
            yield Relation(universe, 1, frozenset({(a,)}))

    def contains(self, relation):
        return relation.arity == 1 and len(relation.tuples) == 1

    def count(self, universe):
        return universe.size

    def spec(self):
        return "tr"


@dataclass(frozen=True)
class MonFamily(QuantifierFamily):
    """Subsets of the universe with a cardinality constraint, as unary relations."""

    size: SizeConstraint = SizeConstraint()

    def arity(self, universe):
        return 1

    def _members(self, universe):
        n = universe.size
        for k in self.size.admitted_values(n, n):
            for subset in _subsets(universe.elements, k):
                yield Relation(universe, 1, frozenset((a,) for a in subset))

    def contains(self, relation):
        if relation.arity != 1:
            return False
        return self.size.admits(len(relation.tuples), relation.universe.size)

    def count(self, universe):
        n = universe.size
        return sum(math.comb(n, k) for k in self.size.admitted_values(n, n))

    def spec(self):
        return f"mon:{self.size.spec_suffix()}" if self.size.mode != "exact" \
            else f"mon:{self.size.bound}"


@dataclass(frozen=True)
class InjFamily(QuantifierFamily):
    """Partial one-to-one maps with a domain-size constraint, as binary relations."""

    size: SizeConstraint = SizeConstraint()

    def arity(self, universe):
        return 2

    def _members(self, universe):
        n = universe.size
        for k in self.size.admitted_values(n, n):
            for sources in _subsets(universe.elements, k):
                for targets in itertools.permutations(universe.elements, k):
                    yield Relation(universe, 2, frozenset(zip(sources, targets)))

    def contains(self, relation):
        if relation.arity != 2:
            return False
        sources = [s for s, _ in relation.tuples]
        targets = [t for _, t in relation.tuples]
        if len(set(sources)) != len(sources) or len(set(targets)) != len(targets):
            return False
        return self.size.admits(len(relation.tuples), relation.universe.size)

    def count(self, universe):
        n = universe.size
        return sum(math.comb(n, k) * math.perm(n, k)
                   for k in self.size.admitted_values(n, n))

    def spec(self):
        return f"inj:{self.size.spec_suffix()}" if self.size.mode != "exact" \
            else f"inj:{self.size.bound}"


def enumerate_partitions(elements):
    """All partitions of a list, as tuples of tuples, in a deterministic order."""
    elements = list(elements)
    if not elements:
        yield ()
        return
    first, rest = elements[0], elements[1:]
    for partial in enumerate_partitions(rest):
        yield ((first,),) + partial
        for i, block in enumerate(partial):
            yield partial[:i] + ((first,) + block,) + partial[i + 1:]


def enumerate_equivalences(universe: Universe, domains=None):
    """All equivalence relations on subsets of the universe (or given domains)."""
    n = universe.size
    if domains is None:
        domains = (subset for k in range(n + 1)
                   for subset in _subsets(universe.elements, k))
    for dom in domains:
        for blocks in enumerate_partitions(dom):
            yield EquivalenceRelation.make(universe, blocks)


@dataclass(frozen=True)
class EqFamily(QuantifierFamily):
    """Equivalence relations filtered by class count, class sizes and domain size.

    `classes` constrains the number of blocks, `class_size` constrains every
    block's cardinality, `domain` constrains the domain's cardinality.
    """

    classes: SizeConstraint = SizeConstraint()
    class_size: SizeConstraint = SizeConstraint()
    domain: SizeConstraint = SizeConstraint()

    def arity(self, universe):
        return 2

    def _admits_eq(self, eq: EquivalenceRelation) -> bool:
        n = eq.universe.size
        if not self.classes.admits(len(eq.blocks), n):
            return False
        if not all(self.class_size.admits(len(b), n) for b in eq.blocks):
            return False
        return self.domain.admits(len(eq.domain()), n)

    def _members(self, universe):
        for eq in enumerate_equivalences(universe):
            if self._admits_eq(eq):
                yield eq.to_relation()

    def contains(self, relation):
        if relation.arity != 2:
            return False
        try:
            eq = EquivalenceRelation.from_relation(relation)
        except (RangeError, ArityError):
            return False
        return self._admits_eq(eq)

    def spec(self):
        return (f"eq:{self.classes.spec_suffix()},{self.class_size.spec_suffix()}"
                + (f",{self.domain.spec_suffix()}" if self.domain.mode != "any" else ""))


@dataclass(frozen=True)
class OrdFamily(QuantifierFamily):
    """Linear orders of subsets with a cardinality constraint.

    A member is the reflexive order relation {(a, b) : a <= b} of some
    ordering of a subset, so its domain is the ordered subset itself.
    """

    size: SizeConstraint = SizeConstraint()

    def arity(self, universe):
        return 2

    @staticmethod
    def order_relation(universe, ordering) -> Relation:
        pairs = frozenset((ordering[i], ordering[j])
                          for i in range(len(ordering))
                          for j in range(i, len(ordering)))
        return Relation(universe, 2, pairs)

    def _members(self, universe):
        n = universe.size
        for k in self.size.admitted_values(n, n):
            for subset in _subsets(universe.elements, k):
                for ordering in itertools.permutations(subset):
                    yield self.order_relation(universe, ordering)

    def contains(self, relation):
        if relation.arity != 2:
            return False
        dom = sorted(relation.domain())
        n = relation.universe.size
        if not self.size.admits(len(dom), n):
            return False
        # a reflexive linear order on dom has exactly one tuple per unordered
        # pair plus the diagonal, and must be transitive and antisymmetric
        succ = {a: sum(1 for b in dom if (a, b) in relation.tuples) for a in dom}
        if sorted(succ.values()) != list(range(1, len(dom) + 1)):
            return False
        ordering = sorted(dom, key=lambda a: -succ[a])
        return relation.tuples == self.order_relation(relation.universe, ordering).tuples

    def count(self, universe):
        n = universe.size
        return sum(math.comb(n, k) * math.factorial(k)
                   for k in self.size.admitted_values(n, n))

    def spec(self):
        return f"ord:{self.size.spec_suffix()}" if self.size.mode != "exact" \
            else f"ord:{self.size.bound}"


@dataclass(frozen=True)
class NAryFamily(QuantifierFamily):
    """All relations of a fixed arity whose domain satisfies a size constraint."""

    rel_arity: int
    domain: SizeConstraint = SizeConstraint()

    def arity(self, universe):
        return self.rel_arity

    def _members(self, universe):
        n = universe.size
        for d in self.domain.admitted_values(n, n):
            for dom in _subsets(universe.elements, d):
                all_tuples = list(itertools.product(dom, repeat=self.rel_arity))
                for bits in itertools.product((0, 1), repeat=len(all_tuples)):
                    tuples = frozenset(t for t, b in zip(all_tuples, bits) if b)
                    # count each relation once, at its true domain
                    if frozenset(x for t in tuples for x in t) == frozenset(dom):
                        yield Relation(universe, self.rel_arity, tuples)

    def contains(self, relation):
        if relation.arity != self.rel_arity:
            return False
        return self.domain.admits(len(relation.domain()), relation.universe.size)

    def spec(self):
        return f"nary:{self.rel_arity},{self.domain.spec_suffix()}"


@dataclass(frozen=True)
class IsoClosureFamily(QuantifierFamily):
    """All isomorphic copies of a seed relation."""

    seed: Relation

    def arity(self, universe):
        return self.seed.arity

    def _members(self, universe):
        if universe != self.seed.universe:
            raise RangeError("isomorphic closure is tied to the seed's universe")
        dom = sorted(self.seed.domain())
        seen = set()
        for image in itertools.permutations(universe.elements, len(dom)):
            assign = dict(zip(dom, image))
            tuples = frozenset(tuple(assign[x] for x in t) for t in self.seed.tuples)
            if tuples not in seen:
                seen.add(tuples)
                yield Relation(universe, self.seed.arity, tuples)

    def contains(self, relation):
        if relation.universe != self.seed.universe or relation.arity != self.seed.arity:
            return False
        if len(relation.tuples) != len(self.seed.tuples):
            return False
        return (canonical_form(relation)[0].tuples
                == canonical_form(self.seed)[0].tuples)

    def spec(self):
        return "iso:<seed>"


@dataclass(frozen=True)
class ExplicitFamily(QuantifierFamily):
    """A finite list of relations given outright."""

    relations: tuple

    def __post_init__(self):
        if not self.relations:
            raise RangeError("explicit family must be non-empty")
        arities = {r.arity for r in self.relations}
        if len(arities) != 1:
            raise ArityError("explicit family members must share an arity")

    def arity(self, universe):
        return self.relations[0].arity

    def _members(self, universe):
        yield from self.relations

    def contains(self, relation):
        return any(relation.tuples == r.tuples for r in self.relations)

    def count(self, universe):
        return len(self.relations)

    def spec(self):
        return f"explicit:{len(self.relations)}"


@dataclass(frozen=True)
class SumFamily(QuantifierFamily):
    """Concatenation products of members of the factor families."""

    factors: tuple

    def __post_init__(self):
        if not self.factors:
            raise RangeError("sum family needs at least one factor")

    def arity(self, universe):
        return sum(f.arity(universe) for f in self.factors)

    def _members(self, universe):
        seen = set()
        for parts in itertools.product(*(f.members(universe) for f in self.factors)):
            r = sum_relations(parts)
            if r.tuples not in seen:
                seen.add(r.tuples)
                yield r

    def contains(self, relation):
        universe = relation.universe
        if relation.arity != self.arity(universe):
            return False
        if not relation.tuples:
            # the empty product arises exactly when some factor admits an
            # empty member and every other factor is non-empty
            for i, f in enumerate(self.factors):
                empty = Relation(universe, f.arity(universe), frozenset())
                if f.contains(empty) and all(
                        any(True for _ in g.members(universe))
                        for j, g in enumerate(self.factors) if j != i):
                    return True
            return False
        # a non-empty product determines its factors as projections
        offset = 0
        parts = []
        for f in self.factors:
            k = f.arity(universe)
            parts.append(Relation(universe, k,
                                  frozenset(t[offset:offset + k] for t in relation.tuples)))
            offset += k
        if sum_relations(parts).tuples != relation.tuples:
            return False
        return all(f.contains(p) for f, p in zip(self.factors, parts))

    def count(self, universe):
        return sum(1 for _ in self.members(universe))

    def spec(self):
        return "sum(" + ",".join(f.spec() for f in self.factors) + ")"


# ---------------------------------------------------------------------------
# family specifier parsing (shared by the CLI and the formula grammar)


def _parse_constraint(text: str) -> SizeConstraint:
    text = text.strip()
    if text in ("", "*"):
        return SizeConstraint("any")
    mode = "exact"
    if text.startswith("<="):
        mode, text = "le", text[2:]
    elif text.startswith("<"):
        mode, text = "lt", text[1:]
    if text == "half":
        return SizeConstraint(mode, "half")
    try:
        return SizeConstraint(mode, int(text))
    except ValueError:
        raise RangeError(f"bad size constraint {text!r}") from None


def parse_family_spec(text: str, env: dict | None = None) -> QuantifierFamily:
    """Parse a family specifier such as mon:2, inj<=:3, eq:2,3, iso:NAME."""
    text = text.strip()
    head, _, rest = text.partition(":")
    mode_suffix = ""
    for suffix in ("<=", "<"):
        if head.endswith(suffix):
            head, mode_suffix = head[:-len(suffix)], suffix
            break
    if head in ("tr", "trivial"):
        return TrivialFamily()
    if head in ("mon", "inj", "ord"):
        constraint = _parse_constraint(mode_suffix + rest) if rest or mode_suffix \
            else SizeConstraint("any")
        cls = {"mon": MonFamily, "inj": InjFamily, "ord": OrdFamily}[head]
        return cls(constraint)
    if head == "eq":
        parts = rest.split(",") if rest else []
        if len(parts) not in (0, 1, 2, 3):
            raise RangeError(f"bad eq specifier {text!r}")
        cs = [_parse_constraint(p) for p in parts]
        cs += [SizeConstraint("any")] * (3 - len(cs))
        return EqFamily(cs[0], cs[1], cs[2])
    if head == "nary":
        parts = rest.split(",")
        if len(parts) != 2:
            raise RangeError(f"bad nary specifier {text!r} (want nary:<arity>,<dom>)")
        return NAryFamily(int(parts[0]), _parse_constraint(parts[1]))
    if head == "iso":
        if env is None or rest not in env:
            raise RangeError(f"iso family needs a named relation, got {rest!r}")
        return IsoClosureFamily(env[rest])
    raise RangeError(f"unknown family specifier {text!r}")
