"""Constructive decompositions of relations over a finite universe.

Each constructor in this module builds a combinatorial witness object —
a distinguishing system, a definable minimum support, a monadic or
injective core, or a unary-function encoding — and re-verifies the
advertised properties before returning.  A verification failure raises
ConstructionBugError rather than returning a silently wrong object.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .core import (EquivalenceRelation, PartialInjection, Relation, Universe,
                   equality_pattern, identity_extension, swap_permutation)
from .errors import (BudgetExceededError, ConstructionBugError,
                     PreconditionError, RangeError)
from .evaluate import defined_set
from .families import MonFamily, SizeConstraint
from .formulas import (And, EqAtom, Exists, Forall, Formula, Iff, Implies,
                       Not, Or, RelAtom, SOForall, all_distinct, make_and,
                       make_or, substitute)
from .invariants import (_type_signature, greedy_type_set, is_support,
                         lambda0, lambda0_prime, lambda1, nu_ge)


# ---------------------------------------------------------------------------
# distinguishing systems
#
# A distinguishing system is a sequence of triples (ā_i, b_i, c_i) found by
# scanning single-block flips that change membership: renaming one value
# block of a tuple to a fresh value flips the relation.  b_i, c_i are chosen
# outside the accumulated set A, so when the scan stops A meets every
# violating flip; hence |A| >= min(lambda0', N - n).


@dataclass(frozen=True)
class Triple:
    """One distinguishing step: the tuples witnessing the flip are retained."""

    a_bar: tuple       # the other distinct values of the witness, sorted
    b: int             # value whose block is renamed; member side
    c: int             # the fresh replacement value; non-member side
    stage: int         # index of the stage that received {b, c}
    member: tuple      # tuple in R using values a_bar + {b}
    nonmember: tuple   # the same tuple with b renamed to c, not in R


@dataclass(frozen=True)
class DistinguishingSystem:
    universe: Universe
    arity: int
    a_set: frozenset
    triples: tuple
    stages: tuple      # final stage contents, pairwise disjoint
    snapshots: tuple   # stage contents before each triple was added

    @property
    def i_star(self) -> int:
        return len(self.triples)

    def verify(self, relation: Relation) -> bool:
        """Re-check the four clauses of the construction."""
        seen = set()
        for idx, t in enumerate(self.triples):
            # (a) parameters lie in A, no repetitions, b/c fresh and distinct
            if len(set(t.a_bar)) != len(t.a_bar) or not set(t.a_bar) <= self.a_set:
                return False
            if t.b == t.c or t.b in t.a_bar or t.c in t.a_bar:
                return False
            # (b) b and c were outside the set accumulated so far
            before = set().union(*self.snapshots[idx]) if self.snapshots[idx] else set()
            if t.b in before or t.c in before:
                return False
            # (c) the (b, c) pairs never reuse an element
            if t.b in seen or t.c in seen:
                return False
            seen.update((t.b, t.c))
            # (d) an atomic membership flip separates b from c over a_bar
            if t.member not in relation.tuples or t.nonmember in relation.tuples:
                return False
            if set(t.member) != set(t.a_bar) | {t.b}:
                return False
            if t.nonmember != tuple(t.c if x == t.b else x for x in t.member):
                return False
        return True


def _flip_candidates(relation: Relation, a_set):
    """Single-block flips (t, v, w) that change membership, with v, w fresh."""
    n = relation.universe.size
    out = []
    for t in itertools.product(range(n), repeat=relation.arity):
        in_r = t in relation.tuples
        values = set(t)
        for v in sorted(values):
            if v in a_set:
                continue
            for w in range(n):
                if w in values or w in a_set:
                    continue
                flipped = tuple(w if x == v else x for x in t)
                if (flipped in relation.tuples) != in_r:
                    out.append((t, v, w, in_r))
    return out


def distinguishing_system(relation: Relation) -> DistinguishingSystem:
    """Greedy construction of a distinguishing system for the relation.

    Stops when every membership-changing single flip meets the accumulated
    set A.  Candidates adding the fewest new elements are preferred, so the
    triple count stays close to |A| / 2.
    """
    n = relation.arity
    if n < 2:
        raise PreconditionError("distinguishing systems need arity >= 2")
    universe = relation.universe
    stages = [set() for _ in range(n)]
    a_set: set = set()
    triples = []
    snapshots = []
    while True:
        cands = _flip_candidates(relation, a_set)
        if not cands:
            break
        best = None
        for t, v, w, in_r in cands:
            a_bar = tuple(sorted(set(t) - {v}))
            cost = 2 + len(set(a_bar) - a_set)
            key = (cost, a_bar, v, w)
            if best is None or key < best[0]:
                best = (key, t, v, w, in_r, a_bar)
        _, t, v, w, in_r, a_bar = best
        if in_r:
            b, c, member = v, w, t
        else:
            b, c, member = w, v, tuple(w if x == v else x for x in t)
        nonmember = tuple(c if x == b else x for x in member)
        snapshots.append(tuple(frozenset(s) for s in stages))
        stage = min(ell for ell in range(n) if not stages[ell] & set(a_bar))
        stages[stage].update((b, c))
        fresh = [x for x in a_bar if x not in a_set]
        spill = 0 if stage > 0 else 1
        stages[spill].update(fresh)
        a_set.update((b, c))
        a_set.update(fresh)
        triples.append(Triple(a_bar, b, c, stage, member, nonmember))
    system = DistinguishingSystem(
        universe, n, frozenset(a_set), tuple(triples),
        tuple(frozenset(s) for s in stages), tuple(snapshots))
    if not system.verify(relation):
        raise ConstructionBugError("distinguishing system failed its clause checks")
    return system


# ---------------------------------------------------------------------------
# definable minimum supports
#
# For relations whose minimum support is below two thirds of the universe,
# membership in the (lexicographically least) minimum support A is definable
# by one fixed first-order formula: x is in A exactly when some atomic
# pattern distinguishes x from one of n^2 reference elements d_m outside A.


@dataclass(frozen=True)
class DefinableSupport:
    a_set: frozenset
    d_params: tuple    # the reference elements, outside a_set
    b_set: frozenset   # the defined set; equals a minimum support

    def verify(self, relation: Relation) -> bool:
        return (len(self.b_set) == lambda0_prime(relation).value
                and is_support(self.b_set, relation))


def _surjective_patterns(n, k):
    """Position-to-symbol maps using all of the k+1 symbols (symbol 0 = x)."""
    full = set(range(k + 1))
    return [p for p in itertools.product(range(k + 1), repeat=n)
            if set(p) == full]


def membership_formula(arity: int, rel_name: str, d_names, x: str = "x0") -> Formula:
    """The fixed defining formula for membership in a minimum support.

    x is accepted when for some atomic pattern over the relation, some
    reference parameter d and some tuple of pairwise-distinct witnesses,
    replacing x by d flips the atom.
    """
    disjuncts = []
    for k in range(arity):
        ys = tuple(f"y{j}" for j in range(k))
        for pattern in _surjective_patterns(arity, k):
            x_syms = (x,) + ys
            for d in d_names:
                d_syms = (d,) + ys
                atom_x = RelAtom(rel_name, tuple(x_syms[s] for s in pattern))
                atom_d = RelAtom(rel_name, tuple(d_syms[s] for s in pattern))
                body = And((all_distinct((x,) + ys + (d,)),
                            Not(Iff(atom_x, atom_d))))
                for y in reversed(ys):
                    body = Exists(y, body)
                disjuncts.append(body)
    return make_or(disjuncts)


def _membership_scan(relation: Relation, d_params) -> frozenset:
    """Direct evaluation of the defining condition (no formula machinery)."""
    n = relation.arity
    size = relation.universe.size
    tuples = relation.tuples
    members = set()
    for x in range(size):
        hit = False
        for k in range(n):
            for pattern in _surjective_patterns(n, k):
                for d in d_params:
                    if d == x:
                        continue
                    for ys in itertools.product(range(size), repeat=k):
                        pool = (x,) + ys + (d,)
                        if len(set(pool)) != len(pool):
                            continue
                        x_syms = (x,) + ys
                        d_syms = (d,) + ys
                        t_x = tuple(x_syms[s] for s in pattern)
                        t_d = tuple(d_syms[s] for s in pattern)
                        if (t_x in tuples) != (t_d in tuples):
                            hit = True
                            break
                    if hit:
                        break
                if hit:
                    break
            if hit:
                break
        if hit:
            members.add(x)
    return frozenset(members)


def definable_support(relation: Relation) -> DefinableSupport:
    """Minimum support recovered by the fixed membership formula.

    Preconditions: the minimum support size must be below 2/3 of the
    universe, and the universe must satisfy N > 3*(n^2 + n) so that n^2
    reference elements exist outside the support.
    """
    n = relation.arity
    size = relation.universe.size
    witness = lambda0_prime(relation)
    if 3 * witness.value >= 2 * size:
        raise PreconditionError(
            f"minimum support size {witness.value} is not below 2/3 of {size}")
    if 3 * (n * n + n) >= size:
        raise PreconditionError(
            f"universe size {size} is not above 3*(n^2+n) = {3 * (n * n + n)}")
    a_set = witness.a_set
    d_params = tuple(x for x in range(size) if x not in a_set)[: n * n]
    b_set = _membership_scan(relation, d_params)
    if len(b_set) != witness.value or not is_support(b_set, relation):
        raise ConstructionBugError(
            f"defined set has {len(b_set)} elements, expected a minimum "
            f"support of size {witness.value}")
    return DefinableSupport(a_set, d_params, b_set)


# ---------------------------------------------------------------------------
# monadic extraction
#
# Produce a set of exactly lambda0(R) elements defined by one first-order
# formula whose relation parameters are permuted copies of R.  The dispatch
# follows a case analysis: unary relations directly; small minimum support
# via the membership formula; otherwise reduce through variable merging /
# constant substitution, the distinct part, or membership formulas applied
# to difference relations built from swap-permuted copies.


@dataclass(frozen=True)
class MonadicExtraction:
    """A defined set with everything needed to re-evaluate it independently.

    The formula's relation names S0..S{k-1} are bound to permuted copies of
    the base relation (permutation i maps element x to sigmas[i][x]); names
    e0..e{m-1} are element parameters.
    """

    universe: Universe
    base: Relation
    b_set: frozenset
    formula: Formula
    sigmas: tuple
    elems: tuple
    trail: tuple

    def env(self) -> dict:
        out = {f"S{i}": self.base.permuted(s) for i, s in enumerate(self.sigmas)}
        out.update({f"e{i}": a for i, a in enumerate(self.elems)})
        return out

    def verify(self) -> bool:
        if len(self.b_set) != lambda0(self.base):
            return False
        defined = defined_set(self.formula, self.universe, self.env(), ("x0",))
        return defined == frozenset((b,) for b in self.b_set)


@dataclass
class _Working:
    """Mutable certificate under construction (frozen at the end)."""

    formula: Formula
    sigmas: list
    elems: list
    b_set: frozenset


def _identity(universe: Universe) -> tuple:
    return tuple(universe.elements)


def _compose(outer, inner) -> tuple:
    return tuple(outer[x] for x in inner)


def _shift_names(phi: Formula, rel_off, elem_off, n_rels, n_elems) -> Formula:
    fo_map = {f"e{i}": f"e{i + elem_off}" for i in range(n_elems)}
    rel_map = {
        f"S{i}": (lambda args, j=i: RelAtom(f"S{j + rel_off}", args))
        for i in range(n_rels)
    }
    return substitute(phi, fo_map, rel_map)


def _twist(cert: _Working, tau) -> _Working:
    return _Working(
        cert.formula,
        [_compose(tau, s) for s in cert.sigmas],
        [tau[a] for a in cert.elems],
        frozenset(tau[b] for b in cert.b_set),
    )


def _combine(certs, connective) -> _Working:
    parts = []
    sigmas: list = []
    elems: list = []
    for c in certs:
        parts.append(_shift_names(c.formula, len(sigmas), len(elems),
                                  len(c.sigmas), len(c.elems)))
        sigmas.extend(c.sigmas)
        elems.extend(c.elems)
    return _Working(connective(tuple(parts)), sigmas, elems, frozenset())


def _resize(cert: _Working, target: int, universe: Universe, trail) -> _Working:
    """Intersect with or union permuted twins until |b_set| == target."""
    s = len(cert.b_set)
    size = universe.size
    if s == target:
        return cert
    if s > target:
        keep = sorted(cert.b_set)[:target]
        fill = sorted(set(universe.elements) - cert.b_set)[: s - target]
        image = sorted(keep + fill)
        tau = identity_extension(
            universe, dict(zip(sorted(cert.b_set), image)))
        out = _combine([cert, _twist(cert, tau)], And)
        out.b_set = frozenset(keep)
        trail.append(f"shrink:{s}->{target}")
        return out
    if s == 0:
        raise ConstructionBugError("cannot grow an empty definable set")
    fill = sorted(set(universe.elements) - cert.b_set)[: target - s]
    total = sorted(cert.b_set) + fill
    remaining = list(fill)
    copies = [cert]
    while remaining:
        chunk = remaining[:s]
        pad = [x for x in total if x not in chunk][: s - len(chunk)]
        image = sorted(chunk + pad)
        tau = identity_extension(universe, dict(zip(sorted(cert.b_set), image)))
        copies.append(_twist(cert, tau))
        remaining = remaining[s:]
    out = _combine(copies, Or)
    out.b_set = frozenset(total)
    trail.append(f"grow:{s}->{target}x{len(copies)}")
    return out


def _support_cert(relation: Relation, universe: Universe) -> _Working:
    ds = definable_support(relation)
    d_names = tuple(f"e{i}" for i in range(len(ds.d_params)))
    phi = membership_formula(relation.arity, "S0", d_names)
    return _Working(phi, [_identity(universe)], list(ds.d_params), ds.b_set)


def _substitution_patterns(n: int, size: int):
    """Ways of merging variables / fixing constants, fewest constants first.

    A pattern is a tuple of entries ("v", i) or ("c", a); variable indices
    appear in first-use order; at least one variable remains and the pattern
    is never the trivial all-distinct-variables one.
    """
    positions = list(range(n))
    for n_const in range(n):
        for const_pos in itertools.combinations(positions, n_const):
            var_pos = [p for p in positions if p not in const_pos]
            partitions = []

            def grow(idx, labels, used):
                if idx == len(var_pos):
                    partitions.append(tuple(labels))
                    return
                for lab in range(used + 1):
                    grow(idx + 1, labels + [lab], max(used, lab + 1))

            grow(0, [], 0)
            for labels in partitions:
                if n_const == 0 and len(set(labels)) == n:
                    continue  # the identity pattern reproduces R itself
                for values in itertools.product(range(size), repeat=n_const):
                    pattern: list = [None] * n
                    for p, a in zip(const_pos, values):
                        pattern[p] = ("c", a)
                    for p, lab in zip(var_pos, labels):
                        pattern[p] = ("v", lab)
                    yield tuple(pattern)


def _apply_pattern(relation: Relation, pattern) -> Relation:
    k = 1 + max(i for kind, i in pattern if kind == "v")
    size = relation.universe.size
    tuples = []
    for v in itertools.product(range(size), repeat=k):
        expanded = tuple(v[i] if kind == "v" else i for kind, i in pattern)
        if expanded in relation.tuples:
            tuples.append(v)
    return Relation(relation.universe, k, frozenset(tuples))


def _lift_substitution(inner: _Working, pattern, universe: Universe) -> _Working:
    elems = list(inner.elems)
    param_names: dict = {}

    def param(i, a):
        key = (i, a)
        if key not in param_names:
            param_names[key] = f"e{len(elems)}"
            elems.append(inner.sigmas[i][a])
        return param_names[key]

    rel_map = {}
    for i in range(len(inner.sigmas)):
        def build(args, i=i):
            out = []
            for kind, val in pattern:
                out.append(args[val] if kind == "v" else param(i, val))
            return RelAtom(f"S{i}", tuple(out))
        rel_map[f"S{i}"] = build
    phi = substitute(inner.formula, rel_map=rel_map)
    return _Working(phi, list(inner.sigmas), elems, inner.b_set)


def _lift_distinct(inner: _Working) -> _Working:
    def build(args, name):
        clauses = [RelAtom(name, args)]
        for i in range(len(args)):
            for j in range(i + 1, len(args)):
                clauses.append(Not(EqAtom(args[i], args[j])))
        return make_and(clauses)

    rel_map = {f"S{i}": (lambda args, nm=f"S{i}": build(args, nm))
               for i in range(len(inner.sigmas))}
    phi = substitute(inner.formula, rel_map=rel_map)
    return _Working(phi, list(inner.sigmas), list(inner.elems), inner.b_set)


def _distinct_part(relation: Relation) -> Relation:
    return Relation(relation.universe, relation.arity,
                    frozenset(t for t in relation.tuples
                              if len(set(t)) == len(t)))


def _difference_relation(relation: Relation, swapped: Relation, pattern) -> Relation:
    """Tuples (x0..x{n-2}, y) whose arranged image is in R but not in the copy."""
    n = relation.arity
    size = relation.universe.size
    tuples = []
    for v in itertools.product(range(size), repeat=n):
        arranged = tuple(v[s] for s in pattern)
        if arranged in relation.tuples and arranged not in swapped.tuples:
            tuples.append(v)
    return Relation(relation.universe, n, frozenset(tuples))


def _lift_difference(inner: _Working, pattern, f_perm, universe) -> _Working:
    """Rewrite atoms over the difference relation into pairs of R-atoms."""
    sigmas = []
    for s in inner.sigmas:
        sigmas.append(s)                      # the positive copy
        sigmas.append(_compose(s, f_perm))    # the swapped copy
    rel_map = {}
    for i in range(len(inner.sigmas)):
        def build(args, i=i):
            arranged = tuple(args[s] for s in pattern)
            return And((RelAtom(f"S{2 * i}", arranged),
                        Not(RelAtom(f"S{2 * i + 1}", arranged))))
        rel_map[f"S{i}"] = build
    phi = substitute(inner.formula, rel_map=rel_map)
    return _Working(phi, sigmas, list(inner.elems), inner.b_set)


def _majority_bucket(triples):
    """Triples sharing the most common witness arrangement, in order."""
    buckets: dict = {}
    for t in triples:
        symbols = list(t.a_bar) + [t.b]
        pattern = tuple(symbols.index(x) for x in t.member)
        buckets.setdefault(pattern, []).append(t)
    pattern = min(buckets, key=lambda p: (-len(buckets[p]), p))
    return pattern, buckets[pattern]


def _extract(relation: Relation, trail: list) -> _Working:
    universe = relation.universe
    size = universe.size
    n = relation.arity
    if n == 1:
        members = frozenset(a for (a,) in relation.tuples)
        if len(members) <= size - len(members):
            b_set, phi = members, RelAtom("S0", ("x0",))
        else:
            b_set = frozenset(set(universe.elements) - members)
            phi = Not(RelAtom("S0", ("x0",)))
        trail.append("unary")
        return _Working(phi, [_identity(universe)], [], b_set)
    witness = lambda0_prime(relation)
    target = min(universe.half(), witness.value)
    if 3 * witness.value < 2 * size:
        trail.append("definable-support")
        return _resize(_support_cert(relation, universe), target, universe, trail)
    # large minimum support: reduce to a simpler relation
    for pattern in _substitution_patterns(n, size):
        derived = _apply_pattern(relation, pattern)
        value = lambda0(derived)
        if value >= target or 7 * n * value >= size:
            trail.append(f"substitute:{pattern}")
            inner = _extract(derived, trail)
            lifted = _lift_substitution(inner, pattern, universe)
            return _resize(lifted, target, universe, trail)
    star = _distinct_part(relation)
    if star.tuples != relation.tuples:
        trail.append("distinct-part")
        inner = _extract(star, trail)
        return _resize(_lift_distinct(inner), target, universe, trail)
    # all tuples distinct: separate via swap-permuted copies
    system = distinguishing_system(relation)
    if not system.triples:
        raise ConstructionBugError(
            "no distinguishing triples for a relation with a large minimum support")
    pattern, bucket = _majority_bucket(system.triples)
    swaps = [(t.b, t.c) for t in bucket]
    diffs = []
    for j in range(len(bucket) + 1):
        f_perm = swap_permutation(universe, swaps[:j])
        diff = _difference_relation(relation, relation.permuted(f_perm), pattern)
        diffs.append((j, f_perm, diff, lambda0_prime(diff).value))
    chosen = None
    for j, f_perm, diff, value in diffs:
        if size <= 3 * value and 3 * value < 2 * size:
            chosen = (j, f_perm, diff)
            break
    if chosen is None:
        if all(3 * value < size for _, _, _, value in diffs):
            chosen = diffs[-1][:3]
        else:
            raise ConstructionBugError(
                "difference relations jumped over the usable support range "
                f"(sizes {[v for _, _, _, v in diffs]})")
    j, f_perm, diff = chosen
    trail.append(f"difference:{j}")
    inner = _support_cert(diff, universe)
    lifted = _lift_difference(inner, pattern, f_perm, universe)
    return _resize(lifted, target, universe, trail)


def monadic_extraction(relation: Relation) -> MonadicExtraction:
    """A set of exactly lambda0(R) elements defined from permuted copies of R."""
    trail: list = []
    working = _extract(relation, trail)
    cert = MonadicExtraction(
        relation.universe, relation, working.b_set, working.formula,
        tuple(working.sigmas), tuple(working.elems), tuple(trail))
    if not cert.verify():
        raise ConstructionBugError(
            f"extraction produced a wrong set (cases: {' -> '.join(trail)})")
    return cert


# ---------------------------------------------------------------------------
# monadic core: restriction to a minimum support plus n fresh elements


@dataclass(frozen=True)
class MonadicCore:
    a_set: frozenset
    d_params: tuple
    r1: Relation

    @property
    def universe(self) -> Universe:
        return self.r1.universe


def monadic_core(relation: Relation, max_verify: int = 200000) -> MonadicCore:
    """Restriction of R to a minimum support plus n fresh elements.

    R is reconstructible from the restriction by remapping the non-support
    value blocks of a queried tuple onto the fresh elements.  When the
    universe is too small for n fresh elements the restriction is R itself.
    """
    n = relation.arity
    size = relation.universe.size
    witness = lambda0_prime(relation)
    if witness.value + n >= size:
        core = MonadicCore(witness.a_set, (), relation)
    else:
        d_params = tuple(x for x in range(size) if x not in witness.a_set)[:n]
        keep = witness.a_set | set(d_params)
        core = MonadicCore(witness.a_set, d_params, relation.restricted(keep))
        if len(core.r1.domain()) > witness.value + n:
            raise ConstructionBugError("restricted domain exceeds its bound")
    if size ** n <= max_verify:
        for t in itertools.product(range(size), repeat=n):
            if monadic_reconstruct(core, t) != (t in relation.tuples):
                raise ConstructionBugError(
                    f"reconstruction disagrees with the relation at {t}")
    return core


def monadic_reconstruct(core: MonadicCore, xs) -> bool:
    """Membership of a tuple, computed from the restricted relation only."""
    xs = tuple(xs)
    if xs and len(xs) != core.r1.arity:
        raise RangeError(f"tuple {xs} has wrong length for arity {core.r1.arity}")
    if not core.d_params:
        return xs in core.r1.tuples
    remap = {}
    for x in xs:
        if x not in core.a_set and x not in remap:
            remap[x] = core.d_params[len(remap)]
    return tuple(remap.get(x, x) for x in xs) in core.r1.tuples


# ---------------------------------------------------------------------------
# the type-equivalence support (A, C-bar) and the induced equivalence
#
# E_A relates elements with the same atomic type over the parameter set A;
# E_{A,C} refines it by membership in the representative sets C_l.  The
# constructor grows staged parameter sets until every pair of tuples that is
# pointwise E_{A,C}-equivalent (with equal equality pattern) agrees on R.


def _ea_blocks(relation: Relation, a_set):
    """Blocks of the same-type-over-A equivalence: singletons on A itself."""
    params = tuple(sorted(a_set))
    groups: dict = {}
    for x in relation.universe.elements:
        if x in a_set:
            groups[("self", x)] = [x]
        else:
            groups.setdefault(("tp", _type_signature(relation, x, params)),
                              []).append(x)
    return sorted((sorted(g) for g in groups.values()), key=lambda g: g[0])


def _choose_c(relation: Relation, a_set, n):
    """Disjoint representative sets for the E_A classes of size 2..n.

    A class of size s in [2, n] contributes its l-th smallest element to C_l
    for l <= s - 2, leaving exactly one class element in no C_l; this makes
    the refined equivalence separate all members of such classes.
    """
    blocks = _ea_blocks(relation, a_set)
    c_bar = []
    for ell in range(max(n - 1, 0)):
        c_bar.append(frozenset(
            b[ell] for b in blocks if 2 + ell <= len(b) <= n))
    return tuple(c_bar)


def build_type_equivalence(a_set, c_bar, relation: Relation) -> EquivalenceRelation:
    """The equivalence refining same-type-over-A by C_l membership."""
    params = tuple(sorted(a_set))
    groups: dict = {}
    for x in relation.universe.elements:
        if x in a_set:
            key = ("self", x)
        else:
            key = ("tp", _type_signature(relation, x, params),
                   tuple(x in c for c in c_bar))
        groups.setdefault(key, set()).add(x)
    return EquivalenceRelation.make(relation.universe, groups.values())


def _stage_score(relation: Relation, stages) -> int:
    total = 0
    for k, stage in enumerate(stages):
        others = tuple(sorted(set().union(
            *(stages[m] for m in range(len(stages)) if m != k)) or set()))
        total += len({_type_signature(relation, b, others) for b in stage})
    return total


def _find_type_violation(relation: Relation, eac: EquivalenceRelation):
    """First pair of class-pattern-equivalent tuples disagreeing on R."""
    class_id = {}
    for i, b in enumerate(eac.blocks):
        for x in b:
            class_id[x] = i
    size = relation.universe.size
    groups: dict = {}
    for t in itertools.product(range(size), repeat=relation.arity):
        key = (equality_pattern(t), tuple(class_id[x] for x in t))
        in_r = t in relation.tuples
        seen = groups.setdefault(key, {})
        if in_r not in seen:
            seen[in_r] = t
        if len(seen) == 2:
            return seen[True], seen[False]
    return None


def _route_blocks(b_vals, c_vals, eac, a_set, n):
    """Assignments from b-values to c-values changing one block per step.

    Values stay pairwise distinct at every step; conflicting moves park a
    value on a fresh member of its equivalence class (such classes have more
    than n elements, so a fresh member always exists).
    """
    cur = list(b_vals)
    states = [tuple(cur)]
    while cur != list(c_vals):
        moved = False
        for q in range(len(cur)):
            if cur[q] != c_vals[q] and c_vals[q] not in cur:
                cur[q] = c_vals[q]
                states.append(tuple(cur))
                moved = True
        if moved:
            continue
        for q in range(len(cur)):
            if cur[q] != c_vals[q]:
                block = eac.block_of(cur[q])
                fresh = [d for d in sorted(block)
                         if d not in cur and d not in c_vals]
                if not fresh:
                    raise ConstructionBugError(
                        "no routing element available in a large class")
                cur[q] = fresh[0]
                states.append(tuple(cur))
                break
        else:
            break
    return states


def _single_block_violation(relation: Relation, eac, a_set, b_t, c_t, n):
    """Reduce a violating pair to one differing in a single value block."""
    blocks = []
    index_of = {}
    for x in b_t:
        if x not in index_of:
            index_of[x] = len(blocks)
            blocks.append(x)
    block_pos = tuple(index_of[x] for x in b_t)
    c_vals = []
    for pos, x in enumerate(c_t):
        q = block_pos[pos]
        while len(c_vals) <= q:
            c_vals.append(None)
        c_vals[q] = x
    states = _route_blocks(blocks, c_vals, eac, a_set, n)
    for m in range(len(states) - 1):
        t1 = tuple(states[m][q] for q in block_pos)
        t2 = tuple(states[m + 1][q] for q in block_pos)
        if (t1 in relation.tuples) != (t2 in relation.tuples):
            q = next(i for i in range(len(blocks))
                     if states[m][i] != states[m + 1][i])
            if t1 in relation.tuples:
                return states[m], states[m + 1][q], q
            return states[m + 1], states[m][q], q
    raise ConstructionBugError("violating pair survived single-block routing")


@dataclass(frozen=True)
class TypeEquivalenceSupport:
    a_set: frozenset
    c_bar: tuple
    stages: tuple
    e_ac: EquivalenceRelation
    lambda1_value: int


def type_equivalence_support(relation: Relation,
                             max_tuples: int = 1 << 21) -> TypeEquivalenceSupport:
    """A parameter set A and representative sets C making R factor through
    the refined type equivalence.

    Verified before returning: |A| <= n^2 * lambda1; pattern-and-class
    equivalent tuples agree on R; E_A has at most |A| + lambda1 classes;
    each C_l has at most lambda1 elements.
    """
    n = relation.arity
    size = relation.universe.size
    if size ** (2 * n) > max_tuples ** 2:
        raise BudgetExceededError(
            f"violation scan over {size ** n} tuples", estimate=size ** n,
            budget=max_tuples)
    lam1 = lambda1(relation).value
    if lam1 * n * n + n >= size:
        raise PreconditionError(
            f"need lambda1*n^2 + n = {lam1 * n * n + n} below the universe "
            f"size {size}")
    stages = [frozenset() for _ in range(n)]
    score_target = 0
    while True:
        a_set = frozenset().union(*stages)
        c_bar = _choose_c(relation, a_set, n)
        eac = build_type_equivalence(a_set, c_bar, relation)
        violation = _find_type_violation(relation, eac)
        if violation is None:
            break
        vals, other, q = _single_block_violation(
            relation, eac, a_set, violation[0], violation[1], n)
        others = [v for i, v in enumerate(vals) if i != q]
        t_stage = min(ell for ell in range(n) if not stages[ell] & set(others))
        placement = {}
        free = [ell for ell in range(n) if ell != t_stage]
        taken = set()
        for v in sorted(others):
            home = next((ell for ell in range(n) if v in stages[ell]), None)
            if home is not None:
                placement[v] = home
            else:
                slot = next(ell for ell in free
                            if ell not in taken)
                placement[v] = slot
                taken.add(slot)
        accepted = None
        for candidate in (vals[q], other):
            trial = []
            for ell in range(n):
                extra = {v for v in others if placement[v] == ell}
                if ell == t_stage:
                    extra = extra | {candidate}
                trial.append(stages[ell] | extra)
            if _stage_score(relation, trial) >= score_target + 1:
                accepted = trial
                break
        if accepted is None:
            raise ConstructionBugError(
                "neither extension of the staged parameter sets gains a type")
        stages = [frozenset(s) for s in accepted]
        score_target += 1
        if score_target > n * lam1:
            raise ConstructionBugError(
                f"staged construction exceeded its bound of {n * lam1} steps")
    a_set = frozenset().union(*stages)
    if len(a_set) > n * n * lam1:
        raise ConstructionBugError("parameter set exceeds n^2 * lambda1")
    if len(_ea_blocks(relation, a_set)) > len(a_set) + lam1:
        raise ConstructionBugError("type equivalence has too many classes")
    if any(len(c) > lam1 for c in c_bar):
        raise ConstructionBugError("a representative set exceeds lambda1")
    return TypeEquivalenceSupport(a_set, c_bar, tuple(stages), eac, lam1)


# ---------------------------------------------------------------------------
# injective core: restriction to A plus class representatives


@dataclass(frozen=True)
class InjCore:
    a_set: frozenset
    c_bar: tuple
    e_ac: EquivalenceRelation
    a1_set: frozenset
    r1: Relation

    @property
    def universe(self) -> Universe:
        return self.r1.universe


def inj_decompose(relation: Relation, max_verify: int = 200000) -> InjCore:
    """Restriction of R to the type-equivalence support plus representatives.

    Each class of elements with the same type over A keeps min(n, class
    size) members, which is enough to rebuild R: a tuple is in R exactly
    when some tuple of the restriction matches it pointwise in the refined
    equivalence with the same equality pattern.
    """
    n = relation.arity
    size = relation.universe.size
    support = type_equivalence_support(relation)
    a1: list = []
    for block in _ea_blocks(relation, support.a_set):
        if block[0] in support.a_set:
            continue
        a1.extend(block[:n])
    a1_set = frozenset(a1)
    if len(a1_set) > n * n * support.lambda1_value:
        raise ConstructionBugError("representative set exceeds n^2 * lambda1")
    r1 = relation.restricted(support.a_set | a1_set)
    core = InjCore(support.a_set, support.c_bar, support.e_ac, a1_set, r1)
    if size ** n <= max_verify:
        for t in itertools.product(range(size), repeat=n):
            if inj_reconstruct(core, t) != (t in relation.tuples):
                raise ConstructionBugError(
                    f"reconstruction disagrees with the relation at {t}")
    return core


def inj_reconstruct(core: InjCore, xs) -> bool:
    """Membership of a tuple, computed from the restricted relation only."""
    xs = tuple(xs)
    pattern = equality_pattern(xs)
    for ys in core.r1.sorted_tuples():
        if equality_pattern(ys) != pattern:
            continue
        if all(core.e_ac.related(x, y) for x, y in zip(xs, ys)):
            return True
    return False


# ---------------------------------------------------------------------------
# defining a partial injection from copies of R


@dataclass(frozen=True)
class InjInterpretation:
    """Unary predicates and two permuted copies of R that define an injection."""

    universe: Universe
    p0: frozenset
    p1: frozenset
    p2: frozenset
    r1: Relation
    r2: Relation
    formula: Formula
    pairs: frozenset

    def env(self) -> dict:
        def unary(s):
            return Relation(self.universe, 1, frozenset((x,) for x in s))

        return {"P0": unary(self.p0), "P1": unary(self.p1),
                "P2": unary(self.p2), "R1": self.r1, "R2": self.r2}

    def verify(self) -> bool:
        defined = defined_set(self.formula, self.universe, self.env(),
                              ("x0", "x1"))
        return defined == self.pairs


def _injection_formula(arity: int) -> Formula:
    ts = tuple(f"t{i}" for i in range(1, arity))
    syms_x = ("x0",) + ts
    syms_y = ("x1",) + ts
    plain = []     # patterns mentioning no parameter variable
    guarded = []
    for pattern in itertools.product(range(arity), repeat=arity):
        if 0 not in pattern:
            continue
        clause = Iff(RelAtom("R1", tuple(syms_x[s] for s in pattern)),
                     RelAtom("R2", tuple(syms_y[s] for s in pattern)))
        (guarded if any(s != 0 for s in pattern) else plain).append(clause)
    parts = [RelAtom("P1", ("x0",)), RelAtom("P2", ("x1",))] + plain
    if guarded:
        guard = make_and(tuple(RelAtom("P0", (t,)) for t in ts))
        body = Implies(guard, make_and(guarded))
        for t in reversed(ts):
            body = Forall(t, body)
        parts.append(body)
    return make_and(parts)


def interpret_injection(relation: Relation, h: PartialInjection) -> InjInterpretation:
    """Define the partial injection h from two permuted copies of R.

    Elements realizing pairwise distinct types over a small parameter set
    are matched to h's sources and targets by two permutations fixing the
    parameters; equality of the copied types then recovers h exactly.
    """
    n = relation.arity
    size = relation.universe.size
    universe = relation.universe
    pairs = sorted(h.pairs)
    lam = len(pairs)
    if lam * (n + 1) > size:
        raise PreconditionError(
            f"injection domain {lam} exceeds universe size / (n+1) = "
            f"{size // (n + 1)}")
    if lam > 0:
        found = greedy_type_set(relation, lam)
        if found.value < lam:
            exact = lambda1(relation)
            if exact.value < lam:
                raise PreconditionError(
                    f"injection domain {lam} exceeds the type invariant "
                    f"{exact.value}")
            found = exact
        base_params = tuple(sorted(found.a_set))
        groups: dict = {}
        for x in universe.elements:
            if x in found.a_set:
                continue
            sig = _type_signature(relation, x, base_params)
            if sig not in groups:
                groups[sig] = x
        reps = sorted(groups.values())[:lam]
    else:
        base_params = ()
        reps = []
    # shrink the parameter set: each representative needs at most one short
    # distinguishing tuple of parameters against at most one earlier clash
    params: list = []
    for i, a in enumerate(reps):
        while True:
            sig_a = _type_signature(relation, a, tuple(params))
            clash = next((b for b in reps[:i]
                          if _type_signature(relation, b, tuple(params)) == sig_a),
                         None)
            if clash is None:
                break
            added = False
            for k in range(1, n):
                for combo in itertools.combinations(base_params, k):
                    merged = tuple(sorted(set(params) | set(combo)))
                    if (_type_signature(relation, a, merged)
                            != _type_signature(relation, clash, merged)):
                        params = list(merged)
                        added = True
                        break
                if added:
                    break
            if not added:
                raise ConstructionBugError(
                    "no short parameter tuple separates two distinct types")
    a_small = frozenset(params)
    if len(a_small) > max(n - 1, 1) * lam:
        raise ConstructionBugError("shrunken parameter set is too large")
    # move the parameters off the elements of h
    h_elems = {x for p in pairs for x in p}
    conflicts = sorted(a_small & h_elems)
    targets = [x for x in universe.elements
               if x not in h_elems and x not in a_small]
    partial = {a: a for a in a_small - h_elems}
    partial.update(dict(zip(conflicts, targets)))
    tau = identity_extension(universe, partial)
    moved = relation.permuted(tau)
    p0 = frozenset(tau[a] for a in a_small)
    anchors = [tau[a] for a in reps]
    p1 = frozenset(b for b, _ in pairs)
    p2 = frozenset(c for _, c in pairs)
    f1 = identity_extension(
        universe, {**{x: x for x in p0},
                   **{a: b for a, (b, _) in zip(anchors, pairs)}})
    f2 = identity_extension(
        universe, {**{x: x for x in p0},
                   **{a: c for a, (_, c) in zip(anchors, pairs)}})
    cert = InjInterpretation(
        universe, p0, p1, p2, moved.permuted(f1), moved.permuted(f2),
        _injection_formula(n), frozenset(pairs))
    if not cert.verify():
        raise ConstructionBugError("defined relation differs from the injection")
    return cert


# ---------------------------------------------------------------------------
# a partial injection from an equivalence relation


@dataclass(frozen=True)
class EquivInjection:
    p0: frozenset
    p1: frozenset
    injection: PartialInjection
    formula: Formula


def inj_from_equiv(eq: EquivalenceRelation) -> EquivInjection:
    """One injection pair inside each class of size >= 2.

    The two smallest members of each such class are related to each other
    and to nothing else across the chosen predicates, so P0(x) & P1(y) & xEy
    defines a partial injection with one source per large class.
    """
    big = [sorted(b)[:2] for b in eq.blocks if len(b) >= 2]
    if not big:
        raise PreconditionError("no equivalence class has two elements")
    p0 = frozenset(pair[0] for pair in big)
    p1 = frozenset(pair[1] for pair in big)
    defined = frozenset(
        (x, y) for x in p0 for y in p1 if eq.related(x, y))
    injection = PartialInjection(eq.universe, defined)  # raises if not 1-1
    if len(injection.domain()) < nu_ge(eq, 2):
        raise ConstructionBugError(
            "defined injection misses a class of size >= 2")
    formula = And((RelAtom("P0", ("x0",)), RelAtom("P1", ("x1",)),
                   RelAtom("E", ("x0", "x1"))))
    return EquivInjection(p0, p1, injection, formula)


# ---------------------------------------------------------------------------
# encoding an n-ary relation as n unary functions
#
# Tuple j of R gets a carrier element b_j outside Dom(R); for each position
# l, function F_l sends a value a through the chain of carriers of the
# tuples whose l-th entry is a.  A tuple is decoded by asking for a common
# carrier reachable from every coordinate.


@dataclass(frozen=True)
class NAryEncoding:
    universe: Universe
    arity: int
    a_set: frozenset
    functions: tuple      # one PartialInjection per position
    carriers: tuple       # carrier elements, one per encoded tuple
    formula: Formula      # the fixed decoding formula (monadic logic)


def decode_formula(arity: int) -> Formula:
    """The fixed decoding formula over function graphs F0..F{n-1}.

    A coordinate passes when its function value is defined, nothing else
    maps onto it, and a shared witness z (distinct from every coordinate)
    is reachable from it along the function; reachability is stated with a
    universal set quantifier.
    """
    conjuncts = []
    for ell in range(arity):
        x = f"x{ell}"
        f = f"F{ell}"
        closed = Forall("u1", Forall("u2", Implies(
            And((RelAtom("X", ("u1",)), RelAtom(f, ("u1", "u2")),
                 Not(EqAtom("u1", "z")))),
            RelAtom("X", ("u2",)))))
        theta = SOForall("X", MonFamily(SizeConstraint("any")), Implies(
            And((RelAtom("X", (x,)), closed)), RelAtom("X", ("z",))))
        conjuncts.append(make_and((
            Exists("w", RelAtom(f, (x, "w"))),
            Not(Exists("v", And((Not(EqAtom("v", x)), RelAtom(f, ("v", x)))))),
            Not(EqAtom("z", x)),
            theta,
        )))
    return Exists("z", make_and(conjuncts))


def encode_nary(relation: Relation, a_set) -> NAryEncoding:
    """Encode a relation with domain inside a_set as unary function chains."""
    a_set = frozenset(a_set)
    universe = relation.universe
    size = universe.size
    if not relation.domain() <= a_set:
        raise RangeError("the relation's domain must lie inside the given set")
    outside = [x for x in universe.elements if x not in a_set]
    if len(relation) > len(outside):
        raise PreconditionError(
            f"{len(relation)} carriers needed but only {len(outside)} "
            f"elements lie outside the set")
    carriers = tuple(outside[: len(relation)])
    ts = relation.sorted_tuples()
    functions = []
    for ell in range(relation.arity):
        mapping = {}
        for a in sorted(a_set):
            chain = [j for j, t in enumerate(ts) if t[ell] == a]
            if not chain:
                mapping[a] = a
            else:
                mapping[a] = carriers[chain[0]]
                for k in range(len(chain) - 1):
                    mapping[carriers[chain[k]]] = carriers[chain[k + 1]]
        functions.append(PartialInjection.make(universe, mapping.items()))
    enc = NAryEncoding(universe, relation.arity, a_set, tuple(functions),
                       carriers, decode_formula(relation.arity))
    if size ** relation.arity <= 200000:
        for t in itertools.product(range(size), repeat=relation.arity):
            if decode_nary(enc, t) != (t in relation.tuples):
                raise ConstructionBugError(f"decoding disagrees at {t}")
    return enc


def decode_nary(enc: NAryEncoding, xs) -> bool:
    """Evaluate the decoding by direct chain-reachability computation."""
    xs = tuple(xs)
    if len(xs) != enc.arity:
        raise RangeError(f"tuple {xs} has wrong length for arity {enc.arity}")
    common = None
    for ell, x in enumerate(xs):
        mapping = enc.functions[ell].mapping()
        if x not in mapping:
            return False
        if any(src != x and dst == x for src, dst in mapping.items()):
            return False
        orbit = {x}
        cur = x
        while cur in mapping and mapping[cur] not in orbit:
            cur = mapping[cur]
            orbit.add(cur)
        common = orbit if common is None else common & orbit
        if not common:
            return False
    return bool(common - set(xs))
