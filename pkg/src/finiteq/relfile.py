"""Line-oriented text format for named structures over one universe.

Grammar (one declaration per line, blank lines and `#` comments ignored)::

    universe N
    rel NAME ARITY
    <e0 e1 ... e{ARITY-1}>      one tuple per line
    end
    equiv NAME
    <e0 e1 ...>                 one class per line; unlisted elements are
    end                         outside the domain
    inj NAME
    <source target>             one pair per line
    end

The formatter emits declarations in their original order with sorted tuple
lines, so write -> read -> write is a fixpoint.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .core import EquivalenceRelation, PartialInjection, Relation, Universe
from .errors import RelationFileError


@dataclass
class RelationFile:
    universe: Universe
    relations: dict = field(default_factory=dict)
    equivs: dict = field(default_factory=dict)
    injections: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    def env(self) -> dict:
        """All named structures as relation bindings for the evaluator."""
        out = dict(self.relations)
        out.update({k: v.to_relation() for k, v in self.equivs.items()})
        out.update({k: v.to_relation() for k, v in self.injections.items()})
        return out


def _ints(parts, lineno):
    try:
        return [int(p) for p in parts]
    except ValueError:
        raise RelationFileError(f"line {lineno}: expected integers, got {parts!r}")


def parse_relation_file(text: str) -> RelationFile:
    lines = text.splitlines()
    universe = None
    out = None
    names = set()
    i = 0

    def body(start):
        """Lines until the matching `end`; returns (rows, next index)."""
        rows = []
        j = start
        while j < len(lines):
            raw = lines[j].split("#", 1)[0].strip()
            j += 1
            if not raw:
                continue
            if raw == "end":
                return rows, j
            rows.append((raw.split(), j))
        raise RelationFileError(f"line {start}: section is missing its 'end'")

    while i < len(lines):
        raw = lines[i].split("#", 1)[0].strip()
        i += 1
        if not raw:
            continue
        parts = raw.split()
        lineno = i
        if parts[0] == "universe":
            if universe is not None:
                raise RelationFileError(f"line {lineno}: duplicate universe line")
            if len(parts) != 2:
                raise RelationFileError(f"line {lineno}: usage: universe N")
            (n,) = _ints(parts[1:], lineno)
            if n < 1:
                raise RelationFileError(f"line {lineno}: universe size must be >= 1")
            universe = Universe(n)
            out = RelationFile(universe)
            continue
        if universe is None:
            raise RelationFileError(
                f"line {lineno}: the universe line must come first")
        if parts[0] == "rel":
            if len(parts) != 3:
                raise RelationFileError(f"line {lineno}: usage: rel NAME ARITY")
            name = parts[1]
            (arity,) = _ints(parts[2:], lineno)
            if name in names:
                raise RelationFileError(f"line {lineno}: duplicate name {name!r}")
            rows, i = body(i)
            tuples = set()
            for row, ln in rows:
                t = tuple(_ints(row, ln))
                if len(t) != arity:
                    raise RelationFileError(
                        f"line {ln}: tuple has {len(t)} entries, arity is {arity}")
                if t in tuples:
                    out.warnings.append(
                        f"line {ln}: duplicate tuple {t} in {name!r}")
                tuples.add(t)
            try:
                out.relations[name] = Relation.make(universe, arity, tuples)
            except Exception as e:
                raise RelationFileError(f"line {lineno}: {e}")
            names.add(name)
        elif parts[0] == "equiv":
            if len(parts) != 2:
                raise RelationFileError(f"line {lineno}: usage: equiv NAME")
            name = parts[1]
            if name in names:
                raise RelationFileError(f"line {lineno}: duplicate name {name!r}")
            rows, i = body(i)
            blocks = []
            seen: set = set()
            for row, ln in rows:
                block = _ints(row, ln)
                if seen & set(block):
                    raise RelationFileError(
                        f"line {ln}: element repeated across classes")
                if len(set(block)) != len(block):
                    out.warnings.append(
                        f"line {ln}: duplicate element within a class of {name!r}")
                seen |= set(block)
                blocks.append(set(block))
            try:
                out.equivs[name] = EquivalenceRelation.make(universe, blocks)
            except Exception as e:
                raise RelationFileError(f"line {lineno}: {e}")
            names.add(name)
        elif parts[0] == "inj":
            if len(parts) != 2:
                raise RelationFileError(f"line {lineno}: usage: inj NAME")
            name = parts[1]
            if name in names:
                raise RelationFileError(f"line {lineno}: duplicate name {name!r}")
            rows, i = body(i)
            pairs = set()
            for row, ln in rows:
                pair = tuple(_ints(row, ln))
                if len(pair) != 2:
                    raise RelationFileError(
                        f"line {ln}: an injection line needs exactly 2 entries")
                if pair in pairs:
                    out.warnings.append(
                        f"line {ln}: duplicate pair {pair} in {name!r}")
                pairs.add(pair)
            try:
                out.injections[name] = PartialInjection.make(universe, pairs)
            except Exception as e:
                raise RelationFileError(f"line {lineno}: {e}")
            names.add(name)
        else:
            raise RelationFileError(
                f"line {lineno}: unknown declaration {parts[0]!r}")
    if out is None:
        raise RelationFileError("line 1: empty file (no universe line)")
    return out


def read_relation_file(path) -> RelationFile:
    with open(path, encoding="utf-8") as fh:
        return parse_relation_file(fh.read())


def format_relation_file(rf: RelationFile) -> str:
    lines = [f"universe {rf.universe.size}"]
    for name, rel in rf.relations.items():
        lines.append(f"rel {name} {rel.arity}")
        lines.extend(" ".join(map(str, t)) for t in rel.sorted_tuples())
        lines.append("end")
    for name, eq in rf.equivs.items():
        lines.append(f"equiv {name}")
        lines.extend(" ".join(map(str, sorted(b))) for b in eq.blocks)
        lines.append("end")
    for name, inj in rf.injections.items():
        lines.append(f"inj {name}")
        lines.extend(f"{s} {t}" for s, t in sorted(inj.pairs))
        lines.append("end")
    return "\n".join(lines) + "\n"
