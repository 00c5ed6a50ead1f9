"""Domains, facts and the operators and mappings defined over them.

A domain is a finite working set of native facts that satisfy its defining
property, plus an annex of absorbed facts picked up during sessions. The
annex is exempt from the property. All values are immutable; operations
return new values.
"""

from __future__ import annotations

import builtins
import enum
import re
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence, Union

from .errors import (
    ClosureViolation,
    DomainMismatch,
    DuplicateFactId,
    IndexOutOfRange,
    InvalidIdentifier,
    MagnitudeOverflow,
    MappingIncomplete,
    MappingInconsistent,
    NotAMember,
    PropertyViolation,
    UnknownOperator,
)

MAGNITUDE_MIN = -(2**62)
MAGNITUDE_MAX = 2**62 - 1


def check_magnitude(value: int) -> int:
    """Return ``value`` if it is an in-range magnitude, else raise."""
    if isinstance(value, bool) or not isinstance(value, int):
        raise TypeError(f"magnitude must be an int, got {type(value).__name__}")
    if not MAGNITUDE_MIN <= value <= MAGNITUDE_MAX:
        raise MagnitudeOverflow(f"magnitude {value} outside [-2^62, 2^62)")
    return value


_TOKEN_RE = re.compile(r"\S+")


def is_token(s) -> bool:
    return isinstance(s, str) and _TOKEN_RE.fullmatch(s) is not None


def check_token(s, what: str = "identifier") -> str:
    if not is_token(s):
        raise InvalidIdentifier(f"{what} must be a non-empty string without whitespace, got {s!r}")
    return s


class FactForm(enum.Enum):
    QUESTION = "QUESTION"
    ANSWER = "ANSWER"


@dataclass(frozen=True)
class Fact:
    fact_id: str
    domain_id: str
    form: FactForm
    label: str
    magnitude: int

    def __post_init__(self):
        check_token(self.fact_id, "fact_id")
        check_token(self.domain_id, "domain_id")
        if not isinstance(self.form, FactForm):
            raise TypeError(f"form must be a FactForm, got {self.form!r}")
        if not isinstance(self.label, str):
            raise TypeError("label must be a string")
        try:
            self.label.encode("utf-8")
        except UnicodeEncodeError as exc:
            raise ValueError(f"label is not encodable as UTF-8: {exc}") from None
        check_magnitude(self.magnitude)

    def with_form(self, form: FactForm) -> "Fact":
        """Same fact in another form; skips re-validation of unchanged fields."""
        if form is self.form:
            return self
        if not isinstance(form, FactForm):
            raise TypeError(f"form must be a FactForm, got {form!r}")
        clone = object.__new__(Fact)
        object.__setattr__(clone, "__dict__", {**self.__dict__, "form": form})
        return clone


def outcome(fact: Fact) -> int:
    """The magnitude by which facts are compared across domains."""
    return fact.magnitude


# -- defining properties ----------------------------------------------------

@dataclass(frozen=True)
class MagnitudeInRange:
    lo: int
    hi: int
    inclusive: bool = True

    def holds(self, fact: Fact) -> bool:
        m = fact.magnitude
        if self.inclusive:
            return self.lo <= m <= self.hi
        return self.lo < m < self.hi


@dataclass(frozen=True)
class LabelHasPrefix:
    prefix: str

    def holds(self, fact: Fact) -> bool:
        return fact.label.startswith(self.prefix)


@dataclass(frozen=True)
class AlwaysTrue:
    def holds(self, fact: Fact) -> bool:
        return True


Atom = Union[MagnitudeInRange, LabelHasPrefix, AlwaysTrue]


@dataclass(frozen=True)
class DefiningProperty:
    """Conjunction of atoms; the empty conjunction accepts everything."""

    atoms: tuple[Atom, ...] = ()

    def holds(self, fact: Fact) -> bool:
        return all(atom.holds(fact) for atom in self.atoms)

    @classmethod
    def of(cls, *atoms: Atom) -> "DefiningProperty":
        return cls(tuple(atoms))


ALWAYS = DefiningProperty()


# -- operators --------------------------------------------------------------

class MagnitudeRule(enum.Enum):
    SUM = "SUM"
    MIN = "MIN"
    MAX = "MAX"
    FIRST = "FIRST"

    def apply(self, a: int, b: int) -> int:
        if self is MagnitudeRule.SUM:
            return check_magnitude(a + b)
        if self is MagnitudeRule.MIN:
            return min(a, b)
        if self is MagnitudeRule.MAX:
            return max(a, b)
        return a


@dataclass(frozen=True)
class OperatorDef:
    op_name: str
    magnitude_rule: MagnitudeRule

    def __post_init__(self):
        check_token(self.op_name, "op_name")


# -- domains ----------------------------------------------------------------

@dataclass(frozen=True)
class Domain:
    domain_id: str
    name: str
    property: DefiningProperty = ALWAYS
    native_facts: tuple[Fact, ...] = ()
    absorbed_facts: tuple[Fact, ...] = ()
    operators: tuple[OperatorDef, ...] = ()

    @builtins.property
    def members(self) -> tuple[Fact, ...]:
        """Native facts followed by absorbed facts, in insertion order."""
        return self.native_facts + self.absorbed_facts

    def __len__(self) -> int:
        return len(self.native_facts) + len(self.absorbed_facts)

    def find(self, fact_id: str) -> Fact | None:
        for f in self.members:
            if f.fact_id == fact_id:
                return f
        return None

    def contains(self, fact: Fact) -> bool:
        found = self.find(fact.fact_id)
        return found is not None and found.magnitude == fact.magnitude

    def operator(self, op_name: str) -> OperatorDef:
        for op in self.operators:
            if op.op_name == op_name:
                return op
        raise UnknownOperator(f"domain {self.domain_id!r} defines no operator {op_name!r}")


def make_domain(domain_id: str, name: str, property: DefiningProperty = ALWAYS) -> Domain:
    check_token(domain_id, "domain_id")
    return Domain(domain_id=domain_id, name=name, property=property)


def add_fact(domain: Domain, fact: Fact) -> Domain:
    if fact.domain_id != domain.domain_id:
        raise DomainMismatch(
            f"fact {fact.fact_id!r} belongs to {fact.domain_id!r}, not {domain.domain_id!r}"
        )
    if domain.find(fact.fact_id) is not None:
        raise DuplicateFactId(f"{fact.fact_id!r} already in domain {domain.domain_id!r}")
    if not domain.property.holds(fact):
        raise PropertyViolation(
            f"fact {fact.fact_id!r} (magnitude {fact.magnitude}) fails the defining "
            f"property of {domain.domain_id!r}"
        )
    return replace(domain, native_facts=domain.native_facts + (fact,))


def add_facts(domain: Domain, facts: Iterable[Fact]) -> Domain:
    for f in facts:
        domain = add_fact(domain, f)
    return domain


def add_operator(domain: Domain, op: OperatorDef) -> Domain:
    if any(o.op_name == op.op_name for o in domain.operators):
        raise ValueError(f"operator {op.op_name!r} already defined on {domain.domain_id!r}")
    return replace(domain, operators=domain.operators + (op,))


def absorb_fact(domain: Domain, fact: Fact) -> Domain:
    """Set-union ``fact`` into the absorbed annex (idempotent on fact_id)."""
    existing = domain.find(fact.fact_id)
    if existing is not None:
        if existing in domain.absorbed_facts:
            return domain
        raise DuplicateFactId(f"{fact.fact_id!r} collides with a native fact")
    return replace(domain, absorbed_facts=domain.absorbed_facts + (fact,))


def apply_operator(domain: Domain, op_name: str, f1: Fact, f2: Fact) -> Fact:
    op = domain.operator(op_name)
    for f in (f1, f2):
        if not domain.contains(f):
            raise NotAMember(f"{f.fact_id!r} is not a member of {domain.domain_id!r}")
    result = Fact(
        fact_id=f"{op_name}({f1.fact_id},{f2.fact_id})",
        domain_id=domain.domain_id,
        form=FactForm.ANSWER,
        label=f"{op_name}({f1.label}, {f2.label})",
        magnitude=op.magnitude_rule.apply(f1.magnitude, f2.magnitude),
    )
    if not domain.property.holds(result):
        raise ClosureViolation(
            f"{op_name} over {f1.fact_id!r}, {f2.fact_id!r} gives magnitude "
            f"{result.magnitude}, outside domain {domain.domain_id!r}"
        )
    return result


def domains_comparable_at(d_i: Domain, d_j: Domain, k: int, epsilon: int = 0) -> bool:
    """Whether the k-th native facts of both domains share an outcome.

    Instance ``k`` is 0-based insertion order; the tolerance is inclusive.
    """
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    n = min(len(d_i.native_facts), len(d_j.native_facts))
    if not 0 <= k < n:
        raise IndexOutOfRange(f"instance {k} not in [0, {n})")
    return abs(outcome(d_i.native_facts[k]) - outcome(d_j.native_facts[k])) <= epsilon


# -- cross-domain mappings --------------------------------------------------

class Aggregator(enum.Enum):
    SUM = "SUM"
    MIN = "MIN"
    MAX = "MAX"
    IDENTITY = "IDENTITY"

    def apply(self, magnitudes: Sequence[int]) -> int:
        if not magnitudes:
            raise ValueError("aggregator needs at least one magnitude")
        if self is Aggregator.IDENTITY:
            if len(magnitudes) != 1:
                raise ValueError("IDENTITY takes exactly one magnitude")
            return magnitudes[0]
        if self is Aggregator.SUM:
            return check_magnitude(sum(magnitudes))
        if self is Aggregator.MIN:
            return min(magnitudes)
        return max(magnitudes)


@dataclass(frozen=True)
class MappingEntry:
    sources: tuple[str, ...]  # sorted multiset of source fact_ids
    target: Fact


@dataclass(frozen=True)
class DomainMapping:
    mapping_id: str
    source_domain_id: str
    target_domain_id: str
    aggregator: Aggregator
    entries: tuple[MappingEntry, ...] = field(default=())

    def lookup(self, fact_ids: Iterable[str]) -> MappingEntry:
        key = tuple(sorted(fact_ids))
        for entry in self.entries:
            if entry.sources == key:
                return entry
        raise MappingIncomplete(f"mapping {self.mapping_id!r} has no entry for {list(key)}")


def make_mapping(
    mapping_id: str,
    source: Domain,
    target: Domain,
    aggregator: Aggregator,
    entries: Iterable[tuple[Sequence[str], str]],
) -> DomainMapping:
    """Build a mapping from ``(source fact_ids, target fact_id)`` pairs.

    Every entry is resolved against the two domains and checked for
    magnitude conservation up front.
    """
    check_token(mapping_id, "mapping_id")
    built = []
    seen = set()
    for src_ids, tgt_id in entries:
        key = tuple(sorted(src_ids))
        if not key:
            raise ValueError(f"mapping {mapping_id!r}: entry with no source facts")
        if aggregator is Aggregator.IDENTITY and len(key) != 1:
            raise ValueError(f"mapping {mapping_id!r}: IDENTITY entry {list(key)} needs one source")
        if key in seen:
            raise ValueError(f"mapping {mapping_id!r}: duplicate entry {list(key)}")
        seen.add(key)
        mags = []
        for sid in key:
            f = source.find(sid)
            if f is None:
                raise NotAMember(f"{sid!r} is not in source domain {source.domain_id!r}")
            mags.append(f.magnitude)
        tgt = target.find(tgt_id)
        if tgt is None:
            raise NotAMember(f"{tgt_id!r} is not in target domain {target.domain_id!r}")
        if aggregator.apply(mags) != tgt.magnitude:
            raise MappingInconsistent(
                f"mapping {mapping_id!r}: {aggregator.value}{mags} != {tgt.magnitude} ({tgt_id})"
            )
        built.append(MappingEntry(key, tgt))
    return DomainMapping(mapping_id, source.domain_id, target.domain_id, aggregator, tuple(built))


def map_facts(mapping: DomainMapping, source_facts: Iterable[Fact], epsilon: int = 0) -> Fact:
    source_facts = list(source_facts)
    for f in source_facts:
        if f.domain_id != mapping.source_domain_id:
            raise DomainMismatch(
                f"{f.fact_id!r} is from {f.domain_id!r}, mapping expects {mapping.source_domain_id!r}"
            )
    entry = mapping.lookup(f.fact_id for f in source_facts)
    aggregated = mapping.aggregator.apply([f.magnitude for f in source_facts])
    if abs(aggregated - entry.target.magnitude) > epsilon:
        raise MappingInconsistent(
            f"mapping {mapping.mapping_id!r}: aggregated {aggregated} vs target "
            f"{entry.target.magnitude} exceeds tolerance {epsilon}"
        )
    return entry.target
