"""The fact-combination operator, target sets and the joint match rule."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Mapping

from .domain import (
    ALWAYS,
    DefiningProperty,
    DomainMapping,
    Fact,
    FactForm,
    check_magnitude,
    check_token,
    map_facts,
)
from .errors import MappingIncomplete

RESULTANT_DOMAIN = "resultant"


class CombinerKind(enum.Enum):
    DIFFERENCE = "DIFFERENCE"
    SUM = "SUM"
    MAP_THEN_DIFFERENCE = "MAP_THEN_DIFFERENCE"


@dataclass(frozen=True)
class Combiner:
    kind: CombinerKind = CombinerKind.DIFFERENCE
    mapping_id: str | None = None
    # tolerance for the mapping lookup of MAP_THEN_DIFFERENCE
    epsilon: int = 0

    def __post_init__(self):
        if self.kind is CombinerKind.MAP_THEN_DIFFERENCE:
            check_token(self.mapping_id, "mapping_id")
        elif self.mapping_id is not None:
            raise ValueError(f"{self.kind.value} takes no mapping_id")
        if self.epsilon < 0:
            raise ValueError("epsilon must be non-negative")

    def wire_name(self) -> str:
        """Compact form carried in HELLO, e.g. ``MAP_THEN_DIFFERENCE:m1``."""
        if self.kind is CombinerKind.MAP_THEN_DIFFERENCE:
            return f"{self.kind.value}:{self.mapping_id}"
        return self.kind.value


DIFFERENCE = Combiner()
SUM = Combiner(CombinerKind.SUM)


def combine(
    combiner: Combiner,
    f_k: Fact,
    f_m: Fact,
    round: int,
    mappings: Mapping[str, DomainMapping] | Iterable[DomainMapping] = (),
) -> Fact:
    """Combine one fact from each party into the round's resultant fact.

    The resultant lives in the ``resultant`` domain and its id is derived
    from both input ids and the round, so it is unique per round and
    reproducible.
    """
    if combiner.kind is CombinerKind.DIFFERENCE:
        mag = f_k.magnitude - f_m.magnitude
    elif combiner.kind is CombinerKind.SUM:
        mag = f_k.magnitude + f_m.magnitude
    else:
        if not isinstance(mappings, Mapping):
            mappings = {m.mapping_id: m for m in mappings}
        mapping = mappings.get(combiner.mapping_id)
        if mapping is None:
            raise MappingIncomplete(f"no mapping named {combiner.mapping_id!r}")
        # facts from outside the mapping's source (e.g. absorbed resultants) compare as-is
        if f_m.domain_id == mapping.source_domain_id:
            f_m_mag = map_facts(mapping, [f_m], combiner.epsilon).magnitude
        else:
            f_m_mag = f_m.magnitude
        mag = f_k.magnitude - f_m_mag
    return Fact(
        fact_id=f"{f_k.fact_id}*{f_m.fact_id}@{round}",
        domain_id=RESULTANT_DOMAIN,
        form=FactForm.ANSWER,
        label=f"{f_k.label} ⊗ {f_m.label}",
        magnitude=check_magnitude(mag),
    )


@dataclass(frozen=True)
class TargetSet:
    accepted_magnitudes: frozenset[int] = frozenset()
    label_predicate: DefiningProperty = ALWAYS

    def __post_init__(self):
        object.__setattr__(self, "accepted_magnitudes", frozenset(self.accepted_magnitudes))
        for m in self.accepted_magnitudes:
            check_magnitude(m)

    def __contains__(self, fact: Fact) -> bool:
        return in_target(fact, self)


def in_target(f_p: Fact, t: TargetSet) -> bool:
    return f_p.magnitude in t.accepted_magnitudes and t.label_predicate.holds(f_p)


def joint_match(local_match_i: bool, local_match_j: bool) -> bool:
    # Both counters move together, so a round counts only if both views accept.
    return bool(local_match_i and local_match_j)
