"""Party agents: fact selection policies, absorption and impostors."""

from __future__ import annotations

import enum
import hashlib
import math
from dataclasses import dataclass, replace

from .comparison import TargetSet
from .domain import ALWAYS, Domain, Fact, FactForm, absorb_fact, check_token, make_domain
from .errors import EmptyDomain, UnresolvedFactId

DECOY_SUFFIX = "~decoy"


class PolicyKind(enum.Enum):
    SCRIPTED = "SCRIPTED"
    ROUND_ROBIN = "ROUND_ROBIN"
    RANDOM_SEEDED = "RANDOM_SEEDED"


class FormRule(enum.Enum):
    ALTERNATE = "ALTERNATE"
    FIXED_QUESTION = "FIXED_QUESTION"
    FIXED_ANSWER = "FIXED_ANSWER"

    def form_for(self, round: int) -> FactForm:
        if self is FormRule.FIXED_QUESTION:
            return FactForm.QUESTION
        if self is FormRule.FIXED_ANSWER:
            return FactForm.ANSWER
        return FactForm.QUESTION if round % 2 == 0 else FactForm.ANSWER


@dataclass(frozen=True)
class SelectionPolicy:
    kind: PolicyKind = PolicyKind.RANDOM_SEEDED
    script: tuple[str, ...] = ()
    form_rule: FormRule = FormRule.ALTERNATE

    def __post_init__(self):
        object.__setattr__(self, "script", tuple(self.script))
        if self.kind is PolicyKind.SCRIPTED and not self.script:
            raise ValueError("scripted policy needs a non-empty script")

    @classmethod
    def scripted(cls, *fact_ids: str, form_rule: FormRule = FormRule.ALTERNATE):
        return cls(PolicyKind.SCRIPTED, tuple(fact_ids), form_rule)

    @classmethod
    def round_robin(cls, form_rule: FormRule = FormRule.ALTERNATE):
        return cls(PolicyKind.ROUND_ROBIN, (), form_rule)

    @classmethod
    def random_seeded(cls, form_rule: FormRule = FormRule.ALTERNATE):
        return cls(PolicyKind.RANDOM_SEEDED, (), form_rule)


@dataclass(frozen=True)
class PartyAgent:
    user_id: str
    domain: Domain
    policy: SelectionPolicy = SelectionPolicy()
    seed: int = 0
    # None means the agent shares the session's declared target set
    target_view: TargetSet | None = None

    def __post_init__(self):
        check_token(self.user_id, "user_id")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.policy.kind is PolicyKind.SCRIPTED:
            missing = [fid for fid in self.policy.script if self.domain.find(fid) is None]
            if missing:
                raise UnresolvedFactId(
                    f"agent {self.user_id!r} scripts facts missing from its domain: {missing}"
                )


def round_index(seed: int, round: int, n: int) -> int:
    """Uniform draw from ``range(n)`` keyed by ``(seed, round)`` alone.

    Independent of call history, so replaying any round gives the same
    draw. Rejection sampling keeps it exactly uniform.
    """
    limit = 2**64 - (2**64 % n)
    attempt = 0
    while True:
        key = f"{seed}:{round}:{attempt}".encode()
        v = int.from_bytes(hashlib.blake2b(key, digest_size=8, person=b"zeus-draw").digest(), "little")
        if v < limit:
            return v % n
        attempt += 1


def select_fact(agent: PartyAgent, round: int) -> Fact:
    members = agent.domain.members
    if not members:
        raise EmptyDomain(f"agent {agent.user_id!r} has nothing to say")
    policy = agent.policy
    if policy.kind is PolicyKind.SCRIPTED:
        fid = policy.script[round % len(policy.script)]
        fact = agent.domain.find(fid)
        if fact is None:
            raise UnresolvedFactId(f"agent {agent.user_id!r}: no fact {fid!r}")
    elif policy.kind is PolicyKind.ROUND_ROBIN:
        fact = members[round % len(members)]
    else:
        fact = members[round_index(agent.seed, round, len(members))]
    return with_form(fact, policy.form_rule, round)


def with_form(fact: Fact, rule: FormRule, round: int) -> Fact:
    return fact.with_form(rule.form_for(round))


def absorb(agent: PartyAgent, f_p: Fact) -> PartyAgent:
    return replace(agent, domain=absorb_fact(agent.domain, f_p))


def reseed(agent: PartyAgent, offset: int) -> PartyAgent:
    return replace(agent, seed=(agent.seed + offset) % 2**64)


def make_impostor(
    reference_domain: Domain,
    overlap: float,
    seed: int,
    decoy_offset: int,
    *,
    user_id: str = "impostor",
    policy: SelectionPolicy | None = None,
    target_view: TargetSet | None = None,
) -> PartyAgent:
    """An agent that knows a prefix of ``reference_domain`` verbatim.

    The first ``ceil(overlap * N)`` native facts are copied; the rest keep
    their labels but have magnitudes shifted by ``decoy_offset`` and ids
    suffixed with ``~decoy``. A scripted policy is rewritten to the
    impostor's ids so it stays resolvable.
    """
    if not reference_domain.native_facts:
        raise EmptyDomain(f"reference domain {reference_domain.domain_id!r} is empty")
    if not 0.0 <= overlap <= 1.0:
        raise ValueError(f"overlap must lie in [0, 1], got {overlap}")
    if decoy_offset == 0:
        raise ValueError("decoy_offset must be non-zero")
    natives = reference_domain.native_facts
    # round() guards against 0.3 * 10 == 3.0000000000000004
    known = math.ceil(round(overlap * len(natives), 9))

    renamed = {}
    facts = []
    for n, f in enumerate(natives):
        if n < known:
            facts.append(f)
        else:
            decoy = replace(f, fact_id=f.fact_id + DECOY_SUFFIX, magnitude=f.magnitude + decoy_offset)
            renamed[f.fact_id] = decoy.fact_id
            facts.append(decoy)
    # decoys may break the reference property, so a partial impostor drops it
    prop = reference_domain.property if known == len(natives) else ALWAYS
    domain = replace(
        make_domain(reference_domain.domain_id, reference_domain.name, prop),
        native_facts=tuple(facts),
        operators=reference_domain.operators,
    )
    policy = policy or SelectionPolicy.random_seeded()
    if policy.kind is PolicyKind.SCRIPTED:
        policy = replace(policy, script=tuple(renamed.get(fid, fid) for fid in policy.script))
    return PartyAgent(user_id, domain, policy, seed, target_view)
