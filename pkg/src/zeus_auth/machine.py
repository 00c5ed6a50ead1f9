"""Pure session state machine and the N-party to pairwise reduction.

Nothing here touches the wire: states, records and domains go in and new
ones come out. The transported driver in :mod:`zeus_auth.rendezvous` and
the exhaustive oracle both run on top of these functions.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

from .comparison import DIFFERENCE, Combiner, TargetSet, combine, in_target, joint_match
from .domain import Domain, DomainMapping, Fact, absorb_fact, check_token
from .errors import (
    EmptyPairList,
    FinalizeWhileRunnable,
    InvalidConfig,
    InvalidIdentifier,
    RoundAfterTermination,
    SelfPair,
    UnknownUser,
)


class ProtocolMode(enum.Enum):
    # loop runs while BOTH counters are at or below their thresholds
    PAPER_LITERAL = "PAPER_LITERAL"
    # loop runs while EITHER counter is at or below its threshold
    BOTH_THRESHOLDS = "BOTH_THRESHOLDS"


class Status(enum.Enum):
    NOT_DONE = "NOT_DONE"
    DONE = "DONE"
    INSUFFICIENT_CONFIDENCE = "FAILED_INSUFFICIENT_CONFIDENCE"
    ROUND_LIMIT_EXCEEDED = "FAILED_ROUND_LIMIT_EXCEEDED"
    PROTOCOL_VIOLATION = "FAILED_PROTOCOL_VIOLATION"

    @property
    def terminal(self) -> bool:
        return self is not Status.NOT_DONE

    @property
    def failed(self) -> bool:
        return self.terminal and self is not Status.DONE


@dataclass(frozen=True)
class SessionConfig:
    session_id: str
    i_threshold: int
    j_threshold: int
    r_max: int
    mode: ProtocolMode = ProtocolMode.PAPER_LITERAL
    combiner: Combiner = DIFFERENCE
    target_i: TargetSet = field(default_factory=lambda: TargetSet({0}))
    target_j: TargetSet = field(default_factory=lambda: TargetSet({0}))
    mappings: tuple[DomainMapping, ...] = ()

    @property
    def epsilon(self) -> int:
        return self.combiner.epsilon

    def validate(self) -> None:
        try:
            check_token(self.session_id, "session_id")
        except InvalidIdentifier as exc:
            raise InvalidConfig(str(exc)) from None
        for name in ("i_threshold", "j_threshold", "r_max"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int):
                raise InvalidConfig(f"{name} must be an integer, got {v!r}")
        if self.i_threshold < 0 or self.j_threshold < 0:
            raise InvalidConfig("thresholds must be non-negative")
        if self.r_max < 1:
            raise InvalidConfig(f"r_max must be at least 1, got {self.r_max}")
        for name in ("target_i", "target_j"):
            if not isinstance(getattr(self, name), TargetSet):
                raise InvalidConfig(f"{name} must be a TargetSet")
        ids = [m.mapping_id for m in self.mappings]
        if len(set(ids)) != len(ids):
            raise InvalidConfig("duplicate mapping ids")
        if self.combiner.mapping_id is not None and self.combiner.mapping_id not in ids:
            raise InvalidConfig(f"combiner references unknown mapping {self.combiner.mapping_id!r}")


@dataclass(frozen=True)
class SessionState:
    config: SessionConfig
    c_i: int = 0
    c_j: int = 0
    round: int = 0
    status: Status = Status.NOT_DONE


@dataclass(frozen=True)
class RoundRecord:
    round: int
    fact_i: Fact
    fact_j: Fact
    resultant: Fact
    match_i: bool
    match_j: bool
    matched: bool
    c_i_after: int
    c_j_after: int


def init_session(config: SessionConfig) -> SessionState:
    config.validate()
    return SessionState(config)


def _counters_allow(state: SessionState) -> bool:
    cfg = state.config
    below_i = state.c_i <= cfg.i_threshold
    below_j = state.c_j <= cfg.j_threshold
    if cfg.mode is ProtocolMode.PAPER_LITERAL:
        return below_i and below_j
    return below_i or below_j


def should_continue(state: SessionState) -> bool:
    if state.status.terminal:
        return False
    return _counters_allow(state) and state.round < state.config.r_max


def advance(state: SessionState, f_k: Fact, f_m: Fact) -> tuple[SessionState, RoundRecord]:
    """One loop iteration without touching domains."""
    if not should_continue(state):
        raise RoundAfterTermination(
            f"session {state.config.session_id!r} cannot run round {state.round} "
            f"(status {state.status.value}, c=({state.c_i},{state.c_j}))"
        )
    cfg = state.config
    f_p = combine(cfg.combiner, f_k, f_m, state.round, cfg.mappings)
    match_i = in_target(f_p, cfg.target_i)
    match_j = in_target(f_p, cfg.target_j)
    matched = joint_match(match_i, match_j)
    c_i = state.c_i + 1 if matched else state.c_i
    c_j = state.c_j + 1 if matched else state.c_j
    record = RoundRecord(state.round, f_k, f_m, f_p, match_i, match_j, matched, c_i, c_j)
    return SessionState(cfg, c_i, c_j, state.round + 1, state.status), record


def step_round(
    state: SessionState, f_k: Fact, f_m: Fact, domain_i: Domain, domain_j: Domain
) -> tuple[SessionState, Domain, Domain, RoundRecord]:
    new_state, record = advance(state, f_k, f_m)
    if record.matched:
        domain_i = absorb_fact(domain_i, record.resultant)
        domain_j = absorb_fact(domain_j, record.resultant)
    return new_state, domain_i, domain_j, record


def finalize(state: SessionState) -> SessionState:
    if state.status.terminal:
        return state
    if should_continue(state):
        raise FinalizeWhileRunnable(
            f"session {state.config.session_id!r} can still run at round {state.round}"
        )
    cfg = state.config
    if state.c_i >= cfg.i_threshold and state.c_j >= cfg.j_threshold:
        status = Status.DONE
    elif not _counters_allow(state):
        # counter exit takes precedence over a simultaneous round-limit exit
        status = Status.INSUFFICIENT_CONFIDENCE
    else:
        status = Status.ROUND_LIMIT_EXCEEDED
    return replace(state, status=status)


def fail(state: SessionState, status: Status = Status.PROTOCOL_VIOLATION) -> SessionState:
    if state.status.terminal:
        return state
    if not status.failed:
        raise ValueError(f"{status} is not a failure status")
    return replace(state, status=status)


def reduce_nparty(
    user_ids: Sequence[str], pair_policy: str | Iterable[tuple[str, str]] = "full"
) -> list[tuple[str, str]]:
    """Reduce an N-party conversation to M two-party conversations.

    ``pair_policy`` is ``"full"`` for all C(N, 2) pairs, or an explicit
    list of pairs. Pairs are unordered; each is returned oriented by the
    users' position in ``user_ids`` and the list is deduplicated.
    """
    users = list(user_ids)
    if len(set(users)) != len(users):
        raise ValueError("user_ids must be distinct")
    if len(users) < 2:
        raise ValueError("need at least two users")
    pos = {u: n for n, u in enumerate(users)}
    if isinstance(pair_policy, str):
        if pair_policy.lower() != "full":
            raise ValueError(f"unknown pair policy {pair_policy!r}")
        return [(users[a], users[b]) for a in range(len(users)) for b in range(a + 1, len(users))]

    out: list[tuple[str, str]] = []
    seen = set()
    for a, b in pair_policy:
        for u in (a, b):
            if u not in pos:
                raise UnknownUser(f"unknown user {u!r}")
        if a == b:
            raise SelfPair(f"user {a!r} paired with itself")
        pair = (a, b) if pos[a] < pos[b] else (b, a)
        if pair not in seen:
            seen.add(pair)
            out.append(pair)
    if not out:
        raise EmptyPairList("explicit pair list is empty")
    return out
