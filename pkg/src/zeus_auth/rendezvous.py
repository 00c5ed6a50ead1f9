"""Drive one two-party session over a transport and record its transcript."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, replace

from .agents import PartyAgent, absorb, select_fact
from .comparison import TargetSet
from .domain import Domain
from .errors import ProtocolViolation
from .jsonforms import config_to_json, target_to_json
from .machine import (
    RoundRecord,
    SessionConfig,
    SessionState,
    Status,
    advance,
    fail,
    finalize,
    init_session,
    should_continue,
)
from .wire import (
    Endpoint,
    FactMsg,
    Final,
    Hello,
    HelloAck,
    Message,
    RoundResult,
    encode_message,
    open_loopback_pair,
)

TRANSCRIPT_VERSION = 1


def party_config(config: SessionConfig, role: str, view: TargetSet | None) -> SessionConfig:
    """The session config as seen by party ``role`` ("i" or "j")."""
    if view is None:
        return config
    return replace(config, **{f"target_{role}": view})


def hello_for(config: SessionConfig, user_id: str) -> Hello:
    return Hello(config.session_id, user_id, config.mode, config.i_threshold,
                 config.j_threshold, config.r_max, config.combiner.wire_name())


@dataclass(frozen=True)
class Transcript:
    session_id: str
    config: SessionConfig
    user_i: str
    user_j: str
    view_i: TargetSet | None
    view_j: TargetSet | None
    rounds: tuple[RoundRecord, ...]
    status: Status
    c_i: int
    c_j: int
    messages: tuple[Message, ...]
    domain_i: Domain
    domain_j: Domain

    @property
    def matched_rounds(self) -> int:
        return sum(1 for r in self.rounds if r.matched)

    def header(self) -> dict:
        return {
            "type": "TRANSCRIPT",
            "version": TRANSCRIPT_VERSION,
            "session": self.session_id,
            "users": {"i": self.user_i, "j": self.user_j},
            "config": config_to_json(self.config),
            "views": {
                "i": None if self.view_i is None else target_to_json(self.view_i),
                "j": None if self.view_j is None else target_to_json(self.view_j),
            },
        }

    def to_bytes(self) -> bytes:
        """Header line, one line per message, then a SHA-256 trailer over all of it."""
        head = json.dumps(self.header(), ensure_ascii=False, separators=(",", ":"))
        body = head.encode("utf-8") + b"\n" + b"".join(encode_message(m) for m in self.messages)
        trailer = {"type": "DIGEST", "sha256": hashlib.sha256(body).hexdigest()}
        return body + json.dumps(trailer, separators=(",", ":")).encode("ascii") + b"\n"

    def write(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())


class _Party:
    def __init__(self, role: str, agent: PartyAgent, config: SessionConfig, endpoint: Endpoint):
        self.role = role
        self.agent = agent
        self.endpoint = endpoint
        self.state: SessionState = init_session(party_config(config, role, agent.target_view))

    @property
    def config(self) -> SessionConfig:
        return self.state.config


def run_session(
    agent_i: PartyAgent,
    agent_j: PartyAgent,
    config: SessionConfig,
    transport: tuple[Endpoint, Endpoint] | None = None,
) -> Transcript:
    """Run a full rendezvous between two agents and return its transcript.

    Both parties keep their own state machine. They exchange HELLO and
    HELLO_ACK, then per round one FACT each and one ROUND_RESULT each; any
    disagreement between the two ROUND_RESULTs ends the session as a
    protocol violation. The initiator closes with FINAL.
    """
    init_session(config)
    sid = config.session_id
    ep_i, ep_j = transport if transport is not None else open_loopback_pair()
    pi = _Party("i", agent_i, config, ep_i)
    pj = _Party("j", agent_j, config, ep_j)
    log: list[Message] = []
    records: list[RoundRecord] = []

    def send(party: _Party, msg: Message) -> None:
        party.endpoint.send(msg)
        log.append(msg)

    def recv(party: _Party, cls):
        msg = party.endpoint.receive()
        if msg is None:
            raise ProtocolViolation(f"party {party.role} expected {cls.TYPE}, nothing queued")
        if not isinstance(msg, cls):
            raise ProtocolViolation(f"party {party.role} expected {cls.TYPE}, got {msg.TYPE}")
        if msg.session != sid:
            raise ProtocolViolation(f"party {party.role} got session {msg.session!r}")
        return msg

    try:
        send(pi, hello_for(pi.config, agent_i.user_id))
        hello = recv(pj, Hello)
        if replace(hello, user_id=agent_i.user_id) != hello_for(pj.config, agent_i.user_id):
            raise ProtocolViolation("HELLO parameters disagree with the responder's config")
        send(pj, HelloAck(sid, agent_j.user_id))
        recv(pi, HelloAck)

        while True:
            go_i, go_j = should_continue(pi.state), should_continue(pj.state)
            if go_i != go_j:
                raise ProtocolViolation("parties disagree on whether to continue")
            if not go_i:
                break
            r = pi.state.round
            f_i = select_fact(pi.agent, r)
            send(pi, FactMsg.from_fact(sid, r, f_i))
            f_j = select_fact(pj.agent, r)
            send(pj, FactMsg.from_fact(sid, r, f_j))
            at_j = recv(pj, FactMsg)
            at_i = recv(pi, FactMsg)
            if at_j.round != r or at_i.round != r:
                raise ProtocolViolation(f"FACT for wrong round (expected {r})")

            pi.state, rec_i = advance(pi.state, f_i, at_i.to_fact())
            pj.state, rec_j = advance(pj.state, at_j.to_fact(), f_j)
            if rec_i.matched:
                pi.agent = absorb(pi.agent, rec_i.resultant)
            if rec_j.matched:
                pj.agent = absorb(pj.agent, rec_j.resultant)
            records.append(rec_i)

            mine_i = RoundResult(sid, r, rec_i.matched, pi.state.c_i, pi.state.c_j)
            mine_j = RoundResult(sid, r, rec_j.matched, pj.state.c_i, pj.state.c_j)
            send(pi, mine_i)
            send(pj, mine_j)
            # each side checks the peer's result against its own
            peer_of_j, peer_of_i = recv(pj, RoundResult), recv(pi, RoundResult)
            if peer_of_j != mine_j or peer_of_i != mine_i:
                raise ProtocolViolation(f"ROUND_RESULT cross-check failed in round {r}")

        pi.state = finalize(pi.state)
        pj.state = finalize(pj.state)
    except ProtocolViolation:
        pi.state = fail(pi.state)
        pj.state = fail(pj.state)
        # drop anything still in flight so FINAL is the next message read
        while ep_i.receive() is not None:
            pass
        while ep_j.receive() is not None:
            pass

    st = pi.state
    final = Final(sid, st.status, st.c_i, st.c_j, st.round)
    send(pi, final)
    got = recv(pj, Final)
    mine = Final(sid, pj.state.status, pj.state.c_i, pj.state.c_j, pj.state.round)
    # after a violation the counters are known to differ; only the status must agree
    if got != mine and not (mine.status is Status.PROTOCOL_VIOLATION and got.status is mine.status):
        raise ProtocolViolation(f"FINAL disagrees with responder state in session {sid!r}")

    return Transcript(
        session_id=sid,
        config=config,
        user_i=agent_i.user_id,
        user_j=agent_j.user_id,
        view_i=agent_i.target_view,
        view_j=agent_j.target_view,
        rounds=tuple(records),
        status=st.status,
        c_i=st.c_i,
        c_j=st.c_j,
        messages=tuple(log),
        domain_i=pi.agent.domain,
        domain_j=pj.agent.domain,
    )
