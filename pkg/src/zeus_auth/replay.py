"""Re-execute a transcript file through the pure state machine."""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, fields

from .errors import CodecError, ReplayMismatch, ZeusError
from .jsonforms import config_from_json, target_from_json
from .machine import Status, advance, fail, finalize, init_session, should_continue
from .rendezvous import TRANSCRIPT_VERSION, hello_for, party_config
from .wire import FactMsg, Final, Hello, HelloAck, RoundResult, decode_message


@dataclass(frozen=True)
class ReplayResult:
    session_id: str
    rounds: int
    matched_rounds: int
    status: Status
    c_i: int
    c_j: int


def _json_line(line: bytes, what: str) -> dict:
    try:
        data = json.loads(line.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CodecError("TypeMismatch", what, str(exc)) from None
    if not isinstance(data, dict):
        raise CodecError("TypeMismatch", what, "expected a JSON object")
    return data


def _compare(where, expected, found, names):
    for name in names:
        e, f = getattr(expected, name), getattr(found, name)
        if e != f:
            raise ReplayMismatch(where, name, getattr(e, "value", e), getattr(f, "value", f))


def replay_transcript(source) -> ReplayResult:
    """Verify a transcript written by the harness.

    ``source`` is a path or the transcript bytes. Returns a summary when
    every recorded counter, match flag and the final status reproduce,
    raises :class:`ReplayMismatch` at the first divergence otherwise.
    """
    if isinstance(source, (bytes, bytearray)):
        data = bytes(source)
    else:
        with open(os.fspath(source), "rb") as fh:
            data = fh.read()
    if not data.endswith(b"\n"):
        raise CodecError("TrailingGarbage", "$", "transcript does not end with a newline")
    lines = data[:-1].split(b"\n")
    if len(lines) < 3:
        raise CodecError("MissingField", "$", "transcript needs a header, messages and a digest")

    header = _json_line(lines[0], "header")
    if header.get("type") != "TRANSCRIPT":
        raise CodecError("UnknownType", "type", repr(header.get("type")))
    if header.get("version") != TRANSCRIPT_VERSION:
        raise ReplayMismatch("HEADER", "version", TRANSCRIPT_VERSION, header.get("version"))
    try:
        config = config_from_json(header["config"])
        users = header["users"]
        views = header.get("views") or {}
        view_i = None if views.get("i") is None else target_from_json(views["i"])
        view_j = None if views.get("j") is None else target_from_json(views["j"])
    except (KeyError, TypeError, ValueError) as exc:
        raise CodecError("TypeMismatch", "config", str(exc)) from None
    if header.get("session") != config.session_id:
        raise ReplayMismatch("HEADER", "session", config.session_id, header.get("session"))
    sid = config.session_id

    messages = []
    for n, line in enumerate(lines[1:-1], start=2):
        try:
            messages.append(decode_message(line))
        except CodecError as exc:
            # the file is well formed around it, so an undecodable message is a tamper
            raise ReplayMismatch(f"line {n}", exc.field, "a valid message", str(exc)) from None
    pos = 0

    def expect(cls, where):
        nonlocal pos
        if pos >= len(messages):
            raise ReplayMismatch(where, "type", cls.TYPE, None)
        msg = messages[pos]
        pos += 1
        if not isinstance(msg, cls):
            raise ReplayMismatch(where, "type", cls.TYPE, msg.TYPE)
        if msg.session != sid:
            raise ReplayMismatch(where, "session", sid, msg.session)
        return msg

    hello = expect(Hello, "HELLO")
    _compare("HELLO", hello_for(config, users["i"]), hello,
             [f.name for f in fields(Hello)])
    ack = expect(HelloAck, "HELLO_ACK")
    if ack.user_id != users["j"]:
        raise ReplayMismatch("HELLO_ACK", "user_id", users["j"], ack.user_id)

    s_i = init_session(party_config(config, "i", view_i))
    s_j = init_session(party_config(config, "j", view_j))
    matched_rounds = 0
    violated = False
    while should_continue(s_i) and should_continue(s_j):
        r = s_i.round
        fact_i = expect(FactMsg, r)
        fact_j = expect(FactMsg, r)
        for fm in (fact_i, fact_j):
            if fm.round != r:
                raise ReplayMismatch(r, "round", r, fm.round)
        try:
            s_i, rec_i = advance(s_i, fact_i.to_fact(), fact_j.to_fact())
            s_j, rec_j = advance(s_j, fact_i.to_fact(), fact_j.to_fact())
        except ZeusError as exc:
            # the recorded facts cannot even be combined, e.g. an unmapped fact id
            raise ReplayMismatch(r, "resultant", "a combinable fact pair", str(exc)) from None
        matched_rounds += rec_i.matched
        names = ("round", "matched", "c_i", "c_j")
        _compare(r, RoundResult(sid, r, rec_i.matched, s_i.c_i, s_i.c_j), expect(RoundResult, r), names)
        _compare(r, RoundResult(sid, r, rec_j.matched, s_j.c_i, s_j.c_j), expect(RoundResult, r), names)
        if (rec_i.matched, s_i.c_i, s_i.c_j) != (rec_j.matched, s_j.c_i, s_j.c_j):
            violated = True
            break
    if not violated and should_continue(s_i) != should_continue(s_j):
        violated = True

    end = fail(s_i) if violated else finalize(s_i)
    final = expect(Final, "FINAL")
    _compare("FINAL", Final(sid, end.status, end.c_i, end.c_j, end.round), final,
             ("status", "c_i", "c_j", "rounds"))
    if pos != len(messages):
        raise ReplayMismatch("END", "type", None, messages[pos].TYPE)

    trailer = _json_line(lines[-1], "digest")
    if trailer.get("type") != "DIGEST":
        raise ReplayMismatch("DIGEST", "type", "DIGEST", trailer.get("type"))
    body = b"\n".join(lines[:-1]) + b"\n"
    digest = hashlib.sha256(body).hexdigest()
    if trailer.get("sha256") != digest:
        raise ReplayMismatch("DIGEST", "sha256", digest, trailer.get("sha256"))

    return ReplayResult(sid, end.round, matched_rounds, end.status, end.c_i, end.c_j)
