"""Newline-delimited JSON codec for protocol messages, plus a loopback pair.

Every message encodes to exactly one line: ``type`` first, ``session``
second, then the remaining fields in declaration order, compact separators,
terminated by a single ``\\n``.
"""

from __future__ import annotations

import collections
import enum
import json
import threading
from dataclasses import dataclass, fields
from typing import ClassVar, Union

from .domain import MAGNITUDE_MAX, MAGNITUDE_MIN, Fact, FactForm, is_token
from .errors import CodecError, TransportClosed
from .machine import ProtocolMode, Status


@dataclass(frozen=True)
class Hello:
    TYPE: ClassVar[str] = "HELLO"
    session: str
    user_id: str
    mode: ProtocolMode
    i_threshold: int
    j_threshold: int
    r_max: int
    combiner: str


@dataclass(frozen=True)
class HelloAck:
    TYPE: ClassVar[str] = "HELLO_ACK"
    session: str
    user_id: str


@dataclass(frozen=True)
class FactMsg:
    TYPE: ClassVar[str] = "FACT"
    session: str
    round: int
    form: FactForm
    fact_id: str
    domain_id: str
    label: str
    magnitude: int

    @classmethod
    def from_fact(cls, session: str, round: int, fact: Fact) -> "FactMsg":
        return cls(session, round, fact.form, fact.fact_id, fact.domain_id, fact.label, fact.magnitude)

    def to_fact(self) -> Fact:
        return Fact(self.fact_id, self.domain_id, self.form, self.label, self.magnitude)


@dataclass(frozen=True)
class RoundResult:
    TYPE: ClassVar[str] = "ROUND_RESULT"
    session: str
    round: int
    matched: bool
    c_i: int
    c_j: int


@dataclass(frozen=True)
class Final:
    TYPE: ClassVar[str] = "FINAL"
    session: str
    status: Status
    c_i: int
    c_j: int
    rounds: int


Message = Union[Hello, HelloAck, FactMsg, RoundResult, Final]
MESSAGE_TYPES = {cls.TYPE: cls for cls in (Hello, HelloAck, FactMsg, RoundResult, Final)}
_FIELD_NAMES = {cls: tuple(f.name for f in fields(cls)) for cls in MESSAGE_TYPES.values()}
_ALLOWED_KEYS = {cls: frozenset(names) | {"type"} for cls, names in _FIELD_NAMES.items()}


def _token(name, v):
    if not is_token(v):
        raise CodecError("TypeMismatch", name, "expected a non-empty token")
    return v


def _string(name, v):
    if not isinstance(v, str):
        raise CodecError("TypeMismatch", name, "expected a string")
    return v


def _boolean(name, v):
    if not isinstance(v, bool):
        raise CodecError("TypeMismatch", name, "expected a boolean")
    return v


def _count(name, v):
    if type(v) is not int or v < 0:
        raise CodecError("TypeMismatch", name, "expected a non-negative integer")
    return v


def _magnitude(name, v):
    if type(v) is not int or not MAGNITUDE_MIN <= v <= MAGNITUDE_MAX:
        raise CodecError("TypeMismatch", name, "expected an in-range integer magnitude")
    return v


def _enum_of(cls):
    lookup = {m.value: m for m in cls}

    def check(name, v):
        try:
            return lookup[v]
        except (KeyError, TypeError):
            raise CodecError("TypeMismatch", name, f"not a {cls.__name__}: {v!r}") from None
    return check


_VALIDATORS = {
    "session": _token,
    "user_id": _token,
    "mode": _enum_of(ProtocolMode),
    "i_threshold": _count,
    "j_threshold": _count,
    "r_max": _count,
    "combiner": _token,
    "round": _count,
    "form": _enum_of(FactForm),
    "fact_id": _token,
    "domain_id": _token,
    "label": _string,
    "magnitude": _magnitude,
    "matched": _boolean,
    "c_i": _count,
    "c_j": _count,
    "status": _enum_of(Status),
    "rounds": _count,
}


_ENCODER = json.JSONEncoder(ensure_ascii=False, separators=(",", ":"))


def encode_message(msg: Message) -> bytes:
    body = {"type": msg.TYPE}
    for name in _FIELD_NAMES[type(msg)]:
        v = getattr(msg, name)
        body[name] = v.value if isinstance(v, enum.Enum) else v
    return (_ENCODER.encode(body) + "\n").encode("utf-8")


def _no_duplicates(pairs):
    out = {}
    for k, v in pairs:
        if k in out:
            raise CodecError("TypeMismatch", k, "duplicate key")
        out[k] = v
    return out


_DECODER = json.JSONDecoder(object_pairs_hook=_no_duplicates)


def decode_message(line: bytes | str) -> Message:
    """Parse one line into a message; field order on input is free."""
    if isinstance(line, (bytes, bytearray)):
        try:
            text = bytes(line).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise CodecError("TypeMismatch", "$", f"invalid UTF-8: {exc}") from None
    else:
        text = line
    if text.endswith("\n"):
        text = text[:-1]
    try:
        body, end = _DECODER.raw_decode(text)
    except json.JSONDecodeError as exc:
        raise CodecError("TypeMismatch", "$", f"not JSON: {exc.msg}") from None
    if text[end:]:
        raise CodecError("TrailingGarbage", "$", repr(text[end:end + 20]))
    if not isinstance(body, dict):
        raise CodecError("TypeMismatch", "$", "expected a JSON object")
    if "type" not in body:
        raise CodecError("MissingField", "type")
    cls = MESSAGE_TYPES.get(body["type"]) if isinstance(body["type"], str) else None
    if cls is None:
        raise CodecError("UnknownType", "type", repr(body["type"]))
    names = _FIELD_NAMES[cls]
    if not body.keys() <= _ALLOWED_KEYS[cls]:
        extra = sorted(body.keys() - _ALLOWED_KEYS[cls])
        raise CodecError("TrailingGarbage", extra[0], "unexpected field")
    values = {}
    for name in names:
        if name not in body:
            raise CodecError("MissingField", name)
        values[name] = _VALIDATORS[name](name, body[name])
    return cls(**values)


# -- loopback transport -----------------------------------------------------

class _Channel:
    def __init__(self):
        self.queue: collections.deque[bytes] = collections.deque()
        self.closed = False


class Endpoint:
    """One side of an in-process, lossless, FIFO message pipe.

    Messages travel encoded, so every send exercises the codec.
    """

    def __init__(self, inbox: _Channel, outbox: _Channel, cond: threading.Condition, name: str):
        self._inbox = inbox
        self._outbox = outbox
        self._cond = cond
        self.name = name

    def send(self, msg: Message) -> None:
        data = encode_message(msg)
        with self._cond:
            if self._outbox.closed or self._inbox.closed:
                raise TransportClosed(f"endpoint {self.name} is closed")
            self._outbox.queue.append(data)
            self._cond.notify_all()

    def receive(self, block: bool = False, timeout: float | None = None) -> Message | None:
        """Next message, or ``None`` if nothing is queued (non-blocking).

        Raises TransportClosed once the peer has closed and the queue is drained.
        """
        with self._cond:
            if block:
                self._cond.wait_for(lambda: self._inbox.queue or self._inbox.closed, timeout)
            if self._inbox.queue:
                data = self._inbox.queue.popleft()
            elif self._inbox.closed:
                raise TransportClosed(f"peer of {self.name} closed")
            else:
                return None
        return decode_message(data)

    def close(self) -> None:
        # closing marks our outgoing channel; the peer drains then sees TransportClosed
        with self._cond:
            self._outbox.closed = True
            self._cond.notify_all()

    @property
    def closed(self) -> bool:
        return self._outbox.closed


def open_loopback_pair() -> tuple[Endpoint, Endpoint]:
    a_to_b, b_to_a = _Channel(), _Channel()
    cond = threading.Condition()
    return Endpoint(b_to_a, a_to_b, cond, "A"), Endpoint(a_to_b, b_to_a, cond, "B")
