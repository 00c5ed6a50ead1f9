import json
import random
import threading

import pytest
from hypothesis import given, strategies as st

from zeus_auth import FactForm, ProtocolMode, Status
from zeus_auth.errors import CodecError, TransportClosed
from zeus_auth.wire import (
    FactMsg,
    Final,
    Hello,
    HelloAck,
    RoundResult,
    decode_message,
    encode_message,
    open_loopback_pair,
)

from conftest import random_message


def test_encode_is_canonical():
    line = encode_message(HelloAck("s1", "mary"))
    assert line == b'{"type":"HELLO_ACK","session":"s1","user_id":"mary"}\n'
    line = encode_message(RoundResult("s1", 2, True, 3, 3))
    assert line == b'{"type":"ROUND_RESULT","session":"s1","round":2,"matched":true,"c_i":3,"c_j":3}\n'


def test_decode_accepts_any_field_order():
    msg = decode_message('{"user_id":"mary","session":"s1","type":"HELLO_ACK"}')
    assert msg == HelloAck("s1", "mary")


def test_unicode_label_stays_literal():
    m = FactMsg("s", 0, FactForm.ANSWER, "f", "d", "moon ⊗ cream", 3)
    line = encode_message(m)
    assert "⊗".encode() in line
    assert decode_message(line) == m


@pytest.mark.parametrize("line,kind,field", [
    ('{"type":"NOPE","session":"s"}', "UnknownType", "type"),
    ('{"session":"s"}', "MissingField", "type"),
    ('{"type":"HELLO_ACK","session":"s"}', "MissingField", "user_id"),
    ('{"type":"HELLO_ACK","session":"s","user_id":"u","x":1}', "TrailingGarbage", "x"),
    ('{"type":"HELLO_ACK","session":"s","user_id":"u"} junk', "TrailingGarbage", "$"),
    ('{"type":"HELLO_ACK","session":"s","user_id":7}', "TypeMismatch", "user_id"),
    ('{"type":"HELLO_ACK","session":"s","user_id":"a b"}', "TypeMismatch", "user_id"),
    ('{"type":"ROUND_RESULT","session":"s","round":0,"matched":1,"c_i":0,"c_j":0}',
     "TypeMismatch", "matched"),
    ('{"type":"ROUND_RESULT","session":"s","round":true,"matched":true,"c_i":0,"c_j":0}',
     "TypeMismatch", "round"),
    ('{"type":"FINAL","session":"s","status":"WON","c_i":0,"c_j":0,"rounds":0}',
     "TypeMismatch", "status"),
    ('{"type":"FACT","session":"s","round":0,"form":"ANSWER","fact_id":"f","domain_id":"d",'
     '"label":"","magnitude":4611686018427387904}', "TypeMismatch", "magnitude"),
    ('{"type":"HELLO_ACK","session":"s","session":"t","user_id":"u"}', "TypeMismatch", "session"),
    ('not json', "TypeMismatch", "$"),
    ('[1]', "TypeMismatch", "$"),
])
def test_strict_decoding(line, kind, field):
    with pytest.raises(CodecError) as info:
        decode_message(line)
    assert info.value.kind == kind and info.value.field == field


def test_round_trip_seeded():
    rng = random.Random(2024)
    for _ in range(2000):
        m = random_message(rng)
        line = encode_message(m)
        assert line.endswith(b"\n") and line.count(b"\n") == 1
        assert decode_message(line) == m


@given(st.randoms(use_true_random=False))
def test_round_trip_property(rng):
    m = random_message(rng)
    assert decode_message(encode_message(m)) == m
    # canonical order: type first, session second
    keys = list(json.loads(encode_message(m)))
    assert keys[:2] == ["type", "session"]


def test_loopback_fifo_and_close():
    a, b = open_loopback_pair()
    assert b.receive() is None
    msgs = [HelloAck("s", f"u{n}") for n in range(5)]
    for m in msgs:
        a.send(m)
    assert [b.receive() for _ in msgs] == msgs
    a.send(msgs[0])
    a.close()
    with pytest.raises(TransportClosed):
        a.send(msgs[1])
    assert b.receive() == msgs[0]
    with pytest.raises(TransportClosed):
        b.receive()


def test_loopback_blocking_receive():
    a, b = open_loopback_pair()
    m = Final("s", Status.DONE, 1, 1, 1)
    threading.Timer(0.05, a.send, args=(m,)).start()
    assert b.receive(block=True, timeout=2) == m
    assert b.receive(block=True, timeout=0.01) is None


def test_hello_round_trip():
    h = Hello("s", "tom", ProtocolMode.BOTH_THRESHOLDS, 3, 5, 10, "MAP_THEN_DIFFERENCE:m")
    assert decode_message(encode_message(h)) == h
