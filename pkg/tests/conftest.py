import pytest

from zeus_auth import (
    Fact,
    FactForm,
    PartyAgent,
    SelectionPolicy,
    SessionConfig,
    add_fact,
    load_scenario,
    make_domain,
)


def fact(fid, mag, domain="d", label=None, form=FactForm.ANSWER):
    return Fact(fid, domain, form, label or fid, mag)


def domain_of(did, *mags, prefix=None):
    d = make_domain(did, did)
    for n, m in enumerate(mags):
        d = add_fact(d, fact(f"{prefix or did}{n}", m, did))
    return d


def scripted_pair(mags_i, mags_j):
    """Two scripted agents that say their facts in order."""
    d_i, d_j = domain_of("di", *mags_i), domain_of("dj", *mags_j)
    a_i = PartyAgent("ui", d_i, SelectionPolicy.scripted(*(f.fact_id for f in d_i.native_facts)))
    a_j = PartyAgent("uj", d_j, SelectionPolicy.scripted(*(f.fact_id for f in d_j.native_facts)))
    return a_i, a_j


def config(**kw):
    base = dict(session_id="s1", i_threshold=3, j_threshold=3, r_max=10)
    base.update(kw)
    return SessionConfig(**base)


@pytest.fixture
def tom_mary():
    return load_scenario("tom_mary")


def random_message(rng):
    """A random well-formed protocol message drawn from ``rng``."""
    from zeus_auth.machine import ProtocolMode, Status
    from zeus_auth.wire import FactMsg, Final, Hello, HelloAck, RoundResult

    def tok():
        alphabet = "abcxyz019-_.:~éΩ漢"
        return "".join(rng.choice(alphabet) for _ in range(rng.randint(1, 12)))

    def label():
        alphabet = "ab Z⊗\"\\\n\t/é"
        return "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 16)))

    def count():
        return rng.choice([0, 1, rng.randint(0, 10**6), 2**62 - 1])

    sid = tok()
    kind = rng.randrange(5)
    if kind == 0:
        return Hello(sid, tok(), rng.choice(list(ProtocolMode)), count(), count(), count(), tok())
    if kind == 1:
        return HelloAck(sid, tok())
    if kind == 2:
        return FactMsg(sid, count(), rng.choice(list(FactForm)), tok(), tok(), label(),
                       rng.randint(-(2**62), 2**62 - 1))
    if kind == 3:
        return RoundResult(sid, count(), rng.random() < 0.5, count(), count())
    return Final(sid, rng.choice(list(Status)), count(), count(), count())


def tamper_variants(data):
    """Yield copies of a transcript with exactly one message field altered."""
    import json

    lines = data.split(b"\n")
    # first line is the header, the last two are the digest and the empty tail
    for n in range(1, len(lines) - 2):
        body = json.loads(lines[n])
        for key, value in body.items():
            if key == "type":
                continue
            if isinstance(value, bool):
                new = not value
            elif isinstance(value, int):
                new = value + 1
            elif value in ("QUESTION", "ANSWER"):
                new = "ANSWER" if value == "QUESTION" else "QUESTION"
            elif isinstance(value, str) and value.startswith("FAILED") or value == "DONE":
                new = "FAILED_ROUND_LIMIT_EXCEEDED" if value == "DONE" else "DONE"
            else:
                new = value + "x"
            changed = dict(body, **{key: new})
            out = list(lines)
            out[n] = json.dumps(changed, ensure_ascii=False, separators=(",", ":")).encode()
            yield n, key, b"\n".join(out)
