import json
from dataclasses import replace
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from zeus_auth import PartyAgent, ProtocolMode, SelectionPolicy, SessionConfig, Status, TargetSet
from zeus_auth.errors import ConfigError, InstanceTooLarge
from zeus_auth.experiment import (
    impostor_pairing,
    monte_carlo_acceptance,
    oracle_acceptance,
    run_experiment,
    simulate_session,
    sweep_thresholds,
)
from zeus_auth.rendezvous import run_session
from zeus_auth.replay import replay_transcript
from zeus_auth.scenario import load_scenario

from conftest import domain_of


def random_scenario(tmp_path, mags_i, mags_j, t, r_max, name="r.json"):
    doc = {
        "domains": [
            {"id": "a", "facts": [{"id": f"a{n}", "magnitude": m} for n, m in enumerate(mags_i)]},
            {"id": "b", "facts": [{"id": f"b{n}", "magnitude": m} for n, m in enumerate(mags_j)]},
        ],
        "agents": [
            {"id": "x", "domain": "a", "policy": "random_seeded", "seed": 5},
            {"id": "y", "domain": "b", "policy": "random_seeded", "seed": 9},
        ],
        "sessions": [{"id": "s", "parties": ["x", "y"], "i_threshold": t[0],
                      "j_threshold": t[1], "r_max": r_max}],
    }
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return load_scenario(p)


@pytest.mark.parametrize("mags_i,mags_j,t,r_max,expected", [
    ([0, 0], [0, 0], (1, 1), 2, Fraction(1)),
    ([1, 2], [5, 6], (1, 1), 3, Fraction(0)),
    # one matching pair out of four, one round
    ([1, 2], [1, 3], (1, 1), 1, Fraction(1, 4)),
    # first round matches half the time; afterwards j holds 0, 1 and the
    # absorbed resultant, so two of its three facts match: 1/2 * 2/3
    ([0], [0, 1], (2, 2), 2, Fraction(1, 3)),
    # no absorption happens before the first match: 1 - (3/4)^2
    ([1, 2], [1, 3], (1, 1), 2, Fraction(7, 16)),
])
def test_oracle_hand_values(tmp_path, mags_i, mags_j, t, r_max, expected):
    assert oracle_acceptance(random_scenario(tmp_path, mags_i, mags_j, t, r_max)) == expected


def test_oracle_markets_space_closed_form():
    # two of nine pairs match until the first hit: 1 - (7/9)^3
    assert oracle_acceptance(load_scenario("markets_space")) == 1 - Fraction(7, 9) ** 3


def test_oracle_guards(tmp_path):
    with pytest.raises(InstanceTooLarge):
        oracle_acceptance(random_scenario(tmp_path, range(10), range(10), (1, 1), 4))
    with pytest.raises(ConfigError):
        oracle_acceptance(load_scenario("tom_mary"))


def test_monte_carlo_tracks_oracle(tmp_path):
    cfg = random_scenario(tmp_path, [1, 2], [1, 3], (1, 1), 2)
    est = monte_carlo_acceptance(cfg, 2000)
    assert abs(float(est) - 7 / 16) < 0.04
    assert est == monte_carlo_acceptance(cfg, 2000)


def test_run_experiment_writes_replayable_output(tmp_path):
    report = run_experiment(load_scenario("council"), tmp_path)
    assert report.all_done and report.counts == {"DONE": 6}
    doc = json.loads((tmp_path / "report.json").read_text())
    assert doc["counts"] == {"DONE": 6}
    for s in report.sessions:
        assert replay_transcript(tmp_path / s.transcript).status is Status.DONE


def test_impostor_pairing(tom_mary):
    legit, forged = impostor_pairing(tom_mary)
    assert (legit.agent_i, legit.agent_j) == ("tom", "mary")
    assert (forged.agent_i, forged.agent_j) == ("tom", "eve")
    assert forged.config == legit.config


def test_sweep_shape_and_monotonicity():
    table = sweep_thresholds(load_scenario("impostor_sweep"), 1, 4, 40)
    assert [r.threshold for r in table.rows] == [1, 2, 3, 4]
    fars = [r.far for r in table.rows]
    frrs = [r.frr for r in table.rows]
    assert fars == sorted(fars, reverse=True) and frrs == sorted(frrs)
    lines = table.to_csv().splitlines()
    assert lines[0] == "threshold,far,frr,trials" and len(lines) == 5


def test_sweep_extremes(tom_mary):
    # eve shares nothing and scripted agents never reach threshold r_max + 1
    table = sweep_thresholds(tom_mary, 1, 11, 3)
    assert all(r.far == 0 for r in table.rows)
    assert table.rows[-1].frr == 1.0
    assert table.rows[0].frr == 0.0
    # a zero threshold demands no matches, so anyone is accepted
    assert sweep_thresholds(tom_mary, 0, 0, 3).rows[0].far == 1.0


agent_specs = st.tuples(st.lists(st.integers(0, 3), min_size=1, max_size=4), st.integers(0, 2**64 - 1),
                        st.booleans())


@settings(max_examples=150, deadline=None)
@given(agent_specs, agent_specs, st.integers(0, 3), st.integers(0, 3), st.integers(1, 8),
       st.sampled_from(list(ProtocolMode)), st.sampled_from([None, TargetSet({0}), TargetSet({1})]))
def test_simulation_agrees_with_transported_session(spec_i, spec_j, ti, tj, r_max, mode, view_j):
    def agent(uid, did, spec):
        mags, seed, rr = spec
        policy = SelectionPolicy.round_robin() if rr else SelectionPolicy.random_seeded()
        return PartyAgent(uid, domain_of(did, *mags), policy, seed)

    a_i = agent("x", "a", spec_i)
    a_j = replace(agent("y", "b", spec_j), target_view=view_j)
    cfg = SessionConfig("s", ti, tj, r_max, mode)
    t = run_session(a_i, a_j, cfg)
    sim = simulate_session(a_i, a_j, cfg)
    assert (sim.status, sim.c_i, sim.c_j, sim.round) == (t.status, t.c_i, t.c_j, len(t.rounds))
