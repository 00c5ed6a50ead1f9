"""Batch runs, threshold sweeps and the exhaustive acceptance oracle."""

from __future__ import annotations

import collections
import json
import logging
from dataclasses import dataclass, replace
from fractions import Fraction
from pathlib import Path

from .agents import PartyAgent, PolicyKind, absorb, reseed, select_fact, with_form
from .domain import Domain
from .errors import ConfigError, InstanceTooLarge, ZeusError
from .machine import (
    SessionConfig,
    SessionState,
    Status,
    advance,
    fail,
    finalize,
    init_session,
    should_continue,
    step_round,
)
from .rendezvous import party_config, run_session
from .scenario import ScenarioConfig, SessionSpec

log = logging.getLogger(__name__)

ORACLE_LIMIT = 10**6


@dataclass(frozen=True)
class SessionVerdict:
    session_id: str
    agent_i: str
    agent_j: str
    verdict: str
    c_i: int = 0
    c_j: int = 0
    rounds: int = 0
    matched_rounds: int = 0
    transcript: str | None = None
    error: str | None = None


@dataclass(frozen=True)
class ExperimentReport:
    scenario: str
    digest: str
    base_seed: int
    sessions: tuple[SessionVerdict, ...]

    @property
    def counts(self) -> dict[str, int]:
        return dict(sorted(collections.Counter(s.verdict for s in self.sessions).items()))

    @property
    def all_done(self) -> bool:
        return all(s.verdict == Status.DONE.value for s in self.sessions)

    def to_json(self) -> str:
        doc = {
            "scenario": self.scenario,
            "digest": self.digest,
            "base_seed": self.base_seed,
            "sessions": [
                {k: v for k, v in vars(s).items() if v is not None} for s in self.sessions
            ],
            "counts": self.counts,
        }
        return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"

    def to_tsv(self) -> str:
        rows = ["session\tagent_i\tagent_j\tverdict\tc_i\tc_j\trounds\tmatched"]
        for s in self.sessions:
            rows.append(f"{s.session_id}\t{s.agent_i}\t{s.agent_j}\t{s.verdict}\t"
                        f"{s.c_i}\t{s.c_j}\t{s.rounds}\t{s.matched_rounds}")
        return "\n".join(rows) + "\n"


@dataclass(frozen=True)
class RateRow:
    threshold: int
    far: float
    frr: float
    trials: int


@dataclass(frozen=True)
class RateTable:
    rows: tuple[RateRow, ...]

    def to_csv(self) -> str:
        lines = ["threshold,far,frr,trials"]
        lines += [f"{r.threshold},{r.far:.6f},{r.frr:.6f},{r.trials}" for r in self.rows]
        return "\n".join(lines) + "\n"


def _agents_for(config: ScenarioConfig, spec: SessionSpec, seed_offset: int) -> tuple[PartyAgent, PartyAgent]:
    a_i = reseed(config.agents[spec.agent_i], seed_offset)
    a_j = reseed(config.agents[spec.agent_j], seed_offset)
    return a_i, a_j


def run_experiment(config: ScenarioConfig, out_dir=None, base_seed: int | None = None) -> ExperimentReport:
    """Run every declared session, writing one transcript per session.

    Errors inside a session are recorded in its verdict and do not stop
    the batch. With ``out_dir`` set, transcripts and ``report.json`` are
    written there.
    """
    seed = config.experiment.base_seed if base_seed is None else base_seed
    out = Path(out_dir) if out_dir is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    verdicts = []
    for spec in config.sessions:
        sid = spec.config.session_id
        try:
            t = run_session(*_agents_for(config, spec, seed), spec.config)
        except ZeusError as exc:
            log.warning("session %s failed with %s", sid, exc)
            verdicts.append(SessionVerdict(sid, spec.agent_i, spec.agent_j, "ERROR",
                                           error=f"{type(exc).__name__}: {exc}"))
            continue
        name = None
        if out is not None:
            name = f"{sid}.transcript.jsonl"
            t.write(out / name)
        verdicts.append(SessionVerdict(sid, spec.agent_i, spec.agent_j, t.status.value,
                                       t.c_i, t.c_j, len(t.rounds), t.matched_rounds, name))
    report = ExperimentReport(config.name, config.digest, seed, tuple(verdicts))
    if out is not None:
        (out / "report.json").write_text(report.to_json(), encoding="utf-8")
    return report


def impostor_pairing(config: ScenarioConfig) -> tuple[SessionSpec, SessionSpec]:
    """The legitimate session and the same session with the impostor swapped in."""
    exp = config.experiment
    if exp.legitimate is None:
        raise ConfigError("experiment.legitimate is not set", file=config.path, field="experiment")
    if exp.impostor is None:
        raise ConfigError("scenario declares no impostor for the sweep",
                          file=config.path, field="experiment.impostor")
    legit = config.session(exp.legitimate)
    imp = config.impostors[exp.impostor]
    if imp.impersonates == legit.agent_i:
        forged = replace(legit, agent_i=imp.agent_id)
    elif imp.impersonates == legit.agent_j:
        forged = replace(legit, agent_j=imp.agent_id)
    else:
        raise ConfigError(f"impostor {imp.agent_id!r} impersonates {imp.impersonates!r}, "
                          f"who is not a party of {exp.legitimate!r}",
                          file=config.path, field="experiment.impostor")
    return legit, forged


def simulate_session(agent_i: PartyAgent, agent_j: PartyAgent, config: SessionConfig) -> SessionState:
    """Final state of the session ``run_session`` would run, without the transport.

    Both parties keep their own state machine exactly as in the transported
    driver; only encoding and message passing are skipped.
    """
    s_i = init_session(party_config(config, "i", agent_i.target_view))
    s_j = init_session(party_config(config, "j", agent_j.target_view))
    d_i, d_j = agent_i, agent_j
    while should_continue(s_i):
        if not should_continue(s_j):
            return fail(s_i)
        r = s_i.round
        f_i, f_j = select_fact(d_i, r), select_fact(d_j, r)
        s_i, rec_i = advance(s_i, f_i, f_j)
        s_j, rec_j = advance(s_j, f_i, f_j)
        if (rec_i.matched, s_i.c_i, s_i.c_j) != (rec_j.matched, s_j.c_i, s_j.c_j):
            return fail(s_i)
        if rec_i.matched:
            d_i, d_j = absorb(d_i, rec_i.resultant), absorb(d_j, rec_j.resultant)
    if should_continue(s_j):
        return fail(s_i)
    return finalize(s_i)


def _trial_statuses(config: ScenarioConfig, spec: SessionSpec, trials: int, base_seed: int):
    for trial in range(trials):
        yield simulate_session(*_agents_for(config, spec, base_seed + trial), spec.config).status


def trial_verdicts(
    config: ScenarioConfig, spec: SessionSpec, trials: int, base_seed: int | None = None
) -> dict[str, int]:
    """How many of ``trials`` seeded runs of ``spec`` end in each status."""
    seed = config.experiment.base_seed if base_seed is None else base_seed
    counts = collections.Counter(s.value for s in _trial_statuses(config, spec, trials, seed))
    return dict(sorted(counts.items()))


def sweep_thresholds(
    config: ScenarioConfig, t_min: int, t_max: int, trials: int, base_seed: int | None = None
) -> RateTable:
    """FAR and FRR over symmetric thresholds ``t_min..t_max``.

    Trial ``k`` of every threshold uses seed offset ``base_seed + k``, so
    each threshold sees the same fact sequences.
    """
    if t_min < 0 or t_min > t_max:
        raise ValueError(f"bad threshold range [{t_min}, {t_max}]")
    if trials < 1:
        raise ValueError("trials must be at least 1")
    seed = config.experiment.base_seed if base_seed is None else base_seed
    legit, forged = impostor_pairing(config)
    rows = []
    for t in range(t_min, t_max + 1):
        cfg = replace(legit.config, i_threshold=t, j_threshold=t)
        accepted = sum(s is Status.DONE
                       for s in _trial_statuses(config, replace(forged, config=cfg), trials, seed))
        rejected = sum(s is not Status.DONE
                       for s in _trial_statuses(config, replace(legit, config=cfg), trials, seed))
        rows.append(RateRow(t, accepted / trials, rejected / trials, trials))
    return RateTable(tuple(rows))


def monte_carlo_acceptance(
    config: ScenarioConfig, trials: int, session_id: str | None = None, base_seed: int | None = None
) -> Fraction:
    """Fraction of ``trials`` seeded sessions that end DONE."""
    spec = _oracle_session(config, session_id)
    seed = config.experiment.base_seed if base_seed is None else base_seed
    done = sum(s is Status.DONE for s in _trial_statuses(config, spec, trials, seed))
    return Fraction(done, trials)


def _oracle_session(config: ScenarioConfig, session_id: str | None) -> SessionSpec:
    if session_id is not None:
        return config.session(session_id)
    if config.experiment.legitimate is not None:
        return config.session(config.experiment.legitimate)
    if len(config.sessions) != 1:
        raise ConfigError("scenario has several sessions; name one", file=config.path, field="sessions")
    return config.sessions[0]


def oracle_acceptance(config: ScenarioConfig, session_id: str | None = None) -> Fraction:
    """Exact probability that a session between randomly selecting agents ends DONE.

    Walks every pair of fact choices in every round. Each agent draws
    uniformly from its current domain (native plus absorbed), which grows
    after matched rounds, so branch weights are tracked per round.
    """
    spec = _oracle_session(config, session_id)
    a_i, a_j = config.agents[spec.agent_i], config.agents[spec.agent_j]
    for a in (a_i, a_j):
        if a.policy.kind is not PolicyKind.RANDOM_SEEDED:
            raise ConfigError(f"oracle needs RANDOM_SEEDED agents; {a.user_id!r} is "
                              f"{a.policy.kind.value}", file=config.path, field="agents")
    cfg = spec.config
    size = len(a_i.domain) ** cfg.r_max * len(a_j.domain) ** cfg.r_max
    if size > ORACLE_LIMIT:
        raise InstanceTooLarge(f"{len(a_i.domain)}^{cfg.r_max} x {len(a_j.domain)}^{cfg.r_max} "
                               f"= {size} sequence pairs exceeds {ORACLE_LIMIT}")
    return _explore(init_session(_effective(cfg, a_i, a_j)), a_i.domain, a_j.domain,
                    a_i.policy.form_rule, a_j.policy.form_rule)


def _effective(cfg: SessionConfig, a_i: PartyAgent, a_j: PartyAgent) -> SessionConfig:
    if a_i.target_view is not None:
        cfg = replace(cfg, target_i=a_i.target_view)
    if a_j.target_view is not None:
        cfg = replace(cfg, target_j=a_j.target_view)
    return cfg


def _explore(state: SessionState, d_i: Domain, d_j: Domain, rule_i, rule_j) -> Fraction:
    if not should_continue(state):
        return Fraction(int(finalize(state).status is Status.DONE))
    r = state.round
    total = Fraction(0)
    members_i, members_j = d_i.members, d_j.members
    for f_i in members_i:
        for f_j in members_j:
            nxt, ni, nj, _ = step_round(state, with_form(f_i, rule_i, r), with_form(f_j, rule_j, r), d_i, d_j)
            total += _explore(nxt, ni, nj, rule_i, rule_j)
    return total / (len(members_i) * len(members_j))
