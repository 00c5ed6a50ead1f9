"""Scenario files: JSON documents declaring domains, agents and sessions.

Top-level keys::

    name         string
    domains      [{id, name, property, operators, facts}]
    mappings     [{id, source, target, aggregator, entries: [{sources, target}]}]
    agents       [{id, domain, policy, seed, target_view}]
    impostors    [{id, impersonates, overlap, decoy_offset, seed?, policy?}]
    sessions     [{id, parties: [i, j], i_threshold, j_threshold, r_max,
                   mode, combiner, epsilon, target_i, target_j}]
    groups       [{id, users, pairs: "full" | [[a, b], ...], <session params>}]
    experiment   {legitimate, impostor, trials, t_min, t_max, base_seed}

Everything is resolved and validated at load time.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

from .agents import FormRule, PartyAgent, PolicyKind, SelectionPolicy, make_impostor
from .comparison import TargetSet
from .domain import (
    Aggregator,
    Domain,
    DomainMapping,
    MagnitudeRule,
    OperatorDef,
    add_fact,
    add_operator,
    make_domain,
    make_mapping,
)
from .errors import ConfigError, UnresolvedReference, ZeusError
from .jsonforms import _enum, _int, combiner_from_json, fact_from_json, property_from_json, target_from_json
from .machine import ProtocolMode, SessionConfig, reduce_nparty

BUNDLED = "scenarios"


@dataclass(frozen=True)
class ImpostorSpec:
    agent_id: str
    impersonates: str
    overlap: float
    decoy_offset: int


@dataclass(frozen=True)
class SessionSpec:
    config: SessionConfig
    agent_i: str
    agent_j: str


@dataclass(frozen=True)
class ExperimentSpec:
    legitimate: str | None = None
    impostor: str | None = None
    trials: int = 100
    t_min: int = 0
    t_max: int = 5
    base_seed: int = 0


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    path: str
    digest: str
    domains: dict[str, Domain]
    mappings: dict[str, DomainMapping]
    agents: dict[str, PartyAgent]
    impostors: dict[str, ImpostorSpec]
    sessions: tuple[SessionSpec, ...]
    experiment: ExperimentSpec = field(default_factory=ExperimentSpec)

    def session(self, session_id: str) -> SessionSpec:
        for spec in self.sessions:
            if spec.config.session_id == session_id:
                return spec
        raise UnresolvedReference(f"no session {session_id!r}", file=self.path, field="sessions")

    def with_session(self, spec: SessionSpec) -> "ScenarioConfig":
        """Copy with ``spec`` replacing the session of the same id."""
        sessions = tuple(spec if s.config.session_id == spec.config.session_id else s
                         for s in self.sessions)
        return replace(self, sessions=sessions)


def resolve_scenario_path(name: str | os.PathLike) -> Path:
    """A path on disk, or the name of a bundled scenario such as ``tom_mary``."""
    p = Path(name)
    if p.exists():
        return p
    bundled = resources.files("zeus_auth").joinpath(BUNDLED, f"{p.stem}.json")
    if bundled.is_file():
        return Path(str(bundled))
    return p


def bundled_scenarios() -> list[str]:
    root = resources.files("zeus_auth").joinpath(BUNDLED)
    return sorted(Path(str(e)).stem for e in root.iterdir() if str(e).endswith(".json"))


class _Loader:
    def __init__(self, path: str):
        self.path = path

    def err(self, msg: str, where: str, cls=ConfigError):
        return cls(msg, file=self.path, field=where)

    def get(self, obj, key, where, default=...):
        if not isinstance(obj, dict):
            raise self.err("expected an object", where)
        if key not in obj:
            if default is ...:
                raise self.err("required field missing", f"{where}.{key}" if where else key)
            return default
        return obj[key]

    def items(self, data, key):
        value = data.get(key, [])
        if not isinstance(value, list):
            raise self.err("expected a list", key)
        return value

    def wrap(self, where, fn, *args):
        try:
            return fn(*args)
        except ConfigError:
            raise
        except (ZeusError, KeyError, TypeError, ValueError) as exc:
            detail = f"missing key {exc}" if isinstance(exc, KeyError) else str(exc)
            raise self.err(detail, where) from None


def load_scenario(path) -> ScenarioConfig:
    path = resolve_scenario_path(path)
    spath = str(path)
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read scenario: {exc.strerror}", file=spath) from None
    if not raw.strip():
        raise ConfigError("scenario file is empty", file=spath, line=1)
    try:
        data = json.loads(raw.decode("utf-8"))
    except UnicodeDecodeError as exc:
        raise ConfigError(f"not UTF-8: {exc}", file=spath) from None
    except json.JSONDecodeError as exc:
        raise ConfigError(exc.msg, file=spath, line=exc.lineno) from None
    if not isinstance(data, dict):
        raise ConfigError("top level must be a JSON object", file=spath, line=1)
    ld = _Loader(spath)
    name = data.get("name", Path(path).stem)

    domains: dict[str, Domain] = {}
    for n, d in enumerate(ld.items(data, "domains")):
        where = f"domains[{n}]"
        did = ld.get(d, "id", where)
        if did in domains:
            raise ld.err(f"duplicate domain id {did!r}", f"{where}.id")
        prop = ld.wrap(f"{where}.property", property_from_json, d.get("property"))
        dom = ld.wrap(f"{where}.id", make_domain, did, d.get("name", did), prop)
        for m, op in enumerate(d.get("operators", [])):
            w = f"{where}.operators[{m}]"
            opdef = ld.wrap(w, lambda o: OperatorDef(o["name"], _enum(MagnitudeRule, o["rule"])), op)
            dom = ld.wrap(w, add_operator, dom, opdef)
        for m, f in enumerate(ld.get(d, "facts", where)):
            w = f"{where}.facts[{m}]"
            fact = ld.wrap(w, fact_from_json, f, did)
            dom = ld.wrap(w, add_fact, dom, fact)
        domains[did] = dom

    def domain_ref(did, where):
        if did not in domains:
            raise ld.err(f"unknown domain {did!r}", where, UnresolvedReference)
        return domains[did]

    mappings: dict[str, DomainMapping] = {}
    for n, mp in enumerate(ld.items(data, "mappings")):
        where = f"mappings[{n}]"
        mid = ld.get(mp, "id", where)
        if mid in mappings:
            raise ld.err(f"duplicate mapping id {mid!r}", f"{where}.id")
        src = domain_ref(ld.get(mp, "source", where), f"{where}.source")
        tgt = domain_ref(ld.get(mp, "target", where), f"{where}.target")
        agg = ld.wrap(f"{where}.aggregator", _enum, Aggregator, mp.get("aggregator", "IDENTITY"))
        entries = [(e["sources"], e["target"]) for e in ld.get(mp, "entries", where)]
        mappings[mid] = ld.wrap(where, make_mapping, mid, src, tgt, agg, entries)

    def policy_from(p, where):
        if p is None:
            return SelectionPolicy()
        if isinstance(p, str):
            p = {"kind": p}
        kind = ld.wrap(f"{where}.kind", _enum, PolicyKind, p.get("kind", "RANDOM_SEEDED"))
        rule = ld.wrap(f"{where}.form_rule", _enum, FormRule, p.get("form_rule", "ALTERNATE"))
        return ld.wrap(where, SelectionPolicy, kind, tuple(p.get("script", ())), rule)

    def target_from(t, where):
        return None if t is None else ld.wrap(where, target_from_json, t)

    agents: dict[str, PartyAgent] = {}
    for n, a in enumerate(ld.items(data, "agents")):
        where = f"agents[{n}]"
        aid = ld.get(a, "id", where)
        if aid in agents:
            raise ld.err(f"duplicate agent id {aid!r}", f"{where}.id")
        dom = domain_ref(ld.get(a, "domain", where), f"{where}.domain")
        policy = policy_from(a.get("policy"), f"{where}.policy")
        seed = ld.wrap(f"{where}.seed", _int, a.get("seed", 0), "seed")
        view = target_from(a.get("target_view"), f"{where}.target_view")
        agents[aid] = ld.wrap(where, PartyAgent, aid, dom, policy, seed, view)

    impostors: dict[str, ImpostorSpec] = {}
    for n, im in enumerate(ld.items(data, "impostors")):
        where = f"impostors[{n}]"
        iid = ld.get(im, "id", where)
        if iid in agents:
            raise ld.err(f"duplicate agent id {iid!r}", f"{where}.id")
        ref_id = ld.get(im, "impersonates", where)
        if ref_id not in agents:
            raise ld.err(f"unknown agent {ref_id!r}", f"{where}.impersonates", UnresolvedReference)
        ref = agents[ref_id]
        overlap = ld.get(im, "overlap", where)
        if isinstance(overlap, bool) or not isinstance(overlap, (int, float)):
            raise ld.err("overlap must be a number", f"{where}.overlap")
        offset = ld.wrap(f"{where}.decoy_offset", _int, im.get("decoy_offset", 1), "decoy_offset")
        seed = ld.wrap(f"{where}.seed", _int, im.get("seed", ref.seed), "seed")
        policy = policy_from(im["policy"], f"{where}.policy") if "policy" in im else ref.policy
        view = target_from(im.get("target_view"), f"{where}.target_view") or ref.target_view
        agents[iid] = ld.wrap(where, lambda: make_impostor(
            ref.domain, float(overlap), seed, offset, user_id=iid, policy=policy, target_view=view))
        impostors[iid] = ImpostorSpec(iid, ref_id, float(overlap), offset)

    def session_config(sid, s, ai, aj, where):
        combiner = ld.wrap(f"{where}.combiner", combiner_from_json, s.get("combiner", "DIFFERENCE"))
        if "epsilon" in s and not (isinstance(s.get("combiner"), dict) and "epsilon" in s["combiner"]):
            eps = ld.wrap(f"{where}.epsilon", _int, s["epsilon"], "epsilon")
            combiner = ld.wrap(f"{where}.epsilon", lambda: replace(combiner, epsilon=eps))
        used = ()
        if combiner.mapping_id is not None:
            if combiner.mapping_id not in mappings:
                raise ld.err(f"unknown mapping {combiner.mapping_id!r}", f"{where}.combiner",
                             UnresolvedReference)
            used = (mappings[combiner.mapping_id],)
        t_i = target_from(s.get("target_i"), f"{where}.target_i") or agents[ai].target_view
        t_j = target_from(s.get("target_j"), f"{where}.target_j") or agents[aj].target_view
        cfg = ld.wrap(where, lambda: SessionConfig(
            session_id=sid,
            i_threshold=_int(s.get("i_threshold", 3), "i_threshold"),
            j_threshold=_int(s.get("j_threshold", 3), "j_threshold"),
            r_max=_int(s.get("r_max", 10), "r_max"),
            mode=_enum(ProtocolMode, s.get("mode", "PAPER_LITERAL")),
            combiner=combiner,
            target_i=t_i or TargetSet({0}),
            target_j=t_j or TargetSet({0}),
            mappings=used,
        ))
        ld.wrap(where, cfg.validate)
        return cfg

    def agent_ref(aid, where):
        if aid not in agents:
            raise ld.err(f"unknown agent {aid!r}", where, UnresolvedReference)
        return aid

    sessions: list[SessionSpec] = []
    seen: set[str] = set()

    def add_session(spec: SessionSpec, where: str):
        sid = spec.config.session_id
        if sid in seen:
            raise ld.err(f"duplicate session id {sid!r}", where)
        seen.add(sid)
        sessions.append(spec)

    for n, s in enumerate(ld.items(data, "sessions")):
        where = f"sessions[{n}]"
        sid = ld.get(s, "id", where)
        parties = ld.get(s, "parties", where)
        if not isinstance(parties, list) or len(parties) != 2:
            raise ld.err("a session needs exactly two parties", f"{where}.parties")
        ai = agent_ref(parties[0], f"{where}.parties[0]")
        aj = agent_ref(parties[1], f"{where}.parties[1]")
        if ai == aj:
            raise ld.err("a party cannot talk to itself", f"{where}.parties")
        add_session(SessionSpec(session_config(sid, s, ai, aj, where), ai, aj), where)

    for n, g in enumerate(ld.items(data, "groups")):
        where = f"groups[{n}]"
        gid = ld.get(g, "id", where)
        users = [agent_ref(u, f"{where}.users") for u in ld.get(g, "users", where)]
        pairs = g.get("pairs", "full")
        if not isinstance(pairs, str):
            pairs = [tuple(p) for p in pairs]
        for a, b in ld.wrap(f"{where}.pairs", reduce_nparty, users, pairs):
            sid = f"{gid}.{a}.{b}"
            add_session(SessionSpec(session_config(sid, g, a, b, where), a, b), where)

    exp = data.get("experiment", {})
    if not isinstance(exp, dict):
        raise ld.err("expected an object", "experiment")
    legit = exp.get("legitimate")
    if legit is not None and legit not in seen:
        raise ld.err(f"unknown session {legit!r}", "experiment.legitimate", UnresolvedReference)
    imp = exp.get("impostor")
    if imp is not None and imp not in impostors:
        raise ld.err(f"unknown impostor {imp!r}", "experiment.impostor", UnresolvedReference)
    experiment = ExperimentSpec(
        legitimate=legit,
        impostor=imp,
        trials=ld.wrap("experiment.trials", _int, exp.get("trials", 100), "trials"),
        t_min=ld.wrap("experiment.t_min", _int, exp.get("t_min", 0), "t_min"),
        t_max=ld.wrap("experiment.t_max", _int, exp.get("t_max", 5), "t_max"),
        base_seed=ld.wrap("experiment.base_seed", _int, exp.get("base_seed", 0), "base_seed"),
    )

    return ScenarioConfig(
        name=name,
        path=spath,
        digest=hashlib.sha256(raw).hexdigest(),
        domains=domains,
        mappings=mappings,
        agents=agents,
        impostors=impostors,
        sessions=tuple(sessions),
        experiment=experiment,
    )
